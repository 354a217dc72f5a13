"""Learn structural string patterns from a column and validate new values."""

from .config import ConfigError, LearnConfig, load_config
from .dsl import (
    Align,
    Base,
    ClassAtom,
    Count,
    Delim,
    EnumAtom,
    Literal,
    Pattern,
    Recursive,
    Rep,
    atom_match,
    pattern_match,
    sample_string,
    skeleton_match,
)
from .estimator import LearnResult, PatternValidator, learn_patterns
from .gentree import GeneralizationTree, default_tree, load_tree, parse_tree, pattern_based_distance
from .lifecycle import (
    FeedbackRecord,
    ValidationReport,
    apply_feedback,
    generate_examples,
    incremental_update,
    validate_batch,
)
from .refine import greedy_travel, refine_patterns
from .skeleton import extract_skeleton, learn_skeletons, recursive_split, vertical_split
from .store import PatternStore, load_dataset, load_store, save_store
from .syntax import PatternSyntaxError, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "Align", "Base", "ClassAtom", "ConfigError", "Count", "Delim", "EnumAtom", "FeedbackRecord",
    "GeneralizationTree", "LearnConfig", "LearnResult", "Literal", "Pattern", "PatternStore",
    "PatternSyntaxError", "PatternValidator", "Recursive", "Rep", "ValidationReport",
    "apply_feedback", "atom_match", "default_tree", "extract_skeleton", "generate_examples",
    "greedy_travel", "incremental_update", "learn_patterns", "learn_skeletons", "load_config",
    "load_dataset", "load_store", "load_tree", "parse", "parse_tree", "pattern_based_distance",
    "pattern_match", "recursive_split", "refine_patterns", "sample_string", "save_store",
    "serialize", "skeleton_match", "validate_batch", "vertical_split",
]
