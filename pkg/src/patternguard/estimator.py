"""scikit-learn style front end: fit on a column, predict pass/fail."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_is_fitted

from .config import LearnConfig
from .dsl import matcher_for
from .gentree import GeneralizationTree, default_tree
from .lifecycle import (
    FeedbackRecord,
    apply_feedback,
    generate_examples,
    incremental_update,
    validate_batch,
)
from .refine import EntropyParams, refine_patterns
from .skeleton import extract_skeleton, learn_skeletons
from .syntax import serialize
from .validation import check_nonempty, check_strings


@dataclass
class LearnResult:
    candidates: list  # SkeletonCandidate, ranked
    skeletons: list  # before refinement
    patterns: list  # after refinement


def learn_patterns(values: Sequence[str], config: LearnConfig = LearnConfig(),
                   tree: Optional[GeneralizationTree] = None) -> LearnResult:
    """Skeleton extraction, top-k selection and refinement in one call.

    When the selected skeletons leave training values uncovered and there
    is room in the top-k, a skeleton is learned on just those values.
    """
    tree = tree or default_tree()
    values = check_nonempty(values, "values")
    m = matcher_for(tree)
    cands = learn_skeletons(values, tree, config)
    while len(cands) < config.top_k:
        rest = [v for v in values if not any(m.accepts(c.skeleton, v) for c in cands)]
        if not rest:
            break
        extra = extract_skeleton(rest, None, tree, None, config)
        if not extra:
            break
        cands.append(extra[0])
    skeletons = [c.skeleton for c in cands]
    if config.refine:
        patterns = refine_patterns(skeletons, values, tree, EntropyParams.from_config(config))
    else:
        patterns = list(skeletons)
    return LearnResult(cands, skeletons, patterns)


class PatternValidator(OutlierMixin, BaseEstimator):
    """Learns patterns from one string column and flags values that break them.

    ``predict`` follows the outlier convention: +1 for values accepted by
    any learned pattern, -1 otherwise.
    """

    def __init__(self, depth=3, top_k=3, delimiter_support=0.8, indel_cost=4.0,
                 unalign_cost=4.0, beta=1.0, class_weight=0.5, enum_threshold=5,
                 enum_min_support=2, refine=True, tree=None):
        self.depth = depth
        self.top_k = top_k
        self.delimiter_support = delimiter_support
        self.indel_cost = indel_cost
        self.unalign_cost = unalign_cost
        self.beta = beta
        self.class_weight = class_weight
        self.enum_threshold = enum_threshold
        self.enum_min_support = enum_min_support
        self.refine = refine
        self.tree = tree

    def _config(self) -> LearnConfig:
        return LearnConfig(depth=self.depth, top_k=self.top_k,
                           delimiter_support=self.delimiter_support,
                           indel_cost=self.indel_cost, unalign_cost=self.unalign_cost,
                           beta=self.beta, class_weight=self.class_weight,
                           enum_threshold=self.enum_threshold,
                           enum_min_support=self.enum_min_support, refine=self.refine)

    def _tree(self) -> GeneralizationTree:
        return self.tree or default_tree()

    def fit(self, X, y=None):
        values = check_strings(X)
        result = learn_patterns(values, self._config(), self._tree())
        self.candidates_ = result.candidates
        self.skeletons_ = result.skeletons
        self.patterns_ = result.patterns
        self.training_count_ = len(values)
        self.n_features_in_ = 1
        return self

    @classmethod
    def from_patterns(cls, patterns, skeletons=None, **params):
        """An already-fitted validator around stored patterns."""
        est = cls(**params)
        est.patterns_ = list(patterns)
        est.skeletons_ = list(skeletons) if skeletons is not None else list(patterns)
        est.candidates_ = []
        est.training_count_ = 0
        est.n_features_in_ = 1
        return est

    def score_samples(self, X) -> np.ndarray:
        """1.0 for accepted values, else the share of the value matched."""
        check_is_fitted(self, "patterns_")
        values = check_strings(X)
        rep = validate_batch(self.patterns_, values, self._tree())
        out = np.empty(len(values))
        for i, e in enumerate(rep.entries):
            out[i] = 1.0 if e.passed else (e.fail_offset or 0) / max(len(e.value), 1) * 0.999
        return out

    def decision_function(self, X) -> np.ndarray:
        return self.score_samples(X) - 1.0

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def transform(self, X) -> np.ndarray:
        return self.score_samples(X).reshape(-1, 1)

    def report(self, X):
        check_is_fitted(self, "patterns_")
        return validate_batch(self.patterns_, check_strings(X), self._tree())

    def partial_fit(self, X, y=None):
        """Generalize the fitted patterns to admit each (user-confirmed) value."""
        if not hasattr(self, "patterns_"):
            return self.fit(X)
        self.update_statuses_ = []
        for v in check_strings(X):
            self.patterns_, status = incremental_update(self.patterns_, v, self._tree())
            self.update_statuses_.append(status)
        return self

    def apply_feedback(self, records: Sequence[FeedbackRecord]):
        check_is_fitted(self, "patterns_")
        result = apply_feedback(self.patterns_, records, self._tree())
        self.patterns_ = result.patterns
        self.feedback_statuses_ = result.statuses
        return self

    def generate_examples(self, k: int = 3, seed=0, round_index: int = 0, max_rounds: int = 3):
        check_is_fitted(self, "patterns_")
        out = []
        for before, after in zip(self.skeletons_, self.patterns_):
            out.extend(generate_examples(before, after, self._tree(), k, seed, round_index, max_rounds))
        return out

    def pattern_strings(self) -> list[str]:
        check_is_fitted(self, "patterns_")
        return [serialize(k) for k in self.patterns_]
