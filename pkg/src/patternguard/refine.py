"""Character-level refinement of skeleton patterns.

Each class atom is pushed down the generalization tree while the narrower
class still holds every substring it matched in training and the
entropy-weighted cost drops.  Low-cardinality slots become enums.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .dsl import (
    Base,
    ClassAtom,
    EnumAtom,
    Matcher,
    Pattern,
    Rep,
    Skeleton,
    iter_bases,
    matcher_for,
    replace_node,
)
from .gentree import GeneralizationTree, default_tree

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EntropyParams:
    beta: float = 1.0
    class_weight: float = 0.5
    enum_threshold: int = 5
    enum_min_support: int = 2

    def __post_init__(self):
        if min(self.beta, self.class_weight, self.enum_threshold, self.enum_min_support) < 0:
            raise ValueError("entropy parameters must be >= 0")

    @classmethod
    def from_config(cls, config) -> "EntropyParams":
        return cls(config.beta, config.class_weight, config.enum_threshold, config.enum_min_support)


@dataclass(frozen=True)
class SlotStats:
    atom_index: int
    matched: tuple
    mean_len: float
    distinct: int

    @classmethod
    def of(cls, atom_index: int, matched: Sequence[str]) -> "SlotStats":
        matched = tuple(matched)
        mean = sum(map(len, matched)) / len(matched) if matched else 0.0
        return cls(atom_index, matched, mean, len(set(matched)))


def token_entropy(stats: SlotStats, params: EntropyParams = EntropyParams()) -> float:
    if not stats.matched:
        raise ValueError("token_entropy needs at least one matched substring")
    n = len(stats.matched)
    h = 0.0
    for c in Counter(stats.matched).values():
        p = c / n
        h -= p * math.log2(p)
    return h + params.beta


def charset_size(atom, tree: GeneralizationTree) -> int:
    if isinstance(atom, ClassAtom):
        return len(tree.charset(tree.by_label(atom.label)))
    return 1


def atom_cost(atom, stats: SlotStats, tree: Optional[GeneralizationTree] = None,
              params: EntropyParams = EntropyParams()) -> float:
    tree = tree or default_tree()
    general = params.class_weight * math.log2(charset_size(atom, tree))
    return stats.mean_len * (token_entropy(stats, params) + general)


def pattern_cost(p: Pattern, segments: Sequence[Sequence[str]],
                 tree: Optional[GeneralizationTree] = None,
                 params: EntropyParams = EntropyParams()) -> float:
    return sum(atom_cost(a, SlotStats.of(i, segs), tree, params)
               for i, (a, segs) in enumerate(zip(p.atoms, segments)) if segs)


def _descend(atom: ClassAtom, stats: SlotStats, tree, params) -> ClassAtom:
    """Walk down to the cheapest class that still holds every character."""
    chars = set("".join(stats.matched))
    nid = tree.by_label(atom.label)
    cost = atom_cost(atom, stats, tree, params)
    while True:
        best = None
        for kid in tree.children(nid):
            if not chars <= tree.charset(kid):
                continue
            cand = ClassAtom(tree.label(kid), atom.rep)
            c = atom_cost(cand, stats, tree, params)
            if c < cost and (best is None or c < best[0]):
                best = (c, kid, cand)
        if best is None:
            return atom
        cost, nid, atom = best


def _spans_ok(p: Pattern, spans: Sequence[str], matcher: Matcher) -> bool:
    return all(matcher.pattern_match(p, s).accepted for s in spans)


def greedy_travel(pattern: Pattern, segments: Sequence[Sequence[str]],
                  tree: Optional[GeneralizationTree] = None,
                  params: EntropyParams = EntropyParams(),
                  spans: Optional[Sequence[str]] = None) -> Pattern:
    """Specialize each atom of ``pattern`` against its training substrings.

    ``segments[i]`` holds what atom ``i`` consumed in each training span and
    ``spans`` the full spans; every change is checked against the spans and
    dropped if any of them stops matching.
    """
    tree = tree or default_tree()
    matcher = matcher_for(tree)
    if spans is None:
        # reassemble spans from per-atom pieces (all slots have one piece per span)
        spans = ["".join(parts) for parts in zip(*segments)] if segments else []
    atoms = list(pattern.atoms)
    for i, atom in enumerate(atoms):
        segs = segments[i] if i < len(segments) else ()
        if not segs or not isinstance(atom, ClassAtom):
            continue
        stats = SlotStats.of(i, segs)
        options = []
        new = _descend(atom, stats, tree, params)
        lengths = {len(s) for s in segs}
        if len(lengths) == 1 and not new.rep.is_fixed:
            new = ClassAtom(new.label, Rep.exactly(lengths.pop()))
        counts = Counter(segs)
        if (len(counts) <= params.enum_threshold
                and min(counts.values()) >= params.enum_min_support):
            enum = EnumAtom(tuple(counts))
            if atom_cost(enum, stats, tree, params) < atom_cost(new, stats, tree, params):
                options.append(enum)
        options.append(new)
        for opt in options:
            if opt == atom:
                break
            trial = atoms[:i] + [opt] + atoms[i + 1:]
            if _spans_ok(Pattern(tuple(trial)), spans, matcher):
                atoms[i] = opt
                break
    return Pattern(tuple(atoms))


def slot_segments(k: Skeleton, values: Sequence[str], matcher: Matcher):
    """Per Base path: (spans, per-atom substrings) over accepted values."""
    bases = dict(iter_bases(k))
    out = {path: ([], [[] for _ in b.pattern.atoms]) for path, b in bases.items()}
    for v in values:
        tr = matcher.trace(k, v)
        if tr is None:
            continue
        for path, a, b in tr.bases:
            span = v[a:b]
            pieces = matcher.pieces(bases[path].pattern, span)
            spans, slots = out[path]
            spans.append(span)
            for slot, piece in zip(slots, pieces):
                slot.append(piece)
    return out


def refine_skeleton(k: Skeleton, values: Sequence[str],
                    tree: Optional[GeneralizationTree] = None,
                    params: EntropyParams = EntropyParams()) -> Optional[Skeleton]:
    tree = tree or default_tree()
    matcher = matcher_for(tree)
    segs = slot_segments(k, values, matcher)
    if not any(spans for spans, _ in segs.values()):
        return None
    for path, b in list(iter_bases(k)):
        spans, slots = segs[path]
        if not spans:
            continue
        p = greedy_travel(b.pattern, slots, tree, params, spans)
        if p != b.pattern:
            k = replace_node(k, path, Base(p))
    return k


def refine_patterns(skeletons: Sequence[Skeleton], values: Sequence[str],
                    tree: Optional[GeneralizationTree] = None,
                    params: EntropyParams = EntropyParams()) -> list[Skeleton]:
    out = []
    for k in skeletons:
        r = refine_skeleton(k, values, tree, params)
        if r is None:
            log.warning("dropping a skeleton that accepts no training value")
            continue
        out.append(r)
    return out
