"""Structure learning: which delimiters split a value set, and how.

Two ways of splitting are scored with the class-aware segment distance.  A
recursive split cuts every value on one separator and asks that all segments
look alike.  A vertical split lines values up on a sequence of delimiters and
asks that each column look alike.  The best split at each level is recursed
into and the resulting skeletons are ranked by coverage.
"""

from __future__ import annotations

import itertools
import re
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .config import LearnConfig
from .dsl import (
    ANY_COUNT,
    Align,
    Base,
    ClassAtom,
    Count,
    Delim,
    Literal,
    Matcher,
    Pattern,
    Recursive,
    Skeleton,
    iter_bases,
    matcher_for,
    replace_node,
)
from .gentree import INF, DistanceParams, GeneralizationTree, default_tree, segment_distance
from .syntax import serialize


def is_symbol(c: str) -> bool:
    return not c.isalnum()


@dataclass(frozen=True)
class Segmentation:
    """A value cut on one delimiter: ``Seg Deli Seg ... Seg``."""

    source: str
    pieces: tuple
    delimiter: str

    @property
    def segments(self) -> tuple:
        return self.pieces[::2]

    @classmethod
    def of(cls, value: str, delimiter: str) -> "Segmentation":
        segs = value.split(delimiter)
        pieces = []
        for i, s in enumerate(segs):
            if i:
                pieces.append(delimiter)
            pieces.append(s)
        return cls(value, tuple(pieces), delimiter)

    @property
    def well_formed(self) -> bool:
        return all(self.segments)


@dataclass(frozen=True)
class VerticalSegmentation:
    """A value lined up on a delimiter template.

    ``columns`` has one entry per aligned field; the last column runs to the
    end of the value and ``tail`` is the part of it after the next template
    token (empty when the value has no extra delimiter).
    """

    source: str
    template: tuple
    columns: tuple
    tail: str = ""


@dataclass
class SkeletonCandidate:
    skeleton: Skeleton
    distance: float = 0.0
    coverage: float = 0.0
    symbol_score: float = 0.0
    # distance per compared piece pair; comparable across split kinds
    mean_distance: float = 0.0
    # mean bits per accepted value when each character is coded by its atom
    encoding: float = 0.0
    child_distance: float = 0.0
    kind: str = "base"
    parts: list = field(default_factory=list, repr=False)


# -- delimiters ----------------------------------------------------------------


def _tokens(value: str) -> Counter:
    """Symbol characters and maximal multi-character symbol runs, with counts."""
    out: Counter = Counter()
    i, n = 0, len(value)
    while i < n:
        if is_symbol(value[i]):
            j = i
            while j < n and is_symbol(value[j]):
                out[value[j]] += 1
                j += 1
            if j - i > 1:
                out[value[i:j]] += 1
            i = j
        else:
            i += 1
    return out


def enumerate_splits(values: Sequence[str], config: LearnConfig = LearnConfig()) -> list[str]:
    """Candidate delimiters, most frequently supported first."""
    if not values:
        raise ValueError("enumerate_splits needs at least one value")
    support: Counter = Counter()
    occurrences: Counter = Counter()
    for v in values:
        toks = _tokens(v)
        support.update(toks.keys())
        occurrences.update(toks)
    need = config.delimiter_support * len(values)
    keep = [t for t, s in support.items() if s >= need - 1e-9]
    keep.sort(key=lambda t: (-support[t], -occurrences[t], t))
    return keep


# -- recursive splitting -------------------------------------------------------


def separator_candidates(values: Sequence[str], config: LearnConfig = LearnConfig()) -> list[str]:
    """Low-support tokens that may still separate a list.

    A value without the separator is a one-item list, so recursion does not
    need the token in most values; these are tried besides the regular pool.
    """
    regular = set(enumerate_splits(values, config))
    support: Counter = Counter()
    for v in values:
        support.update(_tokens(v).keys())
    need = config.separator_support * len(values)
    keep = [t for t, n in support.items() if n >= need - 1e-9 and n >= 2 and t not in regular]
    keep.sort(key=lambda t: (-support[t], t))
    return keep


def _pair_sum(strings: Sequence[str], tree, params) -> float:
    """Sum of segment distances over all unordered pairs, grouped by value."""
    counts = Counter(strings)
    keys = list(counts)
    total = 0.0
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            total += counts[a] * counts[b] * segment_distance(a, b, tree, params)
    return total


def recursive_distance(seg: Segmentation, tree: Optional[GeneralizationTree] = None,
                       params: DistanceParams = DistanceParams()) -> float:
    """Summed distance over all segment pairs; INF for a single segment."""
    tree = tree or default_tree()
    segs = seg.segments
    if len(segs) < 2:
        return INF
    return _pair_sum(segs, tree, params)


def _recursive_scores(values: Sequence[str], delim: str, tree, params):
    """(distance, pair count) of the best pivot for ``delim``, or None."""
    r = []
    pairs = []
    has = []
    for v in values:
        seg = Segmentation.of(v, delim)
        n = len(seg.segments)
        if n < 2:
            r.append(0.0)
            pairs.append(0)
            has.append(False)
            continue
        if not seg.well_formed:
            return None
        r.append(_pair_sum(seg.segments, tree, params))
        pairs.append(n * (n - 1) // 2)
        has.append(True)
    if not any(has):
        return None
    m = len(values)
    total_r, total_p = sum(r), sum(pairs)
    best = None
    for i in range(m):
        if not has[i]:
            continue
        # pivot i compared with every other value j: R_i + R_j
        s = (m - 1) * r[i] + (total_r - r[i])
        p = (m - 1) * pairs[i] + (total_p - pairs[i])
        if best is None or s < best[0]:
            best = (s, p)
    return best


def _learn_count(counts: Sequence[int]) -> Count:
    uniq = set(counts)
    return Count.exactly(counts[0]) if len(uniq) == 1 else ANY_COUNT


def recursive_split(values: Sequence[str], tree: Optional[GeneralizationTree] = None,
                    params: DistanceParams = DistanceParams(),
                    config: LearnConfig = LearnConfig(),
                    delims: Optional[Sequence[str]] = None) -> list[SkeletonCandidate]:
    """Recursive candidates, lowest summed pivot distance first.

    ``delims`` defaults to :func:`enumerate_splits`.
    """
    tree = tree or default_tree()
    out = []
    for delim in (enumerate_splits(values, config) if delims is None else delims):
        scored = _recursive_scores(values, delim, tree, params)
        if scored is None:
            continue
        s, p = scored
        segments = []
        counts = []
        for v in values:
            segs = v.split(delim)
            segments.extend(s_ for s_ in segs if s_)
            counts.append(len(segs))
        body = Base(build_base(segments, tree, config.base_cut))
        k = Recursive(body, delim, _learn_count(counts))
        out.append(SkeletonCandidate(k, s, mean_distance=s / p if p else 0.0,
                                     kind="recursive", parts=[segments]))
    out.sort(key=lambda c: (c.distance, c.mean_distance, serialize(c.skeleton)))
    return out


# -- vertical splitting --------------------------------------------------------


def vertical_distance(a: Sequence[str], b: Sequence[str], aligned: bool = True,
                      tree: Optional[GeneralizationTree] = None,
                      params: DistanceParams = DistanceParams()) -> float:
    """Distance between two piece lists of equal length.

    With ``aligned=False`` the last element of each list is its unaligned
    tail, charged ``unalign_cost`` per character.
    """
    tree = tree or default_tree()
    if len(a) != len(b):
        raise ValueError("vertical_distance needs equal piece counts")
    if not aligned:
        *a, ta = a
        *b, tb = b
    total = sum(segment_distance(x, y, tree, params) for x, y in zip(a, b))
    if not aligned:
        total += params.unalign_cost * (len(ta) + len(tb))
    return total


def _scan(value: str, toks: Sequence[str]) -> list[str]:
    """Left-to-right tokenization on ``toks`` (longest token wins)."""
    out = []
    i, n = 0, len(value)
    while i < n:
        for t in toks:
            if value.startswith(t, i):
                out.append(t)
                i += len(t)
                break
        else:
            i += 1
    return out


def vertical_segment(value: str, template: Sequence[str], toks: Sequence[str] = ()) -> Optional[VerticalSegmentation]:
    """Columns the matcher would produce for an Align on ``template``."""
    cols = []
    pos = 0
    for d in template:
        j = value.find(d, pos)
        if j < 0:
            return None
        cols.append(value[pos:j])
        pos = j + len(d)
    rest = value[pos:]
    cols.append(rest)
    tail = ""
    cut = [rest.find(t) for t in toks if t in rest]
    if cut:
        tail = rest[min(cut):]
    return VerticalSegmentation(value, tuple(template), tuple(cols), tail)


def _common_prefix(seqs: Sequence[list]) -> list:
    out = []
    for items in zip(*seqs):
        if all(x == items[0] for x in items):
            out.append(items[0])
        else:
            break
    return out


def _column_cost(segs: Sequence[VerticalSegmentation], tree, params) -> float:
    """Pair sum over every column but the last; the same for a whole template."""
    return sum(_pair_sum([s.columns[k] for s in segs], tree, params)
               for k in range(len(segs[0].columns) - 1))


def _vertical_cost(segs: Sequence[VerticalSegmentation], tree, params, head: Optional[float] = None):
    """(distance, compared piece pairs) over all value pairs.

    ``head`` is a precomputed :func:`_column_cost` for the same template.
    """
    ncols = len(segs[0].columns)
    total = _column_cost(segs, tree, params) if head is None else head
    # the aligned part of the last column excludes the tail
    total += _pair_sum([s.columns[-1][:len(s.columns[-1]) - len(s.tail)] for s in segs], tree, params)
    m = len(segs)
    tails = sum(len(s.tail) for s in segs)
    # every value's tail is charged once per partner
    total += params.unalign_cost * tails * (m - 1)
    return total, (m * (m - 1) // 2) * ncols


def _build_align(template, columns, tree, config):
    kids = []
    parts = []
    for k, col in enumerate(columns):
        nonempty = [c for c in col if c]
        if nonempty:
            kids.append(Base(build_base(nonempty, tree, config.base_cut)))
            parts.append(nonempty)
        if k < len(template):
            kids.append(Delim(template[k]))
    # merge delimiters left adjacent by all-empty columns
    merged = []
    for c in kids:
        if merged and isinstance(c, Delim) and isinstance(merged[-1], Delim):
            merged[-1] = Delim(merged[-1].text + c.text)
        else:
            merged.append(c)
    if len(merged) < 2:
        return None, parts
    return Align(tuple(merged)), parts


def vertical_split(values: Sequence[str], tree: Optional[GeneralizationTree] = None,
                   params: DistanceParams = DistanceParams(),
                   config: LearnConfig = LearnConfig()) -> list[SkeletonCandidate]:
    tree = tree or default_tree()
    toks = enumerate_splits(values, config)[:config.max_vertical_tokens]
    sample = structure_sample(values, config.vertical_sample)
    best: dict = {}
    heads: dict = {}
    for r in range(1, len(toks) + 1):
        for subset in itertools.combinations(toks, r):
            if any(a != b and a in b for a in subset for b in subset):
                continue
            order = sorted(subset, key=lambda t: (-len(t), t))
            seqs = [_scan(v, order) for v in values]
            template = tuple(_common_prefix(seqs))
            if not template:
                continue
            # subsets sharing a template differ only in where the tail starts
            sample_segs = [vertical_segment(v, template, order) for v in sample]
            if any(s is None for s in sample_segs):
                continue
            if template not in heads:
                heads[template] = _column_cost(sample_segs, tree, params)
            dist, pairs = _vertical_cost(sample_segs, tree, params, heads[template])
            if template in best and best[template][0] <= dist:
                continue
            best[template] = (dist, pairs, order)
    out = []
    for template, (dist, pairs, order) in best.items():
        segs = [vertical_segment(v, template, order) for v in values]
        if any(s is None for s in segs):
            continue
        columns = list(zip(*(s.columns for s in segs)))
        k, parts = _build_align(template, columns, tree, config)
        if k is None:
            continue
        out.append(SkeletonCandidate(k, dist, mean_distance=dist / pairs if pairs else 0.0,
                                     kind="vertical", parts=parts))
    out.sort(key=lambda c: (c.distance, c.mean_distance, serialize(c.skeleton)))
    return out


# -- base patterns -------------------------------------------------------------


_COLLAPSE = re.compile(r"(.)\1+", re.S)
_CODE0 = 0x100
_SEP = "\uffff"


def _cut_table(tree: GeneralizationTree, cut: int) -> dict:
    """Character -> code of its class at ``cut`` depth (never a leaf), for str.translate."""
    tables = tree.__dict__.setdefault("_cut_tables", {})
    table = tables.get(cut)
    if table is None:
        table = {}
        for c in tree.alphabet:
            leaf = tree.map_char(c)
            table[ord(c)] = chr(_CODE0 + tree.ancestor_at(leaf, min(cut, tree.depth(leaf) - 1)))
        tables[cut] = table
    return table


def _runs(value: str, table: dict):
    """Class-run signature of ``value``; None if a character is outside the tree."""
    coded = value.translate(table)
    if coded and min(coded) < chr(_CODE0):
        return None
    return _COLLAPSE.sub(r"\1", coded)


def build_base(values: Sequence[str], tree: Optional[GeneralizationTree] = None,
               base_cut: int = 2) -> Pattern:
    """Class-run pattern shared by all ``values``.

    Picks the finest tree level where every value has the same sequence of
    class runs, then widens each run to at most ``base_cut`` depth while
    keeping neighbouring runs disjoint.  Refinement narrows it again.
    """
    tree = tree or default_tree()
    values = list(dict.fromkeys(v for v in values if v))
    root = tree.label(tree.root)
    if not values:
        return Pattern((ClassAtom(root),))
    batch = _SEP not in tree.alphabet and not any(_SEP in v for v in values)
    for cut in range(tree.height - 1, -1, -1):
        table = _cut_table(tree, cut)
        if batch:
            # one translate over all values; the separator is never a class code
            sig = _runs(_SEP.join(values), table)
            sigs = sig.split(_SEP) if sig is not None else [None]
        else:
            sigs = [_runs(v, table) for v in values]
        if sigs[0] is not None and len(set(sigs)) == 1:
            runs = sigs[0]
            break
    else:
        return Pattern((ClassAtom(root),))
    atoms = []
    runs = [ord(x) - _CODE0 for x in runs]
    for i, c in enumerate(runs):
        nbrs = [runs[j] for j in (i - 1, i + 1) if 0 <= j < len(runs)]
        path = tree.root_path(c)
        start = min(base_cut, len(path) - 1)
        pick = c
        for a in path[start:]:
            if not any(tree.is_ancestor(a, n) for n in nbrs):
                pick = a
                break
        atoms.append(ClassAtom(tree.label(pick)))
    return Pattern(tuple(atoms))


def is_base_type(values: Sequence[str], tree: Optional[GeneralizationTree] = None) -> bool:
    """True when every character falls under one narrow class."""
    tree = tree or default_tree()
    nca = tree.class_of_chars(itertools.chain.from_iterable(values))
    if nca is None:
        return False
    return tree.depth(nca) >= 2 or all(tree.is_leaf(c) for c in tree.children(nca))


# -- scoring -------------------------------------------------------------------


def _symbols(text: str) -> int:
    return sum(1 for c in text if is_symbol(c))


def _profile(k: Skeleton, values, matcher: Matcher):
    """(accepted weight, symbol characters captured, total encoding bits).

    ``values`` is a sequence of strings or of ``(string, weight)`` pairs.
    """
    bases = {path: b for path, b in iter_bases(k)}
    accepted = 0
    used = 0
    bits = 0.0
    for item in values:
        v, w = item if isinstance(item, tuple) else (item, 1)
        tr = matcher.trace(k, v)
        if tr is None:
            continue
        accepted += w
        u = 0
        b_ = 0.0
        for _, text in tr.delimiters:
            u += _symbols(text)
        for path, a, b in tr.bases:
            pat = bases[path].pattern
            for atom, piece in zip(pat.atoms, matcher.pieces(pat, v[a:b]) or ()):
                if isinstance(atom, Literal):
                    u += _symbols(piece)
                elif isinstance(atom, ClassAtom):
                    b_ += len(piece) * math.log2(len(matcher.charset(atom.label)))
                else:
                    b_ += math.log2(len(atom.members))
        used += w * u
        bits += w * b_
    return accepted, used, bits


def symbol_score(k: Skeleton, values: Sequence[str], matcher: Optional[Matcher] = None) -> float:
    """Share of symbol characters consumed by delimiters or literals."""
    total = sum(_symbols(v) for v in values)
    if total == 0:
        return 0.0
    _, used, _ = _profile(k, values, matcher or matcher_for())
    return min(1.0, used / total)


def _rank_key(c: SkeletonCandidate):
    return (-c.coverage, -c.symbol_score, c.encoding, c.mean_distance, c.child_distance,
            serialize(c.skeleton))


def _weighted(values: Sequence[str], limit: Optional[int]) -> list[tuple[str, int]]:
    counts = Counter(values)
    keys = list(counts)
    if limit is not None and len(keys) > limit:
        keys = structure_sample(keys, limit)
    return [(v, counts[v]) for v in keys]


def score_skeletons(cands: Sequence[SkeletonCandidate], values: Sequence[str], k: int,
                    tree: Optional[GeneralizationTree] = None,
                    limit: Optional[int] = None) -> list[SkeletonCandidate]:
    """Top ``k`` candidates by coverage, symbol score, then distance.

    With ``limit``, scores are estimated on at most that many distinct values.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    m = matcher_for(tree)
    items = _weighted(values, limit)
    n = sum(w for _, w in items)
    total = sum(_symbols(v) * w for v, w in items)
    scored = {}
    for c in cands:
        key = serialize(c.skeleton)
        if key in scored and scored[key].mean_distance <= c.mean_distance:
            continue
        acc, used, bits = _profile(c.skeleton, items, m)
        if acc == 0:
            continue
        scored[key] = replace(c, coverage=acc / n,
                              symbol_score=min(1.0, used / total) if total else 0.0,
                              encoding=round(bits / acc, 6))
    return sorted(scored.values(), key=_rank_key)[:k]


def select_complementary(cands: Sequence[SkeletonCandidate], values: Sequence[str],
                         tree: Optional[GeneralizationTree] = None) -> list[SkeletonCandidate]:
    """Keep the top candidate plus later ones that cover values it misses.

    A value passes if any kept skeleton accepts it, so loose alternatives
    that add no coverage only widen what is accepted.
    """
    m = matcher_for(tree)
    kept = []
    covered = set()
    for c in cands:
        acc = {i for i, v in enumerate(values) if m.accepts(c.skeleton, v)}
        if not kept or acc - covered:
            kept.append(c)
            covered |= acc
        if len(covered) == len(values):
            break
    return kept


# -- extraction ----------------------------------------------------------------


def structure_sample(values: Sequence[str], n: int) -> list[str]:
    """Distinct values, evenly thinned to at most ``n`` (order kept)."""
    uniq = list(dict.fromkeys(values))
    if len(uniq) <= n:
        return uniq
    step = len(uniq) / n
    return [uniq[int(i * step)] for i in range(n)]


def _base_candidate(values, tree, config) -> SkeletonCandidate:
    return SkeletonCandidate(Base(build_base(values, tree, config.base_cut)), 0.0, kind="base")


def _combine(split: SkeletonCandidate, child_lists: list, limit: int) -> list[SkeletonCandidate]:
    """Rank-1 children everywhere, plus single swaps to a rank-2 child."""
    k = split.skeleton
    slots = list(iter_bases(k))
    choices = [[0] * len(slots)]
    for i, lst in enumerate(child_lists):
        for alt in range(1, min(len(lst), 3)):
            pick = [0] * len(slots)
            pick[i] = alt
            choices.append(pick)
    out = []
    for pick in choices[:limit]:
        sk = k
        extra = 0.0
        for (path, _), lst, j in zip(slots, child_lists, pick):
            if not lst:
                continue
            sk = replace_node(sk, path, lst[j].skeleton)
            extra += lst[j].mean_distance + lst[j].child_distance
        out.append(SkeletonCandidate(sk, split.distance, mean_distance=split.mean_distance,
                                     child_distance=extra, kind=split.kind))
    return out


def extract_skeleton(values: Sequence[str], depth: Optional[int] = None,
                     tree: Optional[GeneralizationTree] = None,
                     params: Optional[DistanceParams] = None,
                     config: LearnConfig = LearnConfig()) -> list[SkeletonCandidate]:
    """Ranked skeleton candidates for ``values`` (best first)."""
    tree = tree or default_tree()
    params = params or config.distance
    depth = config.depth if depth is None else depth
    if depth < 0:
        raise ValueError("depth must be >= 0")
    values = [v for v in values if v]
    if not values:
        return []
    base = _base_candidate(values, tree, config)
    if depth == 0 or is_base_type(values, tree):
        return score_skeletons([base], values, 1, tree, config.score_sample) or [base]
    sample = structure_sample(values, config.sample_size)
    if not enumerate_splits(sample, config) and not separator_candidates(sample, config):
        return score_skeletons([base], values, 1, tree, config.score_sample) or [base]

    cands = [base]
    splits = (recursive_split(sample, tree, params, config)[:1]
              + recursive_split(sample, tree, params, config,
                                separator_candidates(sample, config))[:1]
              + vertical_split(sample, tree, params, config)[:1])
    for best in splits:
        # rebuild on all values so the children see every part
        full = _rebuild(best, values, tree, config)
        if full is None:
            continue
        child_lists = [extract_skeleton(p, depth - 1, tree, params, config) for p in full.parts]
        cands.extend(_combine(full, child_lists, config.max_candidates))
    return score_skeletons(cands, values, config.max_candidates, tree, config.score_sample)


def _rebuild(c: SkeletonCandidate, values, tree, config) -> Optional[SkeletonCandidate]:
    k = c.skeleton
    if isinstance(k, Recursive):
        segments, counts = [], []
        for v in values:
            segs = v.split(k.sep)
            segments.extend(s for s in segs if s)
            counts.append(len(segs))
        body = Base(build_base(segments, tree, config.base_cut))
        return replace(c, skeleton=Recursive(body, k.sep, _learn_count(counts)), parts=[segments])
    template = tuple(ch.text for ch in k.children if isinstance(ch, Delim))
    segs = [vertical_segment(v, template) for v in values]
    segs = [s for s in segs if s is not None]
    if not segs:
        return None
    columns = list(zip(*(s.columns for s in segs)))
    k2, parts = _build_align(template, columns, tree, config)
    if k2 is None:
        return None
    return replace(c, skeleton=k2, parts=parts)


def learn_skeletons(values: Sequence[str], tree: Optional[GeneralizationTree] = None,
                    config: LearnConfig = LearnConfig()) -> list[SkeletonCandidate]:
    """Extract, rank, and keep the top-k complementary candidates."""
    ranked = extract_skeleton(values, None, tree, None, config)
    return select_complementary(ranked[:config.top_k], [v for v in values if v], tree)
