"""Independent reference implementations used by the tests.

None of these import the package's distance or splitting code.
"""

from __future__ import annotations

import itertools
import re
import string
from collections import deque
from functools import lru_cache

# the default class hierarchy, written out by hand
_PARENT = {
    "ALNUM": "ANY", "PUNCT": "ANY", "SPACE": "ANY",
    "ALPHA": "ALNUM", "DIGIT": "ALNUM",
    "UPPER": "ALPHA", "LOWER": "ALPHA",
}
_LEAF_PARENT = {}
for c in string.ascii_uppercase:
    _LEAF_PARENT[c] = "UPPER"
for c in string.ascii_lowercase:
    _LEAF_PARENT[c] = "LOWER"
for c in string.digits:
    _LEAF_PARENT[c] = "DIGIT"
for c in string.punctuation:
    _LEAF_PARENT[c] = "PUNCT"
_LEAF_PARENT[" "] = "SPACE"


def _graph():
    adj: dict = {}
    for child, parent in list(_PARENT.items()) + [(("leaf", c), p) for c, p in _LEAF_PARENT.items()]:
        adj.setdefault(child, []).append(parent)
        adj.setdefault(parent, []).append(child)
    return adj


_ADJ = _graph()


@lru_cache(maxsize=None)
def bfs_distance(x: str, y: str) -> int:
    """Edge count between two leaves; unit edge costs make this the NCA distance."""
    start, goal = ("leaf", x), ("leaf", y)
    seen = {start: 0}
    q = deque([start])
    while q:
        node = q.popleft()
        if node == goal:
            return seen[node]
        for nb in _ADJ[node]:
            if nb not in seen:
                seen[nb] = seen[node] + 1
                q.append(nb)
    raise KeyError((x, y))


def root_path(label) -> list:
    out = [label]
    while out[-1] in _PARENT or (isinstance(out[-1], tuple) and out[-1][1] in _LEAF_PARENT):
        cur = out[-1]
        out.append(_LEAF_PARENT[cur[1]] if isinstance(cur, tuple) else _PARENT[cur])
    return out


def edit_distance(a: str, b: str, indel: float = 4.0) -> float:
    """Top-down minimum over edit scripts (memoized on suffix positions)."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> float:
        if i == len(a):
            return (len(b) - j) * indel
        if j == len(b):
            return (len(a) - i) * indel
        sub = 0 if a[i] == b[j] else bfs_distance(a[i], b[j])
        return min(sub + go(i + 1, j + 1), indel + go(i + 1, j), indel + go(i, j + 1))

    return go(0, 0)


def all_scripts_distance(a: str, b: str, indel: float = 4.0) -> float:
    """Enumerates every alignment explicitly; only for very short strings."""
    best = float("inf")

    def walk(i, j, cost):
        nonlocal best
        if cost >= best:
            return
        if i == len(a) and j == len(b):
            best = cost
            return
        if i < len(a) and j < len(b):
            walk(i + 1, j + 1, cost + (0 if a[i] == b[j] else bfs_distance(a[i], b[j])))
        if i < len(a):
            walk(i + 1, j, cost + indel)
        if j < len(b):
            walk(i, j + 1, cost + indel)

    walk(0, 0, 0.0)
    return best


# -- split search ----------------------------------------------------------------

_RUN = re.compile(r"[^A-Za-z0-9]+")


def value_tokens(v: str) -> set:
    toks = set()
    for m in _RUN.finditer(v):
        toks.update(m.group())
        if len(m.group()) > 1:
            toks.add(m.group())
    return toks


def candidate_tokens(values, support: float = 0.8) -> list:
    counts: dict = {}
    for v in values:
        for t in value_tokens(v):
            counts[t] = counts.get(t, 0) + 1
    return [t for t, n in counts.items() if n >= support * len(values) - 1e-9]


def _pairs(items, indel):
    return sum(edit_distance(x, y, indel) for x, y in itertools.combinations(items, 2))


def recursive_objective(values, delim: str, indel: float = 4.0):
    """Best pivot total for ``delim``: min_i sum_{j != i} (R_i + R_j); None if unusable."""
    r, has = [], []
    for v in values:
        segs = v.split(delim)
        if len(segs) == 1:
            r.append(0.0)
            has.append(False)
            continue
        if any(s == "" for s in segs):
            return None
        r.append(_pairs(segs, indel))
        has.append(True)
    if not any(has):
        return None
    best = None
    for i in range(len(values)):
        if not has[i]:
            continue
        total = sum(r[i] + r[j] for j in range(len(values)) if j != i)
        best = total if best is None else min(best, total)
    return best


def recursive_minimum(values, support=0.8, indel=4.0):
    scores = {d: recursive_objective(values, d, indel) for d in candidate_tokens(values, support)}
    scores = {d: s for d, s in scores.items() if s is not None}
    return (min(scores.values()), scores) if scores else (None, scores)


def _scan(v, toks):
    order = sorted(toks, key=lambda t: (-len(t), t))
    out, i = [], 0
    while i < len(v):
        for t in order:
            if v.startswith(t, i):
                out.append(t)
                i += len(t)
                break
        else:
            i += 1
    return out


def _columns(v, template, toks):
    cols, pos = [], 0
    for d in template:
        j = v.find(d, pos)
        if j < 0:
            return None
        cols.append(v[pos:j])
        pos = j + len(d)
    rest = v[pos:]
    hits = [rest.find(t) for t in toks if t in rest]
    tail = rest[min(hits):] if hits else ""
    cols.append(rest[:len(rest) - len(tail)])
    return cols, tail


def vertical_objective(values, template, toks, indel=4.0, unalign=4.0):
    split = [_columns(v, template, toks) for v in values]
    if any(s is None for s in split):
        return None
    if all(not c for s in split for c in s[0]) and all(not s[1] for s in split):
        return None
    total = 0.0
    for (ca, ta), (cb, tb) in itertools.combinations(split, 2):
        total += sum(edit_distance(x, y, indel) for x, y in zip(ca, cb))
        total += unalign * (len(ta) + len(tb))
    return total


def vertical_minimum(values, support=0.8, indel=4.0, unalign=4.0):
    """Exhaustive minimum over every token subset's template."""
    values = list(dict.fromkeys(values))
    toks = candidate_tokens(values, support)
    scores = {}
    for r in range(1, len(toks) + 1):
        for subset in itertools.combinations(sorted(toks), r):
            if any(a != b and a in b for a in subset for b in subset):
                continue
            seqs = [_scan(v, subset) for v in values]
            template = []
            for items in zip(*seqs):
                if len(set(items)) != 1:
                    break
                template.append(items[0])
            if not template:
                continue
            s = vertical_objective(values, tuple(template), subset, indel, unalign)
            if s is not None:
                scores[tuple(template)] = min(s, scores.get(tuple(template), float("inf")))
    return (min(scores.values()), scores) if scores else (None, scores)
