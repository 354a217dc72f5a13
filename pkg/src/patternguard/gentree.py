"""Character generalization tree and pattern-based distances.

The tree is a rooted hierarchy of character classes.  Leaves are single
characters; every internal node is a class whose character set is the union
of its children.  Distances between characters are measured by walking both
characters up to their nearest common ancestor and summing the edge costs.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

INF = math.inf


class TreeError(ValueError):
    """Raised for malformed tree definitions or invalid tree queries."""


@dataclass(frozen=True)
class ClassNode:
    id: int
    label: str
    parent: Optional[int]
    charset: frozenset
    cost: float = 1.0  # cost of the edge to the parent

    @property
    def is_leaf(self) -> bool:
        return len(self.charset) == 1 and self.label in self.charset


@dataclass(frozen=True)
class DistanceParams:
    """Costs used by the string-level distances.

    ``indel_cost`` is charged per inserted/deleted character and
    ``unalign_cost`` per character of an unaligned tail.
    """

    indel_cost: float = 4.0
    unalign_cost: float = 4.0

    def __post_init__(self):
        if self.indel_cost < 0 or self.unalign_cost < 0:
            raise ValueError("distance costs must be non-negative")


class GeneralizationTree:
    """Immutable class hierarchy over an alphabet.

    Nodes are addressed by integer id.  Internal labels are multi-character
    names (``DIGIT``); a leaf's label is its character.
    """

    def __init__(self, nodes: Sequence[ClassNode]):
        self.nodes: tuple[ClassNode, ...] = tuple(nodes)
        roots = [n.id for n in self.nodes if n.parent is None]
        if len(roots) != 1:
            raise TreeError(f"tree must have exactly one root, found {len(roots)}")
        self.root: int = roots[0]
        self._children: list[list[int]] = [[] for _ in self.nodes]
        for n in self.nodes:
            if n.id != len(self._children) and n.id >= len(self.nodes):
                raise TreeError("node ids must be dense")
            if n.parent is not None:
                self._children[n.parent].append(n.id)
        self._by_label: dict[str, int] = {}
        self._leaf: dict[str, int] = {}
        for n in self.nodes:
            if n.label in self._by_label:
                raise TreeError(f"duplicate label {n.label!r}")
            self._by_label[n.label] = n.id
            if not n.charset:
                raise TreeError(f"node {n.label!r} has an empty charset")
            if n.is_leaf:
                (ch,) = n.charset
                if ch in self._leaf:
                    raise TreeError(f"character {ch!r} appears under two leaves")
                self._leaf[ch] = n.id
            elif len(n.label) < 2:
                raise TreeError(f"internal label {n.label!r} must be at least 2 characters")
        self._depth = [0] * len(self.nodes)
        self._path: list[tuple[int, ...]] = [()] * len(self.nodes)
        self._compute_paths()
        for n in self.nodes:
            kids = self._children[n.id]
            if kids:
                union = frozenset().union(*(self.nodes[k].charset for k in kids))
                if union != n.charset:
                    raise TreeError(f"charset of {n.label!r} differs from union of its children")
            elif not n.is_leaf:
                raise TreeError(f"childless node {n.label!r} must be a single-character leaf")
        self.alphabet: frozenset = self.nodes[self.root].charset
        self._dist_cache: dict[tuple[str, str], float] = {}
        self._hash = hash(self.nodes)

    def _compute_paths(self) -> None:
        seen = set()
        stack = [(self.root, (self.root,))]
        while stack:
            nid, path = stack.pop()
            if nid in seen:
                raise TreeError("cycle detected")
            seen.add(nid)
            self._path[nid] = path
            self._depth[nid] = len(path) - 1
            for k in self._children[nid]:
                stack.append((k, path + (k,)))
        if len(seen) != len(self.nodes):
            raise TreeError("tree has nodes unreachable from the root")

    # -- structure ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other):
        return isinstance(other, GeneralizationTree) and self.nodes == other.nodes

    def __hash__(self):
        return self._hash

    def node(self, nid: int) -> ClassNode:
        return self.nodes[nid]

    def label(self, nid: int) -> str:
        return self.nodes[nid].label

    def charset(self, nid: int) -> frozenset:
        return self.nodes[nid].charset

    def parent(self, nid: int) -> Optional[int]:
        return self.nodes[nid].parent

    def children(self, nid: int) -> list[int]:
        return list(self._children[nid])

    def depth(self, nid: int) -> int:
        return self._depth[nid]

    def root_path(self, nid: int) -> tuple[int, ...]:
        """Node ids from the root down to ``nid`` inclusive."""
        return self._path[nid]

    def is_leaf(self, nid: int) -> bool:
        return not self._children[nid]

    @property
    def height(self) -> int:
        return max(self._depth)

    def by_label(self, label: str) -> int:
        try:
            return self._by_label[label]
        except KeyError:
            raise TreeError(f"unknown class label {label!r}") from None

    def has_label(self, label: str) -> bool:
        return label in self._by_label

    def is_ancestor(self, anc: int, nid: int) -> bool:
        """True when ``anc`` is an ancestor-or-self of ``nid``."""
        path = self._path[nid]
        d = self._depth[anc]
        return d < len(path) and path[d] == anc

    def ancestor_at(self, nid: int, depth: int) -> int:
        path = self._path[nid]
        return path[min(depth, len(path) - 1)]

    # -- operations --------------------------------------------------------

    def map_char(self, c: str) -> Optional[int]:
        """Leaf id for ``c``, or None when ``c`` is outside the alphabet."""
        return self._leaf.get(c)

    def nearest_common_ancestor(self, x: Optional[int], y: Optional[int]) -> Optional[int]:
        if x is None or y is None:
            return None
        px, py = self._path[x], self._path[y]
        nca = None
        for a, b in zip(px, py):
            if a != b:
                break
            nca = a
        return nca

    def nca_of(self, ids: Iterable[Optional[int]]) -> Optional[int]:
        acc = None
        first = True
        for nid in ids:
            if nid is None:
                return None
            acc = nid if first else self.nearest_common_ancestor(acc, nid)
            first = False
        return acc

    def class_of_chars(self, chars: Iterable[str]) -> Optional[int]:
        """Smallest class containing every character, None if any is unknown."""
        return self.nca_of(self.map_char(c) for c in set(chars))

    def generalization_cost(self, x: int, ancestor: int) -> float:
        if not self.is_ancestor(ancestor, x):
            raise TreeError(
                f"{self.label(ancestor)!r} is not on the root path of {self.label(x)!r}"
            )
        total = 0.0
        nid = x
        while nid != ancestor:
            total += self.nodes[nid].cost
            nid = self.nodes[nid].parent
        return total

    def char_distance(self, x: str, y: str) -> float:
        if x == y:
            return 0.0
        key = (x, y) if x < y else (y, x)
        d = self._dist_cache.get(key)
        if d is None:
            lx, ly = self.map_char(x), self.map_char(y)
            nca = self.nearest_common_ancestor(lx, ly)
            if nca is None:
                d = INF
            else:
                d = self.generalization_cost(lx, nca) + self.generalization_cost(ly, nca)
            self._dist_cache[key] = d
        return d


def map_char(c: str, tree: GeneralizationTree) -> Optional[int]:
    return tree.map_char(c)


def nearest_common_ancestor(x, y, tree: GeneralizationTree) -> Optional[int]:
    return tree.nearest_common_ancestor(x, y)


def generalization_cost(x: int, ancestor: int, tree: GeneralizationTree) -> float:
    return tree.generalization_cost(x, ancestor)


def pattern_based_distance(x: str, y: str, tree: GeneralizationTree) -> float:
    """0 for equal characters, else the summed cost up to the common ancestor."""
    return tree.char_distance(x, y)


def segment_distance(a: str, b: str, tree: GeneralizationTree,
                     params: DistanceParams = DistanceParams()) -> float:
    """Weighted edit distance with class-aware substitution costs."""
    if a == b:
        return 0.0
    return _segment_distance(a, b, tree, params.indel_cost)


# above this many DP cells the row-vectorized version is faster
_NUMPY_CELLS = 400


def _char_index(tree: GeneralizationTree):
    cached = getattr(tree, "_np_index", None)
    if cached is None:
        chars = sorted(tree.alphabet)
        index = {c: i for i, c in enumerate(chars)}
        mat = np.array([[tree.char_distance(x, y) for y in chars] for x in chars])
        cached = (index, mat)
        tree._np_index = cached
    return cached


def _segment_distance_np(a: str, b: str, tree: GeneralizationTree, indel: float) -> Optional[float]:
    index, mat = _char_index(tree)
    try:
        ia = [index[c] for c in a]
        ib = np.array([index[c] for c in b])
    except KeyError:
        return None
    m = len(b)
    steps = np.arange(m + 1) * indel
    prev = steps.copy()
    for i, x in enumerate(ia, 1):
        c0 = np.minimum(prev[:-1] + mat[x, ib], prev[1:] + indel)
        row = np.empty(m + 1)
        row[0] = i * indel
        row[1:] = c0
        # a run of insertions along the row: cur[j] = min_k row[k] + (j - k) * indel
        prev = np.minimum.accumulate(row - steps) + steps
    return float(prev[-1])


@lru_cache(maxsize=200_000)
def _segment_distance(a: str, b: str, tree: GeneralizationTree, indel: float) -> float:
    if len(a) < len(b):
        a, b = b, a
    if len(a) * len(b) >= _NUMPY_CELLS:
        d = _segment_distance_np(a, b, tree, indel)
        if d is not None:
            return d
    index, mat = _char_index(tree)
    rows = tree.__dict__.setdefault("_dist_rows", {})
    try:
        ib = [index[c] for c in b]
        ra = []
        for c in a:
            r = rows.get(c)
            if r is None:
                r = rows[c] = mat[index[c]].tolist()
            ra.append(r)
    except KeyError:
        return _segment_distance_slow(a, b, tree, indel)
    prev = [j * indel for j in range(len(b) + 1)]
    for i, row in enumerate(ra, 1):
        left = i * indel
        cur = [left]
        for j, jb in enumerate(ib):
            best = prev[j] + row[jb]
            if left + indel < best:
                best = left + indel
            if prev[j + 1] + indel < best:
                best = prev[j + 1] + indel
            cur.append(best)
            left = best
        prev = cur
    return prev[-1]


def _segment_distance_slow(a: str, b: str, tree: GeneralizationTree, indel: float) -> float:
    """Reference DP through char_distance; handles characters outside the tree."""
    dist = tree.char_distance
    prev = [j * indel for j in range(len(b) + 1)]
    for i, ca in enumerate(a, 1):
        cur = [i * indel]
        left = cur[0]
        for j, cb in enumerate(b, 1):
            best = prev[j - 1] + (0.0 if ca == cb else dist(ca, cb))
            ins = left + indel
            if ins < best:
                best = ins
            dele = prev[j] + indel
            if dele < best:
                best = dele
            cur.append(best)
            left = best
        prev = cur
    return prev[-1]


# -- default tree and tree files -------------------------------------------

DEFAULT_TREE_TEXT = """\
# depth label charset
0 ANY
1 ALNUM
2 ALPHA
3 UPPER A-Z
3 LOWER a-z
2 DIGIT 0-9
1 PUNCT !-/:-@[-`{-~
1 SPACE \\x20
"""


def _parse_charset(spec: str, lineno: int) -> list[str]:
    chars: list[str] = []
    i = 0

    def read_one() -> str:
        nonlocal i
        c = spec[i]
        if c == "\\":
            if i + 1 >= len(spec):
                raise TreeError(f"line {lineno}: dangling escape in charset")
            nxt = spec[i + 1]
            if nxt == "x":
                hexpart = spec[i + 2:i + 4]
                if len(hexpart) != 2:
                    raise TreeError(f"line {lineno}: bad \\x escape")
                i += 4
                return chr(int(hexpart, 16))
            i += 2
            return {"s": " ", "t": "\t"}.get(nxt, nxt)
        i += 1
        return c

    while i < len(spec):
        lo = read_one()
        if i + 1 < len(spec) and spec[i] == "-":
            i += 1
            hi = read_one()
            if ord(hi) < ord(lo):
                raise TreeError(f"line {lineno}: reversed range {lo!r}-{hi!r}")
            chars.extend(chr(o) for o in range(ord(lo), ord(hi) + 1))
        else:
            chars.append(lo)
    return chars


def parse_tree(text: str) -> GeneralizationTree:
    """Build a tree from ``depth label [charset] [cost=N]`` lines.

    A charset on a class line expands into single-character leaves below
    it; internal nodes without a charset take the union of their children.
    """
    raw: list[tuple[int, str, Optional[list[str]], float, int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        try:
            depth = int(parts[0])
        except ValueError:
            raise TreeError(f"line {lineno}: depth must be an integer") from None
        if len(parts) < 2:
            raise TreeError(f"line {lineno}: missing label")
        label = parts[1]
        cost = 1.0
        cs = None
        for tok in parts[2:]:
            if tok.startswith("cost="):
                cost = float(tok[5:])
                if cost < 0:
                    raise TreeError(f"line {lineno}: negative edge cost")
            elif cs is None:
                cs = _parse_charset(tok, lineno)
            else:
                raise TreeError(f"line {lineno}: unexpected token {tok!r}")
        raw.append((depth, label, cs, cost, lineno))
    if not raw:
        raise TreeError("empty tree definition")
    if raw[0][0] != 0:
        raise TreeError("first node must have depth 0")

    # build bottom-up charsets after establishing parents
    parents: list[Optional[int]] = []
    stack: list[int] = []
    for idx, (depth, label, _cs, _cost, lineno) in enumerate(raw):
        if depth == 0:
            if idx != 0:
                raise TreeError(f"line {lineno}: second root {label!r}")
            parents.append(None)
            stack = [idx]
            continue
        if depth > len(stack):
            raise TreeError(f"line {lineno}: depth jumps by more than one")
        stack = stack[:depth]
        parents.append(stack[-1])
        stack.append(idx)

    nodes: list[ClassNode] = []
    leaf_specs: list[tuple[int, list[str]]] = []
    charsets: list[set] = [set() for _ in raw]
    for idx, (depth, label, cs, cost, lineno) in enumerate(raw):
        if cs is not None:
            if any(parents[j] == idx for j in range(len(raw))):
                raise TreeError(f"line {lineno}: {label!r} has both a charset and children")
            charsets[idx] = set(cs)
            leaf_specs.append((idx, cs))
    for idx in reversed(range(len(raw))):
        p = parents[idx]
        if p is not None:
            charsets[p] |= charsets[idx]
    for idx, (depth, label, cs, cost, lineno) in enumerate(raw):
        nodes.append(ClassNode(idx, label, parents[idx], frozenset(charsets[idx]), cost))
    nid = len(nodes)
    for parent_idx, cs in leaf_specs:
        for ch in dict.fromkeys(cs):
            nodes.append(ClassNode(nid, ch, parent_idx, frozenset(ch), 1.0))
            nid += 1
    return GeneralizationTree(nodes)


def _charset_spec(chars: Iterable[str]) -> str:
    ords = sorted(ord(c) for c in chars)
    out = []
    i = 0

    def enc(o: int) -> str:
        c = chr(o)
        if c in "\\-" or not c.isprintable() or c.isspace():
            return f"\\x{o:02x}" if o < 256 else c
        return c

    while i < len(ords):
        j = i
        while j + 1 < len(ords) and ords[j + 1] == ords[j] + 1:
            j += 1
        if j - i >= 2:
            out.append(f"{enc(ords[i])}-{enc(ords[j])}")
        else:
            out.extend(enc(o) for o in ords[i:j + 1])
        i = j + 1
    return "".join(out)


def format_tree(tree: GeneralizationTree) -> str:
    """Inverse of :func:`parse_tree` for trees whose leaves hang off classes."""
    lines = []

    def walk(nid: int) -> None:
        kids = tree.children(nid)
        n = tree.node(nid)
        cost = "" if n.cost == 1.0 or n.parent is None else f" cost={n.cost:g}"
        if kids and all(tree.is_leaf(k) for k in kids):
            lines.append(f"{tree.depth(nid)} {n.label} {_charset_spec(n.charset)}{cost}")
            return
        lines.append(f"{tree.depth(nid)} {n.label}{cost}")
        for k in kids:
            walk(k)

    walk(tree.root)
    return "\n".join(lines) + "\n"


def load_tree(path: str | Path) -> GeneralizationTree:
    return parse_tree(Path(path).read_text(encoding="utf-8"))


_DEFAULT: Optional[GeneralizationTree] = None


def default_tree() -> GeneralizationTree:
    """Printable-ASCII tree: ANY > {ALNUM > {ALPHA > {UPPER, LOWER}, DIGIT}, PUNCT, SPACE}."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = parse_tree(DEFAULT_TREE_TEXT)
        assert _DEFAULT.alphabet == frozenset(string.printable[:95])
    return _DEFAULT
