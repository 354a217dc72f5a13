"""Atoms, patterns and structural skeletons, with greedy matching.

A ``Pattern`` is a sequence of atoms matched left to right, each atom taking
the longest prefix it can (no backtracking).  A skeleton wraps patterns in
structure: ``Align`` matches children one after another, using delimiter
literals to bound each child's span, and ``Recursive`` splits its span on a
separator and matches every segment against the same body.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from .gentree import GeneralizationTree, default_tree


# -- repetition ----------------------------------------------------------------


@dataclass(frozen=True)
class Rep:
    """Repetition bounds; ``hi=None`` means unbounded."""

    lo: int = 1
    hi: Optional[int] = None

    def __post_init__(self):
        if self.lo < 1:
            raise ValueError("repetition lower bound must be >= 1")
        if self.hi is not None and self.hi < self.lo:
            raise ValueError("repetition upper bound below lower bound")

    @classmethod
    def exactly(cls, n: int) -> "Rep":
        return cls(n, n)

    @property
    def is_fixed(self) -> bool:
        return self.hi == self.lo

    def admits(self, n: int) -> bool:
        return n >= self.lo and (self.hi is None or n <= self.hi)

    def __str__(self):
        if self.hi is None:
            return "+" if self.lo == 1 else f"{{{self.lo},}}"
        if self.lo == self.hi:
            return f"{{{self.lo}}}"
        return f"{{{self.lo},{self.hi}}}"


ONE_OR_MORE = Rep()


@dataclass(frozen=True)
class Count:
    """How many times a Recursive body may repeat; default is any (>= 1)."""

    lo: int = 1
    hi: Optional[int] = None

    def __post_init__(self):
        if self.lo < 1 or (self.hi is not None and self.hi < self.lo):
            raise ValueError(f"invalid repeat count {self.lo}..{self.hi}")

    @classmethod
    def exactly(cls, p: int) -> "Count":
        return cls(p, p)

    @property
    def is_any(self) -> bool:
        return self.lo == 1 and self.hi is None

    def admits(self, n: int) -> bool:
        return n >= self.lo and (self.hi is None or n <= self.hi)

    def widened(self, n: int) -> "Count":
        hi = None if self.hi is None else max(self.hi, n)
        return Count(min(self.lo, n), hi)


ANY_COUNT = Count()


# -- atoms ---------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("literal text must be non-empty")


@dataclass(frozen=True)
class ClassAtom:
    label: str
    rep: Rep = ONE_OR_MORE


@dataclass(frozen=True)
class EnumAtom:
    members: tuple

    def __post_init__(self):
        if not self.members or any(not m for m in self.members):
            raise ValueError("enum needs non-empty members")
        # longest first keeps greedy matching well defined
        ordered = tuple(sorted(set(self.members), key=lambda m: (-len(m), m)))
        object.__setattr__(self, "members", ordered)


Atom = Union[Literal, ClassAtom, EnumAtom]


@dataclass(frozen=True)
class Pattern:
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)


# -- skeletons -----------------------------------------------------------------


@dataclass(frozen=True)
class Base:
    pattern: Pattern


@dataclass(frozen=True)
class Delim:
    """A delimiter literal between Align children."""

    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("delimiter must be non-empty")


@dataclass(frozen=True)
class Align:
    children: tuple

    def __post_init__(self):
        kids = tuple(self.children)
        object.__setattr__(self, "children", kids)
        if len(kids) < 2:
            raise ValueError("Align needs at least two children")
        for a, b in zip(kids, kids[1:]):
            if not isinstance(a, Delim) and not isinstance(b, Delim):
                raise ValueError("adjacent Align structures must be separated by a delimiter")


@dataclass(frozen=True)
class Recursive:
    body: "Skeleton"
    sep: str
    count: Count = ANY_COUNT

    def __post_init__(self):
        if not self.sep:
            raise ValueError("Recursive separator must be non-empty")


Skeleton = Union[Base, Align, Recursive]


def nesting_depth(k: Skeleton) -> int:
    """Number of structural (Align/Recursive) levels."""
    if isinstance(k, Base):
        return 0
    if isinstance(k, Recursive):
        return 1 + nesting_depth(k.body)
    return 1 + max((nesting_depth(c) for c in k.children if not isinstance(c, Delim)), default=0)


def iter_bases(k: Skeleton, path: tuple = ()) -> Iterator[tuple[tuple, Base]]:
    """Yield ``(path, Base)`` for every Base node; paths index children."""
    if isinstance(k, Base):
        yield path, k
    elif isinstance(k, Recursive):
        yield from iter_bases(k.body, path + (0,))
    else:
        for i, c in enumerate(k.children):
            if not isinstance(c, Delim):
                yield from iter_bases(c, path + (i,))


def get_node(k: Skeleton, path: tuple) -> Skeleton:
    for i in path:
        k = k.body if isinstance(k, Recursive) else k.children[i]
    return k


def replace_node(k: Skeleton, path: tuple, new: Skeleton) -> Skeleton:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(k, Recursive):
        return Recursive(replace_node(k.body, rest, new), k.sep, k.count)
    kids = list(k.children)
    kids[head] = replace_node(kids[head], rest, new)
    return Align(tuple(kids))


# -- matching ------------------------------------------------------------------


@dataclass(frozen=True)
class MatchResult:
    matched_len: int
    accepted: bool
    fail_atom_index: Optional[int] = None
    fail_offset: Optional[int] = None
    reason: str = ""
    fail_kind: Optional[str] = None  # atom | trailing | delimiter | empty | count
    fail_path: Optional[tuple] = None
    span: Optional[tuple] = None  # (start, end) of the Base span that failed


@dataclass
class _Failure:
    offset: int
    kind: str
    reason: str
    path: tuple
    atom_index: Optional[int] = None
    span: Optional[tuple] = None


@dataclass
class Trace:
    """What each part of an accepted skeleton consumed."""

    bases: list = field(default_factory=list)  # (path, start, end)
    delimiters: list = field(default_factory=list)  # (start, text)


class Matcher:
    """Greedy matcher bound to one generalization tree."""

    def __init__(self, tree: Optional[GeneralizationTree] = None):
        self.tree = tree or default_tree()
        self._cs: dict[str, frozenset] = {}

    def charset(self, label: str) -> frozenset:
        cs = self._cs.get(label)
        if cs is None:
            cs = self.tree.charset(self.tree.by_label(label))
            self._cs[label] = cs
        return cs

    # atoms

    def atom_match(self, a: Atom, s: str, pos: int = 0, end: Optional[int] = None) -> int:
        """Length of the greedy prefix of ``s[pos:end]`` taken by ``a``; 0 is failure."""
        if end is None:
            end = len(s)
        if isinstance(a, ClassAtom):
            cs = self.charset(a.label)
            hi = a.rep.hi
            limit = end if hi is None else min(end, pos + hi)
            i = pos
            while i < limit and s[i] in cs:
                i += 1
            n = i - pos
            return n if n >= a.rep.lo else 0
        if isinstance(a, Literal):
            t = a.text
            return len(t) if pos + len(t) <= end and s.startswith(t, pos) else 0
        for m in a.members:
            if pos + len(m) <= end and s.startswith(m, pos):
                return len(m)
        return 0

    def pattern_match(self, p: Pattern, s: str, pos: int = 0,
                      end: Optional[int] = None) -> MatchResult:
        if end is None:
            end = len(s)
        i = pos
        for idx, a in enumerate(p.atoms):
            n = self.atom_match(a, s, i, end)
            if n == 0:
                return MatchResult(i - pos, False, idx, i - pos,
                                   f"{render_atom(a)} does not match at offset {i - pos}",
                                   "atom")
            i += n
        if i < end:
            return MatchResult(i - pos, False, len(p.atoms), i - pos,
                               f"unexpected trailing input at offset {i - pos}", "trailing")
        return MatchResult(i - pos, True)

    def pieces(self, p: Pattern, s: str) -> Optional[list[str]]:
        """Substring consumed by each atom, or None if ``p`` rejects ``s``."""
        out = []
        i = 0
        for a in p.atoms:
            n = self.atom_match(a, s, i)
            if n == 0:
                return None
            out.append(s[i:i + n])
            i += n
        return out if i == len(s) else None

    # skeletons

    def skeleton_match(self, k: Skeleton, s: str) -> MatchResult:
        fail = self._match(k, s, 0, len(s), (), None)
        if fail is None:
            return MatchResult(len(s), True)
        return MatchResult(fail.offset, False, fail.atom_index, fail.offset, fail.reason,
                           fail.kind, fail.path, fail.span)

    def accepts(self, k: Skeleton, s: str) -> bool:
        return self._match(k, s, 0, len(s), (), None) is None

    def trace(self, k: Skeleton, s: str) -> Optional[Trace]:
        tr = Trace()
        if self._match(k, s, 0, len(s), (), tr) is None:
            return tr
        return None

    def _match(self, k, s, start, end, path, tr) -> Optional[_Failure]:
        if isinstance(k, Base):
            r = self.pattern_match(k.pattern, s, start, end)
            if r.accepted:
                if tr is not None:
                    tr.bases.append((path, start, end))
                return None
            off = start + r.fail_offset
            if r.fail_kind == "atom":
                reason = f"{render_atom(k.pattern.atoms[r.fail_atom_index])} does not match at offset {off}"
            else:
                reason = f"unexpected trailing input at offset {off}"
            return _Failure(off, r.fail_kind, reason, path, r.fail_atom_index, (start, end))
        if isinstance(k, Recursive):
            return self._match_recursive(k, s, start, end, path, tr)
        return self._match_align(k, s, start, end, path, tr)

    def _match_recursive(self, k: Recursive, s, start, end, path, tr):
        sep = k.sep
        bounds = []
        i = start
        while True:
            j = s.find(sep, i, end)
            if j < 0:
                bounds.append((i, end))
                break
            bounds.append((i, j))
            i = j + len(sep)
        for n, (a, b) in enumerate(bounds):
            if a == b:
                return _Failure(a, "empty", f"empty segment {n + 1}", path)
            fail = self._match(k.body, s, a, b, path + (0,), tr)
            if fail is not None:
                fail.reason = f"segment {n + 1}: {fail.reason}"
                return fail
            if tr is not None and n + 1 < len(bounds):
                tr.delimiters.append((b, sep))
        if not k.count.admits(len(bounds)):
            off = bounds[k.count.hi][0] - len(sep) if k.count.hi is not None and len(bounds) > k.count.hi else end
            return _Failure(off, "count",
                            f"{len(bounds)} repetitions, expected {render_count(k.count) or 'any'}",
                            path, None, (start, end))
        return None

    def _match_align(self, k: Align, s, start, end, path, tr):
        kids = k.children
        pos = start
        for idx, child in enumerate(kids):
            if isinstance(child, Delim):
                t = child.text
                if pos + len(t) <= end and s.startswith(t, pos):
                    if tr is not None:
                        tr.delimiters.append((pos, t))
                    pos += len(t)
                    continue
                return _Failure(pos, "delimiter", f"expected {t!r} at offset {pos}", path)
            nxt = kids[idx + 1] if idx + 1 < len(kids) else None
            if nxt is None:
                stop = end
            else:
                stop = s.find(nxt.text, pos, end)
                if stop < 0:
                    progress = self._progress(child, s, pos, end, path + (idx,))
                    if isinstance(progress, _Failure):
                        return progress
                    return _Failure(progress, "delimiter",
                                    f"expected {nxt.text!r} at offset {progress}", path)
            if stop == pos:
                return _Failure(pos, "empty", f"empty field before offset {pos}", path + (idx,))
            fail = self._match(child, s, pos, stop, path + (idx,), tr)
            if fail is not None:
                return fail
            pos = stop
        if pos != end:
            return _Failure(pos, "trailing", f"unexpected trailing input at offset {pos}", path)
        return None

    def _progress(self, child, s, pos, end, path):
        """Where a child stops when its closing delimiter is missing."""
        if isinstance(child, Base):
            i = pos
            for idx, a in enumerate(child.pattern.atoms):
                n = self.atom_match(a, s, i, end)
                if n == 0:
                    return _Failure(i, "atom", f"{render_atom(a)} does not match at offset {i}",
                                    path, idx, (pos, end))
                i += n
            return i
        fail = self._match(child, s, pos, end, path, None)
        return end if fail is None else fail.offset


_MATCHERS: dict[int, Matcher] = {}


def matcher_for(tree: Optional[GeneralizationTree] = None) -> Matcher:
    tree = tree or default_tree()
    m = _MATCHERS.get(id(tree))
    if m is None or m.tree is not tree:
        m = Matcher(tree)
        _MATCHERS[id(tree)] = m
    return m


def atom_match(a: Atom, s: str, tree: Optional[GeneralizationTree] = None) -> int:
    return matcher_for(tree).atom_match(a, s)


def pattern_match(p: Pattern, s: str, tree: Optional[GeneralizationTree] = None) -> MatchResult:
    return matcher_for(tree).pattern_match(p, s)


def skeleton_match(k: Skeleton, s: str, tree: Optional[GeneralizationTree] = None) -> MatchResult:
    return matcher_for(tree).skeleton_match(k, s)


# -- rendering helpers (full grammar lives in syntax.py) ------------------------


def _quote(text: str) -> str:
    out = ['"']
    for c in text:
        if c in '"\\':
            out.append("\\" + c)
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        elif c == "\r":
            out.append("\\r")
        elif not c.isprintable():
            out.append(f"\\u{ord(c):04x}")
        else:
            out.append(c)
    out.append('"')
    return "".join(out)


def render_atom(a: Atom) -> str:
    if isinstance(a, Literal):
        return _quote(a.text)
    if isinstance(a, EnumAtom):
        return "Enum{" + ",".join(_quote(m) for m in a.members) + "}"
    label = a.label if len(a.label) > 1 else _quote(a.label)
    return f"<{label}>{a.rep}"


def render_count(c: Count) -> str:
    if c.is_any:
        return ""
    if c.hi is None:
        return f"{{{c.lo},}}"
    if c.lo == c.hi:
        return f"{{{c.lo}}}"
    return f"{{{c.lo},{c.hi}}}"


# -- sampling ------------------------------------------------------------------


class SamplingError(RuntimeError):
    pass


class _Sampler:
    def __init__(self, tree, rng: random.Random, length_hints):
        self.tree = tree
        self.rng = rng
        self.hints = list(length_hints) if length_hints else None
        self.matcher = matcher_for(tree)

    def reps(self, rep: Rep) -> int:
        if rep.is_fixed:
            return rep.lo
        if self.hints:
            cands = [h for h in self.hints if rep.admits(h)]
            if cands:
                return self.rng.choice(cands)
        hi = rep.hi if rep.hi is not None else max(rep.lo, 8)
        return self.rng.randint(rep.lo, max(rep.lo, hi))

    def char(self, nid: int, forbidden: frozenset) -> str:
        tree = self.tree
        allowed = tree.charset(nid) - forbidden
        if not allowed:
            raise SamplingError(f"class {tree.label(nid)!r} has no usable characters")
        while not tree.is_leaf(nid):
            kids = [c for c in tree.children(nid) if tree.charset(c) - forbidden]
            nid = self.rng.choice(kids)
        return tree.label(nid)

    def atom(self, a: Atom, forbidden: frozenset) -> str:
        if isinstance(a, Literal):
            return a.text
        if isinstance(a, EnumAtom):
            return self.rng.choice(a.members)
        nid = self.tree.by_label(a.label)
        return "".join(self.char(nid, forbidden) for _ in range(self.reps(a.rep)))

    def skeleton(self, k: Skeleton, forbidden: frozenset, out: list, path: tuple):
        if isinstance(k, Base):
            for i, a in enumerate(k.pattern.atoms):
                out.append((path, i, self.atom(a, forbidden)))
            return
        if isinstance(k, Recursive):
            c = k.count
            hi = c.hi if c.hi is not None else max(c.lo, 4)
            n = self.rng.randint(c.lo, hi)
            inner = forbidden | frozenset(k.sep)
            for j in range(n):
                if j:
                    out.append((path, None, k.sep))
                self.skeleton(k.body, inner, out, path + (0,))
            return
        delims = frozenset("".join(c.text for c in k.children if isinstance(c, Delim)))
        inner = forbidden | delims
        for i, c in enumerate(k.children):
            if isinstance(c, Delim):
                out.append((path, None, c.text))
            else:
                self.skeleton(c, inner, out, path + (i,))


def sample_pieces(k: Skeleton, rng: random.Random, tree: Optional[GeneralizationTree] = None,
                  length_hints: Optional[Sequence[int]] = None,
                  max_tries: int = 200) -> list[tuple]:
    """Generate an accepted string as ``(path, atom_index, text)`` pieces.

    ``atom_index`` is None for delimiter and separator pieces.
    """
    tree = tree or default_tree()
    sampler = _Sampler(tree, rng, length_hints)
    for _ in range(max_tries):
        out: list = []
        sampler.skeleton(k, frozenset(), out, ())
        s = "".join(t for _, _, t in out)
        if sampler.matcher.accepts(k, s):
            return out
    raise SamplingError("could not generate a string accepted by the skeleton")


def sample_string(k: Skeleton, seed=None, length_hints: Optional[Sequence[int]] = None,
                  tree: Optional[GeneralizationTree] = None) -> str:
    """Random string accepted by ``k``; ``seed`` may be an int or a Random."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return "".join(t for _, _, t in sample_pieces(k, rng, tree, length_hints))
