"""Validation, feedback-driven updates and boundary-example generation."""

from __future__ import annotations

import random
import time
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .dsl import (
    Base,
    ClassAtom,
    Delim,
    EnumAtom,
    Literal,
    Pattern,
    Recursive,
    Rep,
    SamplingError,
    Skeleton,
    get_node,
    iter_bases,
    matcher_for,
    replace_node,
    sample_pieces,
)
from .gentree import GeneralizationTree, default_tree

NO_OP = "no-op"
UPDATED = "updated"
NEEDS_RELEARN = "needs-relearn"

CORRECT = "correct"
ERROR = "error"


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class ValidationEntry:
    value: str
    passed: bool
    pattern_index: Optional[int]
    fail_offset: Optional[int] = None
    fail_atom_index: Optional[int] = None
    reason: str = ""
    fail_kind: Optional[str] = None


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(e.passed for e in self.entries)

    @property
    def failed(self) -> int:
        return len(self.entries) - self.passed

    def __len__(self):
        return len(self.entries)

    def summary(self) -> dict:
        return {"total": len(self.entries), "passed": self.passed, "failed": self.failed}


def validate_batch(patterns: Sequence[Skeleton], batch: Sequence[str],
                   tree: Optional[GeneralizationTree] = None) -> ValidationReport:
    """A value passes if any pattern accepts it.

    Failures report the pattern that got furthest into the value.
    """
    if not patterns:
        raise ValueError("validation needs at least one pattern")
    m = matcher_for(tree)
    report = ValidationReport()
    for v in batch:
        best = None
        for i, k in enumerate(patterns):
            r = m.skeleton_match(k, v)
            if r.accepted:
                best = ValidationEntry(v, True, i)
                break
            if best is None or r.fail_offset > best.fail_offset:
                best = ValidationEntry(v, False, i, r.fail_offset, r.fail_atom_index,
                                       r.reason, r.fail_kind)
        report.entries.append(best)
    return report


# -- incremental update --------------------------------------------------------


class UpdateResult(NamedTuple):
    patterns: list
    status: str


def _first_chars(atom, tree) -> frozenset:
    if isinstance(atom, ClassAtom):
        return tree.charset(tree.by_label(atom.label))
    if isinstance(atom, Literal):
        return frozenset(atom.text[0])
    return frozenset(m[0] for m in atom.members)


def _atom_chars(atom, tree) -> set:
    if isinstance(atom, ClassAtom):
        return set(tree.charset(tree.by_label(atom.label)))
    if isinstance(atom, Literal):
        return set(atom.text)
    return set("".join(atom.members))


def _structural(c: str, old_chars, blocked) -> bool:
    """A delimiter character, or punctuation entering an alphanumeric slot."""
    return c in blocked or (not c.isalnum() and all(x.isalnum() for x in old_chars))


def _nca_label(tree, chars) -> Optional[str]:
    nid = tree.class_of_chars(chars)
    return None if nid is None else tree.label(nid)


def _place(atoms: list, i: int, new: ClassAtom, extra: set, tree) -> Optional[list]:
    """Put ``new`` at ``i`` without changing how earlier strings are split.

    A widened atom may only grow into characters that can never start the
    next atom; otherwise it absorbs its right neighbours until that holds
    or it becomes the last atom.
    """
    last = len(atoms) - 1
    cs = tree.charset(tree.by_label(new.label))
    if new.rep.is_fixed or i == last or not (cs & _first_chars(atoms[i + 1], tree)):
        return atoms[:i] + [new] + atoms[i + 1:]
    chars = set(cs) | extra
    for j in range(i + 1, last + 1):
        chars |= _atom_chars(atoms[j], tree)
        label = _nca_label(tree, chars)
        if label is None:
            return None
        merged = ClassAtom(label, Rep())
        mcs = tree.charset(tree.by_label(label))
        if j == last or not (mcs & _first_chars(atoms[j + 1], tree)):
            return atoms[:i] + [merged] + atoms[j + 1:]
    return None


def _run(s: str, pos: int, end: int, cs) -> int:
    i = pos
    while i < end and s[i] in cs:
        i += 1
    return i - pos


def structural_chars(k: Skeleton) -> frozenset:
    """Characters used by delimiters and separators anywhere in ``k``."""
    if isinstance(k, Base):
        return frozenset()
    if isinstance(k, Recursive):
        return frozenset(k.sep) | structural_chars(k.body)
    out = frozenset()
    for c in k.children:
        out |= frozenset(c.text) if isinstance(c, Delim) else structural_chars(c)
    return out


def _widen_atom(k: Skeleton, r, value: str, tree) -> Optional[Skeleton]:
    """One generalization step for an atom-level or trailing failure.

    Absorbing a delimiter or separator character into an atom would hide a
    structural error, so that case is left to relearning.
    """
    path = r.fail_path
    blocked = structural_chars(k)
    node = get_node(k, path)
    if not isinstance(node, Base):
        return None
    start, end = r.span
    atoms = list(node.pattern.atoms)
    o = r.fail_offset
    if r.fail_kind == "trailing":
        i = len(atoms) - 1
        # the last atom started somewhere before o; it is the last one, so any rep is safe
        atom = atoms[i]
        c = value[o]
        if _structural(c, _atom_chars(atom, tree), blocked):
            return None
        if isinstance(atom, ClassAtom):
            cs = tree.charset(tree.by_label(atom.label))
            if c in cs and atom.rep.hi is not None:
                grow = _run(value, o, end, cs)
                new = ClassAtom(atom.label, Rep(atom.rep.lo, atom.rep.hi + grow))
            else:
                label = _nca_label(tree, set(cs) | {c})
                if label is None:
                    return None
                new = ClassAtom(label, Rep(atom.rep.lo, None))
        else:
            label = _nca_label(tree, _atom_chars(atom, tree) | {c})
            if label is None:
                return None
            lo = len(atom.text) if isinstance(atom, Literal) else min(map(len, atom.members))
            new = ClassAtom(label, Rep(lo, None))
        atoms[i] = new
        return replace_node(k, path, Base(Pattern(tuple(atoms))))

    i = r.fail_atom_index
    atom = atoms[i]
    if isinstance(atom, ClassAtom):
        cs = tree.charset(tree.by_label(atom.label))
        n = _run(value, o, end, cs)
        if o + n < end:
            c = value[o + n]
            if _structural(c, cs, blocked):
                return None
            label = _nca_label(tree, set(cs) | {c})
            if label is None:
                return None
            new = ClassAtom(label, atom.rep)
            extra = {c}
        elif n >= 1:
            # span ran out before the lower bound
            new = ClassAtom(atom.label, Rep(n, atom.rep.hi))
            atoms[i] = new
            return replace_node(k, path, Base(Pattern(tuple(atoms))))
        else:
            return None
    else:
        if o >= end:
            return None
        members = [atom.text] if isinstance(atom, Literal) else list(atom.members)
        chars = _atom_chars(atom, tree)
        # first character that no member accounts for
        best = max(_common(m, value, o, end) for m in members)
        if o + best >= end:
            return None
        c = value[o + best]
        if _structural(c, chars, blocked):
            return None
        label = _nca_label(tree, chars | {c})
        if label is None:
            return None
        lengths = {len(m) for m in members}
        rep = Rep.exactly(lengths.pop()) if len(lengths) == 1 else Rep()
        new = ClassAtom(label, rep)
        extra = {c}
    placed = _place(atoms, i, new, extra, tree)
    if placed is None:
        return None
    return replace_node(k, path, Base(Pattern(tuple(placed))))


def _common(m: str, s: str, pos: int, end: int) -> int:
    n = 0
    while n < len(m) and pos + n < end and m[n] == s[pos + n]:
        n += 1
    return n


def generalize(k: Skeleton, value: str, tree: Optional[GeneralizationTree] = None,
               max_steps: Optional[int] = None) -> Optional[Skeleton]:
    """Widen ``k`` until it accepts ``value``; None for structural misses."""
    tree = tree or default_tree()
    m = matcher_for(tree)
    steps = max_steps if max_steps is not None else 4 * len(value) + 16
    for _ in range(steps):
        r = m.skeleton_match(k, value)
        if r.accepted:
            return k
        if r.fail_kind == "count":
            node = get_node(k, r.fail_path)
            a, b = r.span
            n = len(value[a:b].split(node.sep))
            k = replace_node(k, r.fail_path, Recursive(node.body, node.sep, node.count.widened(n)))
        elif r.fail_kind in ("atom", "trailing") and r.span is not None:
            nk = _widen_atom(k, r, value, tree)
            if nk is None or nk == k:
                return None
            k = nk
        else:
            return None
    return None


def incremental_update(patterns: Sequence[Skeleton], value: str,
                       tree: Optional[GeneralizationTree] = None) -> UpdateResult:
    """Fold a user-confirmed value into the pattern set.

    The pattern that matched furthest is widened in place.  Structural
    mismatches leave the set unchanged and ask for relearning.
    """
    tree = tree or default_tree()
    m = matcher_for(tree)
    patterns = list(patterns)
    results = [m.skeleton_match(k, value) for k in patterns]
    if any(r.accepted for r in results):
        return UpdateResult(patterns, NO_OP)
    order = sorted(range(len(patterns)), key=lambda i: (-(results[i].fail_offset or 0), i))
    for i in order:
        nk = generalize(patterns[i], value, tree)
        if nk is not None:
            patterns[i] = nk
            return UpdateResult(patterns, UPDATED)
    return UpdateResult(patterns, NEEDS_RELEARN)


# -- augmentation --------------------------------------------------------------


@dataclass
class AugmentExample:
    candidate: str
    atom_index: int
    sibling_class: str
    path: tuple = ()
    verdict: Optional[bool] = None


def _target_node(atom, tree) -> Optional[int]:
    if isinstance(atom, ClassAtom):
        return tree.by_label(atom.label)
    if isinstance(atom, EnumAtom):
        return tree.class_of_chars("".join(atom.members))
    return tree.class_of_chars(atom.text)


def _descent(tree, top: int, bottom: int) -> list[tuple[int, int]]:
    """(parent, chosen child) steps from ``top`` down to ``bottom``."""
    path = tree.root_path(bottom)
    d = tree.depth(top)
    if d >= len(path) or path[d] != top:
        return []
    return list(zip(path[d:], path[d + 1:]))


def generate_examples(before: Skeleton, after: Skeleton, tree: Optional[GeneralizationTree] = None,
                      k: int = 3, seed=0, round_index: int = 0, max_rounds: int = 3,
                      max_tries: int = 200) -> list[AugmentExample]:
    """Strings accepted by ``before`` but not ``after``, near each refined atom.

    Characters are drawn from the classes the refinement passed over (the
    siblings along its descent), so each example sits just outside the
    refined pattern.
    """
    if k <= 0 or round_index >= max_rounds:
        return []
    tree = tree or default_tree()
    m = matcher_for(tree)
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    before_bases = dict(iter_bases(before))
    out = []
    for path, b_after in iter_bases(after):
        b_before = before_bases.get(path)
        if b_before is None or len(b_before.pattern) != len(b_after.pattern):
            continue
        for i, (x, y) in enumerate(zip(b_before.pattern.atoms, b_after.pattern.atoms)):
            if x == y or not isinstance(x, ClassAtom):
                continue
            top = tree.by_label(x.label)
            bottom = _target_node(y, tree)
            pools = []
            if bottom is not None:
                # one pool per descent step, so a lone class sibling is not
                # drowned out by many leaf siblings
                for parent, child in _descent(tree, top, bottom):
                    sibs = [c for c in tree.children(parent) if c != child]
                    if sibs:
                        pools.append(sibs)
            found: dict[str, AugmentExample] = {}
            for _ in range(max_tries):
                if len(found) >= k:
                    break
                try:
                    pieces = sample_pieces(after, rng, tree)
                except SamplingError:
                    break
                slots = [j for j, (p, a, _) in enumerate(pieces) if p == path and a == i]
                if not slots:
                    continue
                j = rng.choice(slots)
                text = pieces[j][2]
                label, new = _mutate(text, x, y, pools, tree, rng)
                if new is None:
                    continue
                cand = "".join(t if n != j else new for n, (_, _, t) in enumerate(pieces))
                if cand in found:
                    continue
                if m.accepts(before, cand) and not m.accepts(after, cand):
                    found[cand] = AugmentExample(cand, i, label, path)
            out.extend(found.values())
    return out


def _mutate(text: str, before: ClassAtom, after, pools, tree, rng):
    """Perturb one slot's text; returns (class label used, new text)."""
    if pools:
        sib = rng.choice(rng.choice(pools))
        c = rng.choice(sorted(tree.charset(sib)))
        pos = rng.randrange(len(text))
        return tree.label(sib), text[:pos] + c + text[pos + 1:]
    if isinstance(after, EnumAtom):
        # a string of the enum's class that is not a member
        node = tree.class_of_chars("".join(after.members))
        if node is None:
            return None, None
        chars = sorted(tree.charset(node))
        n = len(rng.choice(after.members))
        word = "".join(rng.choice(chars) for _ in range(n))
        return tree.label(node), (word if word not in after.members else None)
    # repetition-only refinement: change the length instead
    cs = sorted(tree.charset(tree.by_label(before.label)))
    if rng.random() < 0.5 and len(text) > 1:
        pos = rng.randrange(len(text))
        return before.label, text[:pos] + text[pos + 1:]
    pos = rng.randrange(len(text) + 1)
    return before.label, text[:pos] + rng.choice(cs) + text[pos:]


# -- feedback ------------------------------------------------------------------


@dataclass(frozen=True)
class FeedbackRecord:
    value: str
    verdict: str  # "correct" | "error"
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.verdict not in (CORRECT, ERROR):
            raise ValueError(f"verdict must be {CORRECT!r} or {ERROR!r}")


class FeedbackResult(NamedTuple):
    patterns: list
    statuses: dict
    negatives: list


def latest_records(records: Sequence[FeedbackRecord]) -> list[FeedbackRecord]:
    """One record per value: the newest (later in the list wins ties)."""
    latest: dict[str, tuple] = {}
    for n, r in enumerate(records):
        prev = latest.get(r.value)
        if prev is not None and prev[1].verdict != r.verdict:
            warnings.warn(f"contradictory feedback for {r.value!r}; keeping the latest", stacklevel=3)
        if prev is None or (r.timestamp, n) >= (prev[1].timestamp, prev[0]):
            latest[r.value] = (n, r)
    return [r for _, r in sorted(latest.values(), key=lambda t: t[0])]


def apply_feedback(patterns: Sequence[Skeleton], records: Sequence[FeedbackRecord],
                   tree: Optional[GeneralizationTree] = None) -> FeedbackResult:
    tree = tree or default_tree()
    m = matcher_for(tree)
    patterns = list(patterns)
    statuses = {}
    negatives = []
    for r in latest_records(records):
        if r.verdict == CORRECT:
            patterns, statuses[r.value] = incremental_update(patterns, r.value, tree)
        else:
            negatives.append(r.value)
            statuses[r.value] = "recorded"
    if negatives:
        bad = [any(m.accepts(k, v) for v in negatives) for k in patterns]
        patterns = [k for k, b in zip(patterns, bad) if not b] + [k for k, b in zip(patterns, bad) if b]
    return FeedbackResult(patterns, statuses, negatives)
