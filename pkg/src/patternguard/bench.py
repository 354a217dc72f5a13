"""Synthetic benchmark: generated columns, injected errors, precision/recall.

Datasets follow a "random" recipe: a few atomic field generators joined by
randomly chosen delimiters, sometimes repeated as a list.  Training uses the
first share of each column; the rest is tested clean and once corrupted.
"""

from __future__ import annotations

import random
import string
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

from .config import LearnConfig
from .estimator import learn_patterns
from .gentree import GeneralizationTree, default_tree
from .lifecycle import validate_batch

STRUCTURE, DELETE, INSERT = "structure", "delete", "insert"
ERROR_KINDS = (STRUCTURE, DELETE, INSERT)
PUNCT = "!#$%&*+,-./:;=?@^_|~"
FIELD_DELIMS = ",;|:/_#"
LIST_SEPS = ";|#/"
INSERT_CHARS = string.ascii_letters + string.digits + PUNCT


@dataclass(frozen=True)
class BenchConfig:
    sample_rate: float = 0.10
    top_k: int = 3
    depth: int = 3
    seed: int = 0
    error_mix: tuple = (1 / 3, 1 / 3, 1 / 3)
    n_values: int = 200

    def __post_init__(self):
        if not 0 < self.sample_rate <= 1:
            raise ValueError("sample_rate must be in (0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if len(self.error_mix) != 3 or min(self.error_mix) < 0 or abs(sum(self.error_mix) - 1) > 1e-9:
            raise ValueError("error_mix needs three non-negative weights summing to 1")

    def learn_config(self) -> LearnConfig:
        return LearnConfig(depth=self.depth, top_k=self.top_k)


# -- generators ----------------------------------------------------------------


WORDS = ["ADD", "DELETE", "UPDATE", "MERGE", "DROP", "SELECT", "KEEP", "MOVE"]
LANGS = ["CSS", "JAVA", "GO", "RUST", "HTML"]


def _digits(rng, n):
    return "".join(rng.choice(string.digits) for _ in range(n))


def _make_field(rng: random.Random):
    """(name, generator, internal delimiters) for one random field type."""
    kind = rng.choice(["fixed_digits", "var_digits", "word", "date", "code", "letters"])
    if kind == "fixed_digits":
        n = rng.randint(2, 6)
        return kind, lambda r: _digits(r, n), ""
    if kind == "var_digits":
        hi = rng.randint(3, 7)
        return kind, lambda r: _digits(r, r.randint(1, hi)), ""
    if kind == "word":
        vocab = rng.sample(WORDS, rng.randint(2, 4))
        if rng.random() < 0.5:
            vocab = [w.lower() for w in vocab]
        return kind, lambda r: r.choice(vocab), ""
    if kind == "date":
        return kind, lambda r: f"{r.randint(1990, 2030)}-{r.randint(1, 12):02d}-{r.randint(1, 28):02d}", "-"
    if kind == "code":
        a, b = rng.randint(1, 3), rng.randint(2, 5)
        return kind, lambda r: "".join(r.choice(string.ascii_uppercase) for _ in range(a)) + _digits(r, b), ""
    n = rng.randint(3, 6)
    return kind, lambda r: "".join(r.choice(string.ascii_lowercase) for _ in range(n)), ""


@dataclass
class SyntheticDataset:
    name: str
    values: list
    recipe: str = ""


def random_dataset(seed: int, n_values: int = 200) -> SyntheticDataset:
    rng = random.Random(seed)
    fields = [_make_field(rng) for _ in range(rng.randint(1, 3))]
    used = set("".join(f[2] for f in fields))
    delims = [d for d in FIELD_DELIMS if d not in used]
    joiners = [rng.choice(delims) for _ in range(len(fields) - 1)]
    if len(fields) > 1 and rng.random() < 0.3:
        # a constant prefix such as "ID:"
        prefix = rng.choice(["ID", "K", "REF"]) + rng.choice(":=")
    else:
        prefix = ""
    used |= set(joiners) | set(prefix)
    seps = [s for s in LIST_SEPS if s not in used]
    sep = rng.choice(seps) if seps and rng.random() < 0.3 else None
    max_rep = rng.randint(2, 4)

    def record(r):
        parts = [f[1](r) for f in fields]
        out = parts[0]
        for j, p in zip(joiners, parts[1:]):
            out += j + p
        return out

    values = []
    for _ in range(n_values):
        if sep is None:
            values.append(prefix + record(rng))
        else:
            values.append(sep.join(prefix + record(rng) for _ in range(rng.randint(1, max_rep))))
    recipe = "+".join(f[0] for f in fields) + (f" list[{sep}]" if sep else "")
    return SyntheticDataset(f"random-{seed}", values, recipe)


def dq_pool(seed: int, n: int) -> list[str]:
    """Clean values in the letters,digits;... shape with a small language vocabulary."""
    rng = random.Random(seed)
    return [";".join(f"{rng.choice(LANGS)},{_digits(rng, 5)}" for _ in range(rng.randint(1, 3)))
            for _ in range(n)]


# -- error injection -----------------------------------------------------------


def _symbol_positions(v: str) -> list[int]:
    return [i for i, c in enumerate(v) if not c.isalnum()]


def corrupt(value: str, kind: str, rng: random.Random) -> tuple[str, str]:
    """One corrupted copy of ``value``; structure falls back to delete/insert."""
    if kind == STRUCTURE:
        pos = _symbol_positions(value)
        if not pos:
            kind = rng.choice((DELETE, INSERT))
        else:
            i = rng.choice(pos)
            c = rng.choice([p for p in PUNCT if p != value[i]])
            return value[:i] + c + value[i + 1:], STRUCTURE
    if kind == DELETE and len(value) > 1:
        i = rng.randrange(len(value))
        out = value[:i] + value[i + 1:]
        if out != value:
            return out, DELETE
    i = rng.randrange(len(value) + 1)
    while True:
        c = rng.choice(INSERT_CHARS)
        out = value[:i] + c + value[i:]
        if out != value:
            return out, INSERT


def inject_errors(values: Sequence[str], mix=(1 / 3, 1 / 3, 1 / 3), seed=0) -> list[tuple[str, str]]:
    if not values:
        raise ValueError("inject_errors needs values")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    out = []
    for v in values:
        kind = rng.choices(ERROR_KINDS, weights=mix)[0]
        out.append(corrupt(v, kind, rng))
    return out


# -- metrics -------------------------------------------------------------------


class PRResult(NamedTuple):
    precision: Optional[float]
    recall: Optional[float]
    true_pass: int
    false_reject: int
    true_reject: int
    false_pass: int


def compute_precision_recall(patterns, clean_test: Sequence[str], corrupted_test: Sequence[str],
                             tree: Optional[GeneralizationTree] = None) -> PRResult:
    """Precision: clean values passed; recall: corrupted values rejected.

    A zero denominator gives None rather than a number.
    """
    tree = tree or default_tree()
    clean = validate_batch(patterns, clean_test, tree)
    dirty = validate_batch(patterns, corrupted_test, tree)
    tp, fr = clean.passed, clean.failed
    tr, fp = dirty.failed, dirty.passed
    precision = tp / (tp + fr) if tp + fr else None
    recall = tr / (tr + fp) if tr + fp else None
    return PRResult(precision, recall, tp, fr, tr, fp)


@dataclass
class BenchRecord:
    name: str
    precision: Optional[float]
    recall: Optional[float]
    latency_ms: float
    recipe: str = ""
    patterns: list = field(default_factory=list)
    # share of another column's values these patterns accept; lower is better
    cross_key: Optional[float] = None


def evaluate_dataset(ds: SyntheticDataset, cfg: BenchConfig = BenchConfig(),
                     seed: int = 0, other: Optional[Sequence[str]] = None) -> BenchRecord:
    from .syntax import serialize

    n_train = max(1, int(round(len(ds.values) * cfg.sample_rate)))
    train, test = ds.values[:n_train], ds.values[n_train:]
    t0 = time.perf_counter()
    result = learn_patterns(train, cfg.learn_config())
    latency = (time.perf_counter() - t0) * 1000
    corrupted = [c for c, _ in inject_errors(test, cfg.error_mix, seed)]
    pr = compute_precision_recall(result.patterns, test, corrupted)
    cross = validate_batch(result.patterns, other).passed / len(other) if other else None
    return BenchRecord(ds.name, pr.precision, pr.recall, latency, ds.recipe,
                       [serialize(k) for k in result.patterns], cross)


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def _case(i: int, cfg: BenchConfig) -> BenchRecord:
    ds = random_dataset(cfg.seed * 100_003 + i, cfg.n_values)
    other = random_dataset(cfg.seed * 100_003 + i + 1, cfg.n_values).values
    return evaluate_dataset(ds, cfg, seed=cfg.seed * 7919 + i, other=other)


def run_benchmark(n_datasets: int = 100, cfg: BenchConfig = BenchConfig(),
                  progress: Optional[Callable] = None, jobs: int = 1) -> tuple[list[BenchRecord], dict]:
    """Evaluate ``n_datasets`` seeded cases; ``jobs`` > 1 spreads them over processes.

    Every case carries its own seed, so results do not depend on ``jobs``.
    """
    if jobs > 1:
        pool = ProcessPoolExecutor(max_workers=jobs)
        cases = pool.map(_case, range(n_datasets), [cfg] * n_datasets)
    else:
        pool = None
        cases = (_case(i, cfg) for i in range(n_datasets))
    records = []
    try:
        for rec in cases:
            records.append(rec)
            if progress:
                progress(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    summary = {
        "datasets": len(records),
        "precision": _mean(r.precision for r in records),
        "recall": _mean(r.recall for r in records),
        "latency_ms": _mean(r.latency_ms for r in records),
        "cross_key": _mean(r.cross_key for r in records),
    }
    return records, summary


def sensitivity_sweep(n_datasets: int = 20, sample_rates=(0.05, 0.1, 0.2, 0.4),
                      top_ks=(1, 3, 5, 10), seed: int = 0) -> list[dict]:
    """Mean precision/recall for each (sample rate, top-k) pair."""
    rows = []
    for rate in sample_rates:
        for k in top_ks:
            cfg = BenchConfig(sample_rate=rate, top_k=k, seed=seed)
            _, s = run_benchmark(n_datasets, cfg)
            rows.append({"sample_rate": rate, "top_k": k, "precision": s["precision"],
                         "recall": s["recall"]})
    return rows


def format_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    def cell(v):
        if v is None:
            return "n/a"
        return f"{v:.3f}" if isinstance(v, float) else str(v)

    body = [[cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) if body else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


# -- data-quality simulation ---------------------------------------------------


def dq_simulation(clean_pool: Sequence[str], rounds: int, batch_size: int = 10,
                  with_validation: bool = True, seed: int = 0, initial: int = 50,
                  patterns=None, mix=(1 / 3, 1 / 3, 1 / 3),
                  config: LearnConfig = LearnConfig()) -> list[float]:
    """DQ rate (clean share of persisted values) after each round.

    The first ``initial`` pool values start the history.  Each round offers
    half clean and half corrupted values; with validation, rejected values
    are not persisted.  Index 0 of the result is the starting rate.
    """
    if len(clean_pool) < max(batch_size, initial):
        raise ValueError("clean pool is smaller than the batch or the initial history")
    rng = random.Random(seed)
    history = list(clean_pool[:initial])
    if with_validation and patterns is None:
        patterns = learn_patterns(history, config).patterns
    clean_n, total_n = len(history), len(history)
    series = [clean_n / total_n]
    half = batch_size // 2
    for _ in range(rounds):
        good = [rng.choice(clean_pool) for _ in range(batch_size - half)]
        bad = [c for c, _ in inject_errors([rng.choice(clean_pool) for _ in range(half)], mix, rng)]
        if with_validation:
            rep_good = validate_batch(patterns, good)
            rep_bad = validate_batch(patterns, bad)
            clean_n += rep_good.passed
            total_n += rep_good.passed + rep_bad.passed
        else:
            clean_n += len(good)
            total_n += len(good) + len(bad)
        series.append(clean_n / total_n)
    return series


def dq_closed_form(initial: int, rounds: int, batch_size: int = 10) -> float:
    half = batch_size // 2
    return (initial + (batch_size - half) * rounds) / (initial + batch_size * rounds)
