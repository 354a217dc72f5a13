import random

import pytest

from patternguard.bench import (
    DELETE,
    INSERT,
    STRUCTURE,
    BenchConfig,
    compute_precision_recall,
    corrupt,
    dq_closed_form,
    dq_pool,
    dq_simulation,
    evaluate_dataset,
    format_table,
    inject_errors,
    random_dataset,
    run_benchmark,
    sensitivity_sweep,
)
from patternguard.dsl import Base, ClassAtom, Pattern
from patternguard.syntax import parse

DIGITS = Base(Pattern((ClassAtom("DIGIT"),)))


def test_bench_config_validation():
    with pytest.raises(ValueError):
        BenchConfig(sample_rate=0)
    with pytest.raises(ValueError):
        BenchConfig(top_k=0)
    with pytest.raises(ValueError):
        BenchConfig(error_mix=(0.5, 0.5, 0.5))


def test_structure_injection_example():
    rng = random.Random(0)
    out, kind = corrupt("CSS,12345;JAVA", STRUCTURE, rng)
    assert kind == STRUCTURE and len(out) == len("CSS,12345;JAVA")
    diff = [i for i, (a, b) in enumerate(zip(out, "CSS,12345;JAVA")) if a != b]
    assert len(diff) == 1 and "CSS,12345;JAVA"[diff[0]] in ",;"
    # the classic ';' -> ':' swap is reachable
    assert "CSS,12345:JAVA" in {corrupt("CSS,12345;JAVA", STRUCTURE, random.Random(s))[0] for s in range(400)}


def test_delete_and_insert():
    rng = random.Random(1)
    out, kind = corrupt("abc", DELETE, rng)
    assert kind == DELETE and len(out) == 2
    out, kind = corrupt("abc", INSERT, rng)
    assert kind == INSERT and len(out) == 4
    i = next(i for i in range(4) if out[:i] + out[i + 1:] == "abc")
    assert out[:i] + out[i + 1:] == "abc"


def test_structure_falls_back_without_delimiter():
    out, kind = corrupt("abc", STRUCTURE, random.Random(2))
    assert kind in (DELETE, INSERT) and out != "abc"


def test_inject_errors_valid_and_deterministic():
    values = random_dataset(3).values
    a = inject_errors(values, seed=5)
    assert a == inject_errors(values, seed=5)
    for (c, kind), v in zip(a, values):
        assert c != v
        if kind == STRUCTURE:
            assert len(c) == len(v) and sum(x != y for x, y in zip(c, v)) == 1
    with pytest.raises(ValueError):
        inject_errors([])


def test_precision_recall_examples():
    r = compute_precision_recall([DIGITS], ["1", "2"], ["a", "b"])
    assert (r.precision, r.recall) == (1.0, 1.0)
    clean = [str(i) for i in range(9)] + ["x"]
    dirty = ["a"] * 8 + ["1", "2"]
    r = compute_precision_recall([DIGITS], clean, dirty)
    assert (r.precision, r.recall) == (0.9, 0.8)
    assert (r.true_pass, r.false_reject, r.true_reject, r.false_pass) == (9, 1, 8, 2)
    r = compute_precision_recall([DIGITS], [], [])
    assert r.precision is None and r.recall is None


def test_dq_examples():
    pool = dq_pool(0, 200)
    off = dq_simulation(pool, 30, with_validation=False)
    assert all(abs(x - dq_closed_form(50, r)) < 1e-12 for r, x in enumerate(off))
    perfect = [parse(p) for p in ['Recursive{Align{Enum{"CSS","JAVA","GO","RUST","HTML"}, ",", <DIGIT>{5}}}[";"]']]
    on = dq_simulation(pool, 30, with_validation=True, patterns=perfect)
    assert min(on) >= 0.99
    assert dq_simulation(pool, 0) == [1.0]
    with pytest.raises(ValueError):
        dq_simulation(pool[:5], 3)


def test_seeded_determinism():
    cfg = BenchConfig(seed=4)
    a, sa = run_benchmark(3, cfg)
    b, sb = run_benchmark(3, cfg)
    assert [(r.precision, r.recall) for r in a] == [(r.precision, r.recall) for r in b]
    pool = dq_pool(1, 300)
    assert dq_simulation(pool, 10, seed=3) == dq_simulation(pool, 10, seed=3)


def test_parallel_cases_match_sequential():
    cfg = BenchConfig(seed=2)
    a, _ = run_benchmark(3, cfg)
    b, _ = run_benchmark(3, cfg, jobs=2)
    assert [(r.name, r.precision, r.recall, r.patterns) for r in a] == \
        [(r.name, r.precision, r.recall, r.patterns) for r in b]


def test_cross_key_rate():
    ds = random_dataset(5, 60)
    own = evaluate_dataset(ds, BenchConfig(sample_rate=0.5), other=ds.values)
    assert own.cross_key == 1.0  # patterns are sound on their own column
    assert evaluate_dataset(ds, BenchConfig()).cross_key is None
    recs, summary = run_benchmark(2, BenchConfig(seed=1))
    assert all(0.0 <= r.cross_key <= 1.0 for r in recs) and summary["cross_key"] is not None


def test_evaluate_dataset_record():
    rec = evaluate_dataset(random_dataset(0), BenchConfig())
    assert rec.name == "random-0" and rec.patterns
    assert 0 <= rec.precision <= 1 and 0 <= rec.recall <= 1 and rec.latency_ms > 0


def test_sensitivity_sweep_axes():
    rows = sensitivity_sweep(2, sample_rates=(0.1, 0.2), top_ks=(1, 3))
    assert [(r["sample_rate"], r["top_k"]) for r in rows] == [(0.1, 1), (0.1, 3), (0.2, 1), (0.2, 3)]
    table = format_table(rows, ["sample_rate", "top_k", "precision", "recall"])
    assert table.splitlines()[0].split() == ["sample_rate", "top_k", "precision", "recall"]
