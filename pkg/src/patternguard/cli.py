"""Command line: train, validate, update, augment, bench, explain.

Exit codes: 0 success, 1 validation failures, 2 usage or config error,
3 I/O error (missing files, bad input, store problems).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .bench import BenchConfig, dq_closed_form, dq_pool, dq_simulation, format_table, run_benchmark, sensitivity_sweep
from .config import ConfigError, LearnConfig, load_config
from .dsl import Align, Base, Recursive, matcher_for, render_count
from .estimator import learn_patterns
from .gentree import TreeError, default_tree, load_tree
from .lifecycle import CORRECT, ERROR, FeedbackRecord, apply_feedback, generate_examples, validate_batch
from .store import (
    IngestError,
    StoreError,
    emit_report,
    load_dataset,
    load_store,
    save_store,
)
from .syntax import PatternSyntaxError, parse, serialize

OK, FAILURES, USAGE, IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _add_input(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--input", "-i", required=required, help="data file")
    p.add_argument("--format", choices=("lines", "csv", "jsonl"), default=None,
                   help="input format (default: from the file suffix, else lines)")
    p.add_argument("--column", help="csv column holding the values")
    p.add_argument("--key-field", help="jsonl field grouping records by key")
    p.add_argument("--value-field", default="value", help="jsonl field holding the value")
    p.add_argument("--lenient", action="store_true", help="skip malformed rows instead of failing")


def _add_store(p: argparse.ArgumentParser):
    p.add_argument("--store", "--out", dest="store", help="pattern store file (default: $PATTERNGUARD_STORE)")
    p.add_argument("--key", help="store key (default: csv column or file stem)")
    p.add_argument("--tree", help="generalization tree file")


def _add_learn_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file of learner settings")
    p.add_argument("--depth", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--delimiter-support", type=float)
    p.add_argument("--indel-cost", type=float)
    p.add_argument("--unalign-cost", type=float)
    p.add_argument("--no-refine", action="store_true", help="keep skeleton-level classes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="patternguard", description="Learn and enforce string patterns.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn patterns for a column and store them")
    _add_input(p)
    _add_store(p)
    _add_learn_flags(p)

    p = sub.add_parser("validate", help="check values against stored patterns")
    _add_input(p)
    _add_store(p)
    p.add_argument("--pattern", action="append", help="pattern text to use instead of the store")
    p.add_argument("--report", choices=("text", "json"), default="text")

    p = sub.add_parser("update", help="fold confirmed values or feedback into stored patterns")
    _add_input(p, required=False)
    _add_store(p)
    p.add_argument("--feedback", help="file of value<TAB>y|n lines")

    p = sub.add_parser("augment", help="ask about boundary examples near refined slots")
    _add_store(p)
    p.add_argument("--feedback", help="answers as value<TAB>y|n lines instead of prompting")
    p.add_argument("--budget", "-k", type=int, default=3, help="examples per refined slot")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=3)

    p = sub.add_parser("bench", help="synthetic precision/recall benchmark")
    p.add_argument("--datasets", type=int, default=100)
    p.add_argument("--values", type=int, default=200, help="values per dataset")
    p.add_argument("--sample-rate", type=float, default=0.10)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--error-mix", default="1,1,1", help="structure,delete,insert weights")
    p.add_argument("--results", help="write one JSON record per dataset here")
    p.add_argument("--sweep", action="store_true", help="sample-rate x top-k sensitivity table")
    p.add_argument("--jobs", "-j", type=int, default=1, help="worker processes for the dataset cases")
    p.add_argument("--dq", type=int, metavar="ROUNDS", help="run the DQ-rate simulation instead")
    p.add_argument("--gnuplot", action="store_true", help="print whitespace-separated data only")

    p = sub.add_parser("explain", help="show a pattern's structure and how a value matches")
    _add_store(p)
    p.add_argument("--pattern", action="append", help="pattern text to use instead of the store")
    p.add_argument("value", nargs="*", help="values to trace")
    return ap


# -- helpers -------------------------------------------------------------------


def _format_for(args) -> str:
    if args.format:
        return args.format
    suffix = Path(args.input).suffix.lower()
    return {".csv": "csv", ".jsonl": "jsonl", ".ndjson": "jsonl"}.get(suffix, "lines")


def _dataset(args):
    return load_dataset(args.input, _format_for(args), column=args.column, key_field=args.key_field,
                        value_field=args.value_field, key=args.key if args.key_field else None,
                        strict=not args.lenient)


def _tree(args):
    return load_tree(args.tree) if getattr(args, "tree", None) else default_tree()


def _learn_config(args) -> LearnConfig:
    cfg = load_config(args.config) if args.config else LearnConfig()
    overrides = {name: getattr(args, name) for name in
                 ("depth", "top_k", "delimiter_support", "indel_cost", "unalign_cost")
                 if getattr(args, name) is not None}
    if args.no_refine:
        overrides["refine"] = False
    return LearnConfig.from_mapping(overrides, cfg)


def _store_entry(args, store, key=None):
    key = key or args.key
    if not key:
        if len(store.entries) == 1:
            key = next(iter(store.entries))
        else:
            raise UsageError("--key is required when the store holds several keys")
    entry = store.get(key)
    if entry is None:
        raise StoreError(f"no patterns stored for key {key!r}")
    return entry


def _read_feedback(path) -> list[FeedbackRecord]:
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        value, sep, verdict = line.rpartition("\t")
        verdict = verdict.strip().lower()
        if not sep or verdict not in ("y", "n"):
            raise IngestError(f"{path}:{n}: expected value<TAB>y|n")
        records.append(FeedbackRecord(value, CORRECT if verdict == "y" else ERROR, time.time()))
    return records


def _outline(k, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(k, Base):
        return [f"{pad}Base {serialize(k)}"]
    if isinstance(k, Recursive):
        count = render_count(k.count) or "any count"
        return [f"{pad}Recursive separator {json.dumps(k.sep)} {count}"] + _outline(k.body, indent + 1)
    lines = [f"{pad}Align"]
    for c in k.children:
        if isinstance(c, (Base, Align, Recursive)):
            lines += _outline(c, indent + 1)
        else:
            lines.append(f"{pad}  Delim {json.dumps(c.text)}")
    return lines


# -- subcommands ---------------------------------------------------------------


def cmd_train(args, out) -> int:
    cfg = _learn_config(args)
    tree = _tree(args)
    ds = _dataset(args)
    key = args.key or ds.key
    result = learn_patterns(ds.values, cfg, tree)
    store = load_store(args.store)
    meta = {"unrefined": [serialize(k) for k in result.skeletons], "config": cfg.to_dict(),
            "augment_rounds": 0}
    entry = store.put(key, result.patterns, training_count=len(ds.values), feedback=[], meta=meta)
    save_store(store, args.store)
    print(f"{key}: version {entry.version}, {len(ds.values)} values"
          + (f", {ds.skipped} skipped" if ds.skipped else ""), file=out)
    for i, p in enumerate(entry.patterns, 1):
        print(f"  {i}. {p}", file=out)
    return OK


def _patterns(args):
    if args.pattern:
        return [parse(p) for p in args.pattern]
    return _store_entry(args, load_store(args.store)).skeletons()


def cmd_validate(args, out) -> int:
    patterns = _patterns(args)
    ds = _dataset(args)
    report = validate_batch(patterns, ds.values, _tree(args))
    out.write(emit_report(report, args.report))
    return FAILURES if report.failed else OK


def cmd_update(args, out) -> int:
    if not args.input and not args.feedback:
        raise UsageError("update needs --input (confirmed values) or --feedback")
    tree = _tree(args)
    records = []
    if args.input:
        records += [FeedbackRecord(v, CORRECT, time.time()) for v in _dataset(args).values]
    if args.feedback:
        records += _read_feedback(args.feedback)
    store = load_store(args.store)
    entry = _store_entry(args, store)
    res = apply_feedback(entry.skeletons(), records, tree)
    store.put(entry.key, res.patterns, feedback=list(entry.feedback) + records)
    save_store(store, args.store)
    for value, status in res.statuses.items():
        print(f"{status:14} {value}", file=out)
    relearn = sum(s == "needs-relearn" for s in res.statuses.values())
    if relearn:
        print(f"{relearn} value(s) need relearning: their structure is new", file=sys.stderr)
    return OK


def _prompt(ex) -> Optional[str]:
    while True:
        try:
            ans = input(f"is {ex.candidate!r} valid data? [y/n/q] ").strip().lower()
        except EOFError:
            return None
        if ans in ("y", "n"):
            return ans
        if ans == "q":
            return None


def cmd_augment(args, out) -> int:
    tree = _tree(args)
    store = load_store(args.store)
    entry = _store_entry(args, store)
    round_index = int(entry.meta.get("augment_rounds", 0))
    before = [parse(p) for p in entry.meta.get("unrefined", entry.patterns)]
    after = entry.skeletons()
    examples = []
    for b, a in zip(before, after):
        examples += generate_examples(b, a, tree, args.budget, args.seed + round_index,
                                      round_index, args.max_rounds)
    if not examples:
        print("no boundary examples to ask about", file=out)
        return OK
    answers = None
    if args.feedback:
        answers = {r.value: r.verdict for r in _read_feedback(args.feedback)}
    records = []
    for ex in examples:
        if answers is not None:
            verdict = answers.get(ex.candidate)
            if verdict is None:
                continue
        else:
            ans = _prompt(ex)
            if ans is None:
                break
            verdict = CORRECT if ans == "y" else ERROR
        records.append(FeedbackRecord(ex.candidate, verdict, time.time()))
        print(f"{verdict:8} {ex.candidate}  (slot {ex.atom_index}, {ex.sibling_class})", file=out)
    res = apply_feedback(after, records, tree)
    meta = dict(entry.meta, augment_rounds=round_index + 1)
    store.put(entry.key, res.patterns, feedback=list(entry.feedback) + records, meta=meta)
    save_store(store, args.store)
    return OK


def _error_mix(text: str) -> tuple:
    try:
        w = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError("--error-mix needs three comma-separated numbers") from None
    if len(w) != 3 or min(w) < 0 or sum(w) <= 0:
        raise UsageError("--error-mix needs three non-negative weights")
    return tuple(x / sum(w) for x in w)


def cmd_bench(args, out) -> int:
    try:
        cfg = BenchConfig(args.sample_rate, args.top_k, args.depth, args.seed,
                          _error_mix(args.error_mix), args.values)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.dq is not None:
        pool = dq_pool(args.seed, 1000)
        on = dq_simulation(pool, args.dq, with_validation=True, seed=args.seed)
        off = dq_simulation(pool, args.dq, with_validation=False, seed=args.seed)
        rows = [{"round": r, "validated": a, "unvalidated": b, "closed_form": dq_closed_form(50, r)}
                for r, (a, b) in enumerate(zip(on, off))]
        _print_rows(rows, ["round", "validated", "unvalidated", "closed_form"], args.gnuplot, out)
        return OK
    if args.sweep:
        rows = sensitivity_sweep(args.datasets, seed=args.seed)
        _print_rows(rows, ["sample_rate", "top_k", "precision", "recall"], args.gnuplot, out)
        return OK
    sink = open(args.results, "w", encoding="utf-8") if args.results else None
    try:
        def progress(rec):
            if sink:
                sink.write(json.dumps({"name": rec.name, "precision": rec.precision, "recall": rec.recall,
                                       "latency_ms": round(rec.latency_ms, 3), "cross_key": rec.cross_key}) + "\n")
        _, summary = run_benchmark(args.datasets, cfg, progress, jobs=args.jobs)
    finally:
        if sink:
            sink.close()
    fmt = lambda v: "n/a" if v is None else f"{v:.3f}"
    print(f"datasets {summary['datasets']}  precision {fmt(summary['precision'])}  "
          f"recall {fmt(summary['recall'])}  mean latency {fmt(summary['latency_ms'])} ms  "
          f"cross-key acceptance {fmt(summary['cross_key'])}", file=out)
    return OK


def _print_rows(rows, columns, plain, out):
    if plain:
        print("# " + " ".join(columns), file=out)
        for r in rows:
            print(" ".join("nan" if r[c] is None else str(r[c]) for c in columns), file=out)
    else:
        print(format_table(rows, columns), file=out)


def cmd_explain(args, out) -> int:
    patterns = _patterns(args)
    tree = _tree(args)
    m = matcher_for(tree)
    for i, k in enumerate(patterns, 1):
        print(f"pattern {i}: {serialize(k)}", file=out)
        for line in _outline(k, 1):
            print(line, file=out)
    failed = False
    for v in args.value:
        report = validate_batch(patterns, [v], tree)
        e = report.entries[0]
        if e.passed:
            tr = m.trace(patterns[e.pattern_index], v)
            print(f"{v!r}: accepted by pattern {e.pattern_index + 1}", file=out)
            for path, start, end in tr.bases:
                print(f"  base {'/'.join(map(str, path)) or '-'}: {v[start:end]!r}", file=out)
        else:
            failed = True
            print(f"{v!r}: rejected ({e.fail_kind}) {e.reason}", file=out)
            print("  " + v, file=out)
            print("  " + " " * (e.fail_offset or 0) + "^", file=out)
    return FAILURES if failed else OK


COMMANDS = {"train": cmd_train, "validate": cmd_validate, "update": cmd_update,
            "augment": cmd_augment, "bench": cmd_bench, "explain": cmd_explain}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ConfigError, PatternSyntaxError, TreeError) as e:
        print(f"patternguard: {e}", file=sys.stderr)
        return USAGE
    except (OSError, IngestError, StoreError) as e:
        print(f"patternguard: {e}", file=sys.stderr)
        return IO


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
