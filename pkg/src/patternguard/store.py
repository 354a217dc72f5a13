"""Dataset ingestion, the pattern store and report output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from .lifecycle import FeedbackRecord, ValidationReport
from .syntax import PatternSyntaxError, parse, serialize

STORE_ENV = "PATTERNGUARD_STORE"
DEFAULT_STORE = "patternguard-store.json"
MAX_VALUE_LEN = 10_000
STORE_FORMAT = "patternguard-store/1"


class IngestError(ValueError):
    pass


class StoreError(RuntimeError):
    pass


class StoreParseError(StoreError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ConflictError(StoreError):
    pass


# -- datasets ------------------------------------------------------------------


@dataclass
class Dataset:
    key: str
    values: list
    skipped: int = 0
    trailing_newline: bool = True


def _check_len(value: str, where: str, max_len: int):
    if len(value) > max_len:
        raise IngestError(f"{where}: value of {len(value)} characters exceeds the {max_len} limit")


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return f.read()


def _load_lines(path, max_len, strict) -> Dataset:
    text = _read_text(path)
    trailing = text.endswith("\n")
    rows = text.split("\n")
    if trailing:
        rows.pop()
    values, skipped = [], 0
    for n, v in enumerate(rows, 1):
        try:
            _check_len(v, f"{path}:{n}", max_len)
        except IngestError:
            if strict:
                raise
            skipped += 1
            continue
        values.append(v)
    return Dataset(Path(path).stem, values, skipped, trailing)


def _load_csv(path, column, max_len, strict) -> Dataset:
    if not column:
        raise IngestError("csv input needs a column name")
    reader = csv.reader(io.StringIO(_read_text(path), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError(f"{path}: empty csv file") from None
    if column not in header:
        raise IngestError(f"{path}: no column {column!r}; available: {', '.join(header)}")
    idx = header.index(column)
    values, skipped = [], 0
    try:
        for row in reader:
            line = reader.line_num
            try:
                if len(row) != len(header):
                    raise IngestError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
                _check_len(row[idx], f"{path}:{line}", max_len)
            except IngestError:
                if strict:
                    raise
                skipped += 1
                continue
            values.append(row[idx])
    except csv.Error as e:
        raise IngestError(f"{path}:{reader.line_num}: {e}") from None
    return Dataset(column, values, skipped)


def load_datasets_jsonl(path, key_field: Optional[str], value_field: str,
                        max_len: int = MAX_VALUE_LEN, strict: bool = True) -> dict[str, Dataset]:
    """JSON-lines records grouped by ``key_field`` (one group when it is None)."""
    out: dict[str, Dataset] = {}
    skipped = 0
    default_key = Path(path).stem
    for n, line in enumerate(_read_text(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(f"{path}:{n}: invalid JSON: {e.msg}") from None
            if not isinstance(rec, dict):
                raise IngestError(f"{path}:{n}: record is not an object")
            if value_field not in rec:
                raise IngestError(f"{path}:{n}: missing field {value_field!r}; available: {', '.join(rec)}")
            if key_field is not None and key_field not in rec:
                raise IngestError(f"{path}:{n}: missing field {key_field!r}; available: {', '.join(rec)}")
            value = rec[value_field]
            if not isinstance(value, str):
                raise IngestError(f"{path}:{n}: field {value_field!r} is not a string")
            _check_len(value, f"{path}:{n}", max_len)
        except IngestError:
            if strict:
                raise
            skipped += 1
            continue
        key = str(rec[key_field]) if key_field is not None else default_key
        out.setdefault(key, Dataset(key, [])).values.append(value)
    for d in out.values():
        d.skipped = skipped
    return out


def load_dataset(path, fmt: str = "lines", column: Optional[str] = None,
                 key_field: Optional[str] = None, value_field: str = "value",
                 key: Optional[str] = None, max_len: int = MAX_VALUE_LEN,
                 strict: bool = True) -> Dataset:
    """Read one column of values.

    ``fmt`` is ``lines``, ``csv`` (needs ``column``) or ``jsonl``.  For
    JSON lines with several keys, ``key`` picks the group.
    """
    try:
        if fmt == "lines":
            return _load_lines(path, max_len, strict)
        if fmt == "csv":
            return _load_csv(path, column, max_len, strict)
        if fmt == "jsonl":
            groups = load_datasets_jsonl(path, key_field, value_field, max_len, strict)
            if key is not None:
                if key not in groups:
                    raise IngestError(f"{path}: no records for key {key!r}; available: {', '.join(groups)}")
                return groups[key]
            if len(groups) > 1:
                raise IngestError(f"{path}: several keys present ({', '.join(groups)}); pick one")
            if not groups:
                return Dataset(Path(path).stem, [])
            return next(iter(groups.values()))
    except UnicodeDecodeError as e:
        raise IngestError(f"{path}: not valid UTF-8 at byte {e.start}") from None
    raise IngestError(f"unknown input format {fmt!r}")


def dump_lines(d: Dataset) -> str:
    text = "\n".join(d.values)
    return text + "\n" if d.trailing_newline and d.values else text


# -- pattern store -------------------------------------------------------------


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class PatternStoreEntry:
    key: str
    version: int
    patterns: list  # serialized skeletons
    created_at: str = field(default_factory=_now)
    training_count: int = 0
    feedback: list = field(default_factory=list)  # FeedbackRecord
    meta: dict = field(default_factory=dict)

    def skeletons(self) -> list:
        return [parse(p) for p in self.patterns]

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "patterns": list(self.patterns),
            "created_at": self.created_at,
            "training_count": self.training_count,
            "feedback": [{"value": r.value, "verdict": r.verdict, "timestamp": r.timestamp}
                         for r in self.feedback],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, key: str, doc: dict) -> "PatternStoreEntry":
        for p in doc["patterns"]:
            try:
                parse(p)
            except PatternSyntaxError as e:
                raise StoreError(f"entry {key!r}: stored pattern does not parse: {e}") from None
        fb = [FeedbackRecord(r["value"], r["verdict"], r["timestamp"]) for r in doc.get("feedback", [])]
        return cls(key, int(doc["version"]), list(doc["patterns"]), doc.get("created_at", ""),
                   int(doc.get("training_count", 0)), fb, dict(doc.get("meta", {})))


@dataclass
class PatternStore:
    entries: dict = field(default_factory=dict)
    # versions as last read from or written to disk, for conflict checks
    base_versions: dict = field(default_factory=dict)

    def get(self, key: str) -> Optional[PatternStoreEntry]:
        return self.entries.get(key)

    def put(self, key: str, skeletons: Sequence, training_count: int = 0,
            feedback: Optional[list] = None, meta: Optional[dict] = None) -> PatternStoreEntry:
        """Store a new version of ``key``'s patterns."""
        old = self.entries.get(key)
        version = (old.version if old else 0) + 1
        entry = PatternStoreEntry(
            key, version, [serialize(k) for k in skeletons],
            training_count=training_count if training_count or not old else old.training_count,
            feedback=list(feedback) if feedback is not None else (list(old.feedback) if old else []),
            meta=dict(meta) if meta is not None else (dict(old.meta) if old else {}),
        )
        self.entries[key] = entry
        return entry

    def __eq__(self, other):
        return isinstance(other, PatternStore) and self.entries == other.entries


def default_store_path() -> Path:
    return Path(os.environ.get(STORE_ENV) or DEFAULT_STORE)


def _read_store_doc(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise StoreParseError(f"{path}: corrupt store: {e.msg}", e.pos) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), dict):
        raise StoreParseError(f"{path}: not a pattern store", 0)
    return doc["entries"]


def load_store(path=None) -> PatternStore:
    """Read a store; a missing file is an empty store."""
    path = Path(path) if path is not None else default_store_path()
    docs = _read_store_doc(path)
    try:
        entries = {k: PatternStoreEntry.from_json(k, d) for k, d in docs.items()}
    except (KeyError, TypeError, ValueError) as e:
        raise StoreError(f"{path}: malformed entry: {e}") from None
    return PatternStore(entries, {k: e.version for k, e in entries.items()})


def save_store(store: PatternStore, path=None) -> None:
    """Write changed entries atomically, refusing to overwrite newer versions."""
    path = Path(path) if path is not None else default_store_path()
    docs = _read_store_doc(path)
    for key, entry in store.entries.items():
        base = store.base_versions.get(key, 0)
        on_disk = int(docs[key]["version"]) if key in docs else 0
        if entry.version == base and on_disk == base:
            continue
        if on_disk != base:
            raise ConflictError(
                f"entry {key!r} changed on disk (version {on_disk}, expected {base}); reload and retry")
        if entry.version <= on_disk:
            raise ConflictError(f"entry {key!r}: version {entry.version} is not newer than {on_disk}")
    merged = dict(docs)
    for key, entry in store.entries.items():
        merged[key] = entry.to_json()
    payload = json.dumps({"format": STORE_FORMAT, "entries": merged}, indent=2, ensure_ascii=False,
                         sort_keys=True)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".pgstore-", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(payload + "\n")
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    store.base_versions = {k: e.version for k, e in store.entries.items()}


# -- reports -------------------------------------------------------------------


def emit_report(r: ValidationReport, fmt: str = "text") -> str:
    """Text with a caret under each failure, or one JSON object per line."""
    if fmt in ("json", "jsonl", "machine"):
        lines = []
        for e in r.entries:
            lines.append(json.dumps({
                "value": e.value,
                "verdict": "pass" if e.passed else "fail",
                "pattern": e.pattern_index,
                "offset": e.fail_offset,
                "atom": e.fail_atom_index,
                "kind": e.fail_kind,
                "reason": e.reason,
            }, ensure_ascii=False))
        return "\n".join(lines) + ("\n" if lines else "")
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    s = r.summary()
    out = [f"{s['total']} values: {s['passed']} passed, {s['failed']} failed"]
    for e in r.entries:
        if e.passed:
            out.append(f"PASS  {e.value}")
        else:
            out.append(f"FAIL  {e.value}")
            out.append(" " * (6 + (e.fail_offset or 0)) + f"^ {e.reason}")
    return "\n".join(out) + "\n"
