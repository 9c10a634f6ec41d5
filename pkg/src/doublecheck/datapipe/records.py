"""News records in the six-column schema: id, title, summary, text, label, time."""
import csv
import json
import os
import unicodedata
from dataclasses import dataclass, field

from ..errors import IntegrityError, RecordValueError, SchemaError

FIELDS = ("id", "title", "summary", "text", "label", "time")
FAKE, REAL = 0, 1


def normalize(text):
    """NFC-normalize and trim surrounding whitespace."""
    return unicodedata.normalize("NFC", text or "").strip()


@dataclass(frozen=True)
class NewsRecord:
    id: str
    title: str
    summary: str
    text: str
    label: int
    time: str
    char_length: int = field(default=-1, compare=False)

    def __post_init__(self):
        if self.label not in (FAKE, REAL):
            raise RecordValueError(f"label must be 0 or 1, got {self.label!r}")
        if self.char_length < 0:
            object.__setattr__(self, "char_length", len(self.text))

    @classmethod
    def create(cls, id, title, summary, text, label, time=""):
        return cls(normalize(str(id)), normalize(title), normalize(summary), normalize(text), int(label),
                   normalize(time))

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return NewsRecord.create(**d)

    def to_dict(self):
        return {f: getattr(self, f) for f in FIELDS}


def id_sort_key(record_id):
    """Numeric ids order numerically and before non-numeric ones."""
    s = str(record_id)
    return (0, int(s), s) if s.isdigit() else (1, 0, s)


def _parse_label(raw, line):
    s = str(raw).strip()
    if s in ("0", "1"):
        return int(s)
    if s in ("0.0", "1.0"):
        return int(float(s))
    raise RecordValueError(f"bad label value {raw!r} (expected 0 or 1)", line)


def _check_header(keys, path):
    missing = [f for f in FIELDS if f not in keys]
    if missing:
        raise SchemaError(missing, path)


def _build(rows, path):
    records, seen = [], {}
    for line, row in rows:
        rec = NewsRecord.create(
            id=row["id"], title=row["title"] or "", summary=row["summary"] or "", text=row["text"] or "",
            label=_parse_label(row["label"], line), time=row["time"] or "")
        if not rec.id:
            raise RecordValueError("empty id", line)
        if rec.id in seen:
            raise IntegrityError(f"duplicate id {rec.id!r} at line {line} (first seen at line {seen[rec.id]})")
        seen[rec.id] = line
        records.append(rec)
    return records


def detect_format(path):
    ext = os.path.splitext(str(path))[1].lower()
    return "jsonl" if ext in (".jsonl", ".json", ".ndjson") else "csv"


def load_records(path, format=None):
    format = format or detect_format(path)
    if format == "csv":
        with open(path, newline="", encoding="utf-8-sig") as fh:
            reader = csv.DictReader(fh)
            _check_header(reader.fieldnames or [], path)
            # header is line 1; reader.line_num tracks physical lines for multi-line fields
            rows = []
            for row in reader:
                rows.append((reader.line_num, row))
            return _build(rows, path)
    if format == "jsonl":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                if not raw.strip():
                    continue
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise RecordValueError(f"invalid JSON ({exc.msg})", lineno) from None
                _check_header(obj.keys(), f"{path}:{lineno}")
                rows.append((lineno, {k: ("" if obj[k] is None else str(obj[k])) for k in FIELDS}))
        return _build(rows, path)
    raise ValueError(f"unknown format {format!r}")


def save_records(records, path, format=None):
    format = format or detect_format(path)
    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=FIELDS, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
            writer.writeheader()
            for r in records:
                writer.writerow(r.to_dict())
    elif format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")
