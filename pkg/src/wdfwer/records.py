"""CSV / JSON-lines serialization of estimates."""

from __future__ import annotations

import csv
import io
import json

CSV_HEADER = ("procedure", "sided", "k", "metric", "n", "alpha", "lambda1", "delta",
              "model", "reps", "seed", "estimate", "std_error")

_INT = {"k", "n", "reps", "seed"}
_FLOAT = {"alpha", "lambda1", "delta", "estimate", "std_error"}


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(records, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow([_cell(rec.get(col)) for col in CSV_HEADER])
    return buf.getvalue()


def parse_row(row: dict) -> dict:
    """Typed record from a CSV row of strings."""
    out = {}
    for col in CSV_HEADER:
        raw = row[col]
        if raw == "":
            out[col] = None
        elif col in _INT:
            out[col] = int(raw)
        elif col in _FLOAT:
            out[col] = float(raw)
        else:
            out[col] = raw
    return out


def from_csv(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
    return [parse_row(row) for row in reader]


def to_json(record: dict) -> str:
    return json.dumps({col: record.get(col) for col in CSV_HEADER})


def from_json(text: str) -> dict:
    d = json.loads(text)
    return {col: d.get(col) for col in CSV_HEADER}


def to_jsonl(records) -> str:
    return "".join(to_json(r) + "\n" for r in records)
