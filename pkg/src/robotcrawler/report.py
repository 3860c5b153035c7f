"""CSV / JSON reports.

CSV layout (column order of the data block is fixed per experiment kind)::

    #schema_version,1
    #kind,<kind>
    #valid,true
    #config,<json object>
    <column header>
    <one row per sample>
    #summary
    <metric>,<value>
    ...

Floats are written with 17 significant digits, so values survive a
CSV round trip bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

from .experiments import SCHEMA_VERSION, ResultRecord

_INT = re.compile(r"^-?\d+$")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        text = format(value, ".17g")
        if not any(ch in text for ch in ".eEn"):
            text += ".0"
        return text
    return str(value)


def _parse(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def to_json(rec: ResultRecord) -> str:
    return json.dumps({
        "schema_version": SCHEMA_VERSION,
        "kind": rec.kind,
        "valid": rec.valid,
        "config": rec.config,
        "columns": rec.columns,
        "rows": rec.rows,
        "summary": rec.summary,
    }, indent=1) + "\n"


def to_csv(rec: ResultRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["#schema_version", SCHEMA_VERSION])
    w.writerow(["#kind", rec.kind])
    w.writerow(["#valid", _fmt(rec.valid)])
    w.writerow(["#config", json.dumps(rec.config)])
    w.writerow(rec.columns)
    for row in rec.rows:
        w.writerow([_fmt(v) for v in row])
    w.writerow(["#summary"])
    for key, value in rec.summary.items():
        w.writerow([key, _fmt(value)])
    return buf.getvalue()


def emit_report(rec: ResultRecord, fmt: str = "json", path=None) -> str:
    """Serialize ``rec`` and, when ``path`` is given, write it there."""
    if fmt == "json":
        text = to_json(rec)
    elif fmt == "csv":
        text = to_csv(rec)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def _from_csv(text: str) -> ResultRecord:
    lines = list(csv.reader(io.StringIO(text)))
    meta = {}
    i = 0
    while i < len(lines) and lines[i] and lines[i][0].startswith("#") and lines[i][0] != "#summary":
        meta[lines[i][0][1:]] = lines[i][1]
        i += 1
    if int(meta.get("schema_version", -1)) != SCHEMA_VERSION:
        raise ValueError("unsupported report schema")
    columns = lines[i]  # written even when empty
    i += 1
    rows = []
    while i < len(lines) and lines[i] != ["#summary"]:
        rows.append([_parse(v) for v in lines[i]])
        i += 1
    summary = {key: _parse(value) for key, value in lines[i + 1:]}
    return ResultRecord(meta["kind"], json.loads(meta["config"]), columns, rows, summary,
                        valid=meta["valid"] == "true")


def load_report(source) -> ResultRecord:
    """Load a report from text or a path; the format is detected from the content."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError("unsupported report schema")
        return ResultRecord(d["kind"], d["config"], d["columns"], d["rows"], d["summary"],
                            valid=d["valid"])
    return _from_csv(text)
