"""Deterministic CSV output: shortest round-trip floats, LF line endings."""

from __future__ import annotations

import csv
import io
from pathlib import Path


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    return repr(float(value))


def parse(text: str):
    """Inverse of :func:`fmt` for one cell."""
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def dumps(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def loads(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[parse(cell) for cell in row] for row in reader]


def write(path, header, rows) -> None:
    Path(path).write_text(dumps(header, rows), encoding="utf-8", newline="")


def read(path):
    return loads(Path(path).read_text(encoding="utf-8"))
