"""
CSV and JSON input/output.

CSV files are comma-separated with a header row; floats are written with
``%.17g`` so that every value re-parses to the same double.  JSON outputs
embed the resolved configuration and the library version.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from datetime import date
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import __version__

__all__ = ["ParseError", "SeriesFile", "read_series", "write_csv", "read_csv", "write_json",
           "format_value"]


class ParseError(ValueError):
    """Input file could not be read as the expected table."""


class SeriesFile(NamedTuple):
    y: np.ndarray
    dates: tuple[str, ...] | None


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _open_text(path):
    if path is None or str(path) == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def read_series(path, column: str = "y") -> SeriesFile:
    """Read a series with a ``y`` column and an optional ISO-8601 ``date`` column.

    A file with a single unnamed numeric column is also accepted.

    Raises
    ------
    ParseError
        Empty file, missing column, unparsable or non-finite value (the
        message names the data row, counting from 1), or dates that are
        not strictly increasing.
    """
    text = _open_text(path)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("input is empty")
    header = [c.strip().lower() for c in rows[0]]
    if column in header:
        body = rows[1:]
        col = header.index(column)
    elif len(header) == 1:
        try:
            float(header[0])
            body = rows
        except ValueError:
            body = rows[1:]
        col = 0
    else:
        raise ParseError(f"no {column!r} column in header {rows[0]}")
    if not body:
        raise ParseError("input has a header but no data rows")
    y = np.empty(len(body))
    for i, r in enumerate(body, start=1):
        try:
            y[i - 1] = float(r[col])
        except (ValueError, IndexError) as exc:
            raise ParseError(f"row {i}: cannot parse {column} value") from exc
        if not math.isfinite(y[i - 1]):
            raise ParseError(f"row {i}: non-finite {column} value {r[col].strip()!r}")
    dates = None
    if "date" in header and column in header:
        dcol = header.index("date")
        parsed = []
        for i, r in enumerate(body, start=1):
            try:
                parsed.append(date.fromisoformat(r[dcol].strip()))
            except (ValueError, IndexError) as exc:
                raise ParseError(f"row {i}: invalid ISO-8601 date") from exc
        for i in range(1, len(parsed)):
            if parsed[i] <= parsed[i - 1]:
                raise ParseError(f"row {i + 1}: dates must be strictly increasing")
        dates = tuple(d.isoformat() for d in parsed)
    return SeriesFile(y, dates)


def write_csv(target, rows: Iterable[dict], columns: Sequence[str]) -> None:
    """Write dict rows; ``target`` is a path, an open text stream, or None for stdout."""
    def emit(stream):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row[c]) for c in columns])

    if target is None or str(target) == "-":
        emit(sys.stdout)
    elif hasattr(target, "write"):
        emit(target)
    else:
        with open(target, "w", newline="") as fh:
            emit(fh)


def _parse_cell(s: str):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> list[dict]:
    """Parse a CSV written by :func:`write_csv` back into typed dict rows."""
    text = _open_text(path)
    reader = csv.DictReader(io.StringIO(text))
    return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_json(target, payload: dict, config: dict) -> None:
    """Write ``payload`` with the resolved ``config`` and library version embedded."""
    doc = {"version": __version__, "config": _jsonable(config), **_jsonable(payload)}
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if target is None or str(target) == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)
