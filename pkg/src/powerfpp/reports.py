"""Deterministic report emission (JSON documents, CSV tables).

Re-running with identical inputs must reproduce identical bytes, so all
floats are rendered with repr (shortest round-trip form), keys are
sorted, and row order is fixed by the caller.
"""

from __future__ import annotations

import csv
import io
import json

from .errors import IoFailureError


def render_json(results: dict) -> str:
    return json.dumps(results, indent=2, sort_keys=True, default=_coerce) + "\n"


def _coerce(obj):
    try:
        import numpy as np
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
    except ImportError:
        pass
    raise TypeError(f"not JSON serializable: {type(obj)}")


def render_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def emit_report(results, format: str = "json", path: str = "-") -> None:
    """Write a report document; '-' writes to stdout.

    ``results`` is a dict for JSON, or (header, rows) for CSV.  Criterion
    grids use the columns s, t, f_value, f_err.
    """
    if format == "json":
        text = render_json(results)
    elif format == "csv":
        header, rows = results
        text = render_csv(header, rows)
    else:
        raise ValueError(f"unknown report format {format!r}")
    try:
        if path == "-":
            import sys
            sys.stdout.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)
    except OSError as exc:
        raise IoFailureError(f"cannot write report to {path!r}: {exc}") from exc
