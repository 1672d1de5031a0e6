"""CSV / JSON output with stable formatting.

Floats are written with 12 significant digits and lines end in LF, so equal
inputs give byte-identical files.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Iterable, Sequence

from .uhlmann import PhaseResult

NEAR_CRITICAL = "NEAR_CRITICAL"


def fmt_float(x: float) -> str:
    return "%.12g" % x


def phase_token(phase: float, status: str) -> str:
    """A float in (-pi, pi], NEAR_CRITICAL or ERROR:<code>."""
    if status == "defined":
        return fmt_float(phase)
    if status == "near-critical":
        return NEAR_CRITICAL
    if status.startswith("error:"):
        return "ERROR:" + status.split(":", 1)[1]
    raise ValueError(f"unknown status {status!r}")


def result_token(res: PhaseResult) -> str:
    return phase_token(res.phase, res.status)


def _cell(value) -> str:
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend("# " + c for c in comment.splitlines())
    lines.append(",".join(header))
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def render_json(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, allow_nan=False) + "\n"


def _json_value(value):
    """Phase tokens that are numbers go out as JSON numbers."""
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


def render_rows(fmt: str, header: Sequence[str], rows: list[Sequence], comment: str | None = None) -> str:
    if fmt == "csv":
        return render_csv(header, rows, comment)
    if fmt == "json":
        records = [{k: _json_value(v) for k, v in zip(header, row)} for row in rows]
        return render_json({"comment": comment, "rows": records})
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def write_text(text: str, path: str | Path | None) -> None:
    """Write to ``path`` (or stdout when None) with LF line endings."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
