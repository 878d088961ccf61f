"""Experiment reports and their CSV / JSON serializations."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

KEY_COLUMNS = ("n", "trial", "stream_id")


@dataclass
class ExperimentReport:
    config: dict
    columns: list[str]
    trials: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    discrepancies: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)
    # excluded from determinism checks
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(inv["passed"] for inv in self.invariants.values())

    def rows_for(self, n: int) -> list[dict]:
        return [r for r in self.trials if r["n"] == n]

    def column(self, name: str, n: int | None = None) -> np.ndarray:
        rows = self.trials if n is None else self.rows_for(n)
        return np.array([_numeric(r.get(name)) for r in rows], dtype=float)

    def to_dict(self, include_metadata: bool = True) -> dict:
        d = {
            "config": self.config,
            "trials": [{c: _plain(r.get(c)) for c in self.columns} for r in self.trials],
            "aggregates": _plain(self.aggregates),
            "discrepancies": _plain(self.discrepancies),
            "invariants": _plain(self.invariants),
        }
        if include_metadata:
            d["metadata"] = self.metadata
        return d


def _numeric(v) -> float:
    if v is None:
        return math.nan
    return float(v)


def _plain(v):
    """Convert numpy scalars/containers to JSON-ready Python values; NaN -> None."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else v
    return v


def aggregate(rows: list[dict], columns: list[str]) -> dict:
    """Per-column mean, standard error, min and max (booleans count as 0/1)."""
    out = {}
    for c in columns:
        if c in KEY_COLUMNS:
            continue
        vals = np.array([_numeric(r.get(c)) for r in rows], dtype=float)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            out[c] = {"mean": None, "std_error": None, "min": None, "max": None, "count": 0}
            continue
        se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else None
        out[c] = {
            "mean": float(vals.mean()),
            "std_error": se,
            "min": float(vals.min()),
            "max": float(vals.max()),
            "count": int(vals.size),
        }
    return out


def _csv_cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def emit(report: ExperimentReport, fmt: str, include_metadata: bool = True) -> bytes:
    if fmt == "csv":
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(report.columns)
        for r in report.trials:
            w.writerow([_csv_cell(r.get(c)) for c in report.columns])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        text = json.dumps(report.to_dict(include_metadata), indent=2, allow_nan=False,
                          ensure_ascii=False)
        return (text + "\n").encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")
