"""Benchmark report rows and their CSV / JSON renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

CSV_HEADER = ("scenario_id", "metric", "size", "value", "stddev")


def fmt_float(x: Optional[float]) -> str:
    """Stable text for a float: 10 significant digits, no locale, no -0."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.10g}"
    return "0" if s == "-0" else s


def _json_num(x: float):
    # same rounding as the CSV; non-finite values stay strings (not valid JSON numbers)
    return float(fmt_float(x)) if math.isfinite(x) else fmt_float(x)


@dataclass(frozen=True)
class Row:
    scenario_id: str
    metric: str
    size: Optional[int]
    value: float
    stddev: Optional[float] = None


@dataclass
class Report:
    scenario_id: str
    repeats: int = 1
    rows: List[Row] = field(default_factory=list)
    failures: int = 0

    def add(self, metric: str, size: Optional[int], values: Sequence[float]) -> None:
        """Mean of `values`; the (population) stddev only when repeats > 1."""
        vals = np.asarray(values, dtype=float)
        if vals.size == 0:
            return
        sd = None
        if self.repeats > 1:
            # identical samples give exactly 0, not rounding noise
            sd = 0.0 if np.ptp(vals) == 0 else float(vals.std())
        self.rows.append(Row(self.scenario_id, metric, size, float(vals.mean()), sd))

    def extend(self, other: "Report") -> None:
        self.rows.extend(other.rows)
        self.failures += other.failures

    def value(self, metric: str, size: Optional[int] = None) -> float:
        for r in self.rows:
            if r.metric == metric and (size is None or r.size == size):
                return r.value
        raise KeyError(f"no row {metric!r} at size {size!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.scenario_id, r.metric, "" if r.size is None else r.size,
                        fmt_float(r.value), fmt_float(r.stddev)])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            d = asdict(r)
            d["value"] = _json_num(r.value)
            d["stddev"] = None if r.stddev is None else _json_num(r.stddev)
            rows.append(d)
        doc = {"scenario_id": self.scenario_id, "repeats": self.repeats,
               "failures": self.failures, "rows": rows}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown report format {fmt!r}")
