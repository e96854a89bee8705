"""Stochastic switch-readiness model and its calibration from success tables.

A role switch succeeds with a probability that depends only on the configured
delay(s).  Tables give experiment-level success rates for experiments of a
fixed number of switches; assuming independent switches, the per-switch
probability is the matching root of the experiment rate.  Between calibration
points the probability is interpolated linearly; outside them it is clamped.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigParse, NonMonotoneInput, OutOfCalibrationRange
from .variants import Variant

DEFAULT_ROUND_TRIPS = 50
DEFAULT_THRESHOLD = 0.80


def switches_for(round_trips: int) -> int:
    return 2 * round_trips - 1


@dataclass(frozen=True)
class ReadinessCurve:
    """Monotone non-decreasing piecewise-linear map delay_ms -> probability."""

    delays_ms: Tuple[float, ...]
    probs: Tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(x) for x in self.delays_ms)
        p = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "delays_ms", d)
        object.__setattr__(self, "probs", p)
        if not d or len(d) != len(p):
            raise ValueError("curve needs matching, non-empty delay and probability lists")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("curve delays must be strictly increasing")
        if any(not 0.0 <= x <= 1.0 for x in p):
            raise ValueError("curve probabilities must lie in [0, 1]")
        if any(b < a for a, b in zip(p, p[1:])):
            raise ValueError("curve probabilities must be non-decreasing")

    def covers(self, delay_ms: float) -> bool:
        return self.delays_ms[0] <= delay_ms <= self.delays_ms[-1]

    def __call__(self, delay_ms: float) -> float:
        return float(np.interp(delay_ms, self.delays_ms, self.probs))


@dataclass(frozen=True)
class ReadinessModel:
    """Per-variant, per-stage readiness curves plus the Monte Carlo seed.

    Variants without a curve (the tap-driven ones) switch with certainty.
    In deterministic mode a switch succeeds iff its probability reaches
    `deterministic_cutoff`, the per-switch level at which a reference
    experiment of `reference_switches` switches succeeds half the time.
    """

    curves: Mapping[str, Mapping[str, ReadinessCurve]]
    seed: int = 0
    reference_switches: int = switches_for(DEFAULT_ROUND_TRIPS)
    recommended: Mapping[str, Mapping[str, Optional[float]]] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.reference_switches < 1:
            raise ValueError("reference_switches must be >= 1")

    @property
    def deterministic_cutoff(self) -> float:
        return 0.5 ** (1.0 / self.reference_switches)

    def stage_probability(self, variant, stage: str, delay_ms: float) -> float:
        variant = Variant.parse(variant)
        curve = self.curves.get(variant.value, {}).get(stage)
        if curve is None:
            return 1.0
        if delay_ms < 0:
            raise ValueError(f"delay {stage}={delay_ms} is negative")
        if not curve.covers(delay_ms):
            warnings.warn(
                f"{variant.value} {stage}={delay_ms} ms outside calibrated "
                f"[{curve.delays_ms[0]:g}, {curve.delays_ms[-1]:g}]; clamping",
                OutOfCalibrationRange, stacklevel=3)
        return curve(delay_ms)

    def probability(self, variant, delays: Mapping[str, float]) -> float:
        variant = Variant.parse(variant)
        p = 1.0
        for stage, delay in delays.items():
            p *= self.stage_probability(variant, stage, delay)
        return p

    def with_seed(self, seed: int) -> "ReadinessModel":
        return ReadinessModel(self.curves, int(seed), self.reference_switches, self.recommended)

    # -- persistence ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "seed": int(self.seed),
            "reference_switches": self.reference_switches,
            "curves": {v: {s: {"delay_ms": list(c.delays_ms), "p": list(c.probs)}
                           for s, c in sorted(stages.items())}
                       for v, stages in sorted(self.curves.items())},
            "recommended": {v: dict(sorted(r.items())) for v, r in sorted(self.recommended.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReadinessModel":
        try:
            curves = {Variant.parse(v).value: {s: ReadinessCurve(tuple(c["delay_ms"]), tuple(c["p"]))
                                               for s, c in stages.items()}
                      for v, stages in d["curves"].items()}
            return cls(curves, int(d.get("seed", 0)),
                       int(d.get("reference_switches", switches_for(DEFAULT_ROUND_TRIPS))),
                       {Variant.parse(v).value: dict(r) for v, r in d.get("recommended", {}).items()})
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigParse(f"bad readiness model: {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path) -> "ReadinessModel":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as e:
            raise ConfigParse(f"{path}: {e}") from e


def per_switch_probability(model: ReadinessModel, variant, delays: Mapping[str, float]) -> float:
    """Probability that one role switch under `variant` with `delays` succeeds."""
    return model.probability(variant, delays)


# -- calibration tables ----------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    """One measured point: experiment success rate at a delay, other stage held."""

    variant: Variant
    stage: str
    delay_ms: float
    success_rate: float
    held_stage: Optional[str] = None
    held_delay_ms: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not 0.0 <= self.success_rate <= 1.0:
            raise ValueError(f"success rate {self.success_rate} outside [0, 1]")
        if self.delay_ms < 0:
            raise ValueError("delay must be non-negative")
        if (self.held_stage is None) != (self.held_delay_ms is None):
            raise ValueError("held_stage and held_delay_ms go together")


def parse_table(text: str) -> List[TableRow]:
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    need = {"variant", "stage", "delay_ms", "success_rate"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise ConfigParse(f"calibration table needs columns {sorted(need)}")
    for i, r in enumerate(reader, start=2):
        try:
            rate = float(r["success_rate"])
            if rate > 1.0:  # percentages are accepted too
                rate /= 100.0
            held = (r.get("held_stage") or "").strip() or None
            held_d = (r.get("held_delay_ms") or "").strip()
            rows.append(TableRow(r["variant"], r["stage"].strip(), float(r["delay_ms"]), rate,
                                 held, float(held_d) if held_d else None))
        except (TypeError, ValueError) as e:
            raise ConfigParse(f"calibration table line {i}: {e}") from e
    if not rows:
        raise ConfigParse("calibration table is empty")
    return rows


def load_table(path) -> List[TableRow]:
    return parse_table(Path(path).read_text())


def default_table() -> List[TableRow]:
    text = resources.files("nfcsim").joinpath("data/switch_success_rates.csv").read_text()
    return parse_table(text)


def isotonic(values: Sequence[float], weights: Optional[Sequence[float]] = None) -> List[float]:
    """Least-squares non-decreasing fit (pool adjacent violators)."""
    w = [1.0] * len(values) if weights is None else [float(x) for x in weights]
    blocks: List[List[float]] = []  # [mean, weight, count]
    for v, wt in zip(values, w):
        blocks.append([float(v), wt, 1])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            m2, w2, c2 = blocks.pop()
            m1, w1, c1 = blocks.pop()
            blocks.append([(m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, c1 + c2])
    out: List[float] = []
    for m, _, c in blocks:
        out.extend([m] * c)
    return out


def _stage_points(rows: Sequence[TableRow], label: str) -> Tuple[List[float], List[float]]:
    by_delay: Dict[float, List[float]] = defaultdict(list)
    for r in rows:
        by_delay[r.delay_ms].append(r.success_rate)
    delays = sorted(by_delay)
    rates = [float(np.mean(by_delay[d])) for d in delays]
    fitted = isotonic(rates, [len(by_delay[d]) for d in delays])
    if fitted != rates:
        warnings.warn(f"{label}: success rates decrease with delay; using isotonic fit",
                      NonMonotoneInput, stacklevel=3)
    return delays, fitted


def calibrate(rows: Iterable[TableRow], round_trips: int = DEFAULT_ROUND_TRIPS,
              seed: int = 0, threshold: float = DEFAULT_THRESHOLD) -> ReadinessModel:
    """Fit per-switch readiness curves to experiment-level success tables.

    Stages are fitted in dependency order.  A stage measured while the other
    stage sat beyond its own tabulated range treats that other stage as
    certain, and contributes an anchor (held delay, p=1) to it.  A stage
    measured with the other stage inside its range divides out that stage's
    already-fitted experiment rate.
    """
    rows = list(rows)
    k = switches_for(round_trips)
    groups: Dict[Tuple[str, str], List[TableRow]] = defaultdict(list)
    for r in rows:
        groups[(r.variant.value, r.stage)].append(r)

    def held_inside(key) -> bool:
        grp = groups[key]
        held = {(r.held_stage, r.held_delay_ms) for r in grp}
        if len(held) != 1:
            raise ConfigParse(f"{key[0]}/{key[1]}: rows disagree on the held stage")
        (hs, hd), = held
        other = groups.get((key[0], hs)) if hs else None
        return bool(other) and hd <= max(r.delay_ms for r in other)

    curves: Dict[str, Dict[str, ReadinessCurve]] = defaultdict(dict)
    anchors: Dict[Tuple[str, str], List[float]] = defaultdict(list)
    order = sorted(groups, key=lambda key: (held_inside(key), key))
    for key in order:
        variant, stage = key
        grp = groups[key]
        delays, rates = _stage_points(grp, f"{variant}/{stage}")
        hs, hd = grp[0].held_stage, grp[0].held_delay_ms
        if held_inside(key):
            if hs not in curves[variant]:
                raise ConfigParse(f"{variant}/{stage} depends on {hs}, which depends on it")
            base = curves[variant][hs](hd) ** k
            if base <= 0:
                raise ConfigParse(f"{variant}/{stage}: held stage {hs}={hd} never succeeds")
            probs = [min(1.0, r / base) ** (1.0 / k) for r in rates]
        else:
            probs = [r ** (1.0 / k) for r in rates]
            if hs is not None:
                anchors[(variant, hs)].append(hd)
        curves[variant][stage] = ReadinessCurve(tuple(delays), tuple(probs))

    for (variant, stage), held_delays in anchors.items():
        cur = curves[variant].get(stage)
        if cur is None:
            continue
        pts = dict(zip(cur.delays_ms, cur.probs))
        for d in held_delays:
            pts.setdefault(float(d), 1.0)
        ds = sorted(pts)
        curves[variant][stage] = ReadinessCurve(tuple(ds), tuple(isotonic([pts[d] for d in ds])))

    recommended = recommend_delays(rows, threshold)
    return ReadinessModel({v: dict(s) for v, s in curves.items()}, int(seed), k, recommended)


def recommend_delays(rows: Iterable[TableRow],
                     threshold: float = DEFAULT_THRESHOLD) -> Dict[str, Dict[str, Optional[float]]]:
    """Smallest tabulated delay per stage whose measured success rate meets `threshold`."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    best: Dict[str, Dict[str, Optional[float]]] = defaultdict(dict)
    for r in sorted(rows, key=lambda r: (r.variant.value, r.stage, r.delay_ms)):
        stage = best[r.variant.value]
        stage.setdefault(r.stage, None)
        if stage[r.stage] is None and r.success_rate >= threshold - 1e-12:
            stage[r.stage] = r.delay_ms
    return {v: dict(s) for v, s in best.items()}


@functools.lru_cache(maxsize=None)
def _default_model() -> ReadinessModel:
    return calibrate(default_table())


def default_readiness(seed: int = 0) -> ReadinessModel:
    """Model calibrated on the bundled success-rate tables."""
    return _default_model().with_seed(seed)
