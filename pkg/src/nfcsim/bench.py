"""Scenario runners behind the command-line subcommands.

Each runner turns a Scenario into a Report.  Repeat i of a scenario always
draws from the i-th child of the scenario seed, so reports are identical
byte for byte across runs and independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigParse, FailedAtSwitch
from .protocols import SimSettings, TransferReport, experiment_streams, run_protocol
from .readiness import TableRow, calibrate
from .report import Report
from .runtime import execute_local, offload_task
from .scenario import Scenario
from .storage import CHUNK_SIZE
from .variants import Variant
from .workloads import get_workload

DEFAULT_COMPARE_SIZES = tuple(range(CHUNK_SIZE, 8 * CHUNK_SIZE + 1, CHUNK_SIZE))
DEFAULT_WORKLOAD_SIZES = {"nqueens": tuple(range(9, 16)), "rsa": (2048,)}


def _repeat_runs(scn: Scenario, config, n: int, chunk: int, stochastic: bool) -> List[TransferReport]:
    settings = scn.settings(stochastic)
    out = []
    for child in experiment_streams(scn.seed, scn.repeats):
        out.append(run_protocol(config, n, chunk, settings,
                                **_streams(config, child)))
    return out


def _streams(config, child: np.random.SeedSequence) -> dict:
    if not config.variant.role_switching:
        return {}
    return {"rng": np.random.default_rng(child),
            "jitter_rng": np.random.default_rng(child.spawn(1)[0])}


def _sizes_to_runs(sizes: Sequence[int], chunk: int):
    for size in sizes:
        n = max(1, math.ceil(size / chunk)) if chunk else 1
        yield size, n


def simulate(scn: Scenario) -> Report:
    """Success rate and timing of the scenario's protocol, per payload size."""
    rep = Report(scn.id, scn.repeats)
    exp = scn.experiment
    sizes = exp.sizes or (exp.round_trips * exp.chunk_bytes,)
    runs = (_sizes_to_runs(sizes, exp.chunk_bytes) if exp.sizes
            else [(sizes[0], exp.round_trips)])
    for size, n in runs:
        results = _repeat_runs(scn, scn.protocol, n, exp.chunk_bytes, scn.stochastic)
        good = [r for r in results if r.ok]
        rep.failures += len(results) - len(good)
        rep.add("success_rate", size, [float(r.ok) for r in results])
        rep.add("latency_ms", size, [r.latency_ms for r in good])
        rep.add("bandwidth_kbps", size, [r.bandwidth_kbps for r in good])
        rep.add("switch_count", size, [r.switch_count for r in good])
        rep.add("t_switching_avg_ms", size,
                [r.t_switching_avg_ms for r in good if r.t_switching_avg_ms is not None])
    return rep


def compare_protocols(scn: Scenario) -> Report:
    """Latency, bandwidth and average switch time of both role-switching variants."""
    rep = Report(scn.id, scn.repeats)
    sizes = scn.experiment.sizes or DEFAULT_COMPARE_SIZES
    variants = (Variant.DISABLING_ENABLING, Variant.ENABLING_DISABLING)
    for size, n in _sizes_to_runs(sizes, CHUNK_SIZE):
        chunk = min(size, CHUNK_SIZE)
        means = {}
        for v in variants:
            results = _repeat_runs(scn, replace(scn.protocol, variant=v), n, chunk, False)
            good = [r for r in results if r.ok]
            rep.failures += len(results) - len(good)
            for metric in ("latency_ms", "bandwidth_kbps", "t_switching_avg_ms"):
                vals = [getattr(r, metric) for r in good]
                rep.add(f"{v.value}.{metric}", size, vals)
                if vals:
                    means[(v, metric)] = float(np.mean(vals))
        de, ed = variants
        for metric, name in (("latency_ms", "latency"), ("bandwidth_kbps", "bandwidth"),
                             ("t_switching_avg_ms", "t_switching")):
            if (de, metric) in means and (ed, metric) in means and means[(de, metric)]:
                rep.add(f"ratio.{name}", size, [means[(ed, metric)] / means[(de, metric)]])
    return rep


def offload_bench(scn: Scenario, plaintext: Optional[bytes] = None) -> Report:
    """Local on each device versus offloaded, per workload size."""
    if scn.workload is None:
        raise ConfigParse("offload-bench needs a 'workload' section")
    wspec = scn.workload
    w = get_workload(wspec.name)
    sizes = wspec.sizes or DEFAULT_WORKLOAD_SIZES[w.name]
    text = plaintext if plaintext is not None else wspec.plaintext
    extra = {"plaintext": text} if text is not None else {}
    rep = Report(scn.id, scn.repeats)
    children = experiment_streams(scn.seed, scn.repeats)
    for size in sizes:
        task = w.make_task(size, seed=scn.seed, **extra)
        lm = execute_local(scn.main, task, wspec.execute)
        lo = execute_local(scn.offloadee, task, wspec.execute)
        offs = []
        for child in children:
            seed = int(child.generate_state(1, np.uint64)[0])
            settings = replace(scn.settings(), seed=seed)
            try:
                offs.append(offload_task(scn.main, scn.offloadee, task, scn.protocol, settings,
                                         wspec.execute))
            except FailedAtSwitch:
                rep.failures += 1
        rep.add("local_main.time_ms", size, [lm.wall_time_ms] * scn.repeats)
        rep.add("local_offloadee.time_ms", size, [lo.wall_time_ms] * scn.repeats)
        rep.add("offloaded.time_ms", size, [o.wall_time_ms for o in offs])
        rep.add("local_main.energy_mj", size, [lm.main_energy_mj] * scn.repeats)
        rep.add("offloaded.main_energy_mj", size, [o.main_energy_mj for o in offs])
        rep.add("offloaded.offloadee_energy_mj", size, [o.offloadee_energy_mj for o in offs])
        rep.add("energy_ratio", size, [lm.main_energy_mj / o.main_energy_mj
                                       for o in offs if o.main_energy_mj > 0])
        rep.add("time_ratio", size, [o.wall_time_ms / lm.wall_time_ms
                                     for o in offs if lm.wall_time_ms > 0])
        if wspec.execute and offs and any(o.result != lm.result for o in offs):
            raise AssertionError(f"offloaded result differs from local at size {size}")
    return rep


def calibration_report(rows: Sequence[TableRow], threshold: float, round_trips: int = 50,
                       seed: int = 0):
    """Fitted model plus a report of the recommended delays."""
    model = calibrate(rows, round_trips=round_trips, seed=seed, threshold=threshold)
    rep = Report("calibration")
    for variant, stages in sorted(model.recommended.items()):
        for stage, delay in sorted(stages.items()):
            rep.add(f"recommended.{variant}.{stage}", None,
                    [float("nan") if delay is None else delay])
    return model, rep
