"""Device models, local and offloaded task execution, and energy accounting.

Energy is power times time over a per-device list of power-state intervals
(`compute`, `nfc`, `idle`).  Offloaded runs take their intervals from the
simulated link, so wall time and energy both come from the same trace.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .clock import ActivityLog, Interval, SimClock, ms_to_us
from .errors import OverlappingIntervals
from .link import Device
from .protocols import MAIN, OFFLOADEE, RoleSwitchDriver, SimSettings
from .variants import ProtocolConfig, Variant
from .workloads import Workload, decode_task, get_workload, workload_for
from .workloads.rsa import RsaTask, verify_rsa_result

STATES = ("compute", "nfc", "idle")


@dataclass(frozen=True)
class DeviceProfile:
    """Relative compute speed and per-state power draw (mW)."""

    name: str
    speed_factor: float = 1.0
    power_compute_mw: float = 2000.0
    power_nfc_mw: float = 400.0
    power_idle_mw: float = 50.0

    def __post_init__(self):
        if self.speed_factor <= 0:
            raise ValueError("speed_factor must be positive")
        if min(self.power_compute_mw, self.power_nfc_mw, self.power_idle_mw) < 0:
            raise ValueError("powers must be non-negative")
        if not self.power_nfc_mw < self.power_compute_mw:
            raise ValueError("NFC power must be below compute power")

    def power(self, state: str) -> float:
        try:
            return {"compute": self.power_compute_mw, "nfc": self.power_nfc_mw,
                    "idle": self.power_idle_mw}[state]
        except KeyError:
            raise ValueError(f"unknown power state {state!r}") from None


# Same SoC; the observed 2.5x compute gap is carried entirely by speed_factor.
XIAOMI_MI3 = DeviceProfile("xiaomi_mi3", speed_factor=1.0)
GALAXY_NOTE3 = DeviceProfile("galaxy_note3", speed_factor=2.5)
PROFILES: Dict[str, DeviceProfile] = {p.name: p for p in (XIAOMI_MI3, GALAXY_NOTE3)}


def get_profile(name: str) -> DeviceProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown device profile {name!r}; known: {sorted(PROFILES)}") from None


class Mode(enum.Enum):
    LOCAL = "local"
    OFFLOADED = "offloaded"


@dataclass(frozen=True)
class TaskOutcome:
    result: bytes
    wall_time_ms: float
    main_energy_mj: float
    offloadee_energy_mj: float
    mode: Mode
    trace: Tuple[Interval, ...] = field(default=(), repr=False)
    switch_count: int = 0
    chunks: Tuple[bytes, ...] = field(default=(), repr=False)


def energy_of_trace(trace: Iterable[Interval], profile: DeviceProfile) -> float:
    """Energy in mJ: sum of power(state) * duration over the intervals."""
    by_dev: Dict[str, List[Interval]] = {}
    for iv in trace:
        by_dev.setdefault(iv.device, []).append(iv)
    total_uj = 0.0
    for dev, ivs in by_dev.items():
        ivs.sort(key=lambda iv: (iv.start_us, iv.end_us))
        for a, b in zip(ivs, ivs[1:]):
            if b.start_us < a.end_us:
                raise OverlappingIntervals(
                    f"{dev}: {a.state}[{a.start_us},{a.end_us}) overlaps {b.state}[{b.start_us},{b.end_us})")
        # mW * us = nJ
        total_uj += sum(profile.power(iv.state) * iv.duration_us for iv in ivs) / 1000
    return total_uj / 1000


def _resolve(task, workload: Optional[Workload]) -> Workload:
    return workload if workload is not None else workload_for(task)


def execute_local(device: DeviceProfile, task, execute: bool = True,
                  workload: Optional[Workload] = None) -> TaskOutcome:
    """Run `task` on one device; time is cost / speed, all of it at compute power."""
    w = _resolve(task, workload)
    dur = ms_to_us(w.base_cost_ms(task) / device.speed_factor)
    chunks = tuple(w.execute(task)) if execute else ()
    trace = (Interval(MAIN.name, "compute", 0, dur),) if dur else ()
    return TaskOutcome(b"".join(chunks), dur / 1000, energy_of_trace(trace, device), 0.0,
                       Mode.LOCAL, trace, 0, chunks)


def offload_task(main: DeviceProfile, offloadee: DeviceProfile, task,
                 protocol: Optional[ProtocolConfig] = None, settings: Optional[SimSettings] = None,
                 execute: bool = True, verify: bool = True,
                 workload: Optional[Workload] = None) -> TaskOutcome:
    """Ship `task` to the offloadee over NFC, compute there, and read the result back.

    The offloadee recovers the workload from the task bytes unless an
    explicit `workload` is given.  With `execute=False` the computation is
    only timed and the result chunks are zero-filled placeholders of the
    right size.  Raises FailedAtSwitch if a role switch does not come up.
    """
    w = _resolve(task, workload)
    protocol = protocol or ProtocolConfig(Variant.ENABLING_DISABLING)
    clock, log = SimClock(), ActivityLog()
    mdev, odev = Device(MAIN), Device(OFFLOADEE)
    driver = RoleSwitchDriver(protocol, mdev, odev, settings, clock=clock, activity=log)

    n_in = mdev.storage.load_outgoing(w.encode(task))
    driver.send(mdev, n_in)
    payload = odev.storage.received(n_in)
    rw, rtask = (workload, workload.decode(payload)) if workload else decode_task(payload)

    start = clock.now
    end = start + ms_to_us(rw.base_cost_ms(rtask) / offloadee.speed_factor)
    clock.note("compute", odev.name, f"app={rw.name} until={end}")
    chunks = rw.execute(rtask) if execute else [bytes(s) for s in rw.result_sizes(rtask)]
    for i, c in enumerate(chunks):
        odev.storage.set_message_to_send(c, i)
    log.add(odev.name, "compute", start, end)
    driver.send(odev, len(chunks), hold_until=end)
    driver.close()

    received = [mdev.storage.get_message_received(i) for i in range(len(chunks))]
    if execute and verify and isinstance(task, RsaTask):
        verify_rsa_result(task, received)
    trace = tuple(log.filled((MAIN.name, OFFLOADEE.name), 0, clock.now))
    return TaskOutcome(
        b"".join(received), clock.now / 1000,
        energy_of_trace((iv for iv in trace if iv.device == MAIN.name), main),
        energy_of_trace((iv for iv in trace if iv.device == OFFLOADEE.name), offloadee),
        Mode.OFFLOADED, trace, driver.switch_count, tuple(received))


@dataclass(frozen=True)
class CrossoverRow:
    size: int
    local_time_ms: float
    offload_time_ms: float
    local_energy_mj: float
    offload_energy_mj: float

    @property
    def ratio(self) -> float:
        """Local over offloaded main-device energy; above 1 means offloading pays."""
        if self.offload_energy_mj == 0:
            return float("inf")
        return self.local_energy_mj / self.offload_energy_mj

    @property
    def beneficial(self) -> bool:
        return self.offload_energy_mj < self.local_energy_mj


@dataclass(frozen=True)
class CrossoverTable:
    rows: Tuple[CrossoverRow, ...]

    @property
    def crossover(self) -> Optional[int]:
        """Smallest size from which offloading saves main-device energy."""
        for row in self.rows:
            if row.beneficial:
                return row.size
        return None

    def ratios(self) -> List[float]:
        return [r.ratio for r in self.rows]


def crossover_analysis(main: DeviceProfile, offloadee: DeviceProfile,
                       family: Union[str, Workload], sizes: Sequence[int],
                       protocol: Optional[ProtocolConfig] = None,
                       settings: Optional[SimSettings] = None, execute: bool = False,
                       seed: int = 0) -> CrossoverTable:
    """Local-versus-offloaded comparison on the main device for each size.

    Costs come from the family's cost model; `execute=True` additionally runs
    every task (slow for large boards).
    """
    w = get_workload(family) if isinstance(family, str) else family
    rows = []
    for size in sizes:
        task = w.make_task(size, seed=seed)
        local = execute_local(main, task, execute, workload=w)
        off = offload_task(main, offloadee, task, protocol, settings, execute, workload=w)
        rows.append(CrossoverRow(int(size), local.wall_time_ms, off.wall_time_ms,
                                 local.main_energy_mj, off.main_energy_mj))
    return CrossoverTable(tuple(rows))
