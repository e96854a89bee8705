"""Scenario files: a versioned YAML description of one benchmark setup.

    schema: 1
    id: de-t700
    seed: 7
    repeats: 20
    stochastic: true
    protocol: {variant: disabling_enabling, t: 700}
    timing: {t_apdu_2k_ms: 329, jitter_ms: 0, detection_ms: 10}
    readiness: default            # or a path to a calibrated model JSON
    experiment: {round_trips: 50, chunk_bytes: 2048, sizes: [2048, 4096]}
    devices:
      - {profile: xiaomi_mi3}
      - {profile: galaxy_note3, speed_factor: 2.5}
    workload: {name: nqueens, sizes: [9, 10, 11], execute: false}

Relative paths resolve against the scenario file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from .errors import ConfigParse, UnknownWorkload
from .protocols import SimSettings
from .readiness import ReadinessModel, default_readiness
from .runtime import GALAXY_NOTE3, PROFILES, XIAOMI_MI3, DeviceProfile
from .storage import CHUNK_SIZE
from .timing import TimingModel
from .variants import ProtocolConfig, Variant
from .workloads import get_workload

SCHEMA_VERSION = 1
_TOP = {"schema", "id", "seed", "repeats", "stochastic", "protocol", "timing", "readiness",
        "experiment", "devices", "workload", "description"}


@dataclass(frozen=True)
class ExperimentSpec:
    round_trips: int = 1
    chunk_bytes: int = CHUNK_SIZE
    sizes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.round_trips < 1:
            raise ValueError("round_trips must be >= 1")
        if not 0 <= self.chunk_bytes <= CHUNK_SIZE:
            raise ValueError(f"chunk_bytes must be in [0, {CHUNK_SIZE}]")
        if any(s < 1 for s in self.sizes):
            raise ValueError("sizes must be positive byte counts")


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    sizes: Tuple[int, ...] = ()
    execute: bool = False
    plaintext: Optional[bytes] = None

    def __post_init__(self):
        get_workload(self.name)


@dataclass(frozen=True)
class Scenario:
    id: str
    seed: int = 0
    repeats: int = 1
    stochastic: bool = False
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    timing: TimingModel = field(default_factory=TimingModel)
    detection_ms: float = 10.0
    readiness: ReadinessModel = field(default_factory=default_readiness)
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)
    devices: Tuple[DeviceProfile, ...] = (XIAOMI_MI3, GALAXY_NOTE3)
    workload: Optional[WorkloadSpec] = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if len(self.devices) != 2:
            raise ValueError("a scenario names exactly two devices: main, then offloadee")

    @property
    def main(self) -> DeviceProfile:
        return self.devices[0]

    @property
    def offloadee(self) -> DeviceProfile:
        return self.devices[1]

    def settings(self, stochastic: Optional[bool] = None) -> SimSettings:
        return SimSettings(self.timing, self.detection_ms,
                           self.stochastic if stochastic is None else stochastic,
                           self.readiness.with_seed(self.seed), seed=self.seed)

    def override(self, seed: Optional[int] = None, repeats: Optional[int] = None) -> "Scenario":
        kw = {}
        if seed is not None:
            kw["seed"] = seed
        if repeats is not None:
            kw["repeats"] = repeats
        try:
            return replace(self, **kw)
        except ValueError as e:
            raise ConfigParse(str(e)) from None


def _section(d: Mapping, key: str) -> Dict[str, Any]:
    v = d.get(key) or {}
    if not isinstance(v, Mapping):
        raise ConfigParse(f"'{key}' must be a mapping")
    return dict(v)


def _only(d: Mapping, allowed, where: str):
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigParse(f"unknown key(s) in {where}: {sorted(extra)}")


def _protocol(d: Mapping) -> ProtocolConfig:
    names = {f.name for f in fields(ProtocolConfig)}
    kw = {}
    for k, v in d.items():
        key = k if k in names else f"{k}_ms"
        if key not in names:
            raise ConfigParse(f"unknown protocol key {k!r}")
        kw[key] = v if key == "variant" else float(v)
    return ProtocolConfig(**kw)


def _device(d, index: int) -> DeviceProfile:
    if isinstance(d, str):
        d = {"profile": d}
    if not isinstance(d, Mapping):
        raise ConfigParse(f"devices[{index}] must be a mapping or a profile name")
    d = dict(d)
    base = PROFILES.get(d.pop("profile", None) or "", None)
    if base is None and "name" not in d:
        raise ConfigParse(f"devices[{index}] needs a known 'profile' or a 'name'")
    allowed = {f.name for f in fields(DeviceProfile)}
    _only(d, allowed, f"devices[{index}]")
    return replace(base, **d) if base else DeviceProfile(**d)


def parse_scenario(d: Any, base_dir: Path = Path(".")) -> Scenario:
    if not isinstance(d, Mapping):
        raise ConfigParse("scenario must be a mapping")
    if d.get("schema") != SCHEMA_VERSION:
        raise ConfigParse(f"unsupported or missing schema (expected schema: {SCHEMA_VERSION})")
    _only(d, _TOP, "scenario")
    try:
        timing = _section(d, "timing")
        detection = float(timing.pop("detection_ms", 10.0))
        _only(timing, {f.name for f in fields(TimingModel)}, "timing")
        readiness = d.get("readiness", "default")
        if readiness in (None, "default"):
            model = default_readiness()
        else:
            model = ReadinessModel.load(base_dir / str(readiness))
        exp = _section(d, "experiment")
        _only(exp, {"round_trips", "chunk_bytes", "sizes"}, "experiment")
        exp["sizes"] = tuple(int(s) for s in exp.get("sizes", ()))
        wl = None
        if d.get("workload") is not None:
            w = _section(d, "workload")
            _only(w, {"name", "sizes", "execute", "plaintext", "plaintext_file"}, "workload")
            text = w.pop("plaintext", None)
            pfile = w.pop("plaintext_file", None)
            plaintext = (base_dir / pfile).read_bytes() if pfile else (
                text.encode() if text is not None else None)
            wl = WorkloadSpec(str(w["name"]), tuple(int(s) for s in w.get("sizes", ())),
                              bool(w.get("execute", False)), plaintext)
        devices = d.get("devices")
        devs = (tuple(_device(x, i) for i, x in enumerate(devices)) if devices is not None
                else (XIAOMI_MI3, GALAXY_NOTE3))
        return Scenario(
            id=str(d.get("id", "scenario")), seed=int(d.get("seed", 0)),
            repeats=int(d.get("repeats", 1)), stochastic=bool(d.get("stochastic", False)),
            protocol=_protocol(_section(d, "protocol")), timing=TimingModel(**timing),
            detection_ms=detection, readiness=model,
            experiment=ExperimentSpec(**exp), devices=devs, workload=wl)
    except (ConfigParse, UnknownWorkload):
        raise
    except (KeyError, TypeError, ValueError, OSError) as e:
        raise ConfigParse(f"invalid scenario: {e}") from e


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as e:
        raise ConfigParse(f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigParse(f"{path}: {e}") from e
    return parse_scenario(data, path.parent)


def bundled_scenarios() -> List[str]:
    root = resources.files("nfcsim").joinpath("data/scenarios")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_scenario_path(name: str) -> Path:
    if not name.endswith(".yaml"):
        name += ".yaml"
    return Path(str(resources.files("nfcsim").joinpath("data/scenarios", name)))
