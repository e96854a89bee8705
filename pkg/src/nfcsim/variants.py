"""Protocol variants and their delay parameters."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Dict


class Variant(str, enum.Enum):
    TWO_TAP = "two_tap"
    HCE_ONE_TAP = "hce_one_tap"
    DISABLING_ENABLING = "disabling_enabling"
    ENABLING_DISABLING = "enabling_disabling"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise ValueError(f"unknown protocol variant {value!r}") from None

    @property
    def role_switching(self) -> bool:
        return self in (Variant.DISABLING_ENABLING, Variant.ENABLING_DISABLING)


@dataclass(frozen=True)
class ProtocolConfig:
    """Variant selector plus every delay the variants read (milliseconds).

    `t` drives disabling-enabling, `t1`/`t2` drive enabling-disabling and
    `tap_latency` the tap-driven variants.  The remaining fields are the
    hardware latencies of a switch: reader relaunch after deactivation
    (disabling-enabling), card-emulation handover after the old reader
    disables (enabling-disabling), the one-shot role transformation of the
    one-tap variant, and how long a disabled reader takes to answer as a card.
    """

    variant: Variant = Variant.ENABLING_DISABLING
    t_ms: float = 700.0
    t1_ms: float = 310.0
    t2_ms: float = 100.0
    tap_latency_ms: float = 1000.0
    relaunch_ms: float = 1920.0
    handover_ms: float = 1200.0
    hce_switch_ms: float = 500.0
    card_ready_ms: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        for f in fields(self):
            if f.name != "variant" and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    def delays(self) -> Dict[str, float]:
        """The delays the readiness model is keyed on, by stage name."""
        if self.variant is Variant.DISABLING_ENABLING:
            return {"t": self.t_ms}
        if self.variant is Variant.ENABLING_DISABLING:
            return {"t1": self.t1_ms, "t2": self.t2_ms}
        return {}

    def with_delays(self, **delays) -> "ProtocolConfig":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        for k, v in delays.items():
            kw[k if k.endswith("_ms") else k + "_ms"] = v
        return ProtocolConfig(**kw)
