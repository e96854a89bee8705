"""APDU timing model and the round-trip timing algebra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .clock import ms_to_us
from .errors import NonPositiveSwitchTime

MAX_APDU_PAYLOAD = 2048


@dataclass(frozen=True)
class TimingModel:
    """Duration of one command/response APDU exchange.

    Affine in the response payload size: a fixed part plus a per-byte part,
    pinned so that a full 2048-byte response takes `t_apdu_2k_ms`.  The command
    reaches the card `command_ms` after it is sent.
    """

    t_apdu_2k_ms: float = 329.0
    fixed_overhead_ms: float = 250.0
    command_ms: float = 20.0
    jitter_ms: float = 0.0

    def __post_init__(self):
        if not 0 <= self.command_ms <= self.fixed_overhead_ms <= self.t_apdu_2k_ms:
            raise ValueError("need 0 <= command_ms <= fixed_overhead_ms <= t_apdu_2k_ms")
        if self.t_apdu_2k_ms <= 0:
            raise ValueError("t_apdu_2k_ms must be positive")
        if self.jitter_ms < 0:
            raise ValueError("jitter_ms must be non-negative")

    @property
    def command_us(self) -> int:
        return ms_to_us(self.command_ms)

    def t_apdu_us(self, payload_len: int) -> int:
        if not 0 <= payload_len <= MAX_APDU_PAYLOAD:
            raise ValueError(f"payload length {payload_len} outside [0, {MAX_APDU_PAYLOAD}]")
        fixed = ms_to_us(self.fixed_overhead_ms)
        full = ms_to_us(self.t_apdu_2k_ms)
        return max(1, fixed + (full - fixed) * payload_len // MAX_APDU_PAYLOAD)

    def t_apdu_ms(self, payload_len: int) -> float:
        return self.t_apdu_us(payload_len) / 1000

    def sample_t_apdu_us(self, payload_len: int, rng: Optional[np.random.Generator] = None) -> int:
        base = self.t_apdu_us(payload_len)
        if rng is None or self.jitter_ms == 0:
            return base
        jitter = int(round(rng.normal(0.0, self.jitter_ms * 1000)))
        return max(self.command_us + 1, base + jitter)


def t_round_trip(n: int, t_apdu: float, t_switching_avg: float) -> float:
    """Total time of n request/response cycles: 2n exchanges, 2n-1 switches."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if t_apdu <= 0 or t_switching_avg < 0:
        raise ValueError("times must be positive")
    return 2 * n * t_apdu + (2 * n - 1) * t_switching_avg


def t_switching_avg(total: float, n: int, t_apdu: float) -> float:
    """Average switch time recovered from a measured n-round-trip total."""
    if n < 1:
        raise ValueError("n must be >= 1")
    spent = total - 2 * n * t_apdu
    if spent <= 0:
        raise NonPositiveSwitchTime(
            f"total {total} leaves no time for switching after {2 * n} exchanges of {t_apdu}")
    return spent / (2 * n - 1)


def bandwidth_kbps(bytes_transferred: int, duration_ms: float) -> float:
    if duration_ms <= 0:
        raise ValueError("duration must be positive")
    # bits per millisecond is kilobits per second
    return 8 * bytes_transferred / duration_ms
