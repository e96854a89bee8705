"""Deterministic discrete-event clock.

Time is an integer number of microseconds.  Events scheduled for the same
instant fire in insertion order, so a scenario replayed with the same seed
produces a byte-identical trace.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

from .errors import SchedulingInPast

log = logging.getLogger("nfcsim.trace")

US_PER_MS = 1000


def ms_to_us(ms: float) -> int:
    return int(round(ms * US_PER_MS))


@dataclass
class SimEvent:
    kind: str
    device: str = "-"
    detail: str = ""
    action: Optional[Callable[[], None]] = None


@dataclass(frozen=True)
class TraceRecord:
    timestamp_us: int
    device: str
    event_kind: str
    detail: str

    def line(self) -> str:
        return f"{self.timestamp_us}\t{self.device}\t{self.event_kind}\t{self.detail}"


@dataclass(order=True)
class EventHandle:
    at: int
    seq: int
    event: SimEvent = field(compare=False)
    cancelled: bool = field(default=False, compare=False)


class SimClock:
    """Priority queue of timestamped events plus the trace of what fired."""

    def __init__(self, start: int = 0):
        if start < 0:
            raise ValueError("clock cannot start before t=0")
        self.now = start
        self._queue: List[EventHandle] = []
        self._seq = itertools.count(1)
        self.trace: List[TraceRecord] = []

    def schedule(self, at: int, event: SimEvent) -> EventHandle:
        at = int(at)
        if at < self.now:
            raise SchedulingInPast(f"cannot schedule {event.kind!r} at {at} (now={self.now})")
        handle = EventHandle(at, next(self._seq), event)
        heapq.heappush(self._queue, handle)
        return handle

    def schedule_in(self, delay: int, event: SimEvent) -> EventHandle:
        return self.schedule(self.now + int(delay), event)

    def cancel(self, handle: EventHandle) -> None:
        handle.cancelled = True

    def pending(self) -> int:
        return sum(1 for h in self._queue if not h.cancelled)

    def peek_time(self) -> Optional[int]:
        while self._queue and self._queue[0].cancelled:
            heapq.heappop(self._queue)
        return self._queue[0].at if self._queue else None

    def note(self, kind: str, device: str = "-", detail: str = "") -> None:
        """Append a trace line at the current instant without scheduling."""
        rec = TraceRecord(self.now, device, kind, detail)
        self.trace.append(rec)
        if log.isEnabledFor(logging.DEBUG):
            log.debug(rec.line())

    def step(self) -> bool:
        while self._queue:
            handle = heapq.heappop(self._queue)
            if handle.cancelled:
                continue
            self.now = handle.at
            ev = handle.event
            self.note(ev.kind, ev.device, ev.detail)
            if ev.action is not None:
                ev.action()
            return True
        return False

    def run(self, until: Optional[int] = None) -> None:
        """Fire events in order; with `until`, stop after all events at or
        before that instant and leave the clock there."""
        if until is None:
            while self.step():
                pass
            return
        if until < self.now:
            raise SchedulingInPast(f"cannot run back to {until} (now={self.now})")
        while True:
            nxt = self.peek_time()
            if nxt is None or nxt > until:
                break
            self.step()
        self.now = until

    def run_until(self, done: Callable[[], bool]) -> bool:
        """Step until `done()` holds. Returns False if the queue drained first."""
        while not done():
            if not self.step():
                return False
        return True


def format_trace(records: Iterable[TraceRecord]) -> str:
    return "".join(r.line() + "\n" for r in records)


@dataclass(frozen=True)
class Interval:
    """A device spent [start_us, end_us) in one power state."""

    device: str
    state: str
    start_us: int
    end_us: int

    @property
    def duration_us(self) -> int:
        return self.end_us - self.start_us


class ActivityLog:
    """Per-device power-state intervals collected during a run."""

    def __init__(self):
        self.intervals: List[Interval] = []

    def add(self, device: str, state: str, start_us: int, end_us: int) -> None:
        if end_us < start_us:
            raise ValueError(f"interval ends before it starts: {start_us}..{end_us}")
        if end_us > start_us:
            self.intervals.append(Interval(device, state, int(start_us), int(end_us)))

    def for_device(self, device: str) -> List[Interval]:
        return sorted((iv for iv in self.intervals if iv.device == device),
                      key=lambda iv: (iv.start_us, iv.end_us))

    def filled(self, devices: Iterable[str], start_us: int, end_us: int,
               gap_state: str = "idle") -> List[Interval]:
        """All intervals with every uncovered stretch of [start, end) marked `gap_state`."""
        out: List[Interval] = []
        for dev in devices:
            cursor = start_us
            for iv in self.for_device(dev):
                if iv.start_us > cursor:
                    out.append(Interval(dev, gap_state, cursor, iv.start_us))
                out.append(iv)
                cursor = max(cursor, iv.end_us)
            if cursor < end_us:
                out.append(Interval(dev, gap_state, cursor, end_us))
        return out
