"""The four NFC communication protocols and the n-round-trip experiment runner.

Two tap-driven variants move data with user taps and NDEF pushes.  The two
role-switching variants keep both phones alternating between reader and
emulated-card mode, one chunk direction at a time:

* disabling-enabling: the finishing reader turns its reader mode off, which
  breaks the link; the deactivation tells the card side to turn its own
  reader on after `t` ms.
* enabling-disabling: once the card side has answered the last command it
  schedules its reader to turn on `t1` ms later; the finishing reader turns
  off `t2` ms after its last response.  The enable must come first.

Whether a switch yields a working link is drawn from the readiness model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .clock import ActivityLog, EventHandle, SimClock, SimEvent, TraceRecord, ms_to_us
from .errors import FailedAtSwitch, NoCardInField, UnsupportedByVariant
from .link import (CARD_READER, DEFAULT_DETECTION_MS, EMULATED_CARD, IDLE, ApduCommand,
                   DeactivationEvent, Device, DeviceId, LinkSession, NfcLink, Role)
from .readiness import ReadinessModel, default_readiness
from .seeding import generator, substream
from .storage import (CHUNK_SIZE, DEFAULT_BASE_AID, SW_SUCCESS, MessageStorage, check_response,
                      encode_aid, fragment)
from .timing import TimingModel, bandwidth_kbps, t_switching_avg
from .variants import ProtocolConfig, Variant

MAIN = DeviceId(0, "main")
OFFLOADEE = DeviceId(1, "offloadee")


@dataclass(frozen=True)
class SimSettings:
    """Everything about a run that is not the protocol itself."""

    timing: TimingModel = field(default_factory=TimingModel)
    detection_ms: float = DEFAULT_DETECTION_MS
    stochastic: bool = False
    readiness: Optional[ReadinessModel] = None
    status_word: bytes = SW_SUCCESS
    base_aid: bytes = DEFAULT_BASE_AID
    seed: int = 0

    def __post_init__(self):
        if self.detection_ms < 0:
            raise ValueError("detection_ms must be non-negative")
        encode_aid(self.base_aid, 0)

    def model(self) -> ReadinessModel:
        return self.readiness if self.readiness is not None else default_readiness(self.seed)


@dataclass(frozen=True)
class Outcome:
    """Success, or the 1-based index of the switch that broke the run."""

    failed_at: Optional[int] = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.failed_at is None

    def __str__(self):
        return "Success" if self.ok else f"FailedAtSwitch({self.failed_at})"


SUCCESS = Outcome()


@dataclass(frozen=True)
class TransferReport:
    variant: Variant
    n_round_trips: int
    chunk_bytes: int
    total_time_ms: float
    latency_ms: float
    bandwidth_kbps: float
    switch_count: int
    outcome: Outcome
    bytes_transferred: int = 0
    exchanges: int = 0
    t_switching_avg_ms: Optional[float] = None
    trace: Tuple[TraceRecord, ...] = field(default=(), repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.outcome.ok


def _make_report(variant, n, chunk_bytes, elapsed_us, moved, switches, exchanges,
                 outcome, trace, t_apdu_ms=None) -> TransferReport:
    total = elapsed_us / 1000
    bw = bandwidth_kbps(moved, total) if total > 0 else 0.0
    tsw = None
    if outcome.ok and switches > 0 and n > 0 and t_apdu_ms is not None:
        tsw = t_switching_avg(total, n, t_apdu_ms)
    return TransferReport(Variant.parse(variant), n, chunk_bytes, total, total, bw, switches,
                          outcome, moved, exchanges, tsw, tuple(trace))


class RoleSwitchDriver:
    """Moves chunks between two devices, switching roles between directions.

    The driver owns (or shares) one clock and one link.  `send` makes the
    sender the emulated card, switching first if needed, and lets the other
    device read `n_chunks` slots from it.
    """

    def __init__(self, config: ProtocolConfig, main: Device, offloadee: Device,
                 settings: Optional[SimSettings] = None, *, clock: Optional[SimClock] = None,
                 activity: Optional[ActivityLog] = None, rng: Optional[np.random.Generator] = None,
                 jitter_rng: Optional[np.random.Generator] = None):
        if not config.variant.role_switching:
            raise UnsupportedByVariant(f"{config.variant.value} does not switch roles")
        self.config = config
        self.settings = settings or SimSettings()
        self.main, self.offloadee = main, offloadee
        self.clock = clock or SimClock()
        self.activity = activity if activity is not None else ActivityLog()
        if jitter_rng is None and self.settings.timing.jitter_ms > 0:
            jitter_rng = generator(self.settings.seed, "jitter")
        self.link = NfcLink(self.clock, self.settings.timing, ms_to_us(self.settings.detection_ms),
                            self.settings.status_word, jitter_rng, self.activity)
        model = self.settings.model()
        self.p_switch = model.probability(config.variant, config.delays())
        self._cutoff = model.deterministic_cutoff
        if self.settings.stochastic and rng is None:
            rng = generator(self.settings.seed, "readiness")
        self.rng = rng
        self.session: Optional[LinkSession] = None
        self.switch_count = 0
        self.exchanges = 0
        self.bytes_moved = 0
        self.switch_durations_us: List[int] = []
        self._enable: Optional[EventHandle] = None
        for dev in (main, offloadee):
            dev.on_deactivated = self._on_deactivated(dev)

    # -- helpers -------------------------------------------------------

    def _peer(self, dev: Device) -> Device:
        return self.offloadee if dev is self.main else self.main

    def _us(self, ms: float) -> int:
        return ms_to_us(ms)

    def _ready(self) -> bool:
        if not self.settings.stochastic:
            return self.p_switch >= self._cutoff
        return bool(self.rng.random() < self.p_switch)

    def _on_deactivated(self, dev: Device):
        def handler(ev: DeactivationEvent):
            if self.config.variant is not Variant.DISABLING_ENABLING:
                return
            clock = self.clock

            def enable():
                clock.note("reader_enable", dev.name, f"t={self.config.t_ms:g}")
                dev.switch_to(clock, Role.CARD_READER, clock.now + self._us(self.config.relaunch_ms))

            clock.schedule(ev.at_us + self._us(self.config.t_ms),
                           SimEvent("enable_timer", dev.name, "", enable))
        return handler

    # -- lifecycle -----------------------------------------------------

    def open(self, card: Device) -> LinkSession:
        """Put `card` in card mode, its peer in reader mode, and connect."""
        reader = self._peer(card)
        card.set_role(self.clock, EMULATED_CARD)
        reader.set_role(self.clock, CARD_READER)
        self.session = self.link.establish_connection(reader, card)
        return self.session

    def close(self) -> None:
        if self._enable is not None:
            self.clock.cancel(self._enable)
            self._enable = None

    def send(self, sender: Device, n_chunks: int, hold_until: Optional[int] = None) -> None:
        """Let the peer read sender's outgoing slots 0..n_chunks-1 into its incoming slots.

        `hold_until` keeps the current link idle until that instant before a
        required switch (e.g. while the offloadee computes).
        """
        if self.session is None:
            if hold_until is not None and hold_until > self.clock.now:
                self.clock.run(until=hold_until)
            self.open(sender)
        elif self.session.card is not sender:
            self.switch(hold_until)
        else:
            self.close()
        receiver = self.session.reader
        ed = self.config.variant is Variant.ENABLING_DISABLING
        for i in range(n_chunks):
            cmd = ApduCommand.select(encode_aid(self.settings.base_aid, i))
            arm = self._arm_enable(sender) if ed and i == n_chunks - 1 else None
            resp = self.link.exchange_apdu(self.session, cmd, on_command=arm)
            payload = check_response(resp, self.settings.status_word)
            receiver.storage.set_message_received(payload, i)
            self.exchanges += 1
            self.bytes_moved += len(payload)

    def _arm_enable(self, card: Device):
        def arm(now: int):
            self.close()
            self.clock.note("apdu_returned", card.name, "")
            self._enable = self.clock.schedule(
                now + self._us(self.config.t1_ms),
                SimEvent("reader_enable", card.name, f"t1={self.config.t1_ms:g}"))
        return arm

    def switch(self, hold_until: Optional[int] = None) -> None:
        """Swap reader and card; raises FailedAtSwitch if no link comes up."""
        clock, cfg, session = self.clock, self.config, self.session
        old_reader, old_card = session.reader, session.card
        k = self.switch_count + 1
        hold = max(clock.now, hold_until if hold_until is not None else clock.now)
        clock.run(until=hold)
        if cfg.variant is Variant.DISABLING_ENABLING:
            clock.note("reader_disable", old_reader.name, f"switch={k}")
            self.link.break_connection(session)
            old_reader.switch_to(clock, Role.EMULATED_CARD, hold + self._us(cfg.card_ready_ms))
        else:
            disable_at = hold + self._us(cfg.t2_ms)
            enable = self._enable
            self._enable = None
            if cfg.t1_ms <= 0 or enable is None or enable.at >= disable_at:
                if enable is not None:
                    clock.cancel(enable)
                self.switch_count = k
                clock.note("switch_failed", old_card.name, "reader enabled after peer disabled")
                raise FailedAtSwitch(k, clock.now, "reader enabled after peer disabled")
            clock.run(until=disable_at)
            clock.note("reader_disable", old_reader.name, f"t2={cfg.t2_ms:g} switch={k}")
            self.link.break_connection(session)
            old_card.set_role(clock, CARD_READER)
            old_reader.switch_to(clock, Role.EMULATED_CARD, disable_at + self._us(cfg.handover_ms))
        self.switch_count = k
        ok = self._ready()
        clock.run_until(lambda: old_card.role == CARD_READER and old_reader.role == EMULATED_CARD)
        if not ok:
            clock.note("card_not_ready", old_reader.name, f"switch={k}")
            old_reader.set_role(clock, IDLE)
        for dev in (old_card, old_reader):
            self.activity.add(dev.name, "nfc", hold, clock.now)
        try:
            self.session = self.link.establish_connection(old_card, old_reader)
        except NoCardInField:
            raise FailedAtSwitch(k, clock.now, "Tag was lost") from None
        self.switch_durations_us.append(clock.now - hold)

    def transfer(self, sender: MessageStorage, receiver: MessageStorage, n_chunks: int,
                 hold_until: Optional[int] = None) -> TransferReport:
        """Storage-level move; see `nfcsim.storage.transfer_message`."""
        dev = {id(self.main.storage): self.main, id(self.offloadee.storage): self.offloadee}
        src = dev.get(id(sender))
        if src is None or dev.get(id(receiver)) is not self._peer(src):
            raise ValueError("storages do not belong to this driver's two devices")
        t0, sw0, ex0, b0 = self.clock.now, self.switch_count, self.exchanges, self.bytes_moved
        self.send(src, n_chunks, hold_until)
        return _make_report(self.config.variant, 0, CHUNK_SIZE, self.clock.now - t0,
                            self.bytes_moved - b0, self.switch_count - sw0,
                            self.exchanges - ex0, SUCCESS, ())


# -- role-switching experiments ----------------------------------------------

def _check_experiment(config: ProtocolConfig, variant: Variant, n: int, chunk_bytes: int):
    if config.variant is not variant:
        raise ValueError(f"config variant is {config.variant.value}, expected {variant.value}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= chunk_bytes <= CHUNK_SIZE:
        raise ValueError(f"chunk_bytes must be in [0, {CHUNK_SIZE}]")


def _run_round_trips(config: ProtocolConfig, n: int, chunk_bytes: int,
                     settings: Optional[SimSettings], rng, jitter_rng) -> TransferReport:
    settings = settings or SimSettings()
    main, off = Device(MAIN), Device(OFFLOADEE)
    driver = RoleSwitchDriver(config, main, off, settings, rng=rng, jitter_rng=jitter_rng)
    clock = driver.clock
    data = generator(settings.seed, "payload").integers(0, 256, size=(2 * n, chunk_bytes),
                                                        dtype=np.uint8)
    main.storage.set_message_to_send(data[0].tobytes(), 0)
    driver.open(main)
    t0 = clock.now
    outcome = SUCCESS
    try:
        for r in range(n):
            for d, (src, dst) in enumerate(((main, off), (off, main))):
                chunk = data[2 * r + d].tobytes()
                src.storage.set_message_to_send(chunk, 0)
                driver.send(src, 1)
                if dst.storage.get_message_received(0) != chunk:
                    raise AssertionError("chunk corrupted in transit")
    except FailedAtSwitch as e:
        outcome = Outcome(e.switch_index, e.reason)
    driver.close()
    return _make_report(config.variant, n, chunk_bytes, clock.now - t0, driver.bytes_moved,
                        driver.switch_count, driver.exchanges, outcome, clock.trace,
                        settings.timing.t_apdu_ms(chunk_bytes))


def run_disabling_enabling(config: ProtocolConfig, n: int, chunk_bytes: int = CHUNK_SIZE,
                           settings: Optional[SimSettings] = None, *,
                           rng: Optional[np.random.Generator] = None,
                           jitter_rng: Optional[np.random.Generator] = None) -> TransferReport:
    """n request/response cycles of one chunk each way; failures end up in the report."""
    _check_experiment(config, Variant.DISABLING_ENABLING, n, chunk_bytes)
    return _run_round_trips(config, n, chunk_bytes, settings, rng, jitter_rng)


def run_enabling_disabling(config: ProtocolConfig, n: int, chunk_bytes: int = CHUNK_SIZE,
                           settings: Optional[SimSettings] = None, *,
                           rng: Optional[np.random.Generator] = None,
                           jitter_rng: Optional[np.random.Generator] = None) -> TransferReport:
    _check_experiment(config, Variant.ENABLING_DISABLING, n, chunk_bytes)
    return _run_round_trips(config, n, chunk_bytes, settings, rng, jitter_rng)


# -- tap-driven variants -------------------------------------------------------

def _push_cost_us(timing: TimingModel, payload: bytes) -> int:
    return sum(timing.t_apdu_us(len(c)) for c in fragment(payload))


def _check_tap(payload: bytes, round_trips: int, variant: Variant):
    if not payload:
        raise ValueError("payload must be non-empty")
    if round_trips != 1:
        raise UnsupportedByVariant(f"{variant.value} supports exactly one offload cycle")


def run_two_tap(config: ProtocolConfig, payload: bytes, settings: Optional[SimSettings] = None,
                round_trips: int = 1) -> TransferReport:
    """Tap on the main device, push the task; tap on the offloadee, push the result back."""
    _check_tap(payload, round_trips, Variant.TWO_TAP)
    settings = settings or SimSettings()
    clock, log = SimClock(), ActivityLog()
    tap = ms_to_us(config.tap_latency_ms)
    cost = _push_cost_us(settings.timing, payload)
    for src, dst in ((MAIN.name, OFFLOADEE.name), (OFFLOADEE.name, MAIN.name)):
        clock.run(until=clock.now + tap)
        clock.note("tap", src, "user")
        start = clock.now
        clock.note("ndef_push", src, f"to={dst} len={len(payload)}")
        clock.run(until=start + cost)
        clock.note("ndef_received", dst, f"len={len(payload)}")
        log.add(src, "nfc", start, clock.now)
        log.add(dst, "nfc", start, clock.now)
    return _make_report(Variant.TWO_TAP, 1, min(len(payload), CHUNK_SIZE), clock.now,
                        2 * len(payload), 0, 2, SUCCESS, clock.trace)


def run_hce_one_tap(config: ProtocolConfig, payload: bytes, settings: Optional[SimSettings] = None,
                    round_trips: int = 1) -> TransferReport:
    """One tap pushes the task; the offloadee then turns into a card and is read back."""
    _check_tap(payload, round_trips, Variant.HCE_ONE_TAP)
    settings = settings or SimSettings()
    clock, log = SimClock(), ActivityLog()
    main, off = Device(MAIN), Device(OFFLOADEE)
    link = NfcLink(clock, settings.timing, ms_to_us(settings.detection_ms),
                   settings.status_word, None, log)
    clock.run(until=ms_to_us(config.tap_latency_ms))
    clock.note("tap", main.name, "user")
    start = clock.now
    clock.note("ndef_push", main.name, f"to={off.name} len={len(payload)}")
    clock.run(until=start + _push_cost_us(settings.timing, payload))
    clock.note("ndef_received", off.name, f"len={len(payload)}")
    log.add(main.name, "nfc", start, clock.now)
    log.add(off.name, "nfc", start, clock.now)
    ready = clock.now + ms_to_us(config.hce_switch_ms)
    main.switch_to(clock, Role.CARD_READER, ready)
    off.switch_to(clock, Role.EMULATED_CARD, ready)
    clock.run(until=ready)
    n_chunks = off.storage.load_outgoing(payload)
    session = link.establish_connection(main, off)
    for i in range(n_chunks):
        resp = link.exchange_apdu(session, ApduCommand.select(encode_aid(settings.base_aid, i)))
        main.storage.set_message_received(check_response(resp, settings.status_word), i)
    return _make_report(Variant.HCE_ONE_TAP, 1, min(len(payload), CHUNK_SIZE), clock.now,
                        2 * len(payload), 1, 1 + n_chunks, SUCCESS, clock.trace)


def run_protocol(config: ProtocolConfig, n: int = 1, chunk_bytes: int = CHUNK_SIZE,
                 settings: Optional[SimSettings] = None, **kw) -> TransferReport:
    """Dispatch on the variant; tap variants send one random chunk_bytes payload."""
    v = config.variant
    if v is Variant.DISABLING_ENABLING:
        return run_disabling_enabling(config, n, chunk_bytes, settings, **kw)
    if v is Variant.ENABLING_DISABLING:
        return run_enabling_disabling(config, n, chunk_bytes, settings, **kw)
    seed = (settings or SimSettings()).seed
    payload = generator(seed, "payload").bytes(max(1, chunk_bytes))
    fn = run_two_tap if v is Variant.TWO_TAP else run_hce_one_tap
    return fn(config, payload, settings, round_trips=n)


# -- Monte Carlo ---------------------------------------------------------------

@dataclass(frozen=True)
class SuccessEstimate:
    successes: int
    experiments: int
    p_switch: float

    @property
    def rate(self) -> float:
        return self.successes / self.experiments

    @property
    def stderr(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.experiments)


def experiment_streams(seed: int, experiments: int) -> List[np.random.SeedSequence]:
    """One child SeedSequence per experiment; child i drives experiment i."""
    return substream(seed, "readiness").spawn(experiments)


def _fast_outcome(child: np.random.SeedSequence, switches: int, p: float) -> Optional[int]:
    u = np.random.default_rng(child).random(switches)
    bad = np.flatnonzero(u >= p)
    return int(bad[0]) + 1 if bad.size else None


def success_rate(config: ProtocolConfig, n: int = 50, chunk_bytes: int = CHUNK_SIZE,
                 settings: Optional[SimSettings] = None, experiments: int = 10_000,
                 fast: bool = True) -> SuccessEstimate:
    """Fraction of n-round-trip experiments that complete every switch.

    Each experiment draws its switches from its own child stream, so the fast
    vectorized path and the full event simulation agree outcome for outcome.
    The fast path is used only when switch outcomes cannot depend on timing
    (no APDU jitter and a structurally valid schedule).
    """
    if experiments < 1:
        raise ValueError("experiments must be >= 1")
    settings = settings or SimSettings()
    stoch = SimSettings(settings.timing, settings.detection_ms, True, settings.model(),
                        settings.status_word, settings.base_aid, settings.seed)
    _check_experiment(config, config.variant, n, chunk_bytes)
    if not config.variant.role_switching:
        raise UnsupportedByVariant("success rate is defined for role-switching variants")
    children = experiment_streams(settings.seed, experiments)
    probe = run_protocol(config, 1, chunk_bytes,
                         SimSettings(settings.timing, settings.detection_ms, False,
                                     ReadinessModel({}, settings.seed), settings.status_word,
                                     settings.base_aid, settings.seed))
    p = stoch.model().probability(config.variant, config.delays())
    use_fast = fast and settings.timing.jitter_ms == 0
    if use_fast and not probe.ok:
        return SuccessEstimate(0, experiments, p)
    switches = 2 * n - 1
    ok = 0
    for child in children:
        if use_fast:
            ok += _fast_outcome(child, switches, p) is None
        else:
            jitter = np.random.default_rng(child.spawn(1)[0])
            rep = run_protocol(config, n, chunk_bytes, stoch,
                               rng=np.random.default_rng(child), jitter_rng=jitter)
            ok += rep.ok
    return SuccessEstimate(int(ok), experiments, p)
