"""Half-duplex NFC link between a card reader and an emulated card.

Devices hold exactly one role at a time.  A reader detects a card after the
configured detection latency, then exchanges command/response APDUs one at a
time.  Disabling the reader breaks the link and delivers a deactivation event
to the card side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .clock import ActivityLog, EventHandle, SimClock, SimEvent, ms_to_us
from .errors import (AlreadyLost, Busy, EmptySlot, IndexOutOfRange, NoCardInField,
                     RoleError, TagLost)
from .storage import (CHUNK_SIZE, MAX_AID_LEN, MIN_AID_LEN, SW_SUCCESS, MessageStorage,
                      decode_aid)
from .timing import TimingModel

# ISO 7816-4 SELECT by AID
SELECT_HEADER = b"\x00\xa4\x04\x00"
SW_FILE_NOT_FOUND = b"\x6a\x82"
DEFAULT_DETECTION_MS = 10.0


class Role(enum.Enum):
    IDLE = "idle"
    EMULATED_CARD = "card"
    CARD_READER = "reader"
    SWITCHING_TO_READER = "to_reader"
    SWITCHING_TO_CARD = "to_card"


@dataclass(frozen=True)
class RoleState:
    role: Role
    ready_at: Optional[int] = None

    def __post_init__(self):
        switching = self.role in (Role.SWITCHING_TO_READER, Role.SWITCHING_TO_CARD)
        if switching != (self.ready_at is not None):
            raise ValueError("ready_at is required for, and only for, switching states")

    @property
    def target(self) -> Role:
        return {Role.SWITCHING_TO_READER: Role.CARD_READER,
                Role.SWITCHING_TO_CARD: Role.EMULATED_CARD}.get(self.role, self.role)

    def __str__(self):
        if self.ready_at is None:
            return self.role.value
        return f"{self.role.value}@{self.ready_at}"


IDLE = RoleState(Role.IDLE)
EMULATED_CARD = RoleState(Role.EMULATED_CARD)
CARD_READER = RoleState(Role.CARD_READER)


@dataclass(frozen=True)
class DeviceId:
    id: int
    name: str


@dataclass(frozen=True)
class ApduCommand:
    header: bytes
    aid: bytes

    def __post_init__(self):
        if len(self.header) != 4:
            raise ValueError("APDU header is exactly 4 bytes")
        if not MIN_AID_LEN <= len(self.aid) <= MAX_AID_LEN:
            raise ValueError(f"AID length {len(self.aid)} outside [{MIN_AID_LEN}, {MAX_AID_LEN}]")
        decode_aid(self.aid)

    @classmethod
    def select(cls, aid: bytes) -> "ApduCommand":
        return cls(SELECT_HEADER, bytes(aid))

    @property
    def index(self) -> int:
        return decode_aid(self.aid)

    def to_bytes(self) -> bytes:
        return self.header + bytes([len(self.aid)]) + self.aid

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ApduCommand":
        raw = bytes(raw)
        if len(raw) < 5 or raw[4] != len(raw) - 5:
            raise ValueError("malformed command APDU")
        return cls(raw[:4], raw[5:])


@dataclass(frozen=True)
class ApduResponse:
    payload: bytes
    status_word: bytes = SW_SUCCESS

    def __post_init__(self):
        if len(self.payload) > CHUNK_SIZE:
            raise ValueError(f"response payload {len(self.payload)} exceeds {CHUNK_SIZE} bytes")
        if len(self.status_word) != 2:
            raise ValueError("status word is exactly 2 bytes")

    def to_bytes(self) -> bytes:
        return self.payload + self.status_word

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ApduResponse":
        raw = bytes(raw)
        if len(raw) < 2:
            raise ValueError("response APDU shorter than its status word")
        return cls(raw[:-2], raw[-2:])


@dataclass(frozen=True)
class DeactivationEvent:
    device: str
    at_us: int
    reason: str = "link_lost"


class Device:
    """One phone: a role, a message store and an APDU handler for card mode."""

    def __init__(self, ident: DeviceId, storage: Optional[MessageStorage] = None,
                 handler: Optional[Callable[[ApduCommand], ApduResponse]] = None):
        self.ident = ident
        self.role = IDLE
        self.storage = storage if storage is not None else MessageStorage()
        self.handler = handler or self._serve_storage
        self.on_deactivated: Optional[Callable[[DeactivationEvent], None]] = None
        self._pending: Optional[EventHandle] = None

    @property
    def name(self) -> str:
        return self.ident.name

    def __repr__(self):
        return f"Device({self.name!r}, {self.role})"

    def _serve_storage(self, command: ApduCommand) -> ApduResponse:
        try:
            return ApduResponse(self.storage.get_message_to_send(command.index))
        except (EmptySlot, IndexOutOfRange):
            return ApduResponse(b"", SW_FILE_NOT_FOUND)

    def set_role(self, clock: SimClock, state: RoleState) -> None:
        if self._pending is not None:
            clock.cancel(self._pending)
            self._pending = None
        if state.ready_at is not None and state.ready_at <= clock.now:
            state = RoleState(state.target)
        self.role = state
        clock.note("role", self.name, str(state))
        if state.ready_at is not None:
            target = RoleState(state.target)

            def arrive():
                self._pending = None
                self.role = target

            self._pending = clock.schedule(
                state.ready_at, SimEvent("role", self.name, str(target), arrive))

    def switch_to(self, clock: SimClock, target: Role, ready_at: int) -> None:
        """Start moving to reader or card mode, arriving at `ready_at`."""
        kind = {Role.CARD_READER: Role.SWITCHING_TO_READER,
                Role.EMULATED_CARD: Role.SWITCHING_TO_CARD}[target]
        self.set_role(clock, RoleState(kind, int(ready_at)))


class SessionState(enum.Enum):
    ACTIVE = "active"
    LOST = "lost"


@dataclass(eq=False)
class LinkSession:
    reader: Device
    card: Device
    established_at: int
    state: SessionState = SessionState.ACTIVE
    in_flight: bool = False
    lost_at: Optional[int] = None
    exchanges: int = 0
    last_command_at: Optional[int] = None


class NfcLink:
    """Connection lifecycle and APDU exchange over a shared clock."""

    def __init__(self, clock: SimClock, timing: Optional[TimingModel] = None,
                 detection_latency_us: int = ms_to_us(DEFAULT_DETECTION_MS),
                 status_word: bytes = SW_SUCCESS,
                 jitter_rng: Optional[np.random.Generator] = None,
                 activity: Optional[ActivityLog] = None):
        self.clock = clock
        self.timing = timing or TimingModel()
        self.detection_latency_us = int(detection_latency_us)
        self.status_word = bytes(status_word)
        self.jitter_rng = jitter_rng
        self.activity = activity if activity is not None else ActivityLog()

    def establish_connection(self, reader: Device, card: Device) -> LinkSession:
        clock = self.clock
        if reader is card:
            raise RoleError("a device cannot read itself")
        if reader.role.role is not Role.CARD_READER:
            raise RoleError(f"{reader.name} is not in reader mode ({reader.role})")
        start = clock.now
        found = []

        def detect():
            found.append(card.role.role is Role.EMULATED_CARD)

        clock.schedule(start + self.detection_latency_us,
                       SimEvent("detect", reader.name, f"target={card.name}", detect))
        clock.run_until(lambda: bool(found))
        self.activity.add(reader.name, "nfc", start, clock.now)
        if not found[0]:
            clock.note("no_card", reader.name, f"target={card.name} role={card.role}")
            raise NoCardInField(f"{card.name} is not an emulated card ({card.role})")
        self.activity.add(card.name, "nfc", start, clock.now)
        clock.note("connected", reader.name, f"card={card.name}")
        return LinkSession(reader, card, clock.now)

    def _roles_ok(self, session: LinkSession) -> bool:
        return (session.reader.role.role is Role.CARD_READER
                and session.card.role.role is Role.EMULATED_CARD)

    def exchange_apdu(self, session: LinkSession, command: ApduCommand,
                      on_command: Optional[Callable[[int], None]] = None) -> ApduResponse:
        """Send `command` and block (in simulated time) until the response.

        `on_command(t)` runs card-side at the instant the command is handled.
        """
        clock = self.clock
        if session.state is SessionState.LOST:
            raise TagLost("session already lost")
        if session.in_flight:
            raise Busy("an exchange is already in flight on this session")
        if not self._roles_ok(session):
            raise RoleError(f"cannot exchange: reader={session.reader.role} card={session.card.role}")
        reader, card = session.reader, session.card
        session.in_flight = True
        t0 = clock.now
        box = {}

        def receive():
            box["done"] = True

        def deliver():
            if session.state is SessionState.LOST:
                return
            resp = card.handler(command)
            box["resp"] = resp
            session.last_command_at = clock.now
            dur = self.timing.sample_t_apdu_us(len(resp.payload), self.jitter_rng)
            box["resp_handle"] = clock.schedule(
                t0 + dur, SimEvent("apdu_response", reader.name,
                                   f"sw={resp.status_word.hex()} len={len(resp.payload)}", receive))
            if on_command is not None:
                on_command(clock.now)

        clock.note("apdu_send", reader.name, f"card={card.name} aid={command.aid.hex()}")
        clock.schedule(t0 + self.timing.command_us,
                       SimEvent("apdu_command", card.name, f"index={command.index}", deliver))
        clock.run_until(lambda: box.get("done", False) or session.state is SessionState.LOST)
        session.in_flight = False
        end = clock.now
        self.activity.add(reader.name, "nfc", t0, end)
        self.activity.add(card.name, "nfc", t0, end)
        if not box.get("done"):
            if "resp_handle" in box:
                clock.cancel(box["resp_handle"])
            clock.note("tag_lost", reader.name, f"card={card.name}")
            raise TagLost("Tag was lost")
        if not self._roles_ok(session):
            clock.note("tag_lost", reader.name, "role changed mid-exchange")
            raise TagLost("role changed mid-exchange")
        session.exchanges += 1
        return box["resp"]

    def break_connection(self, session: LinkSession) -> DeactivationEvent:
        clock = self.clock
        if session.state is SessionState.LOST:
            raise AlreadyLost("session already lost")
        session.state = SessionState.LOST
        session.lost_at = clock.now
        clock.note("link_lost", session.reader.name, f"card={session.card.name}")
        ev = DeactivationEvent(session.card.name, clock.now)
        clock.note("deactivated", session.card.name, ev.reason)
        if session.card.on_deactivated is not None:
            session.card.on_deactivated(ev)
        return ev

    def schedule_break(self, session: LinkSession, at: int) -> EventHandle:
        def brk():
            if session.state is SessionState.ACTIVE:
                self.break_connection(session)

        return self.clock.schedule(at, SimEvent("break", session.reader.name, "", brk))
