import pytest

from nfcsim.clock import SimClock
from nfcsim.errors import AlreadyLost, Busy, NoCardInField, RoleError, TagLost
from nfcsim.link import (CARD_READER, EMULATED_CARD, SW_FILE_NOT_FOUND, ApduCommand, ApduResponse,
                         Device, DeviceId, NfcLink, Role, RoleState, SessionState)
from nfcsim.storage import DEFAULT_BASE_AID, SW_SUCCESS, encode_aid


def pair(clock, reader_state=CARD_READER, card_state=EMULATED_CARD):
    a, b = Device(DeviceId(0, "A")), Device(DeviceId(1, "B"))
    a.set_role(clock, reader_state)
    b.set_role(clock, card_state)
    return a, b


def cmd(i=0):
    return ApduCommand.select(encode_aid(DEFAULT_BASE_AID, i))


def test_establish_takes_detection_latency():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    s = link.establish_connection(a, b)
    assert s.state is SessionState.ACTIVE and s.established_at == 10_000
    assert s.reader is a and s.card is b


def test_no_card_when_peer_is_reader():
    clock = SimClock()
    a, b = pair(clock, CARD_READER, CARD_READER)
    with pytest.raises(NoCardInField):
        NfcLink(clock).establish_connection(a, b)


def test_no_card_when_peer_still_switching():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock, CARD_READER, RoleState(Role.SWITCHING_TO_CARD, 50_000))
    with pytest.raises(NoCardInField):
        link.establish_connection(a, b)
    clock.run(until=50_000)
    assert b.role == EMULATED_CARD
    assert link.establish_connection(a, b).state is SessionState.ACTIVE


def test_reader_must_be_reader_and_distinct():
    clock = SimClock()
    a, b = pair(clock)
    link = NfcLink(clock)
    with pytest.raises(RoleError):
        link.establish_connection(a, a)
    with pytest.raises(RoleError):
        link.establish_connection(b, a)


def test_full_chunk_exchange_takes_329_ms():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    b.storage.set_message_to_send(b"z" * 2048, 0)
    s = link.establish_connection(a, b)
    t0 = clock.now
    resp = link.exchange_apdu(s, cmd(0))
    assert resp.payload == b"z" * 2048 and resp.status_word == SW_SUCCESS
    assert clock.now - t0 == 329_000


def test_handler_receives_index():
    clock = SimClock()
    seen = []
    a = Device(DeviceId(0, "A"))
    b = Device(DeviceId(1, "B"), handler=lambda c: seen.append(c.index) or ApduResponse(b""))
    a.set_role(clock, CARD_READER)
    b.set_role(clock, EMULATED_CARD)
    link = NfcLink(clock)
    link.exchange_apdu(link.establish_connection(a, b), cmd(7))
    assert seen == [7]


def test_empty_slot_answers_file_not_found():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    resp = link.exchange_apdu(link.establish_connection(a, b), cmd(3))
    assert resp.status_word == SW_FILE_NOT_FOUND


def test_break_mid_exchange_is_tag_lost():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    b.storage.set_message_to_send(b"z", 0)
    s = link.establish_connection(a, b)
    link.schedule_break(s, clock.now + 1000)
    with pytest.raises(TagLost, match="Tag was lost"):
        link.exchange_apdu(s, cmd(0))
    assert s.state is SessionState.LOST and not s.in_flight
    with pytest.raises(TagLost):
        link.exchange_apdu(s, cmd(0))


def test_break_delivers_one_deactivation_then_already_lost():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    events = []
    b.on_deactivated = events.append
    s = link.establish_connection(a, b)
    ev = link.break_connection(s)
    assert events == [ev] and ev.device == "B" and ev.at_us == clock.now
    with pytest.raises(AlreadyLost):
        link.break_connection(s)


def test_busy_when_exchange_in_flight():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    s = link.establish_connection(a, b)
    s.in_flight = True
    with pytest.raises(Busy):
        link.exchange_apdu(s, cmd(0))


def test_role_change_mid_exchange_fails():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    b.storage.set_message_to_send(b"z", 0)
    s = link.establish_connection(a, b)
    with pytest.raises(TagLost):
        link.exchange_apdu(s, cmd(0), on_command=lambda t: b.set_role(clock, CARD_READER))


def test_roles_at_send_and_receive_in_trace():
    clock = SimClock()
    link = NfcLink(clock)
    a, b = pair(clock)
    b.storage.set_message_to_send(b"q", 0)
    s = link.establish_connection(a, b)
    link.exchange_apdu(s, cmd(0))
    kinds = [r.event_kind for r in clock.trace]
    assert kinds.index("apdu_send") < kinds.index("apdu_command") < kinds.index("apdu_response")


def test_apdu_types_validate_and_roundtrip():
    c = cmd(42)
    assert ApduCommand.from_bytes(c.to_bytes()) == c
    with pytest.raises(ValueError):
        ApduCommand(b"\x00\xa4\x04", encode_aid(DEFAULT_BASE_AID, 0))
    with pytest.raises(ValueError):
        ApduCommand.select(b"\x01\x02\x03\x04")
    r = ApduResponse(b"abc")
    assert ApduResponse.from_bytes(r.to_bytes()) == r
    with pytest.raises(ValueError):
        ApduResponse(bytes(2049))
    with pytest.raises(ValueError):
        ApduResponse(b"", b"\x90")


def test_role_state_invariants():
    with pytest.raises(ValueError):
        RoleState(Role.SWITCHING_TO_READER)
    with pytest.raises(ValueError):
        RoleState(Role.CARD_READER, 5)
    assert RoleState(Role.SWITCHING_TO_CARD, 9).target is Role.EMULATED_CARD


def test_switch_in_past_applies_immediately():
    clock = SimClock(start=100)
    d = Device(DeviceId(0, "A"))
    d.switch_to(clock, Role.CARD_READER, 50)
    assert d.role == CARD_READER
