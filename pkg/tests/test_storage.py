import pytest
from hypothesis import given, strategies as st

from nfcsim.errors import (ChunkTooLarge, CorruptResponse, EmptySlot, IndexOutOfRange,
                           MalformedAid, MessageTooLarge)
from nfcsim.link import ApduResponse
from nfcsim.storage import (DEFAULT_BASE_AID, MessageStorage, assemble, check_response,
                            decode_aid, encode_aid, fragment)


def test_set_and_get_to_send():
    s = MessageStorage()
    s.set_message_to_send(b"x" * 100, 0)
    assert s.get_message_to_send(0) == b"x" * 100
    assert s.get_message_to_send(0) == s.get_message_to_send(0)
    s.set_message_to_send(b"y", 0)
    assert s.get_message_to_send(0) == b"y"


def test_to_send_errors():
    s = MessageStorage()
    with pytest.raises(ChunkTooLarge):
        s.set_message_to_send(b"x" * 2049, 0)
    with pytest.raises(IndexOutOfRange):
        s.set_message_to_send(b"x", 100)
    with pytest.raises(EmptySlot):
        s.get_message_to_send(3)


def test_received_array_mirrors_and_is_independent():
    s = MessageStorage()
    s.set_message_received(b"r" * 100, 0)
    assert s.get_message_received(0) == b"r" * 100
    with pytest.raises(EmptySlot):
        s.get_message_to_send(0)
    with pytest.raises(ChunkTooLarge):
        s.set_message_received(b"x" * 2049, 0)
    with pytest.raises(IndexOutOfRange):
        s.get_message_received(100)
    with pytest.raises(EmptySlot):
        s.get_message_received(1)


@pytest.mark.parametrize("size,expect", [(2048, [2048]), (2049, [2048, 1]),
                                         (5000, [2048, 2048, 904]), (0, [0])])
def test_fragment_sizes(size, expect):
    assert [len(c) for c in fragment(bytes(size))] == expect


def test_fragment_cap():
    fragment(bytes(100 * 2048))
    with pytest.raises(MessageTooLarge):
        fragment(bytes(100 * 2048 + 1))


@pytest.mark.parametrize("n", [0, 2048, 5000])
def test_assemble_inverts_fragment(n):
    m = bytes(range(256)) * (n // 256) + bytes(n % 256)
    assert assemble(fragment(m)) == m


def test_aid_codec():
    aid = encode_aid(DEFAULT_BASE_AID, 7)
    assert aid.endswith(b"07") and decode_aid(aid) == 7
    assert encode_aid(DEFAULT_BASE_AID, 99).endswith(b"99")
    with pytest.raises(MalformedAid):
        decode_aid(DEFAULT_BASE_AID + b"A3")
    with pytest.raises(IndexOutOfRange):
        encode_aid(DEFAULT_BASE_AID, 100)
    with pytest.raises(ValueError):
        encode_aid(b"\x01" * 15, 0)


@given(st.integers(0, 99), st.binary(min_size=3, max_size=14))
def test_aid_roundtrip_any_base(index, base):
    assert decode_aid(encode_aid(base, index)) == index


def test_check_response():
    assert check_response(ApduResponse(b"ok")) == b"ok"
    with pytest.raises(CorruptResponse):
        check_response(ApduResponse(b"", b"\x6a\x82"))


def test_load_outgoing_and_received():
    s = MessageStorage()
    n = s.load_outgoing(bytes(5000))
    assert n == 3
    for i in range(n):
        s.set_message_received(s.get_message_to_send(i), i)
    assert s.received(n) == bytes(5000)
