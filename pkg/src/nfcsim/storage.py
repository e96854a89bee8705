"""Chunk storage, fragmentation and the AID chunk-index codec.

A message larger than one APDU payload is cut into chunks of at most
2048 bytes.  The chunk index travels in the last two characters of the
AID, so a message can span at most 100 chunks.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .errors import (ChunkTooLarge, CorruptResponse, EmptySlot, IndexOutOfRange,
                     MalformedAid, MessageTooLarge)

CHUNK_SIZE = 2048
MAX_CHUNKS = 100
MIN_AID_LEN = 5
MAX_AID_LEN = 16
SW_SUCCESS = b"\x90\x00"
# proprietary-range RID, followed by two ASCII index digits
DEFAULT_BASE_AID = b"\xf0NFCOFF"


def _check_index(index: int) -> int:
    if not isinstance(index, int) or not 0 <= index < MAX_CHUNKS:
        raise IndexOutOfRange(f"chunk index {index!r} outside [0, {MAX_CHUNKS - 1}]")
    return index


def _check_chunk(message: bytes) -> bytes:
    message = bytes(message)
    if len(message) > CHUNK_SIZE:
        raise ChunkTooLarge(f"chunk of {len(message)} bytes exceeds {CHUNK_SIZE}")
    return message


class MessageStorage:
    """Two independent indexed chunk arrays: outgoing and incoming."""

    def __init__(self):
        self.message_to_send: List[Optional[bytes]] = [None] * MAX_CHUNKS
        self.message_received: List[Optional[bytes]] = [None] * MAX_CHUNKS

    def set_message_to_send(self, message: bytes, index: int) -> None:
        self.message_to_send[_check_index(index)] = _check_chunk(message)

    def get_message_to_send(self, index: int) -> bytes:
        chunk = self.message_to_send[_check_index(index)]
        if chunk is None:
            raise EmptySlot(f"messageToSend[{index}] is empty")
        return chunk

    def set_message_received(self, message: bytes, index: int) -> None:
        self.message_received[_check_index(index)] = _check_chunk(message)

    def get_message_received(self, index: int) -> bytes:
        chunk = self.message_received[_check_index(index)]
        if chunk is None:
            raise EmptySlot(f"messageReceived[{index}] is empty")
        return chunk

    def load_outgoing(self, message: bytes) -> int:
        """Fragment `message` into the outgoing slots; returns the chunk count."""
        chunks = fragment(message)
        for i, chunk in enumerate(chunks):
            self.set_message_to_send(chunk, i)
        return len(chunks)

    def received(self, n_chunks: int) -> bytes:
        return assemble([self.get_message_received(i) for i in range(n_chunks)])


def fragment(message: bytes) -> List[bytes]:
    message = bytes(message)
    if not message:
        return [b""]
    count = -(-len(message) // CHUNK_SIZE)
    if count > MAX_CHUNKS:
        raise MessageTooLarge(f"{len(message)} bytes needs {count} chunks (max {MAX_CHUNKS})")
    return [message[i:i + CHUNK_SIZE] for i in range(0, len(message), CHUNK_SIZE)]


def assemble(chunks: Sequence[bytes]) -> bytes:
    return b"".join(bytes(c) for c in chunks)


def encode_aid(base_aid: bytes, index: int) -> bytes:
    _check_index(index)
    aid = bytes(base_aid) + b"%02d" % index
    if not MIN_AID_LEN <= len(aid) <= MAX_AID_LEN:
        raise ValueError(f"AID length {len(aid)} outside [{MIN_AID_LEN}, {MAX_AID_LEN}]")
    return aid


def decode_aid(aid: bytes) -> int:
    suffix = bytes(aid)[-2:]
    if len(suffix) != 2 or not all(0x30 <= b <= 0x39 for b in suffix):
        raise MalformedAid(f"AID {bytes(aid).hex()} does not end in two decimal digits")
    return int(suffix)


def check_response(response, status_word: bytes = SW_SUCCESS) -> bytes:
    """Return the payload of a response whose status word matches."""
    if bytes(response.status_word) != bytes(status_word):
        raise CorruptResponse(
            f"status word {bytes(response.status_word).hex()} != {bytes(status_word).hex()}")
    return response.payload


def transfer_message(driver, sender: MessageStorage, receiver: MessageStorage, n_chunks: int):
    """Move sender's outgoing slots 0..n-1 into receiver's incoming slots.

    `driver` is a protocol driver (see `nfcsim.protocols`); it is switched
    first if the sender is not currently the emulated card.
    """
    if not 1 <= n_chunks <= MAX_CHUNKS:
        raise IndexOutOfRange(f"chunk count {n_chunks} outside [1, {MAX_CHUNKS}]")
    for i in range(n_chunks):
        sender.get_message_to_send(i)
    return driver.transfer(sender, receiver, n_chunks)
