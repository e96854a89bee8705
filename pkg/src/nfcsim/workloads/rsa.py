"""Seeded RSA key generation with PKCS#1 v1.5 encryption.

Keys come from a deterministic prime search so that a seed reproduces the
same keypair.  Keys are carried in the standard DER encodings
(SubjectPublicKeyInfo and PKCS#8).  Inside the result frame the ciphertext
travels as lowercase hex text, so it occupies 2 * key_length / 8 bytes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import gmpy2
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import rsa as crsa

from ..errors import (ChunkTooLarge, KeyMismatch, MalformedPayload, PlaintextTooLong,
                      UnsupportedKeyLength)
from ..storage import CHUNK_SIZE

APP_RSA = 2
SUPPORTED_KEY_BITS = (512, 1024, 2048)
DEFAULT_KEY_BITS = 2048
PUBLIC_EXPONENT = 65537
PADDING_OVERHEAD = 11
# keygen + encryption at 2048 bits on a speed-1.0 device
BASE_COST_MS_2048 = 20_000.0


def _check_bits(bits: int) -> int:
    if bits not in SUPPORTED_KEY_BITS:
        raise UnsupportedKeyLength(f"key length {bits} not in {SUPPORTED_KEY_BITS}")
    return bits


def max_plaintext(bits: int) -> int:
    return _check_bits(bits) // 8 - PADDING_OVERHEAD


@dataclass(frozen=True)
class RsaPublicKey:
    n: int
    e: int

    @property
    def bits(self) -> int:
        return self.n.bit_length()

    @property
    def size_bytes(self) -> int:
        return (self.bits + 7) // 8

    def to_der(self) -> bytes:
        key = crsa.RSAPublicNumbers(self.e, self.n).public_key()
        return key.public_bytes(serialization.Encoding.DER,
                                serialization.PublicFormat.SubjectPublicKeyInfo)

    @classmethod
    def from_der(cls, der: bytes) -> "RsaPublicKey":
        try:
            nums = serialization.load_der_public_key(bytes(der)).public_numbers()
        except (ValueError, TypeError) as e:
            raise MalformedPayload(f"bad public key encoding: {e}") from None
        return cls(nums.n, nums.e)


@dataclass(frozen=True)
class RsaPrivateKey:
    n: int
    e: int
    d: int
    p: int
    q: int

    @property
    def public(self) -> RsaPublicKey:
        return RsaPublicKey(self.n, self.e)

    def to_der(self) -> bytes:
        p, q, d = self.p, self.q, self.d
        nums = crsa.RSAPrivateNumbers(p, q, d, d % (p - 1), d % (q - 1), int(gmpy2.invert(q, p)),
                                      crsa.RSAPublicNumbers(self.e, self.n))
        key = nums.private_key(unsafe_skip_rsa_key_validation=True)
        return key.private_bytes(serialization.Encoding.DER, serialization.PrivateFormat.PKCS8,
                                 serialization.NoEncryption())

    @classmethod
    def from_der(cls, der: bytes) -> "RsaPrivateKey":
        try:
            key = serialization.load_der_private_key(bytes(der), password=None,
                                                     unsafe_skip_rsa_key_validation=True)
            nums = key.private_numbers()
        except (ValueError, TypeError, AttributeError) as e:
            raise MalformedPayload(f"bad private key encoding: {e}") from None
        pub = nums.public_numbers
        return cls(pub.n, pub.e, nums.d, nums.p, nums.q)


def _prime(rnd: random.Random, bits: int) -> int:
    while True:
        # top two bits set so that p*q has exactly 2*bits bits
        cand = rnd.getrandbits(bits) | (0b11 << (bits - 2)) | 1
        p = int(gmpy2.next_prime(cand))
        if p.bit_length() == bits and gmpy2.gcd(p - 1, PUBLIC_EXPONENT) == 1:
            return p


def rsa_keygen(key_length: int = DEFAULT_KEY_BITS, seed: int = 0) -> Tuple[RsaPublicKey, RsaPrivateKey]:
    """Deterministic keypair for (key_length, seed)."""
    bits = _check_bits(key_length)
    rnd = random.Random(f"rsa-keygen/{bits}/{int(seed)}")
    while True:
        p = _prime(rnd, bits // 2)
        q = _prime(rnd, bits // 2)
        n = p * q
        if p != q and n.bit_length() == bits:
            break
    if p < q:
        p, q = q, p
    d = int(gmpy2.invert(PUBLIC_EXPONENT, (p - 1) * (q - 1)))
    return RsaPublicKey(n, PUBLIC_EXPONENT), RsaPrivateKey(n, PUBLIC_EXPONENT, d, p, q)


def rsa_encrypt(plaintext: bytes, public_key: RsaPublicKey, seed: int = 0) -> bytes:
    """PKCS#1 v1.5 (type 2) encryption; `seed` drives the padding bytes."""
    plaintext = bytes(plaintext)
    k = public_key.size_bytes
    if len(plaintext) > k - PADDING_OVERHEAD:
        raise PlaintextTooLong(f"{len(plaintext)} bytes > {k - PADDING_OVERHEAD} for a {k * 8}-bit key")
    rnd = random.Random(f"rsa-pad/{int(seed)}")
    pad = bytes(rnd.randrange(1, 256) for _ in range(k - 3 - len(plaintext)))
    m = int.from_bytes(b"\x00\x02" + pad + b"\x00" + plaintext, "big")
    c = int(gmpy2.powmod(m, public_key.e, public_key.n))
    return c.to_bytes(k, "big")


def rsa_decrypt(ciphertext: bytes, private_key: RsaPrivateKey) -> bytes:
    k = private_key.public.size_bytes
    if len(ciphertext) != k:
        raise KeyMismatch(f"ciphertext is {len(ciphertext)} bytes, key needs {k}")
    c = int.from_bytes(ciphertext, "big")
    if c >= private_key.n:
        raise KeyMismatch("ciphertext out of range for this key")
    p, q, d = private_key.p, private_key.q, private_key.d
    # CRT
    m1 = gmpy2.powmod(c, d % (p - 1), p)
    m2 = gmpy2.powmod(c, d % (q - 1), q)
    h = (gmpy2.invert(q, p) * (m1 - m2)) % p
    em = int(m2 + h * q).to_bytes(k, "big")
    sep = em.find(b"\x00", 2)
    if em[:2] != b"\x00\x02" or sep < 10:
        raise KeyMismatch("padding check failed: wrong key or corrupted ciphertext")
    return em[sep + 1:]


# -- task and result framing -------------------------------------------------

@dataclass(frozen=True)
class RsaTask:
    plaintext: bytes
    key_length: int = DEFAULT_KEY_BITS
    seed: int = 0
    application_number: int = APP_RSA

    def __post_init__(self):
        if len(self.plaintext) > max_plaintext(self.key_length):
            raise PlaintextTooLong(
                f"{len(self.plaintext)} bytes > {max_plaintext(self.key_length)} for {self.key_length}-bit keys")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def serialize_rsa(task: RsaTask) -> bytes:
    return (bytes([task.application_number]) + (task.key_length // 8).to_bytes(2, "big")
            + task.seed.to_bytes(8, "big") + task.plaintext)


def deserialize_rsa(data: bytes) -> RsaTask:
    data = bytes(data)
    if len(data) < 11:
        raise MalformedPayload(f"RSA task header is 11 bytes, got {len(data)}")
    try:
        return RsaTask(data[11:], int.from_bytes(data[1:3], "big") * 8,
                       int.from_bytes(data[3:11], "big"), data[0])
    except (ValueError, UnsupportedKeyLength, PlaintextTooLong) as e:
        raise MalformedPayload(str(e)) from None


KeyOrDer = Union[RsaPublicKey, RsaPrivateKey, bytes]


def _der(key: KeyOrDer) -> bytes:
    return bytes(key) if isinstance(key, (bytes, bytearray)) else key.to_der()


def ciphertext_field_len(key_length: int) -> int:
    return 2 * (_check_bits(key_length) // 8)


def frame_rsa_result(ciphertext: bytes, public_key: KeyOrDer, private_key: KeyOrDer) -> List[bytes]:
    """[hex ciphertext | public key DER] and [private key DER], each at most one chunk."""
    chunk0 = bytes(ciphertext).hex().encode("ascii") + _der(public_key)
    chunk1 = _der(private_key)
    for i, c in enumerate((chunk0, chunk1)):
        if len(c) > CHUNK_SIZE:
            raise ChunkTooLarge(f"RSA result chunk {i} is {len(c)} bytes (max {CHUNK_SIZE})")
    return [chunk0, chunk1]


def unframe_rsa_result(chunks: Sequence[bytes], key_length: int = DEFAULT_KEY_BITS
                       ) -> Tuple[bytes, RsaPublicKey, RsaPrivateKey]:
    if len(chunks) != 2:
        raise MalformedPayload(f"RSA result is 2 chunks, got {len(chunks)}")
    k = ciphertext_field_len(key_length)
    chunk0 = bytes(chunks[0])
    if len(chunk0) <= k:
        raise MalformedPayload("first chunk too short for ciphertext plus public key")
    try:
        ct = bytes.fromhex(chunk0[:k].decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise MalformedPayload("ciphertext field is not hex text") from None
    return ct, RsaPublicKey.from_der(chunk0[k:]), RsaPrivateKey.from_der(chunks[1])


def run_rsa(task: RsaTask) -> List[bytes]:
    """Generate keys, encrypt the plaintext, and frame the result chunks."""
    pub, priv = rsa_keygen(task.key_length, task.seed)
    ct = rsa_encrypt(task.plaintext, pub, task.seed)
    return frame_rsa_result(ct, pub, priv)


def verify_rsa_result(task: RsaTask, chunks: Sequence[bytes]) -> bytes:
    """Decrypt a received result and check it against the task's plaintext."""
    ct, _, priv = unframe_rsa_result(chunks, task.key_length)
    pt = rsa_decrypt(ct, priv)
    if pt != task.plaintext:
        raise KeyMismatch("decrypted text differs from the original plaintext")
    return pt


def base_cost_ms(key_length: int = DEFAULT_KEY_BITS) -> float:
    """Speed-1.0 compute time; prime search grows roughly with the fourth power of key size."""
    return BASE_COST_MS_2048 * (_check_bits(key_length) / 2048) ** 4
