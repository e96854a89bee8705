import pytest
from hypothesis import given, strategies as st

from nfcsim.errors import (ChunkTooLarge, KeyMismatch, MalformedPayload, PlaintextTooLong,
                           SizeTooLarge, UnknownWorkload, UnsupportedKeyLength)
from nfcsim.workloads import decode_task, get_workload, workload_for
from nfcsim.workloads.nqueens import (PLACEMENTS, SOLUTIONS, NQueensTask, decode_count,
                                      deserialize_nqueens, encode_count, nqueens_count,
                                      nqueens_search, serialize_nqueens)
from nfcsim.workloads.rsa import (RsaPrivateKey, RsaPublicKey, RsaTask, deserialize_rsa,
                                  frame_rsa_result, rsa_decrypt, rsa_encrypt, rsa_keygen, run_rsa,
                                  serialize_rsa, unframe_rsa_result, verify_rsa_result)


def test_nqueens_known_counts():
    assert [nqueens_count(n) for n in (1, 4, 8)] == [1, 2, 92]
    assert nqueens_count(12) == SOLUTIONS[12]


def test_placement_table_matches_search():
    for n in range(1, 12):
        assert nqueens_search(n) == (SOLUTIONS[n], PLACEMENTS[n])


def test_nqueens_size_limit():
    with pytest.raises(SizeTooLarge):
        nqueens_count(17)


def test_nqueens_serialization():
    assert serialize_nqueens(NQueensTask(255)) == b"\x01\xff"
    assert deserialize_nqueens(b"\x01\xff").n == 255
    with pytest.raises(MalformedPayload):
        deserialize_nqueens(b"\x01")
    with pytest.raises(MalformedPayload):
        deserialize_nqueens(b"\x01\x00")
    with pytest.raises(ValueError):
        NQueensTask(0)


@given(st.integers(0, 2 ** 63))
def test_count_codec(c):
    assert decode_count(encode_count(c)) == c


def test_rsa_keygen_deterministic_and_der_roundtrip():
    a, b = rsa_keygen(512, 7), rsa_keygen(512, 7)
    assert a == b and rsa_keygen(512, 8) != a
    pub, priv = a
    assert RsaPublicKey.from_der(pub.to_der()) == pub
    assert RsaPrivateKey.from_der(priv.to_der()) == priv
    assert pub.n.bit_length() == 512


def test_rsa_errors():
    pub, priv = rsa_keygen(512, 1)
    with pytest.raises(UnsupportedKeyLength):
        rsa_keygen(1536, 0)
    with pytest.raises(PlaintextTooLong):
        rsa_encrypt(bytes(54), pub)
    rsa_encrypt(bytes(53), pub)
    _, other = rsa_keygen(512, 2)
    with pytest.raises(KeyMismatch):
        rsa_decrypt(rsa_encrypt(b"hello", pub), other)
    with pytest.raises(PlaintextTooLong):
        RsaTask(bytes(246), 2048)


def test_rsa_task_serialization():
    t = RsaTask(b"abc", 1024, seed=9)
    assert deserialize_rsa(serialize_rsa(t)) == t
    with pytest.raises(MalformedPayload):
        deserialize_rsa(b"\x02\x00")


def test_rsa_result_framing_2048():
    t = RsaTask(b"offloaded", 2048, seed=3)
    chunks = run_rsa(t)
    assert len(chunks) == 2 and len(chunks[0]) == 806 and len(chunks[1]) <= 2048
    assert verify_rsa_result(t, chunks) == b"offloaded"
    ct, pub, priv = unframe_rsa_result(chunks, 2048)
    assert (pub, priv) == rsa_keygen(2048, 3)
    assert len(ct) == 256


def test_oversized_chunk_rejected():
    pub, priv = rsa_keygen(512, 0)
    with pytest.raises(ChunkTooLarge):
        frame_rsa_result(bytes(64), pub, priv.to_der() + bytes(2048))


def test_unframe_rejects_garbage():
    with pytest.raises(MalformedPayload):
        unframe_rsa_result([b"zz" * 600, b""], 2048)
    with pytest.raises(MalformedPayload):
        unframe_rsa_result([b"x"], 2048)


def test_registry_and_dispatch():
    nq = get_workload("nqueens")
    task = nq.make_task(8)
    assert workload_for(task) is nq
    w, back = decode_task(nq.encode(task))
    assert w is nq and back == task
    assert decode_count(nq.execute(task)[0]) == 92
    with pytest.raises(UnknownWorkload):
        get_workload("sha")
    with pytest.raises(UnknownWorkload):
        decode_task(b"\x09\x01")
