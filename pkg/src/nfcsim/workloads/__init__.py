"""Offloadable applications and the registry that maps task bytes to them.

Every workload turns a task into bytes (first byte: application number),
executes it into a list of result chunks, and exposes a speed-1.0 cost so
the runtime can time it without necessarily running it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence

from ..errors import MalformedPayload, UnknownWorkload
from . import nqueens, rsa
from .nqueens import (APP_NQUEENS, NQueensTask, deserialize_nqueens, nqueens_count,
                      serialize_nqueens)
from .rsa import (APP_RSA, RsaTask, deserialize_rsa, frame_rsa_result, rsa_decrypt,
                  rsa_encrypt, rsa_keygen, serialize_rsa, unframe_rsa_result)

DEFAULT_PLAINTEXT = b"offloaded over nfc"


@dataclass(frozen=True)
class Workload:
    name: str
    app_number: int
    encode: Callable[[Any], bytes]
    decode: Callable[[bytes], Any]
    execute: Callable[[Any], List[bytes]]
    base_cost_ms: Callable[[Any], float]
    make_task: Callable[..., Any]
    result_sizes: Callable[[Any], List[int]]
    size_of: Callable[[Any], int]


def _nq_execute(task: NQueensTask) -> List[bytes]:
    return [nqueens.encode_count(nqueens_count(task.n))]


def _nq_task(size: int, seed: int = 0, **_) -> NQueensTask:
    return NQueensTask(int(size))


def _rsa_task(size: int = rsa.DEFAULT_KEY_BITS, seed: int = 0, plaintext: bytes = DEFAULT_PLAINTEXT,
              **_) -> RsaTask:
    return RsaTask(bytes(plaintext), int(size), int(seed))


def _rsa_sizes(task: RsaTask) -> List[int]:
    # exact for 2048-bit keys; the PKCS#8 length wobbles by a byte with the key
    k = task.key_length // 8
    return [rsa.ciphertext_field_len(task.key_length) + k + 38, int(k * 4.76)]


WORKLOADS: Dict[str, Workload] = {
    "nqueens": Workload("nqueens", APP_NQUEENS, serialize_nqueens, deserialize_nqueens,
                        _nq_execute, lambda t: nqueens.base_cost_ms(t.n), _nq_task,
                        lambda t: [8], lambda t: t.n),
    "rsa": Workload("rsa", APP_RSA, serialize_rsa, deserialize_rsa, rsa.run_rsa,
                    lambda t: rsa.base_cost_ms(t.key_length), _rsa_task, _rsa_sizes,
                    lambda t: t.key_length),
}


def get_workload(name: str) -> Workload:
    try:
        return WORKLOADS[str(name).lower().replace("-", "_").replace("_", "")]
    except KeyError:
        raise UnknownWorkload(f"unknown workload {name!r}; known: {sorted(WORKLOADS)}") from None


def workload_for(task) -> Workload:
    for w in WORKLOADS.values():
        if w.app_number == getattr(task, "application_number", None):
            return w
    raise UnknownWorkload(f"no workload for task {task!r}")


def decode_task(payload: bytes):
    """Dispatch on the leading application number."""
    if not payload:
        raise MalformedPayload("empty task payload")
    for w in WORKLOADS.values():
        if w.app_number == payload[0]:
            return w, w.decode(payload)
    raise UnknownWorkload(f"no workload with application number {payload[0]}")


__all__ = [
    "APP_NQUEENS", "APP_RSA", "NQueensTask", "RsaTask", "WORKLOADS", "Workload",
    "decode_task", "deserialize_nqueens", "deserialize_rsa", "frame_rsa_result",
    "get_workload", "nqueens_count", "rsa_decrypt", "rsa_encrypt", "rsa_keygen",
    "serialize_nqueens", "serialize_rsa", "unframe_rsa_result", "workload_for",
]
