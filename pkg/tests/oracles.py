"""Independent reference implementations used to check the simulator.

None of these share code with the package under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def nqueens_bruteforce(n: int) -> int:
    """Count permutations with no two queens on a diagonal, fully vectorized."""
    if n == 1:
        return 1
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    ok = np.ones(len(perms), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            ok &= np.abs(perms[:, i] - perms[:, j]) != (j - i)
    return int(ok.sum())


def round_trip_ms(n: int, t_apdu: float, t_sw: float) -> float:
    return 2 * n * t_apdu + (2 * n - 1) * t_sw


def per_switch_root(rate: float, switches: int = 99) -> float:
    return rate ** (1.0 / switches)


def binomial_halfwidth(p: float, trials: int, z: float = 4.0) -> float:
    return z * math.sqrt(max(p * (1 - p), 1e-12) / trials)


def cryptography_decrypt(ciphertext: bytes, private_der: bytes) -> bytes:
    """PKCS#1 v1.5 decryption by the `cryptography` package."""
    from cryptography.hazmat.primitives import serialization
    from cryptography.hazmat.primitives.asymmetric import padding
    key = serialization.load_der_private_key(private_der, password=None)
    return key.decrypt(ciphertext, padding.PKCS1v15())
