"""N Queens solution counting by bitmask backtracking."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import List, Tuple

from ..errors import MalformedPayload, SizeTooLarge

APP_NQUEENS = 1
MAX_N = 16
# 5 microseconds per queen placement on a speed-1.0 device
US_PER_PLACEMENT = 5.0

# Queens placed by `nqueens_search` for each n, frozen so the cost model does
# not have to solve large boards.  Guarded by a test against the live solver.
PLACEMENTS = {
    1: 1, 2: 2, 3: 5, 4: 16, 5: 53, 6: 152, 7: 551, 8: 2056, 9: 8393, 10: 35538,
    11: 166925, 12: 856188, 13: 4674889, 14: 27358552, 15: 171129071, 16: 1141190302,
}
SOLUTIONS = {
    1: 1, 2: 0, 3: 0, 4: 2, 5: 10, 6: 4, 7: 40, 8: 92, 9: 352, 10: 724, 11: 2680,
    12: 14200, 13: 73712, 14: 365596, 15: 2279184, 16: 14772512,
}


def _check(n: int) -> int:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"board size must be a positive integer, got {n!r}")
    if n > MAX_N:
        raise SizeTooLarge(f"n={n} above the supported maximum {MAX_N}")
    return n


def nqueens_search(n: int) -> Tuple[int, int]:
    """Full backtracking walk: (solutions, queens placed)."""
    full = (1 << _check(n)) - 1
    solutions = placements = 0
    # explicit stack of (columns, left diagonals, right diagonals, free squares)
    stack: List[Tuple[int, int, int, int]] = [(0, 0, 0, full)]
    while stack:
        cols, ld, rd, free = stack.pop()
        while free:
            bit = free & -free
            free ^= bit
            placements += 1
            c, l, r = cols | bit, (ld | bit) << 1, (rd | bit) >> 1
            if c == full:
                solutions += 1
            else:
                stack.append((c, l, r, full & ~(c | l | r)))
    return solutions, placements


def _count(full: int, cols: int, ld: int, rd: int) -> int:
    if cols == full:
        return 1
    total = 0
    free = full & ~(cols | ld | rd)
    while free:
        bit = free & -free
        free ^= bit
        total += _count(full, cols | bit, ((ld | bit) << 1) & full, (rd | bit) >> 1)
    return total


@functools.lru_cache(maxsize=None)
def nqueens_count(n: int) -> int:
    """Number of ways to place n mutually non-attacking queens on an n x n board."""
    full = (1 << _check(n)) - 1
    # mirror symmetry: count first-row queens in the left half twice
    total = 0
    for col in range(n // 2):
        bit = 1 << col
        total += _count(full, bit, (bit << 1) & full, bit >> 1)
    total *= 2
    if n % 2:
        bit = 1 << (n // 2)
        total += _count(full, bit, (bit << 1) & full, bit >> 1)
    return total


def base_cost_ms(n: int) -> float:
    """Compute time on a speed-1.0 device, proportional to the search size."""
    return PLACEMENTS[_check(n)] * US_PER_PLACEMENT / 1000


@dataclass(frozen=True)
class NQueensTask:
    n: int
    application_number: int = APP_NQUEENS

    def __post_init__(self):
        if not 1 <= self.n <= 255:
            raise ValueError("n must fit one byte and be >= 1")
        if not 0 <= self.application_number <= 255:
            raise ValueError("application number must fit one byte")


def serialize_nqueens(task: NQueensTask) -> bytes:
    return bytes([task.application_number, task.n])


def deserialize_nqueens(data: bytes) -> NQueensTask:
    data = bytes(data)
    if len(data) != 2:
        raise MalformedPayload(f"N Queens task is 2 bytes, got {len(data)}")
    try:
        return NQueensTask(data[1], data[0])
    except ValueError as e:
        raise MalformedPayload(str(e)) from None


def encode_count(count: int) -> bytes:
    return int(count).to_bytes(8, "big")


def decode_count(data: bytes) -> int:
    if len(data) != 8:
        raise MalformedPayload("count result is 8 bytes")
    return int.from_bytes(data, "big")
