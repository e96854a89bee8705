"""Named, reproducible random substreams derived from one scenario seed."""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.SeedSequence:
    """Independent SeedSequence for the consumer called `name`.

    Keyed by name rather than by draw order, so adding a consumer never
    shifts the numbers another consumer sees.
    """
    return np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(name.encode()),))


def generator(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(substream(seed, name))
