"""Deterministic seed derivation.

A child seed is the first 64-bit word of
``numpy.random.SeedSequence([master, *tags])``; string tags are hashed with
CRC32 first. The same (master, tags) always yields the same child, so partial
reruns reproduce full runs.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag(x) -> int:
    if isinstance(x, str):
        return zlib.crc32(x.encode("utf-8"))
    if isinstance(x, (int, np.integer)) and x >= 0:
        return int(x)
    raise TypeError(f"seed tags must be non-negative ints or strings, got {x!r}")


def derive_seed(master: int, *tags) -> int:
    ss = np.random.SeedSequence([_tag(master), *(_tag(t) for t in tags)])
    return int(ss.generate_state(1, np.uint64)[0])
