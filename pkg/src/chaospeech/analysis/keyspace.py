"""Key-space size of the three-level scheme.

Each scrambling level is keyed by an ordering of its ``C(n, 2)`` factor
matrices and a priority permutation of ``n`` coordinates, giving
``C(n, 2)! * n!`` keys.  The stream-cipher level counts, per coefficient, how
many distinguishable values fit in ``|a_ij|`` at resolution ``|delta a_ij|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..stream_cipher import REFERENCE_A

# mismatch resolution at five rounds: 1e-9 everywhere except a21, a31
REFERENCE_RESOLUTION = ((1e-9, 1e-9, 1e-9), (1e-3, 1e-9, 1e-9), (1e-3, 1e-9, 1e-9))


def scrambler_keys(n: int) -> int:
    return math.factorial(math.comb(n, 2)) * math.factorial(n)


def stream_keys(A=REFERENCE_A, resolution=REFERENCE_RESOLUTION) -> float:
    a = np.abs(np.asarray(A, dtype=float))
    d = np.abs(np.asarray(resolution, dtype=float))
    if np.any(d == 0):
        raise ValueError("resolution entries must be nonzero")
    return float(np.prod(a / d))


@dataclass(frozen=True)
class KeySpace:
    bit_level: int
    byte_level: int
    stream_level: float

    @property
    def total(self) -> float:
        return float(self.bit_level) * float(self.byte_level) * self.stream_level

    @property
    def log10_total(self) -> float:
        return math.log10(self.bit_level) + math.log10(self.byte_level) + math.log10(self.stream_level)

    def to_dict(self) -> dict:
        return {"bit_level": float(self.bit_level), "byte_level": float(self.byte_level),
                "stream_level": self.stream_level, "total": self.total}


def key_space(n_bit: int = 6, n_byte: int = 7, resolution=REFERENCE_RESOLUTION,
              A=REFERENCE_A) -> KeySpace:
    return KeySpace(scrambler_keys(n_bit), scrambler_keys(n_byte), stream_keys(A, resolution))
