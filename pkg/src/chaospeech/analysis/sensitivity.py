"""Mismatch thresholds of the stream-cipher coefficients.

For every ``a_ij`` the receiver key is offset by ``10**d`` over a grid of
decades; the threshold is the smallest decade at which decryption fails.
Decryption counts as failed once the output is noise-like: at least
``fail_fraction`` of the bytes differ from the plaintext (independent random
bytes differ with probability 255/256).  A receiver state that diverges also
counts as a failure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CipherFault
from ..stream_cipher import StreamCipherKey, decrypt_frame, encrypt_frame

DEFAULT_DECADES = tuple(range(-15, 2))
DEFAULT_FAIL_FRACTION = 0.99


@dataclass(frozen=True)
class SensitivityMatrix:
    exponents: np.ndarray  # 3x3 decades; nan when no tested decade failed
    rounds: int

    @property
    def thresholds(self) -> np.ndarray:
        return 10.0 ** self.exponents

    def to_dict(self) -> dict:
        return {"rounds": self.rounds, "exponents": self.exponents.tolist(),
                "thresholds": self.thresholds.tolist()}


def error_fraction(key: StreamCipherKey, receiver: StreamCipherKey, plain: bytes, cipher=None) -> float:
    cipher = encrypt_frame(plain, key) if cipher is None else cipher
    try:
        out = decrypt_frame(cipher, receiver)
    except CipherFault:
        return 1.0
    a = np.frombuffer(out, dtype=np.uint8)
    b = np.frombuffer(plain, dtype=np.uint8)
    return float(np.mean(a != b))


def entry_threshold(key: StreamCipherKey, i: int, j: int, plain: bytes, cipher=None,
                    decades=DEFAULT_DECADES, fail_fraction=DEFAULT_FAIL_FRACTION) -> float:
    cipher = encrypt_frame(plain, key) if cipher is None else cipher
    for d in sorted(decades):
        receiver = StreamCipherKey(key.system.with_entry(i, j, 10.0**d), key.rounds, key.x0)
        if error_fraction(key, receiver, plain, cipher) >= fail_fraction:
            return float(d)
    return float("nan")


def sensitivity_scan(key: StreamCipherKey, plain=None, decades=DEFAULT_DECADES,
                     fail_fraction=DEFAULT_FAIL_FRACTION, seed: int = 0) -> SensitivityMatrix:
    if plain is None:
        plain = np.random.default_rng(seed).integers(0, 256, 16384, dtype=np.uint8).tobytes()
    plain = bytes(plain)
    cipher = encrypt_frame(plain, key)
    exps = np.array([[entry_threshold(key, i, j, plain, cipher, decades, fail_fraction)
                      for j in range(3)] for i in range(3)])
    return SensitivityMatrix(exps, key.rounds)
