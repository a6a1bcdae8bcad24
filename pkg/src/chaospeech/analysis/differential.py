"""Avalanche metrics (NPCR/UACI) and byte histograms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chisquare

from ..stream_cipher import StreamCipherKey, encrypt_frame

# expectations for two independent uniform byte streams
IDEAL_NPCR = 100.0 * 255 / 256
IDEAL_UACI = 100.0 * sum(abs(a - b) for a in range(256) for b in range(256)) / (255 * 256**2)


@dataclass(frozen=True)
class DiffReport:
    npcr: float
    uaci: float
    F: int

    def to_dict(self) -> dict:
        return {"npcr": self.npcr, "uaci": self.uaci, "F": self.F}


def _u8(x) -> np.ndarray:
    return x.astype(np.uint8, copy=False) if isinstance(x, np.ndarray) \
        else np.frombuffer(bytes(x), dtype=np.uint8)


def npcr_uaci(c, c2) -> DiffReport:
    a, b = _u8(c), _u8(c2)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("empty inputs")
    diff = np.abs(a.astype(np.int16) - b.astype(np.int16))
    return DiffReport(100.0 * np.count_nonzero(diff) / a.size,
                      100.0 * float(diff.sum()) / (255.0 * a.size), int(a.size))


def perturb(frame, position: int, mask: int = 0x01) -> bytes:
    buf = bytearray(frame)
    buf[position] ^= mask
    return bytes(buf)


def average_npcr_uaci(key: StreamCipherKey, frame, positions=256, seed: int = 0,
                      encrypt=encrypt_frame) -> DiffReport:
    """Mean NPCR/UACI over single-byte plaintext perturbations.

    ``positions`` is either a count (sampled without replacement with
    ``seed``) or an explicit sequence of byte positions; pass ``len(frame)``
    for the exhaustive sweep.
    """
    frame = bytes(frame)
    if isinstance(positions, int):
        if positions >= len(frame):
            positions = range(len(frame))
        else:
            positions = np.random.default_rng(seed).choice(len(frame), positions, replace=False)
    positions = [int(p) for p in positions]
    if not positions:
        raise ValueError("no perturbation positions")
    base = encrypt(frame, key)
    reports = [npcr_uaci(base, encrypt(perturb(frame, m), key)) for m in positions]
    return DiffReport(float(np.mean([r.npcr for r in reports])),
                      float(np.mean([r.uaci for r in reports])), len(frame))


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    chi2: float
    pvalue: float

    def uniform(self, significance: float = 0.01) -> bool:
        return self.pvalue >= significance

    def to_dict(self) -> dict:
        return {"counts": self.counts.tolist(), "chi2": self.chi2, "pvalue": self.pvalue}


def histogram(data) -> Histogram:
    """Byte-value counts and the chi-square statistic against a uniform law."""
    counts = np.bincount(_u8(data), minlength=256)
    if counts.sum() == 0:
        return Histogram(counts, float("nan"), float("nan"))
    stat, p = chisquare(counts)
    return Histogram(counts, float(stat), float(p))
