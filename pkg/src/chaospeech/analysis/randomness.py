"""Five tests from the NIST SP 800-22 battery.

Implemented: Frequency (monobit), Frequency within a Block, Runs, Cumulative
Sums (forward and backward reported separately) and Longest Run of Ones in a
Block.  A sequence passes a test when ``P >= alpha`` (default 1e-4).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import norm

DEFAULT_ALPHA = 1e-4
MIN_BITS = 100

TEST_NAMES = ("frequency", "block_frequency", "runs", "cumulative_sums", "longest_run")


class InsufficientData(ValueError):
    pass


def as_bits(data) -> np.ndarray:
    """Bytes (MSB first) or an iterable of 0/1 or a '0101' string -> uint8 bit array."""
    if isinstance(data, str):
        return np.frombuffer(data.strip().encode(), dtype=np.uint8) - ord("0")
    if isinstance(data, (bytes, bytearray, memoryview)):
        return np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return np.asarray(data, dtype=np.uint8)


def _need(bits, n_min, name):
    if len(bits) < n_min:
        raise InsufficientData(f"{name} needs at least {n_min} bits, got {len(bits)}")


def frequency(bits) -> float:
    bits = as_bits(bits)
    _need(bits, MIN_BITS, "frequency")
    n = len(bits)
    s = 2 * int(bits.sum()) - n
    return float(erfc(abs(s) / math.sqrt(n) / math.sqrt(2)))


def block_frequency(bits, block: int = 128) -> float:
    bits = as_bits(bits)
    _need(bits, max(MIN_BITS, block), "block_frequency")
    nblocks = len(bits) // block
    pi = bits[:nblocks * block].reshape(nblocks, block).mean(axis=1)
    chi2 = 4.0 * block * float(np.sum((pi - 0.5) ** 2))
    return float(gammaincc(nblocks / 2.0, chi2 / 2.0))


def runs(bits) -> float:
    bits = as_bits(bits)
    _need(bits, MIN_BITS, "runs")
    n = len(bits)
    pi = bits.mean()
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        # frequency prerequisite not met; the test does not apply
        return 0.0
    v_obs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(v_obs - 2.0 * n * pi * (1 - pi))
    return float(erfc(num / (2.0 * math.sqrt(2.0 * n) * pi * (1 - pi))))


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _cusum_p(z: int, n: int) -> float:
    if z == 0:
        return 1.0
    sq = math.sqrt(n)
    s1 = 0.0
    for k in range(_trunc_div(_trunc_div(-n, z) + 1, 4), _trunc_div(_trunc_div(n, z) - 1, 4) + 1):
        s1 += norm.cdf((4 * k + 1) * z / sq) - norm.cdf((4 * k - 1) * z / sq)
    s2 = 0.0
    for k in range(_trunc_div(_trunc_div(-n, z) - 3, 4), _trunc_div(_trunc_div(n, z) - 1, 4) + 1):
        s2 += norm.cdf((4 * k + 3) * z / sq) - norm.cdf((4 * k + 1) * z / sq)
    return float(1.0 - s1 + s2)


def cumulative_sums(bits) -> tuple[float, float]:
    """Returns ``(forward P, backward P)``."""
    bits = as_bits(bits)
    _need(bits, MIN_BITS, "cumulative_sums")
    x = 2 * bits.astype(np.int64) - 1
    n = len(x)
    z_fwd = int(np.max(np.abs(np.cumsum(x))))
    z_bwd = int(np.max(np.abs(np.cumsum(x[::-1]))))
    return _cusum_p(z_fwd, n), _cusum_p(z_bwd, n)


# (minimum n, block length, category bounds (lo, hi), probabilities)
_LONGEST_RUN = (
    (750_000, 10_000, (10, 16), (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6272, 128, (4, 9), (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, (1, 4), (0.2148, 0.3672, 0.2305, 0.1875)),
)


def _longest_one_runs(blocks: np.ndarray) -> np.ndarray:
    nblocks, m = blocks.shape
    padded = np.zeros((nblocks, m + 2), dtype=np.int8)
    padded[:, 1:-1] = blocks
    d = np.diff(padded, axis=1)
    longest = np.zeros(nblocks, dtype=np.int64)
    rows_s, cols_s = np.nonzero(d == 1)
    _, cols_e = np.nonzero(d == -1)
    lengths = cols_e - cols_s
    np.maximum.at(longest, rows_s, lengths)
    return longest


def longest_run(bits) -> float:
    bits = as_bits(bits)
    _need(bits, 128, "longest_run")
    n = len(bits)
    for n_min, m, (lo, hi), probs in _LONGEST_RUN:
        if n >= n_min:
            break
    nblocks = n // m
    longest = _longest_one_runs(bits[:nblocks * m].reshape(nblocks, m))
    counts = np.bincount(np.clip(longest, lo, hi) - lo, minlength=hi - lo + 1)
    expected = nblocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return float(gammaincc((len(probs) - 1) / 2.0, chi2 / 2.0))


@dataclass(frozen=True)
class SequenceReport:
    pvalues: dict

    def passed(self, alpha: float = DEFAULT_ALPHA) -> dict:
        """Per-test verdict; cumulative sums pass only if both directions pass."""
        return {name: all(p >= alpha for p in np.atleast_1d(v)) for name, v in self.pvalues.items()}


def stat_tests(bits, tests=TEST_NAMES, block: int = 128) -> SequenceReport:
    bits = as_bits(bits)
    funcs = {
        "frequency": frequency,
        "block_frequency": lambda b: block_frequency(b, block),
        "runs": runs,
        "cumulative_sums": cumulative_sums,
        "longest_run": longest_run,
    }
    unknown = set(tests) - set(funcs)
    if unknown:
        raise ValueError(f"unknown tests {sorted(unknown)}")
    return SequenceReport({name: funcs[name](bits) for name in tests})


def battery(stream, n_sequences: int, bits_per_sequence: int, alpha: float = DEFAULT_ALPHA,
            tests=TEST_NAMES, block: int = 128) -> dict:
    """Split ``stream`` into sequences and count passes per test.

    Returns ``{"reports": [...], "pass_counts": {test: k}, "n_sequences": N}``.
    """
    bits = as_bits(stream)
    need = n_sequences * bits_per_sequence
    if len(bits) < need:
        raise InsufficientData(f"need {need} bits for the battery, got {len(bits)}")
    reports = [stat_tests(bits[i * bits_per_sequence:(i + 1) * bits_per_sequence], tests, block)
               for i in range(n_sequences)]
    counts = {name: sum(r.passed(alpha)[name] for r in reports) for name in tests}
    return {"reports": reports, "pass_counts": counts, "n_sequences": n_sequences}
