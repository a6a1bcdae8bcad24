"""Integer modular maps used to build bit and byte scrambling tables.

A transform matrix is the ordered product of elementary factors ``T_ij``
(identity with a 2x2 block written at rows/columns ``i`` and ``j``).  Iterating
the induced map ``x -> M x mod 2**N0`` over every state of an ``n``-dimensional
lattice and re-packing the image gives a permutation of ``[0, 2**(n*N0))``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidKey

DEFAULT_BLOCK_PARAMS = (1, 1, 1, 2)

# products for n <= 7 stay below 2**11; anything near this is a bad key
_INT64_GUARD = 2**62


def canonical_pairs(n: int) -> list[tuple[int, int]]:
    """Pairs (i, j), 1 <= i < j <= n, in row-major order: T12 T13 ... T(n-1)n."""
    return [(i, j) for i in range(1, n) for j in range(i + 1, n + 1)]


@dataclass(frozen=True)
class FactorOrder:
    n: int
    pairs: tuple[tuple[int, int], ...]
    block_params: tuple[int, int, int, int] = DEFAULT_BLOCK_PARAMS

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise InvalidKey(f"dimension must be >= 2, got {n}")
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "block_params", tuple(int(v) for v in self.block_params))
        for i, j in pairs:
            if not 1 <= i < j <= n:
                raise InvalidKey(f"pair ({i}, {j}) out of range for n={n}")
        if len(set(pairs)) != len(pairs):
            raise InvalidKey("duplicate factor pair in order")
        if len(pairs) != n * (n - 1) // 2:
            raise InvalidKey(
                f"order must contain all {n * (n - 1) // 2} pairs, got {len(pairs)}")
        a11, a12, a21, a22 = self.block_params
        if a11 * a22 - a12 * a21 != 1:
            raise InvalidKey("block params must have determinant 1")

    @classmethod
    def canonical(cls, n: int, block_params=DEFAULT_BLOCK_PARAMS) -> "FactorOrder":
        return cls(n, tuple(canonical_pairs(n)), tuple(block_params))

    def swapped(self, a: tuple[int, int], b: tuple[int, int]) -> "FactorOrder":
        """Return a copy with the positions of factors ``a`` and ``b`` exchanged."""
        pairs = list(self.pairs)
        ia, ib = pairs.index(tuple(a)), pairs.index(tuple(b))
        pairs[ia], pairs[ib] = pairs[ib], pairs[ia]
        return FactorOrder(self.n, tuple(pairs), self.block_params)


def elementary_factor(n: int, i: int, j: int, block_params=DEFAULT_BLOCK_PARAMS) -> np.ndarray:
    a11, a12, a21, a22 = block_params
    t = np.eye(n, dtype=np.int64)
    i, j = i - 1, j - 1
    t[i, i], t[i, j], t[j, i], t[j, j] = a11, a12, a21, a22
    return t


def build_transform_matrix(order: FactorOrder) -> np.ndarray:
    """Left-to-right product of the ``T_ij`` factors, exact int64 arithmetic."""
    m = np.eye(order.n, dtype=np.int64)
    for i, j in order.pairs:
        m = m @ elementary_factor(order.n, i, j, order.block_params)
        if np.abs(m).max() >= _INT64_GUARD:
            raise OverflowError("transform matrix entries exceed the int64 guard")
    m.setflags(write=False)
    return m


def iterate_mod_map(x, m: np.ndarray, n0: int = 2) -> np.ndarray:
    """One step ``y = m @ x mod 2**n0``.  ``x`` may be a single state or an (K, n) batch."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape[-1] != m.shape[0]:
        raise ValueError(f"state dimension {x.shape[-1]} does not match matrix {m.shape}")
    mod = 1 << n0
    if np.any((x < 0) | (x >= mod)):
        raise ValueError(f"state coordinates must lie in [0, {mod})")
    return (x @ m.T) % mod


def pack_index(x, n0: int = 2) -> int:
    """Serial number of a state, first coordinate most significant."""
    x = [int(v) for v in x]
    n = len(x)
    mod = 1 << n0
    s = 0
    for v in x:
        if not 0 <= v < mod:
            raise ValueError(f"coordinate {v} outside [0, {mod})")
        s = (s << n0) | v
    assert s < 1 << (n * n0)
    return s


def unpack_index(s: int, n: int, n0: int = 2) -> np.ndarray:
    if not 0 <= s < 1 << (n * n0):
        raise ValueError(f"index {s} outside [0, 2**{n * n0})")
    mask = (1 << n0) - 1
    return np.array([(s >> (n0 * (n - 1 - i))) & mask for i in range(n)], dtype=np.int64)


def _all_states(n: int, n0: int) -> np.ndarray:
    s = np.arange(1 << (n * n0), dtype=np.int64)
    shifts = n0 * np.arange(n - 1, -1, -1, dtype=np.int64)
    return (s[:, None] >> shifts[None, :]) & ((1 << n0) - 1)


def check_alpha(alpha, n: int) -> tuple[int, ...]:
    alpha = tuple(int(a) for a in alpha)
    if sorted(alpha) != list(range(1, n + 1)):
        raise InvalidKey(f"alpha must be a permutation of 1..{n}, got {alpha}")
    return alpha


def generate_table(m: np.ndarray, n: int, n0: int = 2, alpha=None) -> np.ndarray:
    """Scrambling table ``E``: ``E[S]`` re-packs the image of state ``S`` with
    coordinates taken in priority order ``alpha`` (1-based)."""
    alpha = check_alpha(alpha if alpha is not None else range(1, n + 1), n)
    if m.shape != (n, n):
        raise ValueError(f"matrix shape {m.shape} does not match n={n}")
    y = (_all_states(n, n0) @ m.T) % (1 << n0)
    y = y[:, [a - 1 for a in alpha]]
    shifts = n0 * np.arange(n - 1, -1, -1, dtype=np.int64)
    table = (y << shifts[None, :]).sum(axis=1)
    table.setflags(write=False)
    return table


def invert_table(table) -> np.ndarray:
    table = np.asarray(table)
    inv = np.empty_like(table)
    inv[table] = np.arange(len(table), dtype=table.dtype)
    return inv


def is_bijection(table) -> bool:
    table = np.asarray(table)
    return bool(np.array_equal(np.sort(table), np.arange(len(table))))


@dataclass(frozen=True)
class ScramblerKey:
    """Factor order plus priority permutation; yields one permutation table."""

    order: FactorOrder
    alpha: tuple[int, ...] = field(default=())
    n0: int = 2

    def __post_init__(self):
        alpha = self.alpha or tuple(range(1, self.order.n + 1))
        object.__setattr__(self, "alpha", check_alpha(alpha, self.order.n))

    @property
    def n(self) -> int:
        return self.order.n

    @classmethod
    def reference(cls, n: int) -> "ScramblerKey":
        return cls(FactorOrder.canonical(n))

    def matrix(self) -> np.ndarray:
        return build_transform_matrix(self.order)

    def table(self) -> np.ndarray:
        return _cached_table(self)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "pairs": [list(p) for p in self.order.pairs],
            "alpha": list(self.alpha),
            "block_params": list(self.order.block_params),
            "n0": self.n0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScramblerKey":
        order = FactorOrder(
            int(d["n"]),
            tuple(tuple(p) for p in d["pairs"]),
            tuple(d.get("block_params", DEFAULT_BLOCK_PARAMS)),
        )
        return cls(order, tuple(d.get("alpha", ())), int(d.get("n0", 2)))


_TABLES: dict = {}


def _cached_table(key: ScramblerKey) -> np.ndarray:
    table = _TABLES.get(key)
    if table is None:
        table = generate_table(key.matrix(), key.n, key.n0, key.alpha)
        if not is_bijection(table):
            raise InvalidKey("scrambler key does not produce a bijection")
        _TABLES[key] = table
    return table


def save_scrambler_key(key: ScramblerKey, path) -> None:
    Path(path).write_text(json.dumps(key.to_dict(), indent=2) + "\n")


def load_scrambler_key(path) -> ScramblerKey:
    return ScramblerKey.from_dict(json.loads(Path(path).read_text()))


def dump_table(table, path) -> None:
    """Write a table as little-endian uint16 indices (golden-vector format)."""
    np.asarray(table, dtype="<u2").tofile(path)


def load_table(path) -> np.ndarray:
    return np.fromfile(path, dtype="<u2").astype(np.int64)
