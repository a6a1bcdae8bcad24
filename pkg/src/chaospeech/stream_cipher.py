"""Multi-round self-synchronizing stream cipher driven by a 3-D chaotic map.

The map is a stable linear system chaotified by a bounded sine controller on
the third state::

    x1' = a11 x1 + a12 x2 + a13 x3
    x2' = a21 u  + a22 x2 + a23 x3
    x3' = a31 u  + a32 x2 + a33 x3 + eps * sin(sigma * u)

As an autonomous system ``u = x1``.  Inside the cipher ``u`` is the cipher
byte ``p(k) = (floor(x1) mod 256) ^ s(k)`` so sender and receiver are driven by
the same sequence and synchronize.

All arithmetic is plain CPython float (IEEE-754 binary64, no FMA contraction)
and ``math.sin``; the sender and receiver must run the same build.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CipherFault, InvalidKey

REFERENCE_A = (
    (0.205, -0.595, 0.265),
    (-0.265, -0.125, 0.595),
    (0.33, -0.33, 0.47),
)
REFERENCE_EPSILON = 3e8
REFERENCE_SIGMA = 2e5
REFERENCE_X0 = (0.1, 0.1, 0.1)
REFERENCE_ROUNDS = 5

# sigma tracks epsilon along the sweep used for the Lyapunov/NIST study
SIGMA_PER_EPSILON = 6.6667e-4

_INT64_LIMIT = 2.0**63


def sigma_for_epsilon(eps: float) -> float:
    return SIGMA_PER_EPSILON * eps


@dataclass(frozen=True)
class ChaoticSystem:
    A: tuple = REFERENCE_A
    epsilon: float = REFERENCE_EPSILON
    sigma: float = REFERENCE_SIGMA

    def __post_init__(self):
        a = np.asarray(self.A, dtype=float)
        if a.shape != (3, 3) or not np.all(np.isfinite(a)):
            raise InvalidKey("A must be a finite 3x3 matrix")
        object.__setattr__(self, "A", tuple(tuple(float(v) for v in row) for row in a))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.A)

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.matrix))))

    def validate(self) -> "ChaoticSystem":
        """Raise unless the nominal (uncontrolled) system is asymptotically stable."""
        rho = self.spectral_radius()
        if not rho < 1.0:
            raise InvalidKey(f"spectral radius of A is {rho:.6g}; must be < 1")
        return self

    def with_entry(self, i: int, j: int, delta: float) -> "ChaoticSystem":
        """Copy with ``A[i][j] += delta`` (0-based), used for mismatch studies."""
        a = [list(row) for row in self.A]
        a[i][j] += delta
        return replace(self, A=tuple(tuple(r) for r in a))

    def step(self, x, u=None):
        """One iteration; ``u`` defaults to ``x1`` (autonomous map)."""
        (a11, a12, a13), (a21, a22, a23), (a31, a32, a33) = self.A
        x1, x2, x3 = x
        if u is None:
            u = x1
        return (a11 * x1 + a12 * x2 + a13 * x3,
                a21 * u + a22 * x2 + a23 * x3,
                a31 * u + a32 * x2 + a33 * x3 + self.epsilon * math.sin(self.sigma * u))

    def jacobian(self, x) -> np.ndarray:
        j = self.matrix
        j[2, 0] += self.epsilon * self.sigma * math.cos(self.sigma * x[0])
        return j


@dataclass(frozen=True)
class StreamCipherKey:
    system: ChaoticSystem = field(default_factory=ChaoticSystem)
    rounds: int = REFERENCE_ROUNDS
    x0: tuple = REFERENCE_X0

    def __post_init__(self):
        if int(self.rounds) < 1:
            raise InvalidKey(f"round count must be >= 1, got {self.rounds}")
        object.__setattr__(self, "rounds", int(self.rounds))
        x0 = tuple(float(v) for v in self.x0)
        if len(x0) != 3 or not all(math.isfinite(v) for v in x0):
            raise InvalidKey("x0 must be three finite floats")
        object.__setattr__(self, "x0", x0)

    def to_dict(self) -> dict:
        # float repr is the shortest string that round-trips binary64 exactly
        return {
            "A": [list(r) for r in self.system.A],
            "epsilon": self.system.epsilon,
            "sigma": self.system.sigma,
            "rounds": self.rounds,
            "x0": list(self.x0),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StreamCipherKey":
        system = ChaoticSystem(tuple(tuple(r) for r in d["A"]), d["epsilon"], d["sigma"])
        return cls(system, int(d["rounds"]), tuple(d["x0"]))


def keystream_byte(x1: float) -> int:
    """``floor(x1) mod 256`` with a nonnegative (Euclidean) residue."""
    if not -_INT64_LIMIT <= x1 < _INT64_LIMIT:
        raise CipherFault(f"chaotic state x1={x1!r} is not representable as int64")
    return math.floor(x1) % 256


def _run(data, system: ChaoticSystem, state, decrypt: bool):
    (a11, a12, a13), (a21, a22, a23), (a31, a32, a33) = system.A
    eps, sig = system.epsilon, system.sigma
    sin, floor = math.sin, math.floor
    lo, hi = -_INT64_LIMIT, _INT64_LIMIT
    x1, x2, x3 = state
    out = bytearray(len(data))
    for k, s in enumerate(data):
        if not lo <= x1 < hi:
            raise CipherFault(f"chaotic state diverged at byte {k}: x1={x1!r}")
        ks = floor(x1) & 0xFF
        if decrypt:
            p = s
            out[k] = s ^ ks
        else:
            p = s ^ ks
            out[k] = p
        x1, x2, x3 = (a11 * x1 + a12 * x2 + a13 * x3,
                      a21 * p + a22 * x2 + a23 * x3,
                      a31 * p + a32 * x2 + a33 * x3 + eps * sin(sig * p))
    return bytes(out), (x1, x2, x3)


def encrypt_round(data, key: StreamCipherKey, state=None, return_state=False):
    """One forward pass of the sender system over ``data``."""
    out, final = _run(data, key.system, key.x0 if state is None else state, False)
    return (out, final) if return_state else out


def decrypt_round(data, key: StreamCipherKey, state=None, return_state=False):
    """One forward pass of the receiver system driven by the cipher bytes."""
    out, final = _run(data, key.system, key.x0 if state is None else state, True)
    return (out, final) if return_state else out


def _reversed_round(k: int) -> bool:
    # even-numbered rounds (2nd, 4th, ...) walk the frame back to front
    return k % 2 == 1


def encrypt_frame(frame, key: StreamCipherKey) -> bytes:
    """Apply ``key.rounds`` rounds, each starting from ``key.x0``.

    Odd rounds run first-to-last byte, even rounds last-to-first, so a change
    anywhere in the plaintext reaches every cipher byte from the second round on.
    """
    data = bytes(frame)
    for k in range(key.rounds):
        if _reversed_round(k):
            data = encrypt_round(data[::-1], key)[::-1]
        else:
            data = encrypt_round(data, key)
    return data


def decrypt_frame(cipher, key: StreamCipherKey) -> bytes:
    data = bytes(cipher)
    for k in reversed(range(key.rounds)):
        if _reversed_round(k):
            data = decrypt_round(data[::-1], key)[::-1]
        else:
            data = decrypt_round(data, key)
    return data


def keystream(key: StreamCipherKey, nbytes: int, state=None) -> bytes:
    """Keystream emitted when the cipher encrypts an all-zero plaintext."""
    return encrypt_round(bytes(nbytes), key, state)


def autonomous_trajectory(system: ChaoticSystem, x0, n: int) -> np.ndarray:
    """Iterate the uncoupled map ``n`` times; returns an (n+1, 3) array."""
    traj = np.empty((n + 1, 3))
    x = tuple(float(v) for v in x0)
    traj[0] = x
    for k in range(1, n + 1):
        x = system.step(x)
        traj[k] = x
    return traj


_PARAM_INDEX = {f"a{i + 1}{j + 1}": (i, j) for i in range(3) for j in range(3)}


def error_dynamics_steady_state(A=REFERENCE_A, which="a31", drive_magnitude=1.0) -> np.ndarray:
    """Steady-state state error per unit mismatch of one coefficient.

    With sender and receiver driven by the same cipher bytes, the x1 coupling
    drops out of the error equations, leaving ``e = B e + d`` where ``B`` is
    ``A`` with ``a21 = a31 = 0`` and ``d`` injects ``drive_magnitude`` into the
    row of the mismatched coefficient.  The drive is ``p(k)`` for column-1
    entries and ``x_j(k)`` otherwise; both enter linearly.
    """
    if which not in _PARAM_INDEX:
        raise ValueError(f"unsupported parameter {which!r}; one of {sorted(_PARAM_INDEX)}")
    row, _ = _PARAM_INDEX[which]
    b = np.array(A, dtype=float)
    b[1, 0] = b[2, 0] = 0.0
    d = np.zeros(3)
    d[row] = drive_magnitude
    system = np.eye(3) - b
    if abs(np.linalg.det(system)) < 1e-12:
        raise np.linalg.LinAlgError("steady-state error system is singular")
    return np.linalg.solve(system, d)
