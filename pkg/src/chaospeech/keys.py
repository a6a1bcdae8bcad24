"""Key bundle for the three encryption levels and its JSON file format."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .chaos_core import FactorOrder, ScramblerKey
from .errors import InvalidKey
from .stream_cipher import ChaoticSystem, StreamCipherKey

BIT_DIMENSION = 6
BYTE_DIMENSION = 7


@dataclass(frozen=True)
class KeyBundle:
    bit_scrambler: ScramblerKey = field(default_factory=lambda: ScramblerKey.reference(BIT_DIMENSION))
    byte_scrambler: ScramblerKey = field(default_factory=lambda: ScramblerKey.reference(BYTE_DIMENSION))
    stream: StreamCipherKey = field(default_factory=StreamCipherKey)

    def __post_init__(self):
        if self.bit_scrambler.n != BIT_DIMENSION or self.bit_scrambler.n0 != 2:
            raise InvalidKey("bit scrambler must be a 6-D map with 2 bits per coordinate")
        if self.byte_scrambler.n != BYTE_DIMENSION or self.byte_scrambler.n0 != 2:
            raise InvalidKey("byte scrambler must be a 7-D map with 2 bits per coordinate")
        self.stream.system.validate()

    def tables(self):
        return self.bit_scrambler.table(), self.byte_scrambler.table()

    def to_dict(self) -> dict:
        return {
            "format": "chaospeech-key/1",
            "bit_scrambler": self.bit_scrambler.to_dict(),
            "byte_scrambler": self.byte_scrambler.to_dict(),
            "stream": self.stream.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KeyBundle":
        try:
            return cls(ScramblerKey.from_dict(d["bit_scrambler"]),
                       ScramblerKey.from_dict(d["byte_scrambler"]),
                       StreamCipherKey.from_dict(d["stream"]))
        except (KeyError, TypeError) as exc:
            raise InvalidKey(f"malformed key bundle: {exc!r}") from exc

    def with_stream(self, **changes) -> "KeyBundle":
        """Copy with stream-key fields replaced (``system``, ``rounds``, ``x0``)."""
        stream = StreamCipherKey(changes.get("system", self.stream.system),
                                 changes.get("rounds", self.stream.rounds),
                                 changes.get("x0", self.stream.x0))
        return KeyBundle(self.bit_scrambler, self.byte_scrambler, stream)


def save_key(bundle: KeyBundle, path) -> None:
    Path(path).write_text(json.dumps(bundle.to_dict(), indent=2) + "\n")


def load_key(path) -> KeyBundle:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidKey(f"{path}: not valid JSON ({exc})") from exc
    return KeyBundle.from_dict(d)


def _random_scrambler(n: int, rng: random.Random) -> ScramblerKey:
    pairs = list(FactorOrder.canonical(n).pairs)
    rng.shuffle(pairs)
    alpha = list(range(1, n + 1))
    rng.shuffle(alpha)
    return ScramblerKey(FactorOrder(n, tuple(pairs)), tuple(alpha))


def keygen(seed=None, *, A=None, epsilon=None, sigma=None, rounds=None) -> KeyBundle:
    """Reference key when ``seed`` is None; otherwise random factor orders,
    random priority permutations and a random initial state.

    Stream-cipher parameters may be overridden; ``A`` must be stable.
    """
    base = StreamCipherKey()
    system = ChaoticSystem(
        A if A is not None else base.system.A,
        epsilon if epsilon is not None else base.system.epsilon,
        sigma if sigma is not None else base.system.sigma,
    ).validate()
    rounds = rounds if rounds is not None else base.rounds
    if seed is None:
        return KeyBundle(stream=StreamCipherKey(system, rounds, base.x0))
    rng = random.Random(seed)
    x0 = tuple(rng.uniform(-1.0, 1.0) for _ in range(3))
    return KeyBundle(_random_scrambler(BIT_DIMENSION, rng),
                     _random_scrambler(BYTE_DIMENSION, rng),
                     StreamCipherKey(system, rounds, x0))
