"""WAV (RIFF PCM 16-bit mono) and raw PCM reading/writing, plus test signals."""
from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .adpcm import DEFAULT_RATE
from .errors import FormatError


def read_wav(path) -> tuple[np.ndarray, int]:
    """Return ``(int16 samples, sample_rate)``; only 16-bit mono PCM is accepted."""
    try:
        with wave.open(str(path), "rb") as w:
            if w.getsampwidth() != 2 or w.getnchannels() != 1 or w.getcomptype() != "NONE":
                raise FormatError(
                    f"{path}: need 16-bit mono PCM, got {w.getnchannels()} ch "
                    f"x {8 * w.getsampwidth()} bit ({w.getcomptype()})")
            rate = w.getframerate()
            data = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"{path}: not a valid WAV file ({exc})") from exc
    return np.frombuffer(data, dtype="<i2").astype(np.int16), rate


def write_wav(path, samples, rate: int = DEFAULT_RATE) -> None:
    samples = np.asarray(samples, dtype="<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(samples.tobytes())


def read_raw(path) -> np.ndarray:
    return np.fromfile(path, dtype="<i2").astype(np.int16)


def write_raw(path, samples) -> None:
    np.asarray(samples, dtype="<i2").tofile(Path(path))


def sine(freq: float, seconds: float, rate: int = DEFAULT_RATE, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(int(round(seconds * rate))) / rate
    return np.round(amplitude * 32767 * np.sin(2 * np.pi * freq * t)).astype(np.int16)


def speech_like(seconds: float, rate: int = DEFAULT_RATE, seed: int = 0) -> np.ndarray:
    """Voiced-speech stand-in: a wandering pitch with formant-ish harmonics,
    a syllabic envelope and a little breath noise."""
    rng = np.random.default_rng(seed)
    n = int(round(seconds * rate))
    t = np.arange(n) / rate
    f0 = 140 + 30 * np.sin(2 * np.pi * 0.7 * t) + 10 * np.sin(2 * np.pi * 2.3 * t)
    phase = 2 * np.pi * np.cumsum(f0) / rate
    voiced = sum(np.sin(h * phase) / h for h in range(1, 16) if h * 140 < rate / 2)
    env = np.clip(np.sin(2 * np.pi * 3.5 * t + rng.uniform(0, 2 * np.pi)), 0, None) ** 0.5
    x = env * voiced + 0.02 * rng.standard_normal(n)
    x /= np.max(np.abs(x)) + 1e-12
    return np.round(0.6 * 32767 * x).astype(np.int16)
