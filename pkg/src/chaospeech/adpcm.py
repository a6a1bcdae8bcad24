"""IMA/DVI ADPCM: 16-bit PCM to 4-bit codes, packed two per byte.

Blocks are 32768 samples and compress to one 16384-byte frame.  The first code
of each pair goes in the low nibble.  Codec state resets at every block, so
each frame decodes on its own.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK_SAMPLES = 32768
FRAME_BYTES = BLOCK_SAMPLES // 2
DEFAULT_RATE = 8000

INDEX_TABLE = (-1, -1, -1, -1, 2, 4, 6, 8)

STEP_TABLE = (
    7, 8, 9, 10, 11, 12, 13, 14, 16, 17,
    19, 21, 23, 25, 28, 31, 34, 37, 41, 45,
    50, 55, 60, 66, 73, 80, 88, 97, 107, 118,
    130, 143, 157, 173, 190, 209, 230, 253, 279, 307,
    337, 371, 408, 449, 494, 544, 598, 658, 724, 796,
    876, 963, 1060, 1166, 1282, 1411, 1552, 1707, 1878, 2066,
    2272, 2499, 2749, 3024, 3327, 3660, 4026, 4428, 4871, 5358,
    5894, 6484, 7132, 7845, 8630, 9493, 10442, 11487, 12635, 13899,
    15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767,
)


@dataclass
class CodecState:
    predictor: int = 0
    step_index: int = 0

    def to_dict(self) -> dict:
        return {"predictor": self.predictor, "step_index": self.step_index}

    @classmethod
    def from_dict(cls, d: dict) -> "CodecState":
        return cls(int(d["predictor"]), int(d["step_index"]))


def encode_samples(samples, state: CodecState | None = None):
    """Encode samples to a list of 4-bit codes; returns ``(codes, state)``."""
    state = CodecState() if state is None else state
    pred, index = state.predictor, state.step_index
    steps, adjust = STEP_TABLE, INDEX_TABLE
    codes = bytearray(len(samples))
    for k, sample in enumerate(np.asarray(samples, dtype=np.int64).tolist()):
        step = steps[index]
        diff = sample - pred
        code = 0
        if diff < 0:
            code = 8
            diff = -diff
        vpdiff = step >> 3
        if diff >= step:
            code |= 4
            diff -= step
            vpdiff += step
        step >>= 1
        if diff >= step:
            code |= 2
            diff -= step
            vpdiff += step
        step >>= 1
        if diff >= step:
            code |= 1
            vpdiff += step
        if code & 8:
            pred -= vpdiff
        else:
            pred += vpdiff
        if pred > 32767:
            pred = 32767
        elif pred < -32768:
            pred = -32768
        index += adjust[code & 7]
        if index < 0:
            index = 0
        elif index > 88:
            index = 88
        codes[k] = code
    return codes, CodecState(pred, index)


def decode_codes(codes, state: CodecState | None = None):
    """Decode 4-bit codes; returns ``(int16 array, state)``."""
    state = CodecState() if state is None else state
    pred, index = state.predictor, state.step_index
    steps, adjust = STEP_TABLE, INDEX_TABLE
    out = np.empty(len(codes), dtype=np.int16)
    for k, code in enumerate(codes):
        step = steps[index]
        vpdiff = step >> 3
        if code & 4:
            vpdiff += step
        if code & 2:
            vpdiff += step >> 1
        if code & 1:
            vpdiff += step >> 2
        if code & 8:
            pred -= vpdiff
        else:
            pred += vpdiff
        if pred > 32767:
            pred = 32767
        elif pred < -32768:
            pred = -32768
        index += adjust[code & 7]
        if index < 0:
            index = 0
        elif index > 88:
            index = 88
        out[k] = pred
    return out, CodecState(pred, index)


def pack_nibbles(codes) -> bytes:
    c = np.frombuffer(bytes(codes), dtype=np.uint8)
    if len(c) % 2:
        raise ValueError("need an even number of codes")
    return ((c[0::2] & 0x0F) | ((c[1::2] & 0x0F) << 4)).astype(np.uint8).tobytes()


def unpack_nibbles(frame) -> bytes:
    b = np.frombuffer(bytes(frame), dtype=np.uint8)
    codes = np.empty(2 * len(b), dtype=np.uint8)
    codes[0::2] = b & 0x0F
    codes[1::2] = b >> 4
    return codes.tobytes()


def compress_block(block, state: CodecState | None = None):
    """Compress exactly 32768 samples to one 16384-byte frame."""
    block = np.asarray(block)
    if block.shape != (BLOCK_SAMPLES,):
        raise ValueError(f"block must hold {BLOCK_SAMPLES} samples, got {block.shape}")
    codes, state = encode_samples(np.clip(block, -32768, 32767), state)
    return pack_nibbles(codes), state


def decompress_frame(frame, state: CodecState | None = None):
    if len(frame) != FRAME_BYTES:
        raise ValueError(f"frame must be {FRAME_BYTES} bytes, got {len(frame)}")
    return decode_codes(unpack_nibbles(frame), state)


def split_blocks(samples) -> list[np.ndarray]:
    """Cut a sample stream into zero-padded 32768-sample blocks."""
    samples = np.asarray(samples, dtype=np.int16)
    nblocks = -(-len(samples) // BLOCK_SAMPLES)
    padded = np.zeros(nblocks * BLOCK_SAMPLES, dtype=np.int16)
    padded[:len(samples)] = samples
    return list(padded.reshape(nblocks, BLOCK_SAMPLES))


def compress(samples) -> list[bytes]:
    """Compress a whole signal, resetting codec state per block."""
    return [compress_block(b)[0] for b in split_blocks(samples)]


def decompress(frames, nsamples: int | None = None) -> np.ndarray:
    if not frames:
        return np.zeros(0, dtype=np.int16)
    pcm = np.concatenate([decompress_frame(f)[0] for f in frames])
    return pcm if nsamples is None else pcm[:nsamples]


def snr_db(reference, test) -> float:
    ref = np.asarray(reference, dtype=float)
    err = ref - np.asarray(test, dtype=float)
    noise = np.sum(err**2)
    if noise == 0:
        return float("inf")
    return float(10 * np.log10(np.sum(ref**2) / noise))
