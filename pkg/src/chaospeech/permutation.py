"""Bit-level and byte-level position scrambling of compressed speech frames.

Bit coordinates follow ``S = 8*i + j`` where ``i`` is the byte index inside a
512-byte group and ``j`` counts from the least-significant bit.
"""
import numpy as np

from .chaos_core import invert_table

FRAME_BYTES = 16384
GROUP_BYTES = 512
GROUPS_PER_FRAME = FRAME_BYTES // GROUP_BYTES


def _as_u8(data, length, what) -> np.ndarray:
    if isinstance(data, np.ndarray):
        arr = data.astype(np.uint8, copy=False)
    else:
        arr = np.frombuffer(data, dtype=np.uint8)
    if arr.shape[-1] != length:
        raise ValueError(f"{what} must be {length} bytes, got {arr.shape[-1]}")
    return arr


def _check_table(table, size):
    table = np.asarray(table)
    if table.shape != (size,):
        raise ValueError(f"table must have {size} entries, got {table.shape}")
    seen = np.zeros(size, dtype=bool)
    seen[table] = True
    if not seen.all():
        raise ValueError("table is not a bijection")
    return table


def _scatter_bits(groups: np.ndarray, dest: np.ndarray) -> np.ndarray:
    bits = np.unpackbits(groups, axis=-1, bitorder="little")
    out = np.zeros_like(bits)
    out[..., dest] = bits
    return np.packbits(out, axis=-1, bitorder="little")


def scramble_bits(group, table) -> bytes:
    """Move bit ``(i, j)`` to ``(table[8i+j] // 8, table[8i+j] % 8)``."""
    group = _as_u8(group, GROUP_BYTES, "group")
    table = _check_table(table, GROUP_BYTES * 8)
    return _scatter_bits(group, table).tobytes()


def unscramble_bits(group, table) -> bytes:
    group = _as_u8(group, GROUP_BYTES, "group")
    table = _check_table(table, GROUP_BYTES * 8)
    return _scatter_bits(group, invert_table(table)).tobytes()


def scramble_bytes(frame, table) -> bytes:
    """``out[table[S]] = in[S]`` over the whole frame."""
    frame = _as_u8(frame, FRAME_BYTES, "frame")
    table = _check_table(table, FRAME_BYTES)
    out = np.empty_like(frame)
    out[table] = frame
    return out.tobytes()


def unscramble_bytes(frame, table) -> bytes:
    frame = _as_u8(frame, FRAME_BYTES, "frame")
    table = _check_table(table, FRAME_BYTES)
    return frame[table].tobytes()


def permute_frame(frame, bit_table, byte_table) -> bytes:
    """Bit scrambling on each of the 32 sequential groups, then byte scrambling."""
    frame = _as_u8(frame, FRAME_BYTES, "frame")
    bit_table = _check_table(bit_table, GROUP_BYTES * 8)
    groups = frame.reshape(GROUPS_PER_FRAME, GROUP_BYTES)
    stage1 = _scatter_bits(groups, bit_table).reshape(-1)
    return scramble_bytes(stage1, byte_table)


def unpermute_frame(frame, bit_table, byte_table) -> bytes:
    bit_table = _check_table(bit_table, GROUP_BYTES * 8)
    stage1 = np.frombuffer(unscramble_bytes(frame, byte_table), dtype=np.uint8)
    groups = stage1.reshape(GROUPS_PER_FRAME, GROUP_BYTES)
    return _scatter_bits(groups, invert_table(bit_table)).reshape(-1).tobytes()
