"""Compress -> bit/byte permutation -> multi-round stream cipher, and back.

Encrypted files use a small container::

    magic  b"CSPE"   4 bytes
    version          u8  (1)
    rounds           u8
    sample_rate      u32
    nsamples         u64   original sample count (final frame is zero-padded)
    nframes          u32
    frames           nframes * 16384 bytes

All header fields are big-endian.
"""
from __future__ import annotations

import logging
import queue
import struct
import threading
import time

import numpy as np

from . import adpcm, audio
from .errors import FormatError
from .keys import KeyBundle
from .permutation import FRAME_BYTES, permute_frame, unpermute_frame
from .stream_cipher import decrypt_frame, encrypt_frame
from .transport import FramePacket, receive_loop

log = logging.getLogger(__name__)

MAGIC = b"CSPE"
VERSION = 1
_HEADER = struct.Struct(">4sBBIQI")


def encrypt_compressed(frame: bytes, key: KeyBundle) -> bytes:
    bit_table, byte_table = key.tables()
    return encrypt_frame(permute_frame(frame, bit_table, byte_table), key.stream)


def decrypt_compressed(cipher: bytes, key: KeyBundle) -> bytes:
    bit_table, byte_table = key.tables()
    return unpermute_frame(decrypt_frame(cipher, key.stream), bit_table, byte_table)


def encrypt_samples(samples, key: KeyBundle) -> list[bytes]:
    return [encrypt_compressed(f, key) for f in adpcm.compress(samples)]


def decrypt_samples(frames, key: KeyBundle, nsamples=None) -> np.ndarray:
    return adpcm.decompress([decrypt_compressed(f, key) for f in frames], nsamples)


def pack_container(frames, nsamples: int, rate: int, rounds: int) -> bytes:
    for f in frames:
        if len(f) != FRAME_BYTES:
            raise ValueError(f"frame must be {FRAME_BYTES} bytes")
    return _HEADER.pack(MAGIC, VERSION, rounds, rate, nsamples, len(frames)) + b"".join(frames)


def unpack_container(blob: bytes):
    """Return ``(frames, nsamples, rate, rounds)``."""
    if len(blob) < _HEADER.size:
        raise FormatError("container shorter than its header")
    magic, version, rounds, rate, nsamples, nframes = _HEADER.unpack_from(blob)
    if magic != MAGIC or version != VERSION:
        raise FormatError(f"not a chaospeech container (magic={magic!r}, version={version})")
    body = blob[_HEADER.size:]
    if len(body) != nframes * FRAME_BYTES:
        raise FormatError(f"expected {nframes} frames, body holds {len(body)} bytes")
    frames = [body[i * FRAME_BYTES:(i + 1) * FRAME_BYTES] for i in range(nframes)]
    return frames, nsamples, rate, rounds


def encrypt_file(wav_in, key: KeyBundle, out) -> int:
    """Encrypt a 16-bit mono WAV into a container; returns the frame count."""
    samples, rate = audio.read_wav(wav_in)
    frames = encrypt_samples(samples, key)
    with open(out, "wb") as f:
        f.write(pack_container(frames, len(samples), rate, key.stream.rounds))
    return len(frames)


def decrypt_file(path_in, key: KeyBundle, wav_out) -> int:
    """Decrypt a container to WAV.  A wrong key is not detected: it yields noise."""
    with open(path_in, "rb") as f:
        frames, nsamples, rate, _ = unpack_container(f.read())
    audio.write_wav(wav_out, decrypt_samples(frames, key, nsamples), rate)
    return len(frames)


def stream_send(samples, key: KeyBundle, sender, pace: float = 0.0, queue_size: int = 4) -> int:
    """Encrypt on a worker thread and send frames as they become ready.

    ``pace`` is the pause between frames in seconds (0 sends back to back).
    Returns the number of frames sent.
    """
    frames: queue.Queue = queue.Queue(maxsize=queue_size)
    blocks = adpcm.split_blocks(samples)

    failure = []
    stop = threading.Event()

    def put(item):
        while not stop.is_set():
            try:
                frames.put(item, timeout=0.1)
                return
            except queue.Full:
                continue

    def produce():
        try:
            for seq, block in enumerate(blocks):
                if stop.is_set():
                    return
                compressed, _ = adpcm.compress_block(block)
                put(FramePacket(seq, key.stream.rounds, encrypt_compressed(compressed, key)))
        except Exception as exc:  # re-raised on the sending thread
            failure.append(exc)
        finally:
            put(None)

    worker = threading.Thread(target=produce, name="chaospeech-encrypt", daemon=True)
    worker.start()
    sent = 0
    try:
        while (packet := frames.get()) is not None:
            sender.send_frame(packet)
            sent += 1
            if pace:
                time.sleep(pace)
    finally:
        stop.set()
        worker.join()
    if failure:
        raise failure[0]
    return sent


def stream_receive(receiver, key: KeyBundle, max_frames=None, idle_timeout: float = 2.0,
                   queue_size: int = 8) -> list[tuple[int, np.ndarray]]:
    """Receive and decrypt frames until ``max_frames`` arrive or the stream
    goes quiet for ``idle_timeout`` seconds.  Returns ``(seq, pcm)`` pairs."""
    inbox: queue.Queue = queue.Queue(maxsize=queue_size)
    stop = threading.Event()
    pump = threading.Thread(target=receive_loop, args=(receiver, inbox, stop),
                            name="chaospeech-recv", daemon=True)
    pump.start()
    out = []
    try:
        while max_frames is None or len(out) < max_frames:
            try:
                packet = inbox.get(timeout=idle_timeout)
            except queue.Empty:
                break
            if packet.rounds != key.stream.rounds:
                log.warning("frame %d announces %d rounds, key has %d",
                            packet.seq, packet.rounds, key.stream.rounds)
            if len(packet.payload) != FRAME_BYTES:
                log.warning("dropping frame %d with %d-byte payload", packet.seq, len(packet.payload))
                continue
            pcm, _ = adpcm.decompress_frame(decrypt_compressed(packet.payload, key))
            out.append((packet.seq, pcm))
    finally:
        stop.set()
        pump.join()
    return out
