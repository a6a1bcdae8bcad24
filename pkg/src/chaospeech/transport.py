"""One-to-many frame delivery over UDP multicast, plus an in-process channel.

Wire format (big-endian), one datagram per chunk, at most 1400 bytes::

    magic        4s   b"CSPK"
    seq          u32  frame sequence number, increasing per stream
    rounds       u8   stream-cipher round count M
    chunk_index  u8
    chunk_count  u8
    payload_len  u16  bytes of payload in this datagram
    payload

A frame is accepted only when its chunks arrive complete and in order;
anything else is discarded and counted.  There is no retransmission.
"""
from __future__ import annotations

import ipaddress
import os
import queue
import random
import socket
import struct
import threading
from collections import deque
from dataclasses import dataclass, field

from .errors import FormatError, TransportError

MAGIC = b"CSPK"
HEADER = struct.Struct(">4sIBBBH")
MAX_DATAGRAM = 1400
CHUNK_PAYLOAD = MAX_DATAGRAM - HEADER.size
DEFAULT_GROUP = "224.0.1.0"
DEFAULT_PORT = 5004
IFACE_ENV = "CHAOSPEECH_IFACE"


@dataclass(frozen=True)
class GroupConfig:
    group_address: str = DEFAULT_GROUP
    port: int = DEFAULT_PORT
    ttl: int = 1
    interface: str | None = None

    def __post_init__(self):
        try:
            addr = ipaddress.IPv4Address(self.group_address)
        except ipaddress.AddressValueError as exc:
            raise TransportError(f"bad group address {self.group_address!r}") from exc
        if not addr.is_multicast:
            raise TransportError(f"{self.group_address} is not a class-D multicast address")
        if not 0 < self.port < 65536:
            raise TransportError(f"bad port {self.port}")

    @property
    def iface(self) -> str:
        return self.interface or os.environ.get(IFACE_ENV) or "0.0.0.0"


@dataclass(frozen=True)
class FramePacket:
    seq: int
    rounds: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.seq < 2**32:
            raise ValueError("seq must fit in 32 bits")
        if not 0 <= self.rounds < 256:
            raise ValueError("rounds must fit in 8 bits")


def encode_packet(packet: FramePacket) -> list[bytes]:
    """Split a frame into datagrams."""
    payload = bytes(packet.payload)
    if not payload:
        raise ValueError("refusing to send an empty payload")
    chunks = [payload[i:i + CHUNK_PAYLOAD] for i in range(0, len(payload), CHUNK_PAYLOAD)]
    if len(chunks) > 255:
        raise ValueError("payload too large for 255 chunks")
    return [HEADER.pack(MAGIC, packet.seq, packet.rounds, i, len(chunks), len(c)) + c
            for i, c in enumerate(chunks)]


@dataclass(frozen=True)
class Chunk:
    seq: int
    rounds: int
    index: int
    count: int
    payload: bytes


def decode_datagram(data: bytes) -> Chunk:
    if len(data) < HEADER.size:
        raise FormatError(f"truncated datagram ({len(data)} bytes)")
    magic, seq, rounds, index, count, plen = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"magic mismatch {magic!r}")
    payload = data[HEADER.size:]
    if len(payload) != plen:
        raise FormatError(f"payload length {len(payload)} != header {plen}")
    if count == 0 or index >= count:
        raise FormatError(f"bad chunk index {index}/{count}")
    return Chunk(seq, rounds, index, count, payload)


@dataclass
class Reassembler:
    """Rebuilds frames from in-order chunks and keeps loss statistics."""

    malformed: int = 0
    discarded: int = 0
    delivered: int = 0
    _seq: int | None = None
    _parts: list = field(default_factory=list)
    _last_seq: int | None = None

    def _drop_partial(self):
        if self._parts:
            self.discarded += 1
        self._seq, self._parts = None, []

    def feed(self, data: bytes) -> FramePacket | None:
        try:
            chunk = decode_datagram(data)
        except FormatError:
            self.malformed += 1
            return None
        if self._last_seq is not None and chunk.seq <= self._last_seq:
            return None
        if chunk.seq != self._seq:
            self._drop_partial()
            if chunk.index != 0:
                # joined mid-frame or lost the head: skip to the next frame
                self.discarded += 1
                self._last_seq = chunk.seq
                return None
            self._seq = chunk.seq
        elif chunk.index != len(self._parts):
            self._drop_partial()
            self._last_seq = chunk.seq
            return None
        self._parts.append(chunk)
        if len(self._parts) == chunk.count:
            parts, self._seq, self._parts = self._parts, None, []
            self._last_seq = chunk.seq
            self.delivered += 1
            return FramePacket(chunk.seq, chunk.rounds, b"".join(p.payload for p in parts))
        return None


class MulticastSender:
    def __init__(self, config: GroupConfig):
        self.config = config
        try:
            sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM, socket.IPPROTO_UDP)
            sock.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_TTL, config.ttl)
            sock.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_LOOP, 1)
            if config.iface != "0.0.0.0":
                sock.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_IF,
                                socket.inet_aton(config.iface))
        except OSError as exc:
            raise TransportError(f"cannot open multicast sender: {exc}") from exc
        self.sock = sock

    def send_frame(self, packet: FramePacket) -> None:
        dest = (self.config.group_address, self.config.port)
        try:
            for dgram in encode_packet(packet):
                self.sock.sendto(dgram, dest)
        except OSError as exc:
            raise TransportError(f"sendto {dest} failed: {exc}") from exc

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class MulticastReceiver:
    """Socket bound to the group port with membership registered on ``iface``."""

    def __init__(self, config: GroupConfig, rcvbuf: int = 4 << 20):
        self.config = config
        self.reassembler = Reassembler()
        try:
            sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM, socket.IPPROTO_UDP)
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            if hasattr(socket, "SO_REUSEPORT"):
                sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, rcvbuf)
            sock.bind(("", config.port))
            mreq = struct.pack("4s4s", socket.inet_aton(config.group_address),
                               socket.inet_aton(config.iface))
            sock.setsockopt(socket.IPPROTO_IP, socket.IP_ADD_MEMBERSHIP, mreq)
        except OSError as exc:
            raise TransportError(
                f"cannot join {config.group_address}:{config.port} on {config.iface}: {exc}"
            ) from exc
        self.sock = sock

    def recv_frame(self, timeout: float | None = None) -> FramePacket:
        """Block until a complete frame arrives; ``TimeoutError`` otherwise."""
        self.sock.settimeout(timeout)
        while True:
            try:
                data = self.sock.recv(65535)
            except socket.timeout as exc:
                raise TimeoutError("no complete frame before timeout") from exc
            except OSError as exc:
                raise TransportError(f"recv failed: {exc}") from exc
            packet = self.reassembler.feed(data)
            if packet is not None:
                return packet

    def close(self):
        try:
            mreq = struct.pack("4s4s", socket.inet_aton(self.config.group_address),
                               socket.inet_aton(self.config.iface))
            self.sock.setsockopt(socket.IPPROTO_IP, socket.IP_DROP_MEMBERSHIP, mreq)
        except OSError:
            pass
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def join_group(config: GroupConfig) -> MulticastReceiver:
    return MulticastReceiver(config)


class SimulatedReceiver:
    def __init__(self):
        self.reassembler = Reassembler()
        self._inbox: deque = deque()

    def _deliver(self, dgram: bytes):
        self._inbox.append(dgram)

    def recv_frame(self, timeout: float | None = None) -> FramePacket:
        # the channel is synchronous; an empty inbox means nothing is coming
        while self._inbox:
            packet = self.reassembler.feed(self._inbox.popleft())
            if packet is not None:
                return packet
        raise TimeoutError("no complete frame available")

    def drain(self) -> list[FramePacket]:
        frames = []
        while True:
            try:
                frames.append(self.recv_frame())
            except TimeoutError:
                return frames


class SimulatedSender:
    """Fans every datagram out to all receivers with seeded loss and reordering."""

    def __init__(self, receivers, loss_rate: float, reorder_window: int, seed: int):
        self.receivers = receivers
        self.loss_rate = loss_rate
        self.reorder_window = reorder_window
        self.rng = random.Random(seed)
        self._held = [[] for _ in receivers]
        self.trace: list[tuple[int, int, int, bool]] = []

    def _push(self, r: int, dgram: bytes):
        held = self._held[r]
        held.append(dgram)
        if len(held) > self.reorder_window:
            self.receivers[r]._deliver(held.pop(self.rng.randrange(len(held))))

    def send_frame(self, packet: FramePacket) -> None:
        for dgram in encode_packet(packet):
            chunk = decode_datagram(dgram)
            for r in range(len(self.receivers)):
                lost = self.rng.random() < self.loss_rate
                self.trace.append((r, packet.seq, chunk.index, lost))
                if not lost:
                    self._push(r, dgram)

    def flush(self):
        for r, held in enumerate(self._held):
            while held:
                self.receivers[r]._deliver(held.pop(self.rng.randrange(len(held))))

    def close(self):
        self.flush()


def simulated_channel(loss_rate: float = 0.0, reorder_window: int = 0,
                      receivers: int = 2, seed: int = 0):
    """Return ``(sender, [receiver, ...])`` sharing a deterministic lossy channel."""
    if not 0.0 <= loss_rate <= 1.0:
        raise ValueError("loss_rate must lie in [0, 1]")
    if reorder_window < 0:
        raise ValueError("reorder_window must be >= 0")
    ends = [SimulatedReceiver() for _ in range(receivers)]
    return SimulatedSender(ends, loss_rate, reorder_window, seed), ends


def receive_loop(receiver, out: queue.Queue, stop: threading.Event, timeout: float = 0.2):
    """Pump complete frames into a bounded queue until ``stop`` is set."""
    while not stop.is_set():
        try:
            packet = receiver.recv_frame(timeout)
        except TimeoutError:
            continue
        while not stop.is_set():
            try:
                out.put(packet, timeout=timeout)
                break
            except queue.Full:
                continue
