"""One compressed transaction per UDP datagram.

Wire format: byte 0 is the codec id (0 identity, 1 deflate/RFC 1950,
2 gzip/RFC 1952); the rest is the compressed RDF transaction document. The
whole payload never exceeds 1492 bytes. There are no sequence numbers and no
acknowledgements; loss is measured by comparing sender and receiver counts.
"""

from __future__ import annotations

import logging
import random
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from . import compression
from .errors import CorruptStream, OversizePayload, RdfStreamError, UnknownCodec
from .model import MAX_PAYLOAD, Transaction
from .rdftx import parse_rdftx, serialize_rdftx

log = logging.getLogger(__name__)

RECV_BUFFER_BYTES = 4 * 1024 * 1024


def encode_document(doc: bytes, codec: str = compression.DEFLATE, limit: int = MAX_PAYLOAD) -> bytes:
    payload = bytes([compression.WIRE_IDS[codec]]) + compression.compress(codec, doc)
    if len(payload) > limit:
        raise OversizePayload(len(payload), limit)
    return payload


def encode_datagram(t: Transaction, codec: str = compression.DEFLATE, limit: int = MAX_PAYLOAD) -> bytes:
    """Serialize and compress ``t``; raises :class:`OversizePayload` past ``limit``."""
    return encode_document(serialize_rdftx(t), codec, limit)


def decode_datagram(payload: bytes) -> Transaction:
    if not payload:
        raise CorruptStream("empty datagram")
    codec = compression.CODECS_BY_WIRE_ID.get(payload[0])
    if codec is None:
        raise UnknownCodec(f"codec id {payload[0]}")
    return parse_rdftx(compression.decompress(codec, payload[1:]))


def parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.strip().rpartition(":")
    if not sep or not host or not port.isdigit() or not 0 < int(port) < 65536:
        raise ValueError(f"bad endpoint {text!r}; expected HOST:PORT")
    return host, int(port)


class EndpointSet:
    """Receivers that datagrams are spread over, one at a time in turn."""

    def __init__(self, endpoints: Iterable[tuple[str, int]]):
        self.endpoints = list(endpoints)
        if not self.endpoints:
            raise ValueError("at least one endpoint is required")
        self.cursor = 0

    def __len__(self):
        return len(self.endpoints)

    def next(self) -> int:
        i = self.cursor
        self.cursor = (i + 1) % len(self.endpoints)
        return i


@dataclass
class SendStats:
    sent: int = 0
    bytes_sent: int = 0
    oversize_rejected: int = 0
    send_errors: int = 0
    duration: float = 0.0
    per_endpoint: list = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.sent / self.duration if self.duration > 0 else 0.0


@dataclass
class RecvStats:
    received: int = 0
    bytes_received: int = 0
    decoded: int = 0
    decode_failures: int = 0
    duration: float = 0.0
    sink_error: Optional[BaseException] = None


def loss_fraction(sent: SendStats, recv: RecvStats) -> float:
    return 1.0 - recv.received / sent.sent if sent.sent else 0.0


class Pacer:
    """Spaces events ``1/rate`` apart on the monotonic clock.

    A sender that falls behind may catch up by at most ``burst`` events
    back to back; older debt is forgiven.
    """

    def __init__(self, rate: float, burst: int = 1, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.interval = 1.0 / rate
        self.burst = max(1, burst)
        self.clock = clock
        self.sleep = sleep
        self.next_due: Optional[float] = None

    def wait(self) -> None:
        now = self.clock()
        if self.next_due is None:
            self.next_due = now
        elif self.next_due > now:
            self.sleep(self.next_due - now)
        elif now - self.next_due > self.burst * self.interval:
            self.next_due = now - self.burst * self.interval
        self.next_due += self.interval


def udp_send_stream(
    items: Iterable[Union[Transaction, bytes]],
    endpoints: EndpointSet,
    rate: Optional[float] = 1000.0,
    codec: str = compression.DEFLATE,
    burst: Optional[int] = None,
    sock: Optional[socket.socket] = None,
    encoded: bool = False,
) -> SendStats:
    """Send each item as one datagram, round-robin over ``endpoints``.

    Items are transactions or serialized documents, or finished datagram
    payloads when ``encoded`` is set. ``rate=None`` sends as fast as
    possible. Send failures and oversize items are counted; only socket
    setup can raise.
    """
    own = sock is None
    if own:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    addrs = [socket.getaddrinfo(h, p, socket.AF_INET, socket.SOCK_DGRAM)[0][4] for h, p in endpoints.endpoints]
    stats = SendStats(per_endpoint=[0] * len(addrs))
    pacer = Pacer(rate, burst or max(1, int(rate * 0.01))) if rate else None
    t0 = time.monotonic()
    try:
        for item in items:
            try:
                if encoded:
                    payload = item
                elif isinstance(item, Transaction):
                    payload = encode_datagram(item, codec)
                else:
                    payload = encode_document(item, codec)
            except OversizePayload:
                stats.oversize_rejected += 1
                continue
            if pacer:
                pacer.wait()
            i = endpoints.next()
            try:
                sock.sendto(payload, addrs[i])
            except OSError as e:
                stats.send_errors += 1
                log.debug("send to %s failed: %s", addrs[i], e)
                continue
            stats.sent += 1
            stats.bytes_sent += len(payload)
            stats.per_endpoint[i] += 1
    finally:
        stats.duration = time.monotonic() - t0
        if own:
            sock.close()
    return stats


def bind_udp(port: int, host: str = "127.0.0.1") -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, RECV_BUFFER_BYTES)
        sock.bind((host, port))
    except OSError:
        sock.close()
        raise
    return sock


class DatagramHandler:
    """Decode datagrams and hand each transaction to ``sink``.

    A datagram that fails to decode is counted and dropped; nothing from it
    reaches the sink.
    """

    def __init__(self, sink: Callable[[Transaction], object]):
        self.sink = sink
        self.stats = RecvStats()

    def handle(self, payload: bytes) -> bool:
        self.stats.received += 1
        self.stats.bytes_received += len(payload)
        try:
            tx = decode_datagram(payload)
        except RdfStreamError as e:
            self.stats.decode_failures += 1
            log.debug("dropped datagram: %s", e)
            return False
        self.stats.decoded += 1
        self.sink(tx)
        return True


class UdpReceiver(DatagramHandler):
    """A :class:`DatagramHandler` fed from one UDP port.

    Binding happens in the constructor so a taken port fails before any
    ingest starts. If the sink raises, the loop stops and the exception is
    kept in ``stats.sink_error``.
    """

    def __init__(self, port: int, sink: Callable[[Transaction], object], host: str = "127.0.0.1"):
        super().__init__(sink)
        self.sock = bind_udp(port, host)
        self.port = self.sock.getsockname()[1]

    def run(self, stop: threading.Event, poll: float = 0.05) -> RecvStats:
        self.sock.settimeout(poll)
        t0 = time.monotonic()
        try:
            while not stop.is_set():
                try:
                    payload, _ = self.sock.recvfrom(65535)
                except socket.timeout:
                    continue
                try:
                    self.handle(payload)
                except Exception as e:  # sink failure: stop and report
                    self.stats.sink_error = e
                    log.error("sink failed on port %d: %s", self.port, e)
                    break
        finally:
            self.stats.duration = time.monotonic() - t0
        return self.stats

    def close(self):
        self.sock.close()


def udp_receive_loop(
    port: int, sink: Callable[[Transaction], object], stop: threading.Event, host: str = "127.0.0.1"
) -> RecvStats:
    receiver = UdpReceiver(port, sink, host)
    try:
        return receiver.run(stop)
    finally:
        receiver.close()


@dataclass(frozen=True)
class LossyChannelConfig:
    drop_probability: float = 0.0
    reorder_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("drop_probability", "reorder_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


class LossyChannel:
    """In-process datagram channel that drops and reorders with fixed probabilities.

    A reordered datagram is held back and delivered right after the next one
    that gets through. Each datagram is delivered whole or not at all.
    """

    def __init__(self, config: LossyChannelConfig, deliver: Callable[[bytes], object]):
        self.config = config
        self.deliver = deliver
        self.rng = random.Random(config.seed)
        self.offered = 0
        self.dropped = 0
        self.delivered = 0
        self._held: Optional[bytes] = None

    def send(self, payload: bytes) -> None:
        self.offered += 1
        if self.rng.random() < self.config.drop_probability:
            self.dropped += 1
            return
        if self._held is None and self.rng.random() < self.config.reorder_probability:
            self._held = payload
            return
        self._deliver(payload)
        if self._held is not None:
            held, self._held = self._held, None
            self._deliver(held)

    def _deliver(self, payload: bytes) -> None:
        self.delivered += 1
        self.deliver(payload)

    def flush(self) -> None:
        if self._held is not None:
            held, self._held = self._held, None
            self._deliver(held)
