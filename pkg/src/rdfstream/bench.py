"""Benchmark sweeps. Each returns one :class:`ThroughputSample` per point.

Everything defaults to loopback or in-process channels so a single machine
can run every sweep.
"""

from __future__ import annotations

import itertools
import socket
import threading
import time
from typing import Optional, Sequence

from . import compression
from .firehose import Firehose, FirehoseConfig
from .httpbench import BenchServer, http_get_bench, http_post_bench
from .ingest import IngestRun
from .samples import ThroughputSample
from .store import CommitPolicy
from .transport import (
    DatagramHandler,
    EndpointSet,
    LossyChannel,
    LossyChannelConfig,
    bind_udp,
    encode_datagram,
    udp_send_stream,
)

HTTP_SIZES = (1_000, 10_000, 100_000)
UDP_SIZES = (200, 568, 1_000, 1_492, 2_000)
LOSS_SERIES = (0.0, 0.1, 0.3, 0.5)
WORKER_SERIES = (1, 2, 4)


def bench_http(kind: str, sizes: Sequence[int] = HTTP_SIZES, requests: int = 100,
               peer: Optional[tuple[str, int]] = None) -> list[ThroughputSample]:
    fn = {"http-get": http_get_bench, "http-post": http_post_bench}[kind]
    if peer is not None:
        return [fn(peer[0], peer[1], size, requests) for size in sizes]
    with BenchServer() as server:
        # one throwaway request so connection setup costs stay out of the first point
        fn(server.host, server.port, 0, 1)
        return [fn(server.host, server.port, size, requests) for size in sizes]


def bench_udp_size(sizes: Sequence[int] = UDP_SIZES, datagrams: int = 1000,
                   peer: Optional[tuple[str, int]] = None, idle: float = 0.25) -> list[ThroughputSample]:
    """Raw datagram goodput by payload size, sender running flat out.

    With no ``peer`` an in-process loopback receiver counts what arrives;
    with a peer only the sender side is measured.
    """
    samples = []
    for size in sizes:
        payload = bytes(size)
        if peer is None:
            sock = bind_udp(0)
            target = ("127.0.0.1", sock.getsockname()[1])
        else:
            sock = None
            target = peer
        counts = {"n": 0, "bytes": 0, "last": 0.0}
        stop = threading.Event()

        def drain():
            sock.settimeout(0.05)
            while not stop.is_set():
                try:
                    data = sock.recv(65535)
                except socket.timeout:
                    continue
                counts["n"] += 1
                counts["bytes"] += len(data)
                counts["last"] = time.perf_counter()

        if sock is not None:
            t = threading.Thread(target=drain, daemon=True)
            t.start()
        out = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        sent = 0
        t0 = time.perf_counter()
        for _ in range(datagrams):
            try:
                out.sendto(payload, target)
                sent += 1
            except OSError:
                pass
        t_send = time.perf_counter() - t0
        out.close()
        if sock is not None:
            deadline = time.perf_counter() + idle
            while counts["n"] < sent and time.perf_counter() < deadline:
                time.sleep(0.005)
            stop.set()
            t.join()
            sock.close()
            elapsed = max(counts["last"] - t0, t_send) if counts["n"] else t_send
            got, got_bytes = counts["n"], counts["bytes"]
        else:
            elapsed, got, got_bytes = t_send, sent, sent * size
        samples.append(
            ThroughputSample(
                experiment="udp-size",
                variable="payload_size",
                value=size,
                count=got,
                per_sec=got / elapsed,
                bytes_per_sec=got_bytes / elapsed,
                elapsed_s=elapsed,
                config={"datagrams": datagrams, "peer": "loopback" if peer is None else f"{peer[0]}:{peer[1]}"},
            )
        )
    return samples


def corpus_payloads(n: int, seed: int = 0, codec: str = compression.DEFLATE) -> list[bytes]:
    hose = Firehose(seed, FirehoseConfig())
    return [encode_datagram(hose.next_transaction(), codec) for _ in range(n)]


def bench_udp_loss(probabilities: Sequence[float] = LOSS_SERIES, datagrams: int = 10_000,
                   seed: int = 0, distinct: int = 200) -> list[ThroughputSample]:
    """Goodput through the in-process lossy channel for each drop probability.

    ``per_sec`` is decoded transactions per second of channel time and
    ``count`` is the number decoded; the goodput ratio is ``count / datagrams``.
    """
    payloads = corpus_payloads(distinct, seed)
    samples = []
    for p in probabilities:
        applied = []
        handler = DatagramHandler(applied.append)
        channel = LossyChannel(LossyChannelConfig(p, 0.0, seed), handler.handle)
        t0 = time.perf_counter()
        for payload in itertools.islice(itertools.cycle(payloads), datagrams):
            channel.send(payload)
        channel.flush()
        elapsed = time.perf_counter() - t0
        samples.append(
            ThroughputSample(
                experiment="udp-loss",
                variable="drop_probability",
                value=p,
                count=handler.stats.decoded,
                per_sec=handler.stats.decoded / elapsed,
                bytes_per_sec=handler.stats.bytes_received / elapsed,
                tx_per_sec=handler.stats.decoded / elapsed,
                elapsed_s=elapsed,
                config={"datagrams": datagrams, "seed": seed, "channel": "in-process"},
            )
        )
    return samples


def offered_load_run(workers: int, policy: CommitPolicy, rate: float, duration: float,
                     payloads: Sequence[bytes], grace: float = 0.3):
    """Offer ``rate`` datagrams/s for ``duration`` s to ``workers`` loopback ports."""
    run = IngestRun([0] * workers, policy)
    run.start()
    n = int(rate * duration)
    endpoints = EndpointSet(("127.0.0.1", port) for port in run.ports)
    items = itertools.islice(itertools.cycle(payloads), n)
    sent = udp_send_stream(items, endpoints, rate, encoded=True)
    time.sleep(grace)
    stats = run.stop()
    return sent, stats


def bench_workers(counts: Sequence[int] = WORKER_SERIES, rate: float = 2000.0, duration: float = 5.0,
                  batch_size: int = 1, commit_floor: Optional[float] = 0.004,
                  seed: int = 0) -> list[ThroughputSample]:
    """Committed transactions/s as ingest clients are added, under a fixed offered load.

    The defaults put each client in the commit-latency-bound regime (one
    transaction per commit, 4 ms per commit), which is where adding clients
    pays off.
    """
    payloads = corpus_payloads(500, seed)
    policy = CommitPolicy(batch_size, commit_floor)
    samples = []
    for n in counts:
        sent, stats = offered_load_run(n, policy, rate, duration, payloads)
        samples.append(
            ThroughputSample(
                experiment="workers",
                variable="workers",
                value=n,
                count=stats.committed_tx,
                per_sec=stats.received / stats.duration,
                bytes_per_sec=sent.bytes_sent / stats.duration,
                tx_per_sec=stats.tx_per_sec,
                elapsed_s=stats.duration,
                config={"rate": rate, "duration": duration, "batch": batch_size,
                        "commit_floor_ms": 1000 * (commit_floor or 0), "seed": seed},
            )
        )
    return samples
