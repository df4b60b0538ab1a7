"""Multi-port ingest: one UDP receiver and one store worker per port."""

from __future__ import annotations

import csv
import io
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .store import CommitPolicy, QuadStore
from .transport import UdpReceiver


@dataclass
class WorkerStats:
    worker: str
    port: int
    received: int = 0
    decode_failures: int = 0
    applied: int = 0
    applied_ops: int = 0
    committed_tx: int = 0
    commits: int = 0
    tx_per_sec: float = 0.0


@dataclass
class IngestStats:
    duration: float = 0.0
    workers: list[WorkerStats] = field(default_factory=list)

    @property
    def received(self) -> int:
        return sum(w.received for w in self.workers)

    @property
    def applied(self) -> int:
        return sum(w.applied for w in self.workers)

    @property
    def applied_ops(self) -> int:
        return sum(w.applied_ops for w in self.workers)

    @property
    def committed_tx(self) -> int:
        return sum(w.committed_tx for w in self.workers)

    @property
    def commits(self) -> int:
        return sum(w.commits for w in self.workers)

    @property
    def tx_per_sec(self) -> float:
        return self.committed_tx / self.duration if self.duration > 0 else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["worker", "received", "applied", "committed_tx", "commits", "tx_per_sec"])
        for ws in self.workers:
            w.writerow([ws.worker, ws.received, ws.applied, ws.committed_tx, ws.commits, f"{ws.tx_per_sec:.1f}"])
        w.writerow(["total", self.received, self.applied, self.committed_tx, self.commits, f"{self.tx_per_sec:.1f}"])
        return buf.getvalue()


class IngestRun:
    """Receivers bound up front; ``start`` launches one thread per port.

    ``stop`` halts the receive loops, flushes every worker's pending buffer
    with a final commit and returns the stats.
    """

    def __init__(self, ports: Sequence[int], policy: CommitPolicy = CommitPolicy(),
                 store: Optional[QuadStore] = None, host: str = "127.0.0.1"):
        self.store = store if store is not None else QuadStore(policy)
        self.receivers: list[UdpReceiver] = []
        self.workers = []
        try:
            for i, port in enumerate(ports):
                worker = self.store.worker(f"w{i}")
                self.receivers.append(UdpReceiver(port, worker.ingest, host))
                self.workers.append(worker)
        except OSError:
            self.close()
            raise
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._t0: Optional[float] = None

    @property
    def ports(self) -> list[int]:
        return [r.port for r in self.receivers]

    def start(self) -> "IngestRun":
        self._t0 = time.monotonic()
        for r in self.receivers:
            t = threading.Thread(target=r.run, args=(self._stop,), daemon=True, name=f"recv-{r.port}")
            t.start()
            self._threads.append(t)
        return self

    def stop(self) -> IngestStats:
        self._stop.set()
        for t in self._threads:
            t.join()
        duration = time.monotonic() - self._t0 if self._t0 is not None else 0.0
        for w in self.workers:
            w.commit()
        self.close()
        stats = IngestStats(duration=duration)
        for r, w in zip(self.receivers, self.workers):
            stats.workers.append(
                WorkerStats(
                    worker=w.name,
                    port=r.port,
                    received=r.stats.received,
                    decode_failures=r.stats.decode_failures,
                    applied=w.applied_transactions,
                    applied_ops=w.applied_ops,
                    committed_tx=w.committed_transactions,
                    commits=w.commits,
                    tx_per_sec=w.committed_transactions / duration if duration > 0 else 0.0,
                )
            )
        return stats

    def close(self):
        for r in self.receivers:
            r.close()


def ingest_run(ports: Sequence[int], policy: CommitPolicy = CommitPolicy(), duration: float = 0.0,
               store: Optional[QuadStore] = None, host: str = "127.0.0.1",
               stop: Optional[threading.Event] = None) -> IngestStats:
    """Ingest on every port for ``duration`` seconds, or until ``stop`` is set."""
    run = IngestRun(ports, policy, store, host)
    if duration <= 0 and stop is None:
        run._t0 = time.monotonic()
        return run.stop()
    run.start()
    if stop is not None:
        stop.wait(duration if duration > 0 else None)
    else:
        time.sleep(duration)
    return run.stop()
