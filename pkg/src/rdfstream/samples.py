"""Benchmark sample rows and their CSV form."""

from __future__ import annotations

import csv
import io
import platform
import time
from dataclasses import dataclass, field

COLUMNS = [
    "experiment",
    "variable",
    "value",
    "count",
    "per_sec",
    "bytes_per_sec",
    "tx_per_sec",
    "elapsed_s",
    "config",
    "host",
    "timestamp",
]


@dataclass
class ThroughputSample:
    experiment: str
    variable: str
    value: float
    count: int
    per_sec: float
    bytes_per_sec: float
    tx_per_sec: float | None = None
    elapsed_s: float = 0.0
    config: dict = field(default_factory=dict)
    host: str = field(default_factory=platform.node)
    # wall-clock, metadata only
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))

    def row(self) -> list:
        return [
            self.experiment,
            self.variable,
            _num(self.value),
            self.count,
            f"{self.per_sec:.3f}",
            f"{self.bytes_per_sec:.3f}",
            "" if self.tx_per_sec is None else f"{self.tx_per_sec:.3f}",
            f"{self.elapsed_s:.6f}",
            format_config(self.config),
            self.host,
            self.timestamp,
        ]


def _num(v):
    return int(v) if float(v).is_integer() else v


def format_config(config: dict) -> str:
    return ";".join(f"{k}={config[k]}" for k in sorted(config))


def parse_config(text: str) -> dict:
    out = {}
    for part in filter(None, text.split(";")):
        k, sep, v = part.partition("=")
        if not sep:
            raise ValueError(f"bad config item {part!r}")
        out[k] = v
    return out


def samples_to_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for s in samples:
        w.writerow(s.row())
    return buf.getvalue()
