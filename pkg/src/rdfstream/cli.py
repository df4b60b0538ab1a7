"""``rdfstream`` command line: gen, send, recv, bench, report, serve-http."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import signal
import statistics
import sys
import threading
from dataclasses import dataclass, field
from typing import Optional

from . import bench, compression
from .firehose import Firehose, FirehoseConfig, read_corpus, write_corpus
from .ingest import IngestRun
from .rdftx import serialize_rdftx
from .samples import COLUMNS, parse_config, samples_to_csv
from .store import CommitPolicy, write_nquads
from .transport import EndpointSet, SendStats, parse_endpoint, udp_send_stream

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BIND = 3
EXIT_IO = 4
EXIT_DATA = 5

BENCH_KINDS = ("http-get", "http-post", "udp-size", "udp-loss", "workers")
SEED_ENV = "RDFSTREAM_SEED"

log = logging.getLogger("rdfstream")


class UsageError(Exception):
    pass


class BindError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    endpoints: list = field(default_factory=list)
    ports: list = field(default_factory=list)
    rate: Optional[float] = None
    count: Optional[int] = None
    seed: int = 0
    codec: str = compression.DEFLATE
    batch: int = 100
    workers: Optional[int] = None
    duration: Optional[float] = None
    commit_floor_ms: Optional[float] = None
    out: Optional[str] = None
    corpus: Optional[str] = None
    host: str = "127.0.0.1"
    kind: Optional[str] = None
    series: list = field(default_factory=list)
    requests: int = 100
    datagrams: Optional[int] = None
    peer: Optional[tuple] = None
    snapshot: Optional[str] = None
    paths: list = field(default_factory=list)

    def validate(self) -> "RunConfig":
        """Reject bad combinations before any socket or file is touched."""
        if self.count is not None and self.count < 0:
            raise UsageError("--count must be >= 0")
        if self.rate is not None and self.rate <= 0:
            raise UsageError("--rate must be > 0")
        if self.duration is not None and self.duration < 0:
            raise UsageError("--duration must be >= 0")
        if self.batch < 1:
            raise UsageError("--batch must be >= 1")
        if self.commit_floor_ms is not None and self.commit_floor_ms < 0:
            raise UsageError("--commit-floor-ms must be >= 0")
        sub = self.subcommand
        if sub == "gen":
            if self.count is None or self.out is None:
                raise UsageError("gen needs --count and --out")
        elif sub == "send":
            if not self.endpoints:
                raise UsageError("send needs at least one --endpoints HOST:PORT")
            if (self.corpus is None) == (self.count is None):
                raise UsageError("send needs exactly one of --corpus or --count")
        elif sub == "recv":
            if not self.ports:
                raise UsageError("recv needs --ports")
            w = self.workers or len(self.ports)
            if w < 1:
                raise UsageError("--workers must be >= 1")
            if len(self.ports) == 1 and w > 1:
                base = self.ports[0]
                if base == 0 or base + w - 1 > 65535:
                    raise UsageError("cannot derive consecutive ports from --ports")
                self.ports = list(range(base, base + w))
            elif len(self.ports) != w:
                raise UsageError(f"--workers {w} does not match {len(self.ports)} ports")
            self.workers = w
        elif sub == "bench":
            if self.kind not in BENCH_KINDS:
                raise UsageError(f"unknown bench {self.kind!r}")
            if self.kind == "udp-loss" and any(not 0 <= v <= 1 for v in self.series):
                raise UsageError("loss series values must be in [0, 1]")
        elif sub == "report":
            if not self.paths:
                raise UsageError("report needs at least one CSV path")
        return self


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _num_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _endpoints(text: str) -> list:
    try:
        return [parse_endpoint(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rdfstream", description="RDF update streams over UDP")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("gen", help="write a length-prefixed corpus of generated transactions")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("send", help="send transactions as UDP datagrams")
    s.add_argument("--endpoints", type=_endpoints, required=True)
    s.add_argument("--rate", type=float, default=1000.0)
    s.add_argument("--codec", choices=list(compression.WIRE_IDS), default=compression.DEFLATE)
    s.add_argument("--corpus")
    s.add_argument("--count", type=int)
    s.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("recv", help="ingest datagrams into the quad store")
    r.add_argument("--ports", type=_int_list, required=True)
    r.add_argument("--batch", type=int, default=100)
    r.add_argument("--workers", type=int)
    r.add_argument("--commit-floor-ms", type=float)
    r.add_argument("--duration", type=float, help="seconds; default runs until SIGINT/SIGTERM")
    r.add_argument("--host", default="127.0.0.1")
    r.add_argument("--snapshot", help="write committed quads as N-Quads on shutdown")

    b = sub.add_parser("bench", help="run a benchmark sweep and write CSV")
    b.add_argument("kind", choices=BENCH_KINDS)
    b.add_argument("--series", type=_num_list)
    b.add_argument("--out", default="-")
    b.add_argument("--requests", type=int, default=100)
    b.add_argument("--datagrams", type=int)
    b.add_argument("--peer", type=parse_endpoint)
    b.add_argument("--rate", type=float)
    b.add_argument("--duration", type=float)
    b.add_argument("--batch", type=int, default=1)
    b.add_argument("--commit-floor-ms", type=float, default=4.0)
    b.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="summarize benchmark CSV files")
    p.add_argument("paths", nargs="+")

    h = sub.add_parser("serve-http", help="run the HTTP benchmark peer")
    h.add_argument("--host", default="127.0.0.1")
    h.add_argument("--port", type=int, default=8080)
    return ap


def config_from_args(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    for name in ("endpoints", "ports", "rate", "count", "seed", "codec", "batch", "workers",
                 "duration", "commit_floor_ms", "out", "corpus", "host", "requests", "datagrams",
                 "peer", "snapshot", "paths"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.subcommand == "bench":
        cfg.kind = args.kind
        cfg.series = args.series or []
    if environ.get(SEED_ENV):
        try:
            cfg.seed = int(environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    return cfg.validate()


def _documents(count: int, seed: int):
    hose = Firehose(seed, FirehoseConfig())
    for _ in range(count):
        yield serialize_rdftx(hose.next_transaction())


def cmd_gen(cfg: RunConfig, stdout) -> int:
    n = write_corpus(cfg.out, _documents(cfg.count, cfg.seed))
    print(f"wrote {n} transactions to {cfg.out}", file=sys.stderr)
    return EXIT_OK


def send_stats_csv(stats: SendStats, endpoints: EndpointSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["endpoint", "sent", "bytes", "oversize_rejected", "send_errors", "duration_s", "rate_per_s"])
    for (host, port), n in zip(endpoints.endpoints, stats.per_endpoint):
        w.writerow([f"{host}:{port}", n, "", "", "", "", ""])
    w.writerow(["total", stats.sent, stats.bytes_sent, stats.oversize_rejected, stats.send_errors,
                f"{stats.duration:.3f}", f"{stats.rate:.1f}"])
    return buf.getvalue()


def cmd_send(cfg: RunConfig, stdout) -> int:
    endpoints = EndpointSet(cfg.endpoints)
    items = read_corpus(cfg.corpus) if cfg.corpus else _documents(cfg.count, cfg.seed)
    stats = udp_send_stream(items, endpoints, cfg.rate, cfg.codec)
    stdout.write(send_stats_csv(stats, endpoints))
    return EXIT_OK


def cmd_recv(cfg: RunConfig, stdout) -> int:
    floor = cfg.commit_floor_ms / 1000 if cfg.commit_floor_ms else None
    try:
        run = IngestRun(cfg.ports, CommitPolicy(cfg.batch, floor), host=cfg.host)
    except OSError as e:
        raise BindError(f"{cfg.host} ports {cfg.ports}: {e}") from e
    stop = threading.Event()

    def on_signal(signum, frame):
        stop.set()

    previous = {sig: signal.signal(sig, on_signal) for sig in (signal.SIGINT, signal.SIGTERM)}
    try:
        run.start()
        print(f"listening on {','.join(map(str, run.ports))}", file=sys.stderr, flush=True)
        stop.wait(cfg.duration if cfg.duration is not None else None)
    finally:
        stats = run.stop()
        for sig, handler in previous.items():
            signal.signal(sig, handler)
    stdout.write(stats.to_csv())
    if cfg.snapshot:
        with open(cfg.snapshot, "w", encoding="utf-8") as fh:
            write_nquads(run.store.quads(), fh)
    return EXIT_OK


def cmd_bench(cfg: RunConfig, stdout) -> int:
    kind = cfg.kind
    series = cfg.series
    if kind in ("http-get", "http-post"):
        sizes = [int(v) for v in series] or list(bench.HTTP_SIZES)
        samples = bench.bench_http(kind, sizes, cfg.requests, cfg.peer)
    elif kind == "udp-size":
        sizes = [int(v) for v in series] or list(bench.UDP_SIZES)
        samples = bench.bench_udp_size(sizes, cfg.datagrams or 1000, cfg.peer)
    elif kind == "udp-loss":
        samples = bench.bench_udp_loss(series or bench.LOSS_SERIES, cfg.datagrams or 10_000, cfg.seed)
    else:
        counts = [int(v) for v in series] or list(bench.WORKER_SERIES)
        samples = bench.bench_workers(
            counts,
            rate=cfg.rate or 2000.0,
            duration=cfg.duration or 5.0,
            batch_size=cfg.batch,
            commit_floor=(cfg.commit_floor_ms or 0) / 1000 or None,
            seed=cfg.seed,
        )
    text = samples_to_csv(samples)
    if cfg.out in (None, "-"):
        stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK


class ReportError(Exception):
    pass


# loss runs push a fixed datagram count, so what matters is how many got through
REPORT_METRIC = {"udp-loss": "count", "workers": "tx_per_sec"}
_NUMERIC = ("value", "count", "per_sec", "bytes_per_sec", "elapsed_s")


def load_samples(path: str) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ReportError(f"{path}:1: empty file")
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise ReportError(f"{path}:1: missing columns {','.join(missing)}")
        for fields in reader:
            line = reader.line_num
            if not fields:
                continue
            if len(fields) != len(header):
                raise ReportError(f"{path}:{line}: expected {len(header)} fields, got {len(fields)}")
            row = dict(zip(header, fields))
            try:
                for c in _NUMERIC:
                    row[c] = float(row[c])
                row["tx_per_sec"] = float(row["tx_per_sec"]) if row["tx_per_sec"] else None
                row["config"] = parse_config(row["config"])
            except ValueError as e:
                raise ReportError(f"{path}:{line}: {e}") from None
            if not row["experiment"]:
                raise ReportError(f"{path}:{line}: empty experiment id")
            row["source"] = path
            rows.append(row)
    return rows


def _trend(points: list[tuple[float, float]]) -> str:
    by_value: dict[float, list[float]] = {}
    for v, m in points:
        by_value.setdefault(v, []).append(m)
    ys = [statistics.fmean(by_value[v]) for v in sorted(by_value)]
    if len(ys) < 2:
        return "-"
    if all(b > a for a, b in zip(ys, ys[1:])):
        return "increasing"
    if all(b < a for a, b in zip(ys, ys[1:])):
        return "decreasing"
    return "mixed"


def summarize(rows: list[dict]) -> list[dict]:
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row["experiment"], []).append(row)
    out = []
    for exp in sorted(groups):
        g = groups[exp]
        metric = REPORT_METRIC.get(exp, "bytes_per_sec")
        if metric == "tx_per_sec" and any(r["tx_per_sec"] is None for r in g):
            metric = "bytes_per_sec"
        values = [r[metric] for r in g]
        configs = {tuple(sorted(r["config"].items())) for r in g}
        out.append(
            {
                "experiment": exp,
                "variable": g[0]["variable"],
                "points": len(g),
                "metric": metric,
                "min": min(values),
                "max": max(values),
                "mean": statistics.fmean(values),
                "trend": _trend([(r["value"], r[metric]) for r in g]),
                "order": " < ".join(_fmt_num(r["value"]) for r in sorted(g, key=lambda r: r[metric])),
                "conflict": len(configs) > 1,
            }
        )
    return out


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:g}"


def format_report(summary: list[dict]) -> str:
    head = ["experiment", "variable", "points", "metric", "min", "max", "mean", "trend", "status"]
    table = [head]
    for s in summary:
        table.append([
            s["experiment"], s["variable"], str(s["points"]), s["metric"],
            f"{s['min']:.1f}", f"{s['max']:.1f}", f"{s['mean']:.1f}", s["trend"],
            "CONFLICTING CONFIG" if s["conflict"] else "ok",
        ])
    widths = [max(len(row[i]) for row in table) for i in range(len(head))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
    lines.append("")
    for s in summary:
        lines.append(f"{s['experiment']}: {s['variable']} ordered by {s['metric']}: {s['order']}")
    return "\n".join(lines) + "\n"


def cmd_report(cfg: RunConfig, stdout) -> int:
    rows = []
    for path in cfg.paths:
        rows.extend(load_samples(path))
    stdout.write(format_report(summarize(rows)))
    return EXIT_OK


def cmd_serve_http(args, stdout) -> int:
    from .httpbench import BenchServer

    try:
        server = BenchServer(args.host, args.port)
    except OSError as e:
        raise BindError(f"{args.host}:{args.port}: {e}") from e
    print(f"serving on {server.host}:{server.port}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "send": cmd_send, "recv": cmd_recv, "bench": cmd_bench, "report": cmd_report}


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.subcommand == "serve-http":
            return cmd_serve_http(args, stdout)
        cfg = config_from_args(args)
        return COMMANDS[cfg.subcommand](cfg, stdout)
    except UsageError as e:
        print(f"rdfstream: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ReportError as e:
        print(f"rdfstream: malformed input: {e}", file=sys.stderr)
        return EXIT_DATA
    except BindError as e:
        print(f"rdfstream: cannot bind: {e}", file=sys.stderr)
        return EXIT_BIND
    except OSError as e:
        print(f"rdfstream: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"rdfstream: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
