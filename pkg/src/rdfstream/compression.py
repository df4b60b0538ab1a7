"""Lossless payload codecs and a size/timing comparison harness.

``deflate`` is an RFC 1950 zlib stream (the Adler-32 trailer doubles as an
integrity check on each datagram), ``gzip`` is RFC 1952, ``identity`` is a
pass-through. Every payload is compressed on its own; no state is shared
between datagrams.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
import zlib
from dataclasses import dataclass, fields

from .errors import CorruptStream, UnknownCodec

IDENTITY = "identity"
DEFLATE = "deflate"
GZIP = "gzip"

WIRE_IDS = {IDENTITY: 0, DEFLATE: 1, GZIP: 2}
CODECS_BY_WIRE_ID = {v: k for k, v in WIRE_IDS.items()}
DEFAULT_LEVEL = 6

_WBITS = {DEFLATE: zlib.MAX_WBITS, GZIP: 16 + zlib.MAX_WBITS}


def _check(codec: str) -> None:
    if codec not in WIRE_IDS:
        raise UnknownCodec(codec)


def compress(codec: str, payload: bytes, level: int = DEFAULT_LEVEL) -> bytes:
    _check(codec)
    if not 1 <= level <= 9:
        raise ValueError(f"compression level must be 1-9, got {level}")
    if codec == IDENTITY:
        return bytes(payload)
    # gzip header mtime stays 0 so output is a pure function of the input
    c = zlib.compressobj(level, zlib.DEFLATED, _WBITS[codec])
    return c.compress(payload) + c.flush()


def decompress(codec: str, payload: bytes) -> bytes:
    _check(codec)
    if codec == IDENTITY:
        return bytes(payload)
    d = zlib.decompressobj(_WBITS[codec])
    try:
        out = d.decompress(payload)
    except zlib.error as e:
        raise CorruptStream(f"{codec}: {e}") from None
    if not d.eof:
        raise CorruptStream(f"{codec}: truncated stream")
    if d.unused_data:
        raise CorruptStream(f"{codec}: {len(d.unused_data)} trailing bytes")
    return out


@dataclass
class CompressionReport:
    codec: str
    corpus_n: int
    in_mean: float
    in_median: float
    in_p95: float
    out_mean: float
    out_median: float
    out_p95: float
    compress_us: float
    decompress_us: float
    fit_fraction: float


CSV_COLUMNS = [
    "codec",
    "corpus_n",
    "in_mean",
    "in_median",
    "out_mean",
    "out_median",
    "out_p95",
    "compress_us",
    "decompress_us",
]


def _p95(values):
    ordered = sorted(values)
    return ordered[min(len(ordered) - 1, int(0.95 * len(ordered)))]


def compare_codecs(corpus, level: int = DEFAULT_LEVEL, fit_limit: int = 1491) -> list[CompressionReport]:
    """One report per registered codec over the same corpus.

    ``fit_fraction`` is the share of documents whose compressed form fits in
    ``fit_limit`` bytes (one datagram minus the codec-id byte by default).
    Timings are wall-clock and are the only non-reproducible fields.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty-corpus")
    sizes_in = [len(doc) for doc in corpus]
    reports = []
    for codec in WIRE_IDS:
        sizes_out = []
        t_comp = t_decomp = 0.0
        for doc in corpus:
            t0 = time.perf_counter()
            packed = compress(codec, doc, level)
            t1 = time.perf_counter()
            decompress(codec, packed)
            t2 = time.perf_counter()
            t_comp += t1 - t0
            t_decomp += t2 - t1
            sizes_out.append(len(packed))
        n = len(corpus)
        reports.append(
            CompressionReport(
                codec=codec,
                corpus_n=n,
                in_mean=statistics.fmean(sizes_in),
                in_median=statistics.median(sizes_in),
                in_p95=_p95(sizes_in),
                out_mean=statistics.fmean(sizes_out),
                out_median=statistics.median(sizes_out),
                out_p95=_p95(sizes_out),
                compress_us=1e6 * t_comp / n,
                decompress_us=1e6 * t_decomp / n,
                fit_fraction=sum(s <= fit_limit for s in sizes_out) / n,
            )
        )
    return reports


def reports_to_csv(reports: list[CompressionReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        row = {f.name: getattr(r, f.name) for f in fields(r)}
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _fmt(v):
    return f"{v:.1f}" if isinstance(v, float) else v
