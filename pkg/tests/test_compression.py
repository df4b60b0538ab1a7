import binascii
import gzip
import struct
import zlib

import pytest
from hypothesis import given, strategies as st

from rdfstream import compression
from rdfstream.compression import DEFLATE, GZIP, IDENTITY, compare_codecs, compress, decompress, reports_to_csv
from rdfstream.errors import CorruptStream, UnknownCodec

payloads = st.binary(max_size=5000)


def adler32(data: bytes) -> int:
    # straight from the RFC 1950 definition, no zlib involved
    a, b = 1, 0
    for byte in data:
        a = (a + byte) % 65521
        b = (b + a) % 65521
    return (b << 16) | a


def test_adler_oracle_known_value():
    assert adler32(b"Wikipedia") == 0x11E60398


@given(st.sampled_from([IDENTITY, DEFLATE, GZIP]), payloads)
def test_round_trip(codec, data):
    assert decompress(codec, compress(codec, data)) == data


@given(payloads)
def test_deflate_framing(data):
    out = compress(DEFLATE, data)
    cmf, flg = out[0], out[1]
    assert cmf & 0x0F == 8 and cmf >> 4 <= 7
    assert (cmf * 256 + flg) % 31 == 0
    assert not flg & 0x20  # no preset dictionary
    assert struct.unpack(">I", out[-4:])[0] == adler32(data)
    assert zlib.decompress(out[2:-4], -15) == data


@given(payloads)
def test_gzip_framing(data):
    out = compress(GZIP, data)
    assert out[:3] == b"\x1f\x8b\x08"
    assert out[4:8] == b"\0\0\0\0"  # mtime
    crc, isize = struct.unpack("<II", out[-8:])
    assert crc == binascii.crc32(data)
    assert isize == len(data) % 2**32
    assert gzip.decompress(out) == data


@given(payloads)
def test_gzip_is_deflate_plus_twelve(data):
    assert len(compress(GZIP, data)) == len(compress(DEFLATE, data)) + 12


@given(payloads)
def test_deterministic(data):
    for codec in (DEFLATE, GZIP):
        assert compress(codec, data) == compress(codec, data)


@pytest.mark.parametrize("codec", [DEFLATE, GZIP])
def test_flipped_trailer_detected(codec):
    out = bytearray(compress(codec, b"hello world" * 20))
    out[-5 if codec == GZIP else -1] ^= 0xFF
    with pytest.raises(CorruptStream):
        decompress(codec, bytes(out))


@given(st.sampled_from([DEFLATE, GZIP]), st.binary(min_size=1, max_size=2000), st.data())
def test_truncation_detected(codec, data, draw):
    out = compress(codec, data)
    cut = draw.draw(st.integers(0, len(out) - 1))
    with pytest.raises(CorruptStream):
        decompress(codec, out[:cut])


@pytest.mark.parametrize("codec", [DEFLATE, GZIP])
def test_trailing_garbage_detected(codec):
    with pytest.raises(CorruptStream):
        decompress(codec, compress(codec, b"abc") + b"\0")


@given(st.sampled_from([DEFLATE, GZIP]), st.binary(max_size=200))
def test_garbage_never_crashes(codec, data):
    try:
        decompress(codec, data)
    except CorruptStream:
        pass


def test_unknown_codec():
    with pytest.raises(UnknownCodec):
        compress("brotli", b"")
    with pytest.raises(UnknownCodec):
        decompress("lz4", b"")


def test_level_bounds():
    with pytest.raises(ValueError):
        compress(DEFLATE, b"x", level=0)


def test_wire_ids():
    assert compression.WIRE_IDS == {IDENTITY: 0, DEFLATE: 1, GZIP: 2}


def test_compare_codecs():
    corpus = [b"<transaction/>" * k for k in range(1, 120)]
    reports = {r.codec: r for r in compare_codecs(corpus)}
    assert set(reports) == {IDENTITY, DEFLATE, GZIP}
    assert reports[IDENTITY].out_mean == reports[IDENTITY].in_mean
    assert reports[GZIP].out_mean == pytest.approx(reports[DEFLATE].out_mean + 12)
    assert reports[DEFLATE].fit_fraction == 1.0
    assert reports[IDENTITY].fit_fraction < 1.0  # 14*119 bytes does not fit
    text = reports_to_csv(list(reports.values()))
    assert text.splitlines()[0] == "codec,corpus_n,in_mean,in_median,out_mean,out_median,out_p95,compress_us,decompress_us"
    assert len(text.splitlines()) == 4


def test_compare_codecs_empty():
    with pytest.raises(ValueError, match="empty-corpus"):
        compare_codecs([])
