import io
import os
import signal
import socket
import subprocess
import sys
import threading
import time

import pytest

from rdfstream.cli import EXIT_BIND, EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from rdfstream.firehose import read_corpus
from rdfstream.samples import ThroughputSample, samples_to_csv


def run(*argv, env=None):
    out = io.StringIO()
    if env is not None:
        old = dict(os.environ)
        os.environ.update(env)
    try:
        code = main(list(argv), stdout=out)
    finally:
        if env is not None:
            os.environ.clear()
            os.environ.update(old)
    return code, out.getvalue()


def free_ports(n):
    socks = [socket.socket(socket.AF_INET, socket.SOCK_DGRAM) for _ in range(n)]
    # look for a run of consecutive free ports
    for base in range(41000, 60000, 7):
        try:
            for i, s in enumerate(socks):
                s.bind(("127.0.0.1", base + i))
        except OSError:
            for s in socks:
                s.close()
            socks = [socket.socket(socket.AF_INET, socket.SOCK_DGRAM) for _ in range(n)]
            continue
        for s in socks:
            s.close()
        return base
    raise RuntimeError("no free ports")


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("gen", "--count", "20", "--seed", "4", "--out", str(a))[0] == EXIT_OK
    assert run("gen", "--count", "20", "--seed", "4", "--out", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(list(read_corpus(a))) == 20


def test_seed_env_overrides_flag(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("gen", "--count", "5", "--seed", "1", "--out", str(a), env={"RDFSTREAM_SEED": "9"})
    run("gen", "--count", "5", "--seed", "9", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frob"],
        ["send", "--endpoints", "127.0.0.1:9"],  # neither corpus nor count
        ["send", "--endpoints", "127.0.0.1:9", "--count", "1", "--corpus", "x"],
        ["send", "--endpoints", "nohost", "--count", "1"],
        ["send", "--endpoints", "127.0.0.1:9", "--count", "1", "--rate", "0"],
        ["recv", "--ports", "5000,5001", "--workers", "3"],
        ["recv", "--ports", "5000", "--batch", "0"],
        ["bench", "udp-loss", "--series", "0.1,2"],
        ["gen", "--count", "-1", "--out", "x"],
    ],
)
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_bad_seed_env(tmp_path):
    assert run("gen", "--count", "1", "--out", str(tmp_path / "x"), env={"RDFSTREAM_SEED": "abc"})[0] == EXIT_USAGE


def test_missing_corpus_is_io_error(tmp_path):
    assert run("send", "--endpoints", "127.0.0.1:9", "--corpus", str(tmp_path / "nope"))[0] == EXIT_IO


def test_bind_conflict():
    holder = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    holder.bind(("127.0.0.1", 0))
    try:
        code, _ = run("recv", "--ports", str(holder.getsockname()[1]), "--duration", "0.1")
    finally:
        holder.close()
    assert code == EXIT_BIND


def test_send_recv_round_trip(tmp_path):
    corpus = tmp_path / "c.bin"
    run("gen", "--count", "60", "--seed", "2", "--out", str(corpus))
    base = free_ports(2)
    snapshot = tmp_path / "snap.nq"
    result = {}

    def sender():
        time.sleep(0.3)
        result["send"] = run("send", "--endpoints", f"127.0.0.1:{base},127.0.0.1:{base + 1}",
                             "--rate", "500", "--corpus", str(corpus))

    th = threading.Thread(target=sender)
    th.start()
    code, out = run("recv", "--ports", str(base), "--workers", "2", "--batch", "7",
                    "--duration", "1.5", "--snapshot", str(snapshot))
    th.join()
    assert code == EXIT_OK
    send_code, send_out = result["send"]
    assert send_code == EXIT_OK
    assert send_out.splitlines()[1:3] == [f"127.0.0.1:{base},30,,,,,", f"127.0.0.1:{base + 1},30,,,,,"]
    assert send_out.splitlines()[-1].startswith("total,60,")
    assert out.splitlines()[-1].startswith("total,60,60,60,")
    assert snapshot.read_text().count("\n") > 60


def test_recv_flushes_on_sigterm(tmp_path):
    base = free_ports(1)
    proc = subprocess.Popen(
        [sys.executable, "-m", "rdfstream", "recv", "--ports", str(base), "--batch", "1000"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    try:
        assert "listening" in proc.stderr.readline()
        assert run("send", "--endpoints", f"127.0.0.1:{base}", "--count", "25", "--rate", "1000")[0] == EXIT_OK
        time.sleep(0.3)
        proc.send_signal(signal.SIGTERM)
        out, _ = proc.communicate(timeout=10)
    finally:
        proc.kill()
    assert proc.returncode == EXIT_OK
    # a batch of 1000 never filled, so the 25 transactions arrive via the shutdown flush
    assert out.splitlines()[-1].startswith("total,25,25,25,1,")


def sample_csv(path, rows):
    path.write_text(samples_to_csv(rows))
    return str(path)


def test_report_merges_and_checks_order(tmp_path):
    mk = lambda exp, v, bps, cfg: ThroughputSample(exp, "body_size", v, 10, 1.0, bps, config=cfg)
    a = sample_csv(tmp_path / "a.csv", [mk("http-get", 1000, 10.0, {"r": 1}), mk("http-get", 10000, 50.0, {"r": 1})])
    b = sample_csv(tmp_path / "b.csv", [mk("http-get", 100000, 400.0, {"r": 1}),
                                        mk("http-post", 1000, 9.0, {"r": 1}), mk("http-post", 10000, 5.0, {"r": 2})])
    code, out = run("report", a, b)
    assert code == EXIT_OK
    lines = out.splitlines()
    get = next(l for l in lines if l.startswith("http-get "))
    post = next(l for l in lines if l.startswith("http-post "))
    assert "increasing" in get and "ok" in get and " 3 " in get
    assert "decreasing" in post and "CONFLICTING CONFIG" in post
    assert "http-get: body_size ordered by bytes_per_sec: 1000 < 10000 < 100000" in lines


def test_report_malformed_row(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    good = samples_to_csv([ThroughputSample("x", "v", 1, 1, 1.0, 1.0)])
    path.write_text(good + "x,v,notanumber,1,1,1,,1,,h,t\n")
    code, _ = run("report", str(path))
    assert code == EXIT_DATA
    assert f"{path}:3:" in capsys.readouterr().err


def test_bench_writes_csv(tmp_path):
    out = tmp_path / "loss.csv"
    assert run("bench", "udp-loss", "--series", "0,0.5", "--datagrams", "400", "--out", str(out))[0] == EXIT_OK
    assert out.read_text().count("\n") == 3
