import statistics

import pytest
from hypothesis import given, settings, strategies as st

from rdfstream.firehose import (
    FOAF,
    Firehose,
    FirehoseConfig,
    author_iri,
    firehose_stream,
    read_corpus,
    tweet_to_transaction,
    write_corpus,
)
from rdfstream.gruf import parse_gruf, serialize_gruf
from rdfstream.model import ADD, IRI, REMOVE, transaction_stats, validate_transaction
from rdfstream.rdftx import serialize_rdftx
from rdfstream.store import CommitPolicy, QuadStore


def docs(seed, n):
    hose = Firehose(seed)
    return [serialize_rdftx(hose.next_transaction()) for _ in range(n)]


def test_same_seed_same_bytes():
    assert docs(5, 300) == docs(5, 300)


def test_different_seed_different_stream():
    assert docs(5, 20) != docs(6, 20)


def test_first_tweet_has_no_removes():
    t = Firehose(0).next_transaction()
    adds, removes, _ = transaction_stats(t)
    assert removes == 0 and adds > 0


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_every_transaction_valid_and_gruf_expressible(seed):
    hose = Firehose(seed)
    for _ in range(30):
        t = hose.next_transaction()
        assert validate_transaction(t) is None
        assert parse_gruf(serialize_gruf(t)) == t


def test_removes_precede_adds_and_replace_old_values():
    hose = Firehose(1)
    for _ in range(500):
        t = hose.next_transaction()
        kinds = [op.kind for op in t.ops]
        assert kinds == sorted(kinds, key=lambda k: k != REMOVE)
        removed = {(op.statement.subject, op.statement.predicate) for op in t.ops if op.kind == REMOVE}
        added = {(op.statement.subject, op.statement.predicate) for op in t.ops if op.kind == ADD}
        assert removed <= added  # every stale value is replaced, none merely dropped


def test_stream_keeps_one_value_per_profile_field():
    hose = Firehose(2)
    store = QuadStore(CommitPolicy(1))
    w = store.worker()
    for _ in range(2000):
        w.ingest(hose.next_transaction())
    for author in list(hose.registry)[:200]:
        s = IRI(author_iri(author))
        for pred in (FOAF + "name", FOAF + "nick"):
            assert len(store.match(s, IRI(pred))) <= 1


def test_calibration_small_sample():
    hose = Firehose(0)
    stats = [transaction_stats(hose.next_transaction()) for _ in range(3000)]
    assert statistics.fmean(s[0] for s in stats) == pytest.approx(18, abs=1.5)
    assert statistics.fmean(s[1] for s in stats) == pytest.approx(9, abs=1.5)


def test_translation_updates_registry():
    hose = Firehose(4)
    tweet = hose.next_tweet()
    registry = {}
    tweet_to_transaction(tweet, registry)
    assert registry[tweet.author.author_id].last_seen == tweet.author.values
    again = tweet_to_transaction(tweet, registry)
    post_only = [op for op in again.ops if "/post/" not in op.statement.subject.value]
    assert post_only == []  # nothing changed, so nothing about the author is re-sent


def test_timed_stream():
    items = list(firehose_stream(0, 500, 10))
    assert [i.due for i in items] == pytest.approx([k / 500 for k in range(10)])
    with pytest.raises(ValueError):
        list(firehose_stream(0, 0, 1))


def test_config_validation():
    with pytest.raises(ValueError):
        FirehoseConfig(session_probability=1.5)


def test_corpus_file_round_trip(tmp_path):
    path = tmp_path / "c.bin"
    d = docs(0, 25)
    assert write_corpus(path, d) == 25
    assert list(read_corpus(path)) == d
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(ValueError):
        list(read_corpus(path))
