"""In-memory quad store with per-worker pending buffers and batched commits.

Workers apply whole transactions to a private pending buffer; ``commit``
replays the buffer against the shared indexes under one global lock, so
readers only ever see committed state and never part of a transaction.
"""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

from .model import ADD, BNode, IRI, Literal, Statement, Term, Transaction, UpdateOp


class _DefaultGraph:
    __slots__ = ()

    def __repr__(self):
        return "DEFAULT_GRAPH"

    def __reduce__(self):
        return "DEFAULT_GRAPH"


DEFAULT_GRAPH = _DefaultGraph()


class Quad(NamedTuple):
    s: Term
    p: IRI
    o: Term
    g: object  # IRI or DEFAULT_GRAPH


@dataclass(frozen=True)
class CommitPolicy:
    batch_size: int = 100
    # seconds; when set, every non-empty commit lasts at least this long
    simulated_commit_floor: Optional[float] = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.simulated_commit_floor is not None and self.simulated_commit_floor < 0:
            raise ValueError("simulated_commit_floor must be >= 0")


@dataclass
class CommitStats:
    transactions: int = 0
    ops: int = 0
    seconds: float = 0.0


_EMPTY: dict = {}


def _nested_add(index: dict, a, b, c, d) -> None:
    index.setdefault(a, {}).setdefault(b, {}).setdefault(c, set()).add(d)


def _nested_discard(index: dict, a, b, c, d) -> None:
    lvl1 = index.get(a)
    if lvl1 is None:
        return
    lvl2 = lvl1.get(b)
    if lvl2 is None:
        return
    leaf = lvl2.get(c)
    if leaf is None:
        return
    leaf.discard(d)
    if not leaf:
        del lvl2[c]
        if not lvl2:
            del lvl1[b]
            if not lvl1:
                del index[a]


def _walk(index: dict, keys) -> Iterator[tuple]:
    """Yield (k1, k2, k3, k4) from a three-level index, honouring bound keys (None = any)."""
    k1, k2, k3, k4 = keys
    lvl1s = [(k1, index[k1])] if k1 is not None and k1 in index else ([] if k1 is not None else index.items())
    for a, lvl1 in lvl1s:
        lvl2s = [(k2, lvl1[k2])] if k2 is not None and k2 in lvl1 else ([] if k2 is not None else lvl1.items())
        for b, lvl2 in lvl2s:
            leaves = [(k3, lvl2[k3])] if k3 is not None and k3 in lvl2 else ([] if k3 is not None else lvl2.items())
            for c, leaf in leaves:
                if k4 is not None:
                    if k4 in leaf:
                        yield a, b, c, k4
                else:
                    for d in leaf:
                        yield a, b, c, d


class QuadStore:
    """Committed quads indexed four ways: spoc, posc, ospc and cspo.

    The three orderings spoc/posc/cspo serve subject, predicate and graph
    lookups; ospc is added so an object-only pattern is also an index hit.
    Terms are dictionary-encoded to small ints, so the indexes hash ints
    rather than term objects.
    """

    def __init__(self, policy: CommitPolicy = CommitPolicy()):
        self.policy = policy
        self._lock = threading.Lock()
        self._ids: dict = {}
        self._terms: list = []
        self._spoc: dict = {}
        self._posc: dict = {}
        self._ospc: dict = {}
        self._cspo: dict = {}
        self._size = 0
        self.commits = 0
        self.committed_transactions = 0
        self._bnode_seq = itertools.count(1)
        self._workers: dict[str, StoreWorker] = {}

    def __len__(self) -> int:
        return self._size

    # index maintenance; callers hold self._lock

    def _id(self, term) -> int:
        i = self._ids.get(term)
        if i is None:
            i = self._ids[term] = len(self._terms)
            self._terms.append(term)
        return i

    def _insert(self, s, p, o, g) -> None:
        self._insert_ids(self._id(s), self._id(p), self._id(o), self._id(g))

    def _insert_ids(self, s: int, p: int, o: int, g: int) -> None:
        graphs = self._spoc.get(s, _EMPTY).get(p, _EMPTY).get(o)
        if graphs is not None and g in graphs:
            return
        _nested_add(self._spoc, s, p, o, g)
        _nested_add(self._posc, p, o, s, g)
        _nested_add(self._ospc, o, s, p, g)
        _nested_add(self._cspo, g, s, p, o)
        self._size += 1

    def _delete(self, s, p, o, g) -> None:
        ids = self._ids
        key = (ids.get(s), ids.get(p), ids.get(o), ids.get(g))
        if None not in key:
            self._delete_ids(*key)

    def _delete_ids(self, s: int, p: int, o: int, g: int) -> None:
        graphs = self._spoc.get(s, _EMPTY).get(p, _EMPTY).get(o)
        if graphs is None or g not in graphs:
            return
        _nested_discard(self._spoc, s, p, o, g)
        _nested_discard(self._posc, p, o, s, g)
        _nested_discard(self._ospc, o, s, p, g)
        _nested_discard(self._cspo, g, s, p, o)
        self._size -= 1

    def _execute(self, op: UpdateOp) -> None:
        st = op.statement
        if op.kind == ADD:
            s, p, o = self._id(st.subject), self._id(st.predicate), self._id(st.object)
            for g in st.contexts or (DEFAULT_GRAPH,):
                self._insert_ids(s, p, o, self._id(g))
            return
        ids = self._ids
        s, p, o = ids.get(st.subject), ids.get(st.predicate), ids.get(st.object)
        if s is None or p is None or o is None:
            return  # never seen, so nothing to remove
        if st.contexts:
            for g in st.contexts:
                gi = ids.get(g)
                if gi is not None:
                    self._delete_ids(s, p, o, gi)
        else:
            graphs = self._spoc.get(s, _EMPTY).get(p, _EMPTY).get(o)
            for gi in list(graphs or ()):
                self._delete_ids(s, p, o, gi)

    def _commit_batch(self, batch: list[Transaction]) -> int:
        with self._lock:
            ops = 0
            for tx in batch:
                for op in tx.ops:
                    self._execute(op)
                ops += len(tx.ops)
            self.commits += 1
            self.committed_transactions += len(batch)
        return ops

    # public API

    def worker(self, name: str = "main") -> "StoreWorker":
        with self._lock:
            w = self._workers.get(name)
            if w is None:
                w = self._workers[name] = StoreWorker(self, name)
            return w

    @property
    def workers(self) -> list["StoreWorker"]:
        return list(self._workers.values())

    def match(self, s=None, p=None, o=None, g=None) -> list[Quad]:
        """Committed quads matching every bound position; ``None`` is a wildcard.

        Pass ``DEFAULT_GRAPH`` as ``g`` to select the default graph only.
        """
        with self._lock:
            bound = []
            for term in (s, p, o, g):
                if term is None:
                    bound.append(None)
                    continue
                i = self._ids.get(term)
                if i is None:
                    return []  # a term the store has never seen matches nothing
                bound.append(i)
            s, p, o, g = bound
            t = self._terms
            if s is not None:
                return [Quad(t[a], t[b], t[c], t[d]) for a, b, c, d in _walk(self._spoc, (s, p, o, g))]
            if p is not None:
                return [Quad(t[c], t[a], t[b], t[d]) for a, b, c, d in _walk(self._posc, (p, o, None, g))]
            if o is not None:
                return [Quad(t[b], t[c], t[a], t[d]) for a, b, c, d in _walk(self._ospc, (o, None, None, g))]
            return [Quad(t[b], t[c], t[d], t[a]) for a, b, c, d in _walk(self._cspo, (g, None, None, None))]

    def quads(self) -> list[Quad]:
        return self.match()

    def load(self, quads: Iterable[Quad]) -> int:
        """Insert quads verbatim, e.g. from a snapshot; bnode labels are kept as given."""
        with self._lock:
            before = self._size
            for q in quads:
                self._insert(*q)
            return self._size - before

    def fresh_bnode(self) -> BNode:
        return BNode(f"b{next(self._bnode_seq)}")

    def skolemize(self, tx: Transaction) -> Transaction:
        """Give each bnode label in ``tx`` a store-unique replacement.

        Labels are scoped to their transaction, so the same label in two
        transactions never denotes the same node.
        """
        mapping: dict[BNode, BNode] = {}

        def fix(t):
            if isinstance(t, BNode):
                if t not in mapping:
                    mapping[t] = self.fresh_bnode()
                return mapping[t]
            return t

        if not any(
            isinstance(op.statement.subject, BNode) or isinstance(op.statement.object, BNode)
            for op in tx.ops
        ):
            return tx
        return Transaction(
            tuple(
                UpdateOp(
                    op.kind,
                    Statement(fix(op.statement.subject), op.statement.predicate,
                              fix(op.statement.object), op.statement.contexts),
                )
                for op in tx.ops
            )
        )


@dataclass
class StoreWorker:
    """One ingest client: a private pending buffer over the shared store."""

    store: QuadStore
    name: str
    pending: list = field(default_factory=list)
    applied_transactions: int = 0
    applied_ops: int = 0
    committed_transactions: int = 0
    commits: int = 0

    def apply(self, tx: Transaction) -> int:
        """Buffer ``tx`` for the next commit; returns the pending count."""
        self.pending.append(self.store.skolemize(tx))
        self.applied_transactions += 1
        self.applied_ops += len(tx.ops)
        return len(self.pending)

    def commit(self) -> CommitStats:
        if not self.pending:
            return CommitStats()
        t0 = time.perf_counter()
        batch, self.pending = self.pending, []
        ops = self.store._commit_batch(batch)
        self.committed_transactions += len(batch)
        self.commits += 1
        floor = self.store.policy.simulated_commit_floor
        if floor:
            # modeled as commit round-trip latency: it overlaps across workers
            remaining = floor - (time.perf_counter() - t0)
            if remaining > 0:
                time.sleep(remaining)
        return CommitStats(len(batch), ops, time.perf_counter() - t0)

    def ingest(self, tx: Transaction) -> Optional[CommitStats]:
        """Apply, then commit if the batch is full."""
        if self.apply(tx) >= self.store.policy.batch_size:
            return self.commit()
        return None


def apply_sequentially(transactions: Iterable[Transaction]) -> set[Quad]:
    """Reference replay: one transaction after another over a flat triple -> graphs map."""
    state: dict[tuple, set] = {}
    for tx in transactions:
        for op in tx.ops:
            st = op.statement
            key = (st.subject, st.predicate, st.object)
            if op.kind == ADD:
                state.setdefault(key, set()).update(st.contexts or (DEFAULT_GRAPH,))
            elif key in state:
                if st.contexts:
                    state[key].difference_update(st.contexts)
                else:
                    state[key].clear()
                if not state[key]:
                    del state[key]
    return {Quad(s, p, o, g) for (s, p, o), graphs in state.items() for g in graphs}


# N-Quads compatible snapshots

def write_nquads(quads: Iterable[Quad], fh) -> int:
    n = 0
    for q in quads:
        graph = "" if q.g is DEFAULT_GRAPH else f" {q.g}"
        fh.write(f"{q.s} {q.p} {q.o}{graph} .\n")
        n += 1
    return n


def _read_term(line: str, i: int):
    c = line[i]
    if c == "<":
        j = line.index(">", i)
        return IRI(line[i + 1 : j]), j + 1
    if c == "_":
        j = i + 2
        while j < len(line) and line[j].isalnum():
            j += 1
        return BNode(line[i + 2 : j]), j
    if c == '"':
        j = i + 1
        chars = []
        while line[j] != '"':
            if line[j] == "\\":
                nxt = line[j + 1]
                chars.append({"n": "\n", "r": "\r", '"': '"', "\\": "\\"}[nxt])
                j += 2
            else:
                chars.append(line[j])
                j += 1
        j += 1
        lex = "".join(chars)
        if line.startswith("@", j):
            k = j + 1
            while k < len(line) and (line[k].isalnum() or line[k] == "-"):
                k += 1
            return Literal(lex, language=line[j + 1 : k]), k
        if line.startswith("^^<", j):
            k = line.index(">", j + 3)
            return Literal(lex, datatype=line[j + 3 : k]), k + 1
        return Literal(lex), j
    raise ValueError(f"unexpected character {c!r} at column {i}")


def read_nquads(fh) -> Iterator[Quad]:
    for lineno, raw in enumerate(fh, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            terms = []
            i = 0
            while True:
                while line[i] == " ":
                    i += 1
                if line[i] == ".":
                    break
                term, i = _read_term(line, i)
                terms.append(term)
        except (ValueError, IndexError, KeyError) as e:
            raise ValueError(f"line {lineno}: {e}") from None
        if len(terms) == 3:
            yield Quad(*terms, DEFAULT_GRAPH)
        elif len(terms) == 4:
            yield Quad(*terms)
        else:
            raise ValueError(f"line {lineno}: expected 3 or 4 terms, got {len(terms)}")
