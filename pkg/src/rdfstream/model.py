"""RDF terms, statements and update transactions shared by every other module.

Terms are plain frozen dataclasses. Construction never validates, so that a
malformed term can be built and then diagnosed with :func:`validate_term`;
the codecs call the validators before they emit or accept anything.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

ETHERNET_MTU = 1500
UDP_HEADER = 8
MAX_PAYLOAD = ETHERNET_MTU - UDP_HEADER  # 1492
MIN_EFFICIENT_PAYLOAD = 576 - UDP_HEADER  # 568
DEFAULT_COMMIT_BATCH = 100
AVG_ADDS_PER_TWEET = 18
AVG_REMOVES_PER_TWEET = 9

ADD = "add"
REMOVE = "remove"

_BNODE_ID = re.compile(r"[A-Za-z0-9]+\Z")
_IRI_FORBIDDEN = re.compile(r"[\s<>]")
_LANG_TAG = re.compile(r"[a-z]{1,8}(-[a-z0-9]{1,8})*\Z")


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    # hand-written: terms are hashed constantly by the store indexes, and the
    # generated versions build a tuple on every call
    def __hash__(self) -> int:
        return hash(self.value)

    def __eq__(self, other) -> bool:
        if other.__class__ is not IRI:
            return NotImplemented
        return self.value == other.value

    def __str__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BNode:
    id: str

    def __hash__(self) -> int:
        return hash(self.id) ^ 0x5BD1E995

    def __eq__(self, other) -> bool:
        if other.__class__ is not BNode:
            return NotImplemented
        return self.id == other.id

    def __str__(self) -> str:
        return f"_:{self.id}"


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    language: Optional[str] = None
    datatype: Optional[str] = None

    def __hash__(self) -> int:
        return hash(self.lexical)

    def __eq__(self, other) -> bool:
        if other.__class__ is not Literal:
            return NotImplemented
        return (
            self.lexical == other.lexical
            and self.language == other.language
            and self.datatype == other.datatype
        )

    @property
    def kind(self) -> str:
        if self.language is not None:
            return "lang-literal"
        if self.datatype is not None:
            return "typed-literal"
        return "plain-literal"

    def __str__(self) -> str:
        escaped = (
            self.lexical.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\r", "\\r")
        )
        if self.language is not None:
            return f'"{escaped}"@{self.language}'
        if self.datatype is not None:
            return f'"{escaped}"^^<{self.datatype}>'
        return f'"{escaped}"'


Term = Union[IRI, BNode, Literal]


def term_kind(t: Term) -> str:
    if isinstance(t, IRI):
        return "iri"
    if isinstance(t, BNode):
        return "bnode"
    return t.kind


@dataclass(frozen=True, slots=True)
class Statement:
    subject: Term
    predicate: Term
    object: Term
    contexts: tuple[IRI, ...] = ()


@dataclass(frozen=True, slots=True)
class UpdateOp:
    kind: str
    statement: Statement


@dataclass(frozen=True, slots=True)
class Transaction:
    ops: tuple[UpdateOp, ...] = ()

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)


def add(s: Term, p: Term, o: Term, *contexts: IRI) -> UpdateOp:
    return UpdateOp(ADD, Statement(s, p, o, tuple(contexts)))


def remove(s: Term, p: Term, o: Term, *contexts: IRI) -> UpdateOp:
    return UpdateOp(REMOVE, Statement(s, p, o, tuple(contexts)))


def _valid_iri_string(value: object) -> bool:
    return isinstance(value, str) and bool(value) and not _IRI_FORBIDDEN.search(value)


def validate_term(t: object) -> Optional[str]:
    """Return None if ``t`` is a well-formed term, else a short diagnostic."""
    if isinstance(t, IRI):
        if not isinstance(t.value, str) or not t.value:
            return "iri: empty"
        if _IRI_FORBIDDEN.search(t.value):
            return "iri: contains whitespace or angle bracket"
        return None
    if isinstance(t, BNode):
        if not isinstance(t.id, str) or not _BNODE_ID.match(t.id):
            return "bnode: identifier must match [A-Za-z0-9]+"
        return None
    if isinstance(t, Literal):
        if not isinstance(t.lexical, str):
            return "literal: lexical form is not a string"
        if t.language is not None and t.datatype is not None:
            return "literal: has both language tag and datatype"
        if t.language is not None and not (
            isinstance(t.language, str) and _LANG_TAG.match(t.language)
        ):
            return "literal: language tag is not lowercase BCP-47"
        if t.datatype is not None and not _valid_iri_string(t.datatype):
            return "literal: datatype is not a valid iri"
        return None
    return f"not a term: {type(t).__name__}"


def validate_statement(st: Statement) -> Optional[str]:
    for name, term in (("subject", st.subject), ("predicate", st.predicate), ("object", st.object)):
        problem = validate_term(term)
        if problem:
            return f"{name}: {problem}"
    if isinstance(st.subject, Literal):
        return "subject: literal not allowed"
    if not isinstance(st.predicate, IRI):
        return "predicate: must be an iri"
    seen = set()
    for c in st.contexts:
        if not isinstance(c, IRI):
            return "contexts: only iris allowed"
        problem = validate_term(c)
        if problem:
            return f"contexts: {problem}"
        if c in seen:
            return "contexts: duplicate context"
        seen.add(c)
    return None


def validate_transaction(t: Transaction) -> Optional[str]:
    for i, op in enumerate(t.ops):
        if op.kind not in (ADD, REMOVE):
            return f"op {i}: unknown kind {op.kind!r}"
        problem = validate_statement(op.statement)
        if problem:
            return f"op {i}: {problem}"
    return None


def transaction_stats(t: Transaction) -> tuple[int, int, int]:
    """(adds, removes, total) for one transaction."""
    adds = sum(1 for op in t.ops if op.kind == ADD)
    removes = len(t.ops) - adds
    return adds, removes, adds + removes
