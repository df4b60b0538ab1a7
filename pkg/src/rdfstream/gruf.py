"""GRUF: a line-oriented update format with a subject/property/graph cursor.

Grammar accepted here::

    set_subject <iri> | set_subject _:<bnode-id>
    set_property <iri>
    set_graph [<iri>]            # no argument resets to the default graph
    add    (uri <iri> | bnode <id> | text <rest of line>)
    delete (uri <iri> | bnode <id> | text <rest of line>)

Blank lines are ignored. Lines are LF-terminated.
"""

from __future__ import annotations

from .errors import ParseError, SerializeError
from .model import (
    ADD,
    REMOVE,
    BNode,
    IRI,
    Literal,
    Statement,
    Transaction,
    UpdateOp,
    validate_term,
    validate_transaction,
)

_OP_COMMANDS = {"add": ADD, "delete": REMOVE}
_CURSOR_COMMANDS = ("set_subject", "set_property", "set_graph")


def _term(token_type: str, value: str, lineno: int):
    if token_type == "uri":
        term = IRI(value)
    elif token_type == "bnode":
        term = BNode(value)
    elif token_type == "text":
        term = Literal(value)
    else:
        raise ParseError("bad-object-type-token", f"line {lineno}: {token_type!r}")
    problem = validate_term(term)
    if problem:
        raise ParseError("invalid-term", f"line {lineno}: {problem}")
    return term


def parse_gruf(doc: str | bytes) -> Transaction:
    if isinstance(doc, bytes):
        try:
            doc = doc.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError("malformed-text", str(e)) from None
    subject = prop = None
    graph: tuple[IRI, ...] = ()
    ops = []
    for lineno, line in enumerate(doc.split("\n"), 1):
        if not line.strip():
            continue
        command, _, rest = line.partition(" ")
        if command in _OP_COMMANDS:
            if subject is None or prop is None:
                raise ParseError("cursor-not-set", f"line {lineno}: {command} before set_subject/set_property")
            token_type, _, value = rest.partition(" ")
            obj = _term(token_type, value, lineno)
            ops.append(UpdateOp(_OP_COMMANDS[command], Statement(subject, prop, obj, graph)))
        elif command == "set_subject":
            if rest.startswith("_:"):
                subject = _term("bnode", rest[2:], lineno)
            else:
                subject = _term("uri", rest, lineno)
        elif command == "set_property":
            prop = _term("uri", rest, lineno)
        elif command == "set_graph":
            graph = (_term("uri", rest, lineno),) if rest else ()
        else:
            raise ParseError("unknown-command", f"line {lineno}: {command!r}")
    return Transaction(tuple(ops))


def _object_line(verb: str, obj) -> str:
    if isinstance(obj, IRI):
        return f"{verb} uri {obj.value}"
    if isinstance(obj, BNode):
        return f"{verb} bnode {obj.id}"
    if obj.language is not None or obj.datatype is not None:
        raise SerializeError("unserializable-literal", "GRUF literals carry no language or datatype")
    if "\n" in obj.lexical:
        raise SerializeError("unserializable-literal", "embedded newline")
    return f"{verb} text {obj.lexical}"


def serialize_gruf(t: Transaction) -> str:
    """Write ``t`` as GRUF, emitting cursor commands only when the cursor moves."""
    problem = validate_transaction(t)
    if problem:
        raise SerializeError("invalid-term", problem)
    lines = []
    subject = prop = None
    graph: tuple[IRI, ...] = ()
    for op in t.ops:
        st = op.statement
        if len(st.contexts) > 1:
            raise SerializeError("unserializable-statement", "GRUF carries one graph per statement")
        if st.subject != subject:
            if isinstance(st.subject, BNode):
                lines.append(f"set_subject _:{st.subject.id}")
            elif st.subject.value.startswith("_:"):
                raise SerializeError("unserializable-statement", "iri subject looks like a bnode label")
            else:
                lines.append(f"set_subject {st.subject.value}")
            subject = st.subject
        if st.predicate != prop:
            lines.append(f"set_property {st.predicate.value}")
            prop = st.predicate
        if st.contexts != graph:
            lines.append(f"set_graph {st.contexts[0].value}" if st.contexts else "set_graph")
            graph = st.contexts
        lines.append(_object_line("add" if op.kind == ADD else "delete", st.object))
    return "".join(line + "\n" for line in lines)


def is_gruf_expressible(t: Transaction) -> bool:
    try:
        serialize_gruf(t)
    except SerializeError:
        return False
    return True
