"""Reader and writer for ``application/x-rdftransaction`` XML documents.

The reader is a single-pass expat state machine over a fixed element set:
``transaction`` > (``add`` | ``remove``) > three of (``uri`` | ``bnode`` |
``literal``) followed by ``contexts`` > ``uri``*. Anything else, including a
DOCTYPE or entity declaration, is rejected.
"""

from __future__ import annotations

import re
from functools import lru_cache
from xml.parsers import expat

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

MEDIA_TYPE = "application/x-rdftransaction"

_NODE_TAGS = frozenset(("uri", "bnode", "literal"))
_OP_TAGS = {"add": ADD, "remove": REMOVE}
_LITERAL_ATTRS = frozenset(("xml:lang", "datatype"))

# XML 1.0 Char production; anything outside it cannot be written even as a reference.
_NON_XML_CHAR = re.compile("[^\t\n\r\x20-\ud7ff\ue000-\ufffd\U00010000-\U0010ffff]")

_TEXT_ESCAPES = str.maketrans({"&": "&amp;", "<": "&lt;", ">": "&gt;", "\r": "&#13;"})
_ATTR_ESCAPES = str.maketrans(
    {
        "&": "&amp;",
        "<": "&lt;",
        ">": "&gt;",
        '"': "&quot;",
        "\t": "&#9;",
        "\n": "&#10;",
        "\r": "&#13;",
    }
)


@lru_cache(maxsize=16384)
def _iri(text: str) -> IRI:
    # vocabulary IRIs repeat across documents; validating each once is enough
    term = IRI(text)
    problem = validate_term(term)
    if problem:
        raise ParseError("invalid-term", problem)
    return term


class _Reader:
    def __init__(self):
        self.ops: list[UpdateOp] = []
        self.stack: list[str] = []
        self.op_kind = None
        self.terms: list = []
        self.contexts: list | None = None
        self.node_tag = None
        self.node_attrs: dict = {}
        self.text: list[str] = []
        self.saw_root = False

    def fail(self, code, message):
        raise ParseError(code, message)

    # expat callbacks

    def start(self, tag, attrs):
        stack = self.stack
        parent = stack[-1] if stack else None
        # fast path: a term inside an operation or its contexts
        if tag in _NODE_TAGS and (parent == "contexts" or (parent in _OP_TAGS and self.contexts is None)):
            if attrs and tag != "literal":
                self.fail("unknown-attribute", f"<{tag}> takes no attributes")
            self._open_node(tag, attrs)
            stack.append(tag)
            return
        if parent is None:
            if tag != "transaction":
                self.fail("unknown-element", f"root must be <transaction>, got <{tag}>")
            self.saw_root = True
        elif parent == "transaction":
            if tag not in _OP_TAGS:
                self.fail("unknown-element", f"<{tag}> inside <transaction>")
            self.op_kind = _OP_TAGS[tag]
            self.terms = []
            self.contexts = None
        elif parent in _OP_TAGS:
            if tag in _NODE_TAGS:
                if self.contexts is not None:
                    self.fail("misplaced-element", f"<{tag}> after <contexts>")
                self._open_node(tag, attrs)
            elif tag == "contexts":
                if self.contexts is not None:
                    self.fail("misplaced-element", "duplicate <contexts>")
                if len(self.terms) != 3:
                    self.fail("missing-node", f"{len(self.terms)} term(s) before <contexts>")
                self.contexts = []
            else:
                self.fail("unknown-element", f"<{tag}> inside <{parent}>")
        elif parent == "contexts":
            if tag not in _NODE_TAGS:
                self.fail("unknown-element", f"<{tag}> inside <contexts>")
            self._open_node(tag, attrs)
        elif parent in _NODE_TAGS:
            self.fail("misplaced-element", f"<{tag}> inside <{parent}>")
        else:
            self.fail("unknown-element", f"<{tag}>")
        if tag != "literal" and attrs:
            self.fail("unknown-attribute", f"<{tag}> takes no attributes")
        self.stack.append(tag)

    def _open_node(self, tag, attrs):
        if tag == "literal":
            for name in attrs:
                if name not in _LITERAL_ATTRS:
                    self.fail("unknown-attribute", f"<literal {name}=...>")
        self.node_tag = tag
        self.node_attrs = attrs
        self.text = []

    def end(self, tag):
        self.stack.pop()
        if self.node_tag is not None:
            term = self._close_node()
            if self.contexts is not None:
                if not isinstance(term, IRI):
                    self.fail("invalid-term", "contexts may only hold <uri> elements")
                if term in self.contexts:
                    self.fail("invalid-term", f"duplicate context {term.value}")
                self.contexts.append(term)
            else:
                self.terms.append(term)
                if len(self.terms) > 3:
                    self.fail("missing-node", "more than three terms in one operation")
        elif tag in _OP_TAGS:
            if len(self.terms) != 3:
                self.fail("missing-node", f"<{tag}> has {len(self.terms)} term(s)")
            if self.contexts is None:
                self.fail("missing-node", f"<{tag}> has no <contexts>")
            s, p, o = self.terms
            if not isinstance(p, IRI):
                self.fail("non-iri-predicate", f"predicate is {type(p).__name__}")
            if isinstance(s, Literal):
                self.fail("invalid-term", "literal in subject position")
            self.ops.append(UpdateOp(self.op_kind, Statement(s, p, o, tuple(self.contexts))))
            self.contexts = None

    def _close_node(self):
        text = "".join(self.text)
        tag = self.node_tag
        self.node_tag = None
        if tag == "uri":
            return _iri(text)
        if tag == "bnode":
            term = BNode(text)
        else:
            lang = self.node_attrs.get("xml:lang")
            term = Literal(
                text,
                lang.lower() if lang is not None else None,
                self.node_attrs.get("datatype"),
            )
        problem = validate_term(term)
        if problem:
            self.fail("invalid-term", problem)
        return term

    def chars(self, data):
        if self.node_tag is not None:
            self.text.append(data)
        elif data.strip():
            where = self.stack[-1] if self.stack else "document"
            self.fail("misplaced-element", f"text content inside <{where}>")

    def doctype(self, *args):
        self.fail("malformed-xml", "DOCTYPE declarations are not accepted")

    def entity(self, *args):
        self.fail("malformed-xml", "entity declarations are not accepted")


def parse_rdftx(doc: bytes | str) -> Transaction:
    """Parse one RDF transaction document into a :class:`Transaction`.

    Raises :class:`ParseError` with ``code`` one of ``malformed-xml``,
    ``unknown-element``, ``unknown-attribute``, ``misplaced-element``,
    ``missing-node``, ``non-iri-predicate`` or ``invalid-term``.
    """
    if isinstance(doc, str):
        doc = doc.encode("utf-8")
    reader = _Reader()
    parser = expat.ParserCreate(encoding="UTF-8")
    parser.buffer_text = True
    parser.StartElementHandler = reader.start
    parser.EndElementHandler = reader.end
    parser.CharacterDataHandler = reader.chars
    parser.StartDoctypeDeclHandler = reader.doctype
    parser.EntityDeclHandler = reader.entity
    parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
    try:
        parser.Parse(doc, True)
    except expat.ExpatError as e:
        raise ParseError("malformed-xml", str(e)) from None
    if not reader.saw_root:
        raise ParseError("malformed-xml", "no root element")
    return Transaction(tuple(reader.ops))


def _node(term, out: list[str], pad: str) -> None:
    if isinstance(term, IRI):
        if _NON_XML_CHAR.search(term.value):
            raise SerializeError("invalid-term", "iri holds a character XML cannot carry")
        out.append(f"{pad}<uri>{term.value.translate(_TEXT_ESCAPES)}</uri>")
    elif isinstance(term, BNode):
        out.append(f"{pad}<bnode>{term.id}</bnode>")
    else:
        if _NON_XML_CHAR.search(term.lexical) or _NON_XML_CHAR.search(term.datatype or ""):
            raise SerializeError("invalid-term", "literal holds a character XML cannot carry")
        text = term.lexical.translate(_TEXT_ESCAPES)
        if term.language is not None:
            out.append(f'{pad}<literal xml:lang="{term.language}">{text}</literal>')
        elif term.datatype is not None:
            dt = term.datatype.translate(_ATTR_ESCAPES)
            out.append(f'{pad}<literal datatype="{dt}">{text}</literal>')
        else:
            out.append(f"{pad}<literal>{text}</literal>")


def serialize_rdftx(t: Transaction, indent: str | None = "    ") -> bytes:
    """Write ``t`` as UTF-8 XML in the pretty-printed layout of the Sesame format.

    ``indent=None`` gives a compact single-line document.
    """
    problem = validate_transaction(t)
    if problem:
        raise SerializeError("invalid-term", problem)
    if not t.ops:
        return b"<transaction/>"
    if indent is None:
        pad1 = pad2 = pad3 = ""
        sep = ""
    else:
        pad1, pad2, pad3 = indent, indent * 2, indent * 3
        sep = "\n"
    out = ["<transaction>"]
    for op in t.ops:
        st = op.statement
        out.append(f"{pad1}<{op.kind}>")
        _node(st.subject, out, pad2)
        _node(st.predicate, out, pad2)
        _node(st.object, out, pad2)
        if st.contexts:
            out.append(f"{pad2}<contexts>")
            for c in st.contexts:
                _node(c, out, pad3)
            out.append(f"{pad2}</contexts>")
        else:
            out.append(f"{pad2}<contexts/>")
        out.append(f"{pad1}</{op.kind}>")
    out.append("</transaction>")
    return sep.join(out).encode("utf-8")
