"""RDF update transactions streamed over UDP into a quad store."""

from .errors import CorruptStream, OversizePayload, ParseError, RdfStreamError, SerializeError, UnknownCodec
from .model import BNode, IRI, Literal, Statement, Transaction, UpdateOp, add, remove
from .rdftx import parse_rdftx, serialize_rdftx
from .gruf import parse_gruf, serialize_gruf
from .compression import compress, decompress
from .transport import decode_datagram, encode_datagram
from .store import CommitPolicy, QuadStore, apply_sequentially

__version__ = "0.1.0"
