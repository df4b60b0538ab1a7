class RdfStreamError(Exception):
    """Base class; a receiver drops any datagram that raises one of these."""


class ParseError(RdfStreamError, ValueError):
    """A document could not be read. ``code`` names the failure class."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class SerializeError(RdfStreamError, ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class CorruptStream(RdfStreamError):
    """Bad header, failed checksum or truncated compressed payload."""


class UnknownCodec(RdfStreamError):
    pass


class OversizePayload(RdfStreamError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"datagram of {size} bytes exceeds {limit}")
        self.size = size
        self.limit = limit
