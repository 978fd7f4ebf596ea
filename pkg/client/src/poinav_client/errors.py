class ClientError(Exception):
    """Base class for client-side failures."""


class TransportError(ClientError):
    """Socket could not be opened or died mid-episode."""


class VersionError(ClientError):
    """Server speaks an incompatible protocol version."""


class DecodeError(ClientError):
    """Byte stream could not be parsed into frames; names the byte offset."""

    def __init__(self, detail: str, offset: int = 0):
        self.offset = offset
        super().__init__(f"{detail} (at byte offset {offset})")


class ProtocolError(ClientError):
    """Server reported an error frame; carries the frame for context."""

    def __init__(self, frame: dict):
        self.frame = frame
        super().__init__(f"server error {frame.get('code')!r}: {frame.get('detail')!r}")


class BenchmarkDrained(ClientError):
    """No episodes remain on the server."""
