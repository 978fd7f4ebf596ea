"""Exception types raised across the package."""


class PoinavError(Exception):
    """Base class for all package errors."""


class ParseError(PoinavError):
    """Malformed document; message carries the line/field locus."""


class InvariantError(PoinavError):
    """A domain invariant was violated; message names the invariant."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


class SpecError(PoinavError):
    """Generator parameters cannot produce a valid scene."""


class NoPathError(PoinavError):
    """Start and goal lie in different free-space components."""


class StartBlockedError(PoinavError):
    """Planning start cell is not free."""


class ExhaustedError(PoinavError):
    """Start sampling hit max_attempts; carries the rejection histogram."""

    def __init__(self, message: str, rejections: dict):
        self.rejections = dict(rejections)
        super().__init__(f"{message} (rejections: {self.rejections})")


class EpisodeOverError(PoinavError):
    """step/stop called on a finished episode."""


class ActionError(PoinavError):
    """Action violates the waypoint magnitude contract."""


class UnknownPOIError(PoinavError):
    """Instruction does not name a POI present in the scene."""


class NoCueError(PoinavError):
    """Grounding produced nothing to hand over to the action module."""


class EmptyContextError(PoinavError):
    """Temporal context holds no frames."""


class DimensionError(PoinavError):
    """Weight bundle dimensions are inconsistent."""


class LengthError(PoinavError):
    """A reference path length is non-positive."""


class ProtocolError(PoinavError):
    """Wire protocol violation; carries a short machine-readable code."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


class DecodeError(ProtocolError):
    """Frame could not be decoded; message names the byte offset."""

    def __init__(self, detail: str, offset: int = 0):
        self.offset = offset
        super().__init__("decode", detail)


class VersionError(ProtocolError):
    def __init__(self, detail: str):
        super().__init__("version", detail)


class TransportError(PoinavError):
    """Socket-level failure while talking to a peer."""
