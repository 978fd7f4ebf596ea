"""poinav-client: thin synchronous SDK for the poinav benchmark wire protocol.

Connect to a benchmark server, receive structured observations (and optional
grounding cues), submit waypoint actions in lock-step, and collect per-episode
records.
"""

from .client import ClientSession, EpisodeSummary, connect, run_benchmark, run_policy
from .errors import (
    BenchmarkDrained,
    ClientError,
    DecodeError,
    ProtocolError,
    TransportError,
    VersionError,
)
from .framing import FrameParser, encode_frame
from .messages import DEFAULT_PORT, PROTOCOL_VERSION, Act, End, Obs, ServerHello
from .policies import CuePursuit, idle_policy, random_policy, replay_policy

__version__ = "0.1.0"

__all__ = [
    "Act",
    "BenchmarkDrained",
    "ClientError",
    "ClientSession",
    "CuePursuit",
    "DEFAULT_PORT",
    "DecodeError",
    "End",
    "EpisodeSummary",
    "FrameParser",
    "Obs",
    "PROTOCOL_VERSION",
    "ProtocolError",
    "ServerHello",
    "TransportError",
    "VersionError",
    "connect",
    "encode_frame",
    "idle_policy",
    "random_policy",
    "replay_policy",
    "run_benchmark",
    "run_policy",
]
