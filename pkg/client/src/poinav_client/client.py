"""Synchronous lock-step client: connect, receive observations (optionally
with server-side grounding cues), submit waypoint actions, collect the
episode record."""
from __future__ import annotations

import socket
from dataclasses import dataclass, field

from .errors import BenchmarkDrained, ProtocolError, TransportError, VersionError
from .framing import FrameParser, encode_frame
from .messages import PROTOCOL_VERSION, Act, End, Obs, ServerHello, hello_payload


@dataclass
class ClientSession:
    sock: socket.socket
    parser: FrameParser
    episode_id: str
    instruction: str
    scene_id: str
    camera: dict
    last_t: int = -1
    pending: list = field(default_factory=list)

    def send(self, payload: dict) -> None:
        try:
            self.sock.sendall(encode_frame(payload))
        except OSError as e:
            raise TransportError(f"send failed: {e}") from e

    def recv(self) -> dict | None:
        while not self.pending:
            try:
                chunk = self.sock.recv(65536)
            except OSError as e:
                raise TransportError(f"recv failed: {e}") from e
            if not chunk:
                return None
            self.pending.extend(self.parser.feed(chunk))
        return self.pending.pop(0)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


@dataclass(frozen=True)
class EpisodeSummary:
    episode_id: str
    instruction: str
    status: str
    reason: str | None
    steps: int
    metrics: dict  # full episode record as persisted by the benchmark


def connect(host: str, port: int, name: str = "poinav-client", timeout: float = 30.0) -> ClientSession:
    """Open a connection and perform the handshake for one episode.

    Raises TransportError if the server is unreachable, VersionError on a
    protocol mismatch, BenchmarkDrained when no episodes remain.
    """
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except OSError as e:
        raise TransportError(f"cannot connect to {host}:{port}: {e}") from e
    parser = FrameParser()
    pending: list = []
    try:
        sock.sendall(encode_frame(hello_payload(name)))
        while not pending:
            chunk = sock.recv(65536)
            if not chunk:
                raise TransportError("server closed during handshake")
            pending.extend(parser.feed(chunk))
    except OSError as e:
        sock.close()
        raise TransportError(f"handshake failed: {e}") from e
    msg = pending.pop(0)
    if msg["type"] == "error":
        sock.close()
        if msg.get("code") == "version":
            raise VersionError(msg.get("detail", "version mismatch"))
        if msg.get("code") == "drained":
            raise BenchmarkDrained(msg.get("detail", "no episodes remaining"))
        raise ProtocolError(msg)
    if msg["type"] != "hello":
        sock.close()
        raise ProtocolError(msg)
    if msg.get("version") != PROTOCOL_VERSION:
        sock.close()
        raise VersionError(f"server speaks version {msg.get('version')}")
    hello = ServerHello.from_payload(msg)
    return ClientSession(
        sock=sock,
        parser=parser,
        episode_id=hello.episode_id,
        instruction=hello.instruction,
        scene_id=hello.scene_id,
        camera=hello.camera,
        pending=pending,
    )


def run_policy(session: ClientSession, policy) -> EpisodeSummary:
    """Drive one episode to its end frame.

    `policy` is a callable (observation_dict, cue_dict_or_None) ->
    (waypoints, stop). The lock-step invariant is enforced client-side: every
    act echoes the t of the observation it answers, one at a time.
    """
    steps = 0
    while True:
        msg = session.recv()
        if msg is None:
            raise TransportError("connection closed before the episode ended")
        if msg["type"] == "error":
            raise ProtocolError(msg)
        if msg["type"] == "end":
            end = End.from_payload(msg)
            return EpisodeSummary(
                episode_id=end.episode_id,
                instruction=session.instruction,
                status=end.status,
                reason=end.reason,
                steps=steps,
                metrics=end.metrics,
            )
        if msg["type"] != "obs":
            raise ProtocolError(msg)
        obs = Obs.from_payload(msg)
        if obs.episode_id != session.episode_id or obs.t <= session.last_t:
            raise ProtocolError(msg)  # lock-step broken server-side
        session.last_t = obs.t
        waypoints, stop = policy(obs.observation, obs.cue)
        session.send(Act(session.episode_id, obs.t, tuple(waypoints), bool(stop)).to_payload())
        steps += 1


def run_benchmark(host: str, port: int, policy_factory, max_episodes: int | None = None) -> list[EpisodeSummary]:
    """Reconnect-and-run until the server reports the queue drained.

    `policy_factory(session)` builds a fresh policy per episode (sessions
    carry the instruction and camera intrinsics)."""
    summaries: list[EpisodeSummary] = []
    while max_episodes is None or len(summaries) < max_episodes:
        try:
            session = connect(host, port)
        except BenchmarkDrained:
            break
        except TransportError:
            if summaries:
                break  # server served its last episode and exited
            raise
        try:
            summaries.append(run_policy(session, policy_factory(session)))
        finally:
            session.close()
    return summaries
