"""Lock-step benchmark server: remote policies drive episodes over the wire.

One connection handles one episode at a time; when it ends the server either
hands the connection the next pending episode (a fresh hello) or reports the
queue drained. Concurrent connections take distinct episodes. The transition
engine is exactly the in-process one, so a given action log produces an
identical record either way.
"""
from __future__ import annotations

import socket
import threading
from dataclasses import dataclass

from .brain import ground, select_cue
from .episode import RUNNING, Action, EpisodeRecord, make_record, reset, step, stop, default_grid
from .errors import ActionError, DecodeError, NoCueError, PoinavError, UnknownPOIError
from .harness import BenchmarkConfig, BenchmarkRun, EpisodeSpec
from .protocol import (
    IDLE_TIMEOUT_S,
    PROTOCOL_VERSION,
    FrameDecoder,
    encode_frame,
    end_message,
    error_message,
    hello_server,
    obs_message,
)
from .render import CameraModel
from .scene import Scene


@dataclass
class _Shared:
    scenes: dict
    cfg: BenchmarkConfig
    camera: CameraModel
    episodes: list[EpisodeSpec]
    records: list
    next_index: int = 0
    lock: threading.Lock = None  # type: ignore[assignment]

    def take(self):
        with self.lock:
            if self.next_index >= len(self.episodes):
                return None
            i = self.next_index
            self.next_index += 1
            return i

    def put_record(self, i: int, record: EpisodeRecord):
        with self.lock:
            self.records[i] = record

    def done(self) -> bool:
        with self.lock:
            return all(r is not None for r in self.records)


def _recv_message(conn: socket.socket, decoder: FrameDecoder, pending: list) -> dict | None:
    """Next message, or None on orderly close / idle timeout."""
    while not pending:
        try:
            chunk = conn.recv(65536)
        except socket.timeout:
            return None
        if not chunk:
            return None
        pending.extend(decoder.feed(chunk))
    return pending.pop(0)


def _serve_episode(conn, decoder, pending, shared: _Shared, index: int, brain: bool) -> EpisodeRecord:
    spec = shared.episodes[index]
    scene: Scene = shared.scenes[spec.scene_id]
    poi = scene.poi_by_id(spec.poi_id)
    criterion = shared.cfg.criterion()
    grid = default_grid(scene)
    episode_id = f"ep-{index:04d}"
    noise = shared.cfg.noise.reseeded(spec.seed)

    conn.sendall(encode_frame(hello_server(scene.id, poi.name, shared.camera.to_doc(), episode_id)))
    state, obs = reset(scene, poi, spec.start, criterion, shared.camera, grid)

    def cue_doc():
        if not brain:
            return None
        try:
            return select_cue(ground(obs, poi.name, scene, noise, shared.camera), obs).to_doc()
        except (NoCueError, UnknownPOIError):
            return None

    while state.status == RUNNING:
        conn.sendall(encode_frame(obs_message(episode_id, state.t, obs.to_doc(), cue_doc())))
        msg = _recv_message(conn, decoder, pending)
        if msg is None:
            # Peer went quiet: the episode is charged with a timeout.
            state._finish("failure", "timeout")
            break
        if msg.get("type") != "act":
            conn.sendall(encode_frame(error_message("type", f"expected act, got {msg.get('type')!r}")))
            raise PoinavError("protocol: unexpected message type")
        if msg.get("episode_id") != episode_id or int(msg.get("t", -1)) != state.t:
            conn.sendall(
                encode_frame(error_message("lockstep", f"act must echo episode {episode_id} t={state.t}"))
            )
            raise PoinavError("protocol: lockstep violation")
        if msg.get("stop"):
            stop(state)
            break
        try:
            wps = tuple((float(dx), float(dy)) for dx, dy in msg.get("waypoints", []))
            state, obs = step(state, Action(waypoints=wps))
        except (ActionError, TypeError, ValueError) as e:
            conn.sendall(encode_frame(error_message("action", str(e))))
            raise PoinavError(f"protocol: bad action ({e})")

    record = make_record(state)
    conn.sendall(encode_frame(end_message(episode_id, record.status, record.reason, record.to_doc())))
    return record


def _handle_connection(conn: socket.socket, shared: _Shared, brain: bool) -> None:
    decoder = FrameDecoder()
    pending: list = []
    conn.settimeout(IDLE_TIMEOUT_S)
    try:
        msg = _recv_message(conn, decoder, pending)
        if msg is None:
            return
        if msg.get("type") != "hello":
            conn.sendall(encode_frame(error_message("type", "handshake must start with hello")))
            return
        if msg.get("version") != PROTOCOL_VERSION:
            conn.sendall(
                encode_frame(error_message("version", f"server speaks version {PROTOCOL_VERSION}"))
            )
            return
        # One episode per connection; the peer reconnects for the next one.
        index = shared.take()
        if index is None:
            conn.sendall(encode_frame(error_message("drained", "no episodes remaining")))
            return
        try:
            record = _serve_episode(conn, decoder, pending, shared, index, brain)
            shared.put_record(index, record)
        except (PoinavError, DecodeError, ConnectionError, OSError) as e:
            # A peer that violates the protocol or vanishes mid-episode
            # forfeits it; the queue must still drain.
            spec = shared.episodes[index]
            shared.put_record(
                index,
                EpisodeRecord(
                    scene_id=spec.scene_id,
                    poi_id=spec.poi_id,
                    start=spec.start.to_doc(),
                    actions=(),
                    trajectory=((spec.start.position[0], spec.start.position[1], spec.start.heading),),
                    collisions=0,
                    status="error",
                    reason=str(e),
                    steps=0,
                    final_distance_m=0.0,
                    path_length_m=0.0,
                    obs_digests=(),
                ),
            )
    except (ConnectionError, OSError, DecodeError):
        return
    finally:
        conn.close()


def serve_benchmark(
    bind: tuple[str, int],
    scenes: dict[str, Scene],
    cfg: BenchmarkConfig,
    episodes: list[EpisodeSpec],
    camera: CameraModel | None = None,
    brain: bool = False,
    ready: threading.Event | None = None,
    scene_paths: dict | None = None,
) -> BenchmarkRun:
    """Serve all episodes over the wire and block until each has a record."""
    shared = _Shared(
        scenes=scenes,
        cfg=cfg,
        camera=camera or CameraModel(),
        episodes=episodes,
        records=[None] * len(episodes),
        lock=threading.Lock(),
    )
    srv = socket.create_server(bind, reuse_port=False)
    srv.settimeout(0.25)
    if ready is not None:
        ready.set()
    threads: list[threading.Thread] = []
    try:
        while not shared.done():
            try:
                conn, _ = srv.accept()
            except socket.timeout:
                continue
            th = threading.Thread(target=_handle_connection, args=(conn, shared, brain), daemon=True)
            th.start()
            threads.append(th)
    finally:
        srv.close()
    for th in threads:
        th.join(timeout=IDLE_TIMEOUT_S)
    return BenchmarkRun(config=cfg, episodes=episodes, records=list(shared.records),
                        scene_files=dict(scene_paths or {}))
