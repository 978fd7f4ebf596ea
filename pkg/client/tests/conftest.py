import json
import os
import pathlib
import socket
import subprocess
import sys
import time

import pytest

HERE = pathlib.Path(__file__).parent


def free_port() -> int:
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


def poinav(*args, check=True):
    """Run the benchmark CLI as an external tool (the only coupling allowed)."""
    proc = subprocess.run(
        [sys.executable, "-m", "poinav.cli", *map(str, args)],
        capture_output=True,
        text=True,
    )
    if check and proc.returncode != 0:
        raise RuntimeError(f"poinav {' '.join(map(str, args))} failed:\n{proc.stdout}\n{proc.stderr}")
    return proc


class ServerProcess:
    def __init__(self, scene_path, out_path, port, extra=()):
        self.port = port
        self.proc = subprocess.Popen(
            [
                sys.executable, "-m", "poinav.cli", "serve",
                "--scenes", str(scene_path),
                "--bind", f"127.0.0.1:{port}",
                "--out", str(out_path),
                *map(str, extra),
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
        )
        line = self.proc.stdout.readline()
        if "serving" not in line:
            rest = self.proc.stdout.read()
            raise RuntimeError(f"server failed to start: {line}{rest}")

    def wait(self, timeout=120):
        self.proc.wait(timeout=timeout)

    def stop(self):
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.proc.kill()


@pytest.fixture(scope="session")
def scene_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("scene")
    path = d / "street.json"
    poinav("generate", "--seed", 3, "--n-pois", 3, "--street-length", 40,
           "--sidewalk-width", 4, "--out", path)
    return path


@pytest.fixture(scope="session")
def oracle_results(scene_file, tmp_path_factory):
    """In-process oracle run whose records (with action logs) drive the
    replay-equivalence check."""
    out = tmp_path_factory.mktemp("results") / "results.json"
    poinav("run", "--scenes", scene_file, "--policy", "oracle",
           "--episodes-per-poi", 1, "--seed", 5, "--out", out)
    return json.loads(out.read_text())
