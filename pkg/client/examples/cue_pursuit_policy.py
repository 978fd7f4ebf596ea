#!/usr/bin/env python3
"""Drive all served episodes with the reference cue-pursuit policy.

Start a server first, e.g.:
    poinav generate --seed 1 --n-pois 3 --street-length 40 --out /tmp/street.json
    poinav serve --scenes /tmp/street.json --bind 127.0.0.1:7463 --brain oracle \
        --episodes-per-poi 1 --out /tmp/results.json
then:
    python examples/cue_pursuit_policy.py --host 127.0.0.1 --port 7463
"""
import argparse

from poinav_client import CuePursuit, run_benchmark


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=7463)
    args = ap.parse_args()
    summaries = run_benchmark(args.host, args.port, lambda session: CuePursuit(session.camera))
    for s in summaries:
        print(f"{s.episode_id} [{s.instruction}]: {s.status}"
              + (f" ({s.reason})" if s.reason else "") + f" in {s.steps} steps")
    ok = sum(1 for s in summaries if s.status == "success")
    print(f"{ok}/{len(summaries)} episodes succeeded")


if __name__ == "__main__":
    main()
