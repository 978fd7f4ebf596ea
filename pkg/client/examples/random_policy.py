#!/usr/bin/env python3
"""Drive all served episodes with uniform random waypoints (a floor baseline)."""
import argparse

from poinav_client import random_policy, run_benchmark


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=7463)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    summaries = run_benchmark(args.host, args.port, lambda session: random_policy(args.seed))
    for s in summaries:
        print(f"{s.episode_id}: {s.status}" + (f" ({s.reason})" if s.reason else ""))


if __name__ == "__main__":
    main()
