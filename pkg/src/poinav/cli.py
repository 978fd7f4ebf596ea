"""poinav command line: scene generation, planning, start sampling, benchmark
runs, reporting with figures, grounding judgments, dataset curation, and the
remote-policy server."""
from __future__ import annotations

import argparse
import json
import os
import sys

from .brain import BrainNoise
from .errors import PoinavError
from .jsonio import q6, write_canonical


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise-wrong-poi", type=float, default=0.0)
    p.add_argument("--noise-jitter", type=float, default=0.0)
    p.add_argument("--noise-dropout", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)


def _noise_from(args) -> BrainNoise:
    return BrainNoise(
        p_wrong_poi=args.noise_wrong_poi,
        box_jitter_px=args.noise_jitter,
        p_dropout=args.noise_dropout,
        seed=args.noise_seed,
    )


def cmd_generate(args) -> int:
    from .generator import GeneratorSpec, generate_scene
    from .scene import save_scene

    scene = generate_scene(
        args.seed,
        GeneratorSpec(
            n_pois=args.n_pois,
            street_length_m=args.street_length,
            sidewalk_width_m=args.sidewalk_width,
        ),
    )
    save_scene(scene, args.out)
    print(f"wrote {args.out}: scene {scene.id}, {len(scene.pois)} POIs, "
          f"{scene.metadata['area_m2']:.0f} m^2")
    return 0


def cmd_plan(args) -> int:
    from .episode import default_grid
    from .harness import plan_to_poi
    from .scene import load_scene

    scene = load_scene(args.scene)
    grid = default_grid(scene)
    start = tuple(float(v) for v in args.start.split(","))
    path = plan_to_poi(grid, start, scene.poi_by_id(args.poi), args.epsilon)
    write_canonical(args.out, path.to_doc())
    if args.pgm:
        grid.inflated().to_pgm(args.pgm)
    print(f"wrote {args.out}: {len(path.waypoints)} waypoints, {path.length_m:.2f} m")
    return 0


def cmd_sample(args) -> int:
    from .episode import default_grid
    from .sampler import StartSpec, sample_starts
    from .scene import load_scene

    scene = load_scene(args.scene)
    starts = sample_starts(
        scene,
        default_grid(scene),
        scene.poi_by_id(args.poi),
        StartSpec(r_min=args.r_min, r_max=args.r_max, n_starts=args.n),
        args.seed,
    )
    write_canonical(args.out, {"format_version": 1, "starts": [s.to_doc() for s in starts]})
    print(f"wrote {args.out}: {len(starts)} starts")
    return 0


def cmd_run(args) -> int:
    from .harness import BenchmarkConfig, build_episodes, load_results, load_scene_dir, run_benchmark

    scenes, paths = load_scene_dir(args.scenes)
    cfg = BenchmarkConfig(
        policy=args.policy,
        episodes_per_poi=args.episodes_per_poi,
        seed=args.seed,
        epsilon=args.epsilon,
        max_steps=args.max_steps,
        collision_policy=args.collision_policy,
        noise=_noise_from(args),
        bundle_path=args.bundle,
    )
    episodes = build_episodes(scenes, cfg)
    previous = None
    if args.resume and os.path.exists(args.out):
        previous = load_results(args.out)
    if cfg.policy.startswith("remote:"):
        from .server import serve_benchmark

        host, _, port = cfg.policy[len("remote:"):].rpartition(":")
        run = serve_benchmark((host or "127.0.0.1", int(port)), scenes, cfg, episodes,
                              brain=args.brain == "oracle", scene_paths=paths)
    else:
        run = run_benchmark(scenes, cfg, episodes, workers=args.workers, previous=previous, scene_paths=paths)
    run.save(args.out)
    doc = run.to_doc()["metrics"]
    print(f"wrote {args.out}: SR {doc['sr']:.4f}  SR(2m) {doc['sr_2m']:.4f}  "
          f"SPL {doc['spl']:.4f}  collisions {doc['collision_rate']:.4f}  n={doc['n_episodes']}")
    return 0


def _metrics_rows(doc: dict) -> list[dict]:
    m = doc["metrics"]
    rows = [
        {"scope": "overall", "sr": m["sr"], "sr_2m": m["sr_2m"], "spl": m["spl"],
         "collision_rate": m["collision_rate"], "mean_steps": m["mean_steps"], "n": m["n_episodes"]}
    ]
    for sid in sorted(m.get("per_scene", {})):
        row = m["per_scene"][sid]
        rows.append({"scope": sid, "sr": row["sr"], "sr_2m": row["sr_2m"], "spl": row["spl"],
                     "collision_rate": row["collision_rate"], "mean_steps": row["mean_steps"], "n": row["n"]})
    return rows


def cmd_report(args) -> int:
    from .episode import EpisodeRecord
    from .harness import load_results

    doc = load_results(args.results)
    rows = _metrics_rows(doc)
    if args.format == "json":
        out = json.dumps(doc["metrics"], indent=2, sort_keys=True)
    elif args.format == "csv":
        cols = ["scope", "sr", "sr_2m", "spl", "collision_rate", "mean_steps", "n"]
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(str(r[c]) for c in cols))
        out = "\n".join(lines) + "\n"
    else:
        header = f"{'scope':<24} {'SR':>8} {'SR(2m)':>8} {'SPL':>8} {'coll':>8} {'steps':>8} {'n':>5}"
        lines = [header, "-" * len(header)]
        for r in rows:
            lines.append(
                f"{r['scope']:<24} {r['sr']:>8.4f} {r['sr_2m']:>8.4f} {r['spl']:>8.4f} "
                f"{r['collision_rate']:>8.4f} {r['mean_steps']:>8.1f} {r['n']:>5d}"
            )
        out = "\n".join(lines)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        ext = {"table": "txt", "json": "json", "csv": "csv"}[args.format]
        table_path = os.path.join(args.out_dir, f"metrics.{ext}")
        with open(table_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(out if out.endswith("\n") else out + "\n")
        records = [EpisodeRecord.from_doc(r) for r in doc["records"]]
        from .plotting import report_figures

        figures = report_figures(doc["metrics"], records, args.out_dir)
        print(out)
        print(f"wrote {table_path} and {', '.join(figures)}")
    else:
        print(out)
    return 0


def cmd_plot(args) -> int:
    from .episode import EpisodeRecord
    from .errors import ParseError
    from .harness import load_results, load_scene_dir
    from .plotting import plot_trajectories
    from .scene import load_scene

    doc = load_results(args.results)
    records = [EpisodeRecord.from_doc(r) for r in doc["records"]]
    if args.scenes:
        scenes, _ = load_scene_dir(args.scenes)
    else:
        files = doc.get("scene_files") or {}
        if not files:
            raise ParseError("results carry no scene file paths; pass --scenes")
        scenes = {sid: load_scene(path) for sid, path in files.items()}
    scene_ids = sorted({r.scene_id for r in records})
    if len(scene_ids) == 1:
        plot_trajectories(scenes[scene_ids[0]], records, args.out)
        print(f"wrote {args.out}")
    else:
        base, ext = os.path.splitext(args.out)
        for sid in scene_ids:
            path = f"{base}-{sid}{ext}"
            plot_trajectories(scenes[sid], records, path)
            print(f"wrote {path}")
    return 0


def cmd_judge(args) -> int:
    from .episode import Pose
    from .judge import aggregate_verdicts, judge
    from .render import CameraModel, RasterBox
    from .scene import load_scene

    scene = load_scene(args.scene)
    camera = CameraModel()
    with open(args.pred, "r", encoding="utf-8") as f:
        preds = json.load(f)
    verdicts = []
    rows = []
    for entry in preds["predictions"]:
        pose = Pose(*(float(v) for v in entry["pose"]))
        box = RasterBox(*(float(v) for v in entry["box"]))
        v = judge(box, scene.poi_by_id(entry["poi"]), scene, pose, camera)
        verdicts.append(v)
        rows.append({"poi": entry["poi"], **v.to_doc()})
    agg = aggregate_verdicts(verdicts)
    write_canonical(args.out, {"format_version": 1, "verdicts": rows,
                               "aggregate": {k: (q6(v) if isinstance(v, float) else v) for k, v in agg.items()}})
    print(f"RC {agg['rc_pct']:.1f}%  GQ {agg['gq_pct']:.1f}%  "
          f"referential-error {agg['referential_error_pct']:.1f}%  ambiguous {agg['ambiguous_pct']:.1f}%")
    return 0


def cmd_curate(args) -> int:
    from .curation import curate, write_jsonl
    from .scene import load_scene

    scene = load_scene(args.scene)
    with open(args.poses, "r", encoding="utf-8") as f:
        poses = [tuple(float(v) for v in p) for p in json.load(f)["poses"]]
    records = curate(scene, poses, _noise_from(args), args.seed)
    write_jsonl(records, args.out)
    accepted = sum(r.accepted for r in records)
    print(f"wrote {args.out}: {accepted}/{len(records)} pairs accepted")
    return 0


def cmd_serve(args) -> int:
    from .harness import BenchmarkConfig, build_episodes, load_scene_dir
    from .server import serve_benchmark

    scenes, scene_paths = load_scene_dir(args.scenes)
    cfg = BenchmarkConfig(
        policy="remote",
        episodes_per_poi=args.episodes_per_poi,
        seed=args.seed,
        epsilon=args.epsilon,
        max_steps=args.max_steps,
        noise=_noise_from(args),
    )
    episodes = build_episodes(scenes, cfg)
    host, _, port = args.bind.rpartition(":")

    import threading

    ready = threading.Event()
    holder = {}

    def _run():
        holder["run"] = serve_benchmark(
            (host or "127.0.0.1", int(port)), scenes, cfg, episodes, brain=args.brain == "oracle",
            ready=ready, scene_paths=scene_paths,
        )

    th = threading.Thread(target=_run)
    th.start()
    ready.wait()
    print(f"serving {len(episodes)} episodes on {args.bind} (brain={args.brain})", flush=True)
    th.join()
    run = holder["run"]
    run.save(args.out)
    doc = run.to_doc()["metrics"]
    print(f"wrote {args.out}: SR(2m) {doc['sr_2m']:.4f}  SPL {doc['spl']:.4f}")
    return 0


def cmd_replay(args) -> int:
    from .episode import EpisodeRecord, replay
    from .harness import load_results
    from .scene import load_scene

    scene = load_scene(args.scene)
    doc = load_results(args.results)
    mismatches = 0
    for i, rec_doc in enumerate(doc["records"]):
        rec = EpisodeRecord.from_doc(rec_doc)
        if rec.scene_id != scene.id or rec.status == "error":
            continue
        again = replay(scene, rec)
        if again.to_doc() != rec.to_doc():
            mismatches += 1
            print(f"episode {i}: replay mismatch")
    print(f"replayed records for {scene.id}: {mismatches} mismatches")
    return 1 if mismatches else 0


def cmd_bundle(args) -> int:
    from .action import default_bundle, save_bundle

    save_bundle(default_bundle(seed=args.seed), args.out)
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="poinav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic street scene")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-pois", type=int, default=8)
    p.add_argument("--street-length", type=float, default=90.0)
    p.add_argument("--sidewalk-width", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="plan a reference path to a POI")
    p.add_argument("--scene", required=True)
    p.add_argument("--poi", required=True)
    p.add_argument("--start", required=True, help="x,y in meters")
    p.add_argument("--epsilon", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm", help="also dump the inflated occupancy grid as PGM")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sample", help="sample validated episode starts")
    p.add_argument("--scene", required=True)
    p.add_argument("--poi", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--r-min", type=float, default=10.0)
    p.add_argument("--r-max", type=float, default=30.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("run", help="run a benchmark")
    p.add_argument("--scenes", required=True, help="scene file or directory")
    p.add_argument("--policy", default="oracle",
                   help="oracle | cue_pursuit | random | latent | remote:<host:port>")
    p.add_argument("--episodes-per-poi", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epsilon", type=float, default=2.0)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--collision-policy", default="terminate", choices=["terminate", "count_and_continue"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--bundle", help="weight bundle path for the latent policy")
    p.add_argument("--brain", default="none", choices=["none", "oracle"],
                   help="serve cues to remote policies")
    _add_noise_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summarize a results file")
    p.add_argument("results")
    p.add_argument("--format", default="table", choices=["table", "json", "csv"])
    p.add_argument("--out-dir", help="write the table plus metric figures here")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="render top-down trajectory overlays")
    p.add_argument("results")
    p.add_argument("--scenes", help="scene file or directory; defaults to the paths in the results file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("judge", help="judge grounding predictions")
    p.add_argument("--scene", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("curate", help="curate signage-entrance pairs")
    p.add_argument("--scene", required=True)
    p.add_argument("--poses", required=True)
    p.add_argument("--seed", type=int, default=5)
    _add_noise_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("serve", help="serve episodes to remote policies")
    p.add_argument("--scenes", required=True)
    p.add_argument("--bind", default="127.0.0.1:7463")
    p.add_argument("--episodes-per-poi", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epsilon", type=float, default=2.0)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--brain", default="none", choices=["none", "oracle"])
    _add_noise_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-execute recorded episodes and verify")
    p.add_argument("results")
    p.add_argument("--scene", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bundle", help="write a seeded random weight bundle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bundle)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PoinavError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
