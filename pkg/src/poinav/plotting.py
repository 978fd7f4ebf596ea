"""Figure rendering for reports: top-down trajectory overlays and per-scene
metric charts. Files only, no interactive UI."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Polygon as MplPolygon

from .episode import EpisodeRecord
from .scene import Scene

_KIND_COLORS = {
    "wall": "#555555",
    "glass": "#7ec8e3",
    "pole": "#8b5a2b",
    "step": "#b0a070",
    "planter": "#2e8b57",
}


def draw_scene(ax, scene: Scene) -> None:
    for poly in scene.roads:
        ax.add_patch(MplPolygon(poly, closed=True, facecolor="#d9d0c7", edgecolor="none", zorder=0))
    for poly in scene.sidewalks:
        ax.add_patch(MplPolygon(poly, closed=True, facecolor="#efefef", edgecolor="none", zorder=0))
    for ob in scene.obstacles:
        ax.add_patch(
            MplPolygon(
                ob.footprint,
                closed=True,
                facecolor=_KIND_COLORS.get(ob.kind, "#999999"),
                edgecolor="none",
                zorder=2,
            )
        )
    for poi in scene.pois:
        for ent in poi.entrances:
            ax.add_patch(
                MplPolygon(ent.corners(), closed=True, facecolor="#7bd389", edgecolor="#2a7d3f", lw=0.8, zorder=3)
            )
        sx, sy, _ = poi.signage.center
        ax.plot(sx, sy, marker="v", color="#c0392b", ms=5, zorder=4)
        ax.annotate(poi.id, (sx, sy), fontsize=5, xytext=(0, 4), textcoords="offset points", ha="center")
    ax.set_xlim(0, scene.extent[0])
    ax.set_ylim(0, scene.extent[1])
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


_STATUS_COLORS = {"success": "#1f77b4", "failure": "#d62728", "error": "#7f7f7f"}


def plot_trajectories(scene: Scene, records: list[EpisodeRecord], out_path) -> None:
    fig, ax = plt.subplots(figsize=(max(6.0, scene.extent[0] / 12), max(3.0, scene.extent[1] / 12)))
    draw_scene(ax, scene)
    for rec in records:
        if rec.scene_id != scene.id or len(rec.trajectory) < 2:
            continue
        xs = [p[0] for p in rec.trajectory]
        ys = [p[1] for p in rec.trajectory]
        color = _STATUS_COLORS.get(rec.status, "#7f7f7f")
        ax.plot(xs, ys, color=color, lw=0.9, alpha=0.8, zorder=5)
        ax.plot(xs[0], ys[0], marker="o", color=color, ms=3, zorder=6)
        ax.plot(xs[-1], ys[-1], marker="x", color=color, ms=4, zorder=6)
    handles = [plt.Line2D([], [], color=c, label=s) for s, c in _STATUS_COLORS.items()]
    ax.legend(handles=handles, fontsize=6, loc="lower right")
    ax.set_title(f"{scene.id}: trajectories")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def report_figures(metrics_doc: dict, records: list[EpisodeRecord], out_dir) -> list[str]:
    """Render the summary charts next to the tabular output; returns paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []

    per_scene = metrics_doc.get("per_scene", {})
    labels = sorted(per_scene) or ["all"]
    sr2 = [per_scene[s]["sr_2m"] if per_scene else metrics_doc["sr_2m"] for s in labels]
    spl = [per_scene[s]["spl"] if per_scene else metrics_doc["spl"] for s in labels]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels)), 3.2))
    ax.bar(x - 0.18, sr2, width=0.36, label="SR (2m)", color="#1f77b4")
    ax.bar(x + 0.18, spl, width=0.36, label="SPL", color="#ff7f0e")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("fraction")
    ax.legend(fontsize=7)
    ax.set_title("Success rate and path efficiency per scene")
    fig.tight_layout()
    p = os.path.join(out_dir, "metrics.png")
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    steps = [r.steps for r in records]
    if steps:
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        ax.hist(steps, bins=min(20, max(5, len(set(steps)))), color="#2ca02c")
        ax.set_xlabel("steps per episode")
        ax.set_ylabel("episodes")
        ax.set_title("Episode length distribution")
        fig.tight_layout()
        p = os.path.join(out_dir, "steps.png")
        fig.savefig(p, dpi=150)
        plt.close(fig)
        paths.append(p)
    return paths
