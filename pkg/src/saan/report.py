"""Figure rendering for run and ablation outputs.

Figures are written next to the delimited result files; the manifest hash
appears in a footer annotation so a figure can be traced to its run.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

plt.rcParams.update({
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
})


def _stamp(fig, manifest_hash: str) -> None:
    fig.text(0.99, 0.01, f"manifest {manifest_hash[:12]}", ha="right", va="bottom",
             fontsize=6, color="0.5")


def accuracy_curve_figure(sessions: list[dict], method: str, manifest_hash: str):
    """Per-session accuracy with the base/novel split of each session."""
    fig, ax = plt.subplots()
    xs = [s["session"] for s in sessions]
    ax.plot(xs, [s["accuracy"] for s in sessions], "o-", label="all classes")
    ax.plot(xs, [s["base_accuracy"] for s in sessions], "s--", label="base classes")
    novel = [(s["session"], s["novel_accuracy"]) for s in sessions if s["session"] > 0]
    if novel:
        ax.plot([n[0] for n in novel], [n[1] for n in novel], "^--", label="novel classes")
    ax.set_xlabel("session")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.set_xticks(xs)
    ax.set_title(f"accuracy per session ({method})")
    ax.legend()
    _stamp(fig, manifest_hash)
    fig.tight_layout()
    return fig


def final_split_figure(summary: dict, method: str, manifest_hash: str):
    """Base/novel accuracy and their harmonic mean at the last session."""
    fig, ax = plt.subplots()
    names = ["base", "novel", "harmonic mean"]
    values = [summary["base_accuracy"], summary["novel_accuracy"], summary["harmonic_mean"]]
    bars = ax.bar(names, values, color=["#4878d0", "#ee854a", "#6acc64"])
    for bar, v in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, v + 0.01, f"{v:.3f}",
                ha="center", va="bottom", fontsize=9)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("accuracy at last session")
    ax.set_title(f"final base/novel split ({method})")
    _stamp(fig, manifest_hash)
    fig.tight_layout()
    return fig


def ablation_figure(rows: list[dict], manifest_hash: str):
    """Last-session accuracy per ablation row, baseline marked."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    names = [r["method"] for r in rows]
    values = [r["last_accuracy"] for r in rows]
    ax.bar(range(len(rows)), values, color="#4878d0")
    ax.axhline(values[0], color="0.4", linestyle="--", linewidth=1, label="baseline")
    for i, (v, r) in enumerate(zip(values, rows)):
        ax.text(i, v + 0.005, f"{r['delta_vs_baseline']:+.3f}", ha="center",
                va="bottom", fontsize=8)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("last-session accuracy")
    ax.set_title("component ablation")
    ax.legend()
    _stamp(fig, manifest_hash)
    fig.tight_layout()
    return fig


def render_run_figures(results: dict, out_dir: str | Path) -> list[Path]:
    """Render the run figures from a parsed results file; returns paths."""
    out_dir = Path(out_dir)
    h = results["header"]["manifest_hash"]
    method = results["header"]["method"]
    paths = []
    for name, fig in (
        ("accuracy_curve.png", accuracy_curve_figure(results["sessions"], method, h)),
        ("final_split.png", final_split_figure(results["summary"], method, h)),
    ):
        path = out_dir / name
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths


def render_ablation_figure(ablation: dict, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    fig = ablation_figure(ablation["rows"], ablation["header"]["manifest_hash"])
    path = out_dir / "ablation.png"
    fig.savefig(path)
    plt.close(fig)
    return path
