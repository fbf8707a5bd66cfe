"""Matplotlib renderings of benchmark results, written next to the CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def benchmark_figures(records, stats, csv_path) -> list[Path]:
    """Render gap, value, and timing figures alongside a benchmark CSV.

    Returns the list of written files, named ``<stem>_gaps.png``,
    ``<stem>_values.png`` and ``<stem>_times.png`` next to ``csv_path``.
    """
    base = Path(csv_path)
    stem = base.with_suffix("")
    gaps = np.array([r.gap for r in records])
    greedy = np.array([r.value_greedy for r in records])
    opt = np.array([r.value_opt for r in records])
    t_greedy = np.array([r.time_greedy for r in records])
    t_exh = np.array([r.time_exhaustive for r in records])
    written = []

    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.hist(gaps, bins=30, color="tab:blue", edgecolor="black", linewidth=0.4)
    ax.set_xlabel("relative gap (greedy vs optimal)")
    ax.set_ylabel("trials")
    ax.set_title(f"greedy optimal in {100 * stats.fraction_optimal:.1f}% of "
                 f"{stats.trials} trials, worst gap {stats.worst_gap:.3g}")
    fig.tight_layout()
    path = Path(f"{stem}_gaps.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    lo = min(opt.min(), greedy.min())
    hi = max(opt.max(), greedy.max())
    ax.plot([lo, hi], [lo, hi], color="gray", linewidth=0.8, label="greedy = optimal")
    ax.scatter(opt, greedy, s=12, color="tab:red", alpha=0.7)
    ax.set_xlabel("optimal value (exhaustive)")
    ax.set_ylabel("greedy value")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    path = Path(f"{stem}_values.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    trials = np.array([r.trial for r in records])
    ax.plot(trials, t_exh, label=f"exhaustive (total {stats.time_exhaustive:.2f} s)",
            color="tab:orange", linewidth=0.9)
    ax.plot(trials, t_greedy, label=f"greedy (total {stats.time_greedy:.2f} s)",
            color="tab:blue", linewidth=0.9)
    ax.set_xlabel("trial")
    ax.set_ylabel("wall time [s]")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(f"{stem}_times.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written
