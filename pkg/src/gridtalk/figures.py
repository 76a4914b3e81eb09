"""Offscreen figure rendering for the CLI report path.

The evaluator itself emits JSON/CSV only; these helpers turn finished
reports and belief snapshots into PNGs written next to that output.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from gridtalk.evaluation import EvalReport

BAR_COLOR = "#4878a8"


def save_ll_figure(reports: Sequence[EvalReport], path: str | Path) -> Path:
    """Mean per-action log-likelihood per policy, bootstrap CI whiskers."""
    names = [r.policy for r in reports]
    means = [r.mean_ll for r in reports]
    err_lo = [r.mean_ll - r.ci[0] for r in reports]
    err_hi = [r.ci[1] - r.mean_ll for r in reports]
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(names), 3.6))
    ax.bar(range(len(names)), means, yerr=[err_lo, err_hi], capsize=4, color=BAR_COLOR)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("mean log-likelihood per action")
    ax.axhline(0.0, lw=0.8, color="black")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_rank_figure(reports: Sequence[EvalReport], path: str | Path) -> Path:
    """Mean rank of the recorded action per policy (lower is better)."""
    names = [r.policy for r in reports]
    ranks = [r.mean_rank if r.mean_rank is not None else 0.0 for r in reports]
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(names), 3.6))
    ax.bar(range(len(names)), ranks, color=BAR_COLOR)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("mean action rank")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_entropy_figure(report: EvalReport, path: str | Path) -> Path:
    """First-step entropy of the dataset per scenario (a data property,
    identical across policies; one report suffices)."""
    items = sorted(report.entropy.items())
    labels = [k for k, _ in items]
    values = [v for _, v in items]
    fig, ax = plt.subplots(figsize=(1.6 + 0.55 * max(4, len(items)), 3.4))
    ax.bar(range(len(items)), values, color=BAR_COLOR)
    ax.set_xticks(range(len(items)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("first-step entropy (nats)")
    ax.set_xlabel("scenario")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_marginals_figure(
    steps: Sequence[tuple[str, np.ndarray]],
    path: str | Path,
) -> Path:
    """One heatmap panel per demo step, cells annotated with probabilities."""
    n = len(steps)
    rows, cols = steps[0][1].shape
    fig, axes = plt.subplots(1, n, figsize=(2.2 * n, 2.6), squeeze=False)
    for ax, (label, matrix) in zip(axes[0], steps):
        ax.imshow(matrix, vmin=0.0, vmax=1.0, cmap="viridis")
        for r in range(rows):
            for c in range(cols):
                shade = "white" if matrix[r][c] < 0.6 else "black"
                ax.text(c, r, f"{matrix[r][c]:.3f}", ha="center", va="center",
                        color=shade, fontsize=8)
        ax.set_title(label, fontsize=8)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
