"""Figures for benchmark reports (written to files, never shown)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import PHASES, STRATEGIES, RunReport  # noqa: E402


def plot_phase_timings(reports: Sequence[RunReport], path: str | Path) -> Path:
    """Stacked bars of phase times, one bar per (D, strategy)."""
    rows = sorted(reports, key=lambda r: (-r.D, STRATEGIES.index(r.strategy)))
    labels = [f"{r.D}\n{r.strategy}" for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(rows) + 2), 4.5))
    bottom = [0.0] * len(rows)
    for phase in PHASES:
        vals = [r.timings.get(phase, 0.0) for r in rows]
        ax.bar(range(len(rows)), vals, bottom=bottom, label=phase)
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("seconds")
    ax.set_title("time per phase")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_heights(reports: Sequence[RunReport], path: str | Path) -> Path:
    """Measured height against the heuristic estimate and the proven bound."""
    seen = {}
    for r in reports:
        seen.setdefault(r.D, r)
    rows = sorted(seen.values(), key=lambda r: -r.D)
    xs = [abs(r.D) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(xs, [r.measured_height_nats for r in rows], "o", label="measured")
    ax.plot(xs, [r.heuristic_nats for r in rows], "x", label="heuristic")
    ax.plot(xs, [r.proven_bound_nats for r in rows], "^", label="proven bound")
    if len(xs) > 1:
        ax.set_xscale("log")
    ax.set_xlabel("|D|")
    ax.set_ylabel("height (nats)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_tree_scaling(points: Sequence[tuple[int, float]], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog([h for h, _ in points], [t for _, t in points], "o-")
    ax.set_xlabel("h")
    ax.set_ylabel("poly_from_roots seconds")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
