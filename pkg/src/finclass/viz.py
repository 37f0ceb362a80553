"""Figure rendering for reports: Hasse diagrams of finite spaces, partition
plots for cover reductions, and class-count charts for enumerations."""

from __future__ import annotations

from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .finspace import FinSpace


def _cover_relation(X: FinSpace) -> np.ndarray:
    strict = X.leq & ~(X.leq & X.leq.T)
    reach2 = strict @ strict
    return strict & ~reach2


def _levels(X: FinSpace) -> list[int]:
    strict = X.leq & ~(X.leq & X.leq.T)
    level = [0] * X.n
    changed = True
    while changed:
        changed = False
        for i in range(X.n):
            for j in np.flatnonzero(strict[:, i]):
                if level[i] < level[j] + 1:
                    level[i] = level[j] + 1
                    changed = True
    return level


def hasse_figure(X: FinSpace, path: str, title: str = ""):
    """Draw the Hasse diagram of the specialization preorder to a file.

    Mutually specializing points are drawn at the same height joined by a
    double edge.
    """
    cover = _cover_relation(X)
    level = _levels(X)
    by_level: dict = {}
    for i in range(X.n):
        by_level.setdefault(level[i], []).append(i)
    pos = {}
    for lv, pts in sorted(by_level.items()):
        for k, p in enumerate(sorted(pts)):
            pos[p] = (k - (len(pts) - 1) / 2, lv)
    fig, ax = plt.subplots(figsize=(max(4, X.n * 0.45), max(3, (max(level) + 1) * 1.1)))
    for i in range(X.n):
        for j in np.flatnonzero(cover[i]):
            ax.plot([pos[i][0], pos[j][0]], [pos[i][1], pos[j][1]],
                    color="0.4", lw=1, zorder=1)
    eqv = X.leq & X.leq.T & ~np.eye(X.n, dtype=bool)
    for i in range(X.n):
        for j in np.flatnonzero(eqv[i]):
            if i < j:
                ax.plot([pos[i][0], pos[j][0]], [pos[i][1], pos[j][1]],
                        color="tab:red", lw=1, ls="--", zorder=1)
    xs = [pos[i][0] for i in range(X.n)]
    ys = [pos[i][1] for i in range(X.n)]
    ax.scatter(xs, ys, s=160, c="tab:blue", zorder=2)
    for i in range(X.n):
        ax.annotate(X.label(i), pos[i], ha="center", va="center",
                    fontsize=7, color="white", zorder=3)
    ax.set_title(title or f"finite space on {X.n} points")
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def partition_figure(named_funcs, reduction, path: str):
    """Plot the partition-of-unity functions and the disjointified pieces."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    grid = [Fraction(k, 512) for k in range(513)]
    xs = [float(x) for x in grid]
    for name, f in named_funcs:
        ax1.plot(xs, [float(f(x)) for x in grid], label=str(name))
    ax1.set_ylabel("partition functions")
    ax1.legend(loc="upper right", fontsize=7)
    shown = 0
    for F, q in sorted(reduction.q_funcs.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
        if reduction.supports[F].is_empty():
            continue
        label = "q{" + ",".join(reduction.names[i] for i in sorted(F)) + "}"
        ax2.plot(xs, [float(q(x)) for x in grid], label=label)
        shown += 1
    ax2.set_ylabel("disjointified pieces")
    ax2.set_xlabel("x")
    if shown <= 12:
        ax2.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def class_count_figure(result, path: str):
    """Bar chart of bundle-class multiplicities."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    counts = [c.multiplicity for c in result.classes]
    ax.bar(range(len(counts)), counts, color="tab:blue")
    ax.set_xlabel("bundle class")
    ax.set_ylabel("classifying maps hitting it")
    ax.set_title(f"{len(counts)} classes, {result.map_count} maps")
    ax.set_xticks(range(len(counts)))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
