"""Figure rendering for the CLI report paths.

Each helper takes the rows already written to the delimited output and saves
a matplotlib figure next to it. Headless by construction (Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_gain_scatter(rows, path, gain_floor: float = 1e-12) -> None:
    """Scatter of daemonic gain versus concurrence on a log gain axis.

    ``rows`` are the fig2 records ``(index, p, C, X, Y, Z, gain)``; gains are
    floored at ``gain_floor`` so zero-gain samples stay visible on the log
    scale.
    """
    conc = np.array([r[2] for r in rows])
    gain = np.clip(np.array([r[6] for r in rows]), gain_floor, None)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.scatter(conc, gain, s=4, alpha=0.35, linewidths=0, color="#1f5fa8")
    ax.set_yscale("log")
    ax.set_xlabel("concurrence C")
    ax.set_ylabel("daemonic utility gain")
    ax.set_xlim(0, 1)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def save_werner_sweep(rows, path, threshold: float | None = None) -> None:
    """Closed-form versus numeric Werner gain across the mixing parameter."""
    z = np.array([r[0] for r in rows])
    closed = np.array([r[1] for r in rows])
    numeric = np.array([r[2] for r in rows])
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(z, closed, lw=1.8, label="closed form", color="#1f5fa8")
    ax.plot(z, numeric, lw=0, marker="o", ms=3.2, label="numeric", color="#c44e52")
    if threshold is not None and 0 <= threshold <= 1:
        ax.axvline(threshold, color="0.4", ls="--", lw=1, label=f"threshold z0 = {threshold:g}")
    ax.set_xlabel("Werner mixing z")
    ax.set_ylabel("daemonic utility gain")
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
