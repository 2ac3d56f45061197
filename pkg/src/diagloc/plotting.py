"""Figures written next to the CSV reports."""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bounds import CosmicTable  # noqa: E402
from .localize import CurvePoint  # noqa: E402


def _log10(x) -> float:
    import mpmath
    return float(mpmath.log10(x))


def plot_cosmic(table: CosmicTable, path, width: float = 7.0):
    """Bars of log10(log2 G_m) per m with horizontal lines at each mass's entropy."""
    fig, ax = plt.subplots(figsize=(width, width * 0.62))
    ms = [c.m for c in table.chains]
    ax.bar(ms, [_log10(c.log2_G) if c.log2_G > 1 else 0.0 for c in table.chains],
           color="0.6", label=r"$\log_{10}\log_2 G_m$")
    for i, r in enumerate(table.rows):
        y = math.log10(r.entropy_bits)
        ax.axhline(y, lw=0.8, ls="--", color=f"C{i % 10}")
        ax.text(ms[0] - 0.4, y, f" {r.label}", va="bottom", fontsize=7, color=f"C{i % 10}")
    ax.set_yscale("symlog", linthresh=1.0)
    ax.set_xlabel("locality m")
    ax.set_ylabel("log10(bits)")
    ax.set_xticks(ms)
    for note in table.notes:
        fig.text(0.01, 0.01, note, fontsize=6, va="bottom")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_curve(points: Sequence[CurvePoint], path, w: float | None = None, title: str = ""):
    """Shaded bracket between the lower and upper localizability estimates."""
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ks = [p.k for p in points]
    lo = [p.p_lower for p in points]
    hi = [p.p_upper for p in points]
    ax.fill_between(ks, lo, hi, step="mid", alpha=0.3, label="bracket")
    ax.step(ks, lo, where="mid", label="p_lower")
    ax.step(ks, hi, where="mid", ls="--", label="p_upper")
    if w is not None:
        ax.axvline(2 ** w, color="k", lw=0.8, ls=":", label=f"k = 2^{w:g}")
    ax.set_xlabel("k (number of terms)")
    ax.set_ylabel("probability of locality <= m")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
