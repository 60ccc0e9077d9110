"""Figure rendering for the CLI report paths.

All figures are written as self-contained SVG files via the Agg backend;
nothing here ever opens a window.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .optimizer import SweepResult  # noqa: E402

_REFERENCE_LEVELS = ((2.0, "classical bound"), (2.0 * math.sqrt(2.0), "quantum ceiling"))


def sweep_figure(sweeps: Sequence[SweepResult], path: str | Path) -> Path:
    """Overlay maximized correlator curves against the entanglement angle."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for sw in sweeps:
        ax.plot(sw.thetas, sw.values, lw=1.6, label=sw.kind)
    for level, label in _REFERENCE_LEVELS:
        ax.axhline(level, color="gray", lw=0.8, ls="--")
        ax.annotate(label, (0.01, level), fontsize=8, color="gray",
                    xytext=(2, 2), textcoords="offset points")
    ax.set_xlabel(r"$\theta$ (radians)")
    ax.set_ylabel("correlator value")
    ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, format="svg")
    plt.close(fig)
    return out


def fidelity_figure(
    thetas: Sequence[float],
    closed: Sequence[float],
    numeric: Sequence[float],
    path: str | Path,
) -> Path:
    """Closed-form vs quadrature transfer fidelity against the angle."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(thetas, closed, lw=1.6, label="closed form")
    ax.plot(thetas, numeric, lw=0.0, marker="o", ms=3, alpha=0.7, label="spherical quadrature")
    ax.axhline(2.0 / 3.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel(r"$\theta$ (radians)")
    ax.set_ylabel("average transfer fidelity")
    ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, format="svg")
    plt.close(fig)
    return out
