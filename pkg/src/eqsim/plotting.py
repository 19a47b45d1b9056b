"""Figure rendering for the CLI report paths.

Figures are written next to the delimited output with a stripped PNG date
field so repeated runs produce identical files.  matplotlib is imported
lazily and forced onto the Agg backend; nothing here opens a window.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _savefig(fig, path: str):
    fig.savefig(path, dpi=150, metadata={"Date": None})


def save_sweep_figure(
    rows: Sequence[Mapping],
    path: str,
    *,
    epsilon: float,
    title: str,
) -> None:
    """Concurrence vs gt: analytic attenuation curve plus the computed points."""
    import numpy as np

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    dense = np.linspace(0.0, max(r["gt"] for r in rows) or math.pi, 400)
    ax.plot(
        dense,
        epsilon * np.abs(np.sin(2.0 * dense)),
        color="0.4",
        lw=1.0,
        label=f"{epsilon:g}" + r" $\cdot\,|\sin 2gt|$",
    )
    gts = [r["gt"] for r in rows]
    ests = [r["c_estimate"] for r in rows]
    sigmas = [r["c_sigma"] for r in rows]
    if any(s > 0 for s in sigmas):
        ax.errorbar(gts, ests, yerr=sigmas, fmt="o", ms=4, capsize=2, label="estimate")
    else:
        ax.plot(gts, ests, "o", ms=4, label="computed")
    ax.set_xlabel("gt (rad)")
    ax.set_ylabel("concurrence")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    _savefig(fig, path)
    plt.close(fig)


def save_tomography_figure(
    rows: Sequence[Mapping],
    path: str,
    *,
    epsilon: float,
    fit_amplitude: float,
    title: str,
) -> None:
    """Reconstructed concurrence vs gt with the fitted noise-model curve."""
    import numpy as np

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    dense = np.linspace(0.0, max(r["gt"] for r in rows) or math.pi, 400)
    eps_fit = (2.0 * fit_amplitude + 1.0) / 3.0
    model = np.maximum(0.0, eps_fit * np.abs(np.sin(2.0 * dense)) - (1.0 - eps_fit) / 2.0)
    ax.plot(dense, model, color="0.4", lw=1.0, label=f"fit, peak {fit_amplitude:.3f}")
    gts = [r["gt"] for r in rows]
    ests = [r["c_estimate"] for r in rows]
    sigmas = [r["c_sigma"] for r in rows]
    ax.errorbar(gts, ests, yerr=sigmas, fmt="o", ms=4, capsize=2, label="reconstructed")
    ax.plot(gts, [r["c_exact"] for r in rows], "x", ms=4, color="C3", label="exact")
    ax.set_xlabel("gt (rad)")
    ax.set_ylabel("concurrence")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    _savefig(fig, path)
    plt.close(fig)
