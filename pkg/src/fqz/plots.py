"""Figure rendering for the report paths.

Every function takes rows already computed by the library, renders one
matplotlib figure and writes it next to the delimited report.  The Agg
backend is forced so batch runs never touch a display.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_support",
    "plot_convergence",
    "plot_ball",
    "plot_band",
]

_STYLE = {"figure.figsize": (6.4, 4.0), "axes.grid": True, "grid.alpha": 0.3}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_support(cs, path: Path, samples: int = 20000, seed: int = 0) -> Path:
    """Histogram (1-D) or scatter (2-D) of measure samples."""
    from .quantizer import sample_ism

    xs = sample_ism(cs, seed, samples)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if cs.dim == 1:
            ax.hist(xs[:, 0], bins=400, density=True, color="#3465a4")
            ax.set_xlabel("x")
            ax.set_ylabel("sample density")
        else:
            ax.scatter(xs[:, 0], xs[:, 1], s=0.5, alpha=0.4, color="#3465a4")
            ax.set_aspect("equal")
        ax.set_title(f"case {cs.case} support ({samples} samples)")
    return _save(fig, path)


def plot_convergence(rows, d0: float, path: Path) -> Path:
    """Scaled deviation curves j*|value - d0| per ratio family."""
    kinds = sorted({r.kind for r in rows})
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 4.0))
        for kind in kinds:
            sub = [r for r in rows if r.kind == kind]
            js = [r.j for r in sub]
            ax1.plot(js, [r.value for r in sub], marker="o", label=kind)
            ax2.plot(js, [r.scaled_deviation for r in sub], marker="o", label=kind)
        ax1.axhline(d0, color="k", lw=0.8, ls="--", label="d0")
        ax1.set_xlabel("j")
        ax1.set_ylabel("ratio value")
        ax1.legend()
        ax2.set_xlabel("j")
        ax2.set_ylabel("j * |value - d0|")
        ax2.legend()
        fig.suptitle("convergence diagnostics")
    return _save(fig, path)


def plot_ball(eps_sups, lam: float, eta: float, path: Path) -> Path:
    """Log-log empirical ball mass suprema against the fitted power bound."""
    eps = np.array([e for e, _ in eps_sups])
    sups = np.array([s for _, s in eps_sups])
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.loglog(eps, sups, "o", label="empirical sup")
        ax.loglog(eps, lam * eps**eta, "-", label=f"{lam:.3g} * eps^{eta:.4g}")
        ax.set_xlabel("eps")
        ax.set_ylabel("sup ball mass")
        ax.legend()
        ax.set_title("ball-mass scaling")
    return _save(fig, path)


def plot_band(rows, path: Path) -> Path:
    """Certified coefficient band along the antichain codebook sizes."""
    ns = [r.n for r in rows]
    lo = [max(r.coef_lower, 1e-12) for r in rows]
    hi = [r.coef_upper for r in rows]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.fill_between(ns, lo, hi, alpha=0.3, color="#3465a4", label="certified band")
        ax.plot(ns, hi, "o-", color="#204a87", ms=4, label="coef upper")
        ax.plot(ns, lo, "s-", color="#a40000", ms=4, label="coef lower")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("codebook size n")
        ax.set_ylabel("n^(1/d0) * error")
        ax.legend()
        ax.set_title("quantization coefficient band")
    return _save(fig, path)
