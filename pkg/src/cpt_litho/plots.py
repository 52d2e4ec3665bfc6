"""Figure rendering for the command-line report path.

Imported lazily by the CLI so data-only runs never touch matplotlib.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .fields import ExposurePlan  # noqa: E402
from .pattern import Grid1D, Grid2D, Profile, product_profile, product_profile_2d  # noqa: E402


def save_profile_figure(profile: Profile, path, title: str | None = None) -> None:
    """Line plot (1D) or density map (2D) of a profile, written to path."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if isinstance(profile.grid, Grid1D):
        ax.plot(profile.grid.zeta, profile.values, lw=1.5)
        ax.set_xlabel("k0*z")
        ax.set_ylabel("state density")
    else:
        mesh = ax.pcolormesh(profile.grid.zeta_x, profile.grid.zeta_y,
                             profile.values.T, shading="auto", cmap="inferno")
        ax.set_xlabel("k0*x")
        ax.set_ylabel("k0*y")
        ax.set_aspect("equal")
        fig.colorbar(mesh, ax=ax, label="state density")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fit_figure_1d(grid: Grid1D, target: np.ndarray, plan: ExposurePlan,
                       path, distance: float | None = None) -> None:
    """Target samples and the fitted curve, scaled to matching vector norms."""
    dense = Grid1D.regular(800, float(grid.zeta[0]),
                           float(grid.zeta[0]) + float(np.pi))
    fitted_dense = product_profile(plan, dense).values
    fitted_samples = product_profile(plan, grid).values
    scale = np.linalg.norm(target) / max(np.linalg.norm(fitted_samples), 1e-300)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(dense.zeta, scale * fitted_dense, lw=1.5, label="fitted plan")
    ax.plot(grid.zeta, target, "o", ms=5, mfc="none", label="target samples")
    ax.set_xlabel("k0*z")
    ax.set_ylabel("density (target scale)")
    if distance is not None:
        ax.set_title(f"normalized distance {distance:.3e}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fit_figure_2d(grid: Grid2D, target: np.ndarray, plan: ExposurePlan,
                       path, distance: float | None = None) -> None:
    """Side-by-side target and fitted density maps, each peak-normalized."""
    fitted = product_profile_2d(plan, grid).values
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    for ax, vals, label in ((axes[0], target, "target"),
                            (axes[1], fitted / max(fitted.max(), 1e-300), "fitted")):
        mesh = ax.pcolormesh(grid.zeta_x, grid.zeta_y, np.asarray(vals).T,
                             shading="auto", cmap="inferno")
        ax.set_title(label)
        ax.set_xlabel("k0*x")
        ax.set_ylabel("k0*y")
        ax.set_aspect("equal")
        fig.colorbar(mesh, ax=ax)
    if distance is not None:
        fig.suptitle(f"normalized distance {distance:.3e}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
