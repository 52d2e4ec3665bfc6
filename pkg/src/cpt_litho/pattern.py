"""State-density profiles over dimensionless position grids (zeta = k0*z).

Ideal profiles are products of the per-step fringes of an exposure plan.
Decoherent profiles replace each ideal fringe with the stationary retention
of the three-level solver, step by step: between steps the atoms are
repumped to g1 and the marked (g2) population is erased, so the steps stay
statistically independent and the total profile is still a plain product of
single-step profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom import LambdaParams, unit_step_retention
from .errors import ConvergenceError
from .fields import ExposurePlan, StandingWaveFactor, realize_factor

#: Profile values may stray this far outside [0, 1] from rounding alone.
_VALUE_TOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Strictly increasing, finite sample positions along the wave axis."""

    zeta: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=float)
        if z.ndim != 1 or z.size == 0:
            raise ValueError("grid needs a non-empty 1D coordinate array")
        if not np.all(np.isfinite(z)):
            raise ValueError("grid coordinates must be finite")
        if z.size > 1 and not np.all(np.diff(z) > 0):
            raise ValueError("grid coordinates must be strictly increasing")
        z = z.copy()
        z.flags.writeable = False
        object.__setattr__(self, "zeta", z)

    def __len__(self) -> int:
        return self.zeta.size

    @classmethod
    def regular(cls, count: int = 400, start: float = -math.pi / 2,
                stop: float = math.pi / 2) -> "Grid1D":
        """count points from start (inclusive) to stop (exclusive)."""
        if count < 1:
            raise ValueError("count must be >= 1")
        return cls(np.linspace(start, stop, count, endpoint=False))

    @classmethod
    def default(cls) -> "Grid1D":
        return cls.regular()


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product grid: strictly increasing axes zeta_x and zeta_y."""

    zeta_x: np.ndarray
    zeta_y: np.ndarray

    def __post_init__(self):
        for name in ("zeta_x", "zeta_y"):
            z = np.asarray(getattr(self, name), dtype=float)
            if z.ndim != 1 or z.size == 0:
                raise ValueError(f"{name} must be a non-empty 1D array")
            if not np.all(np.isfinite(z)):
                raise ValueError(f"{name} must be finite")
            if z.size > 1 and not np.all(np.diff(z) > 0):
                raise ValueError(f"{name} must be strictly increasing")
            z = z.copy()
            z.flags.writeable = False
            object.__setattr__(self, name, z)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.zeta_x.size, self.zeta_y.size)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate matrices indexed [ix, iy]."""
        return np.meshgrid(self.zeta_x, self.zeta_y, indexing="ij")

    @classmethod
    def regular(cls, count: int = 50, start: float = -math.pi,
                stop: float = math.pi) -> "Grid2D":
        """count x count points over [start, stop) x [start, stop)."""
        if count < 1:
            raise ValueError("count must be >= 1")
        axis = np.linspace(start, stop, count, endpoint=False)
        return cls(axis, axis.copy())

    @classmethod
    def default(cls) -> "Grid2D":
        return cls.regular()


@dataclass(frozen=True)
class Profile:
    """Density values on a grid; 1D vectors or [ix, iy] matrices."""

    values: np.ndarray
    grid: "Grid1D | Grid2D"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if isinstance(self.grid, Grid1D):
            if vals.shape != (len(self.grid),):
                raise ValueError(f"values shape {vals.shape} does not match the grid")
        elif isinstance(self.grid, Grid2D):
            if vals.shape != self.grid.shape:
                raise ValueError(f"values shape {vals.shape} does not match the grid")
        else:
            raise TypeError("grid must be Grid1D or Grid2D")
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile values must be finite")
        if vals.size and (vals.min() < -_VALUE_TOL or vals.max() > 1.0 + _VALUE_TOL):
            raise ValueError("profile values must lie in [0, 1] up to rounding")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def to_csv(self, path_or_file) -> None:
        write_profile_csv(self, path_or_file)


def _factor_values_1d(f: StandingWaveFactor, zeta: np.ndarray) -> np.ndarray:
    return (1.0 + 2.0 * np.real(f.r * np.exp(2j * zeta))) / (1.0 + 2.0 * abs(f.r))


def factor_profile(f: StandingWaveFactor, g: Grid1D) -> Profile:
    """Single-step fringe (1 + 2*Re(r*exp(2i*zeta))) / (1 + 2*|r|)."""
    return Profile(_factor_values_1d(f, g.zeta), g)


def _require_single_direction(plan: ExposurePlan, what: str) -> None:
    if plan.common_theta() is None:
        raise ValueError(
            f"{what} treats zeta as the coordinate along one wave axis; "
            "factors mix directions, use product_profile_2d instead"
        )


def product_profile(plan: ExposurePlan, g: Grid1D) -> Profile:
    """Product of the plan's fringes along the (single) wave axis."""
    _require_single_direction(plan, "product_profile")
    vals = np.ones(len(g))
    for f in plan:
        vals *= _factor_values_1d(f, g.zeta)
    return Profile(vals, g)


def closed_form_uniform(n: int, g: Grid1D) -> Profile:
    """sin(n*zeta)**2 / 4**(n-1), the exact product of the phase-stepped plan.

    The 1/4**(n-1) prefactor is forced by the identity
    prod_{v=0}^{n-1} sin(zeta + pi*v/n) = sin(n*zeta) / 2**(n-1); at n = 1
    it reduces to the single fringe (1 - cos(2*zeta)) / 2.
    """
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    return Profile(np.sin(n * g.zeta) ** 2 / 4.0 ** (n - 1), g)


def point_spread(n: int, g: Grid1D) -> Profile:
    """cos(zeta)**(2n), the n-fold product of identical r = +1/2 fringes."""
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    return Profile(np.cos(g.zeta) ** (2 * n), g)


def decoherent_product_profile(plan: ExposurePlan, p: LambdaParams,
                               total_intensity: float, g: Grid1D) -> Profile:
    """Plan profile with each step evaluated by the three-level solver.

    Every factor is realized as a beam pair (see realize_factor); the
    partial-visibility wave drives g2 <-> e1 and its full-visibility
    companion drives g1 <-> e1, scaled together so the summed intensity
    equals ``total_intensity`` everywhere (the companion's modulation
    matches the first wave's ac component, so the sum is constant in zeta).
    Rates are taken from ``p``; its drive amplitudes are ignored.  In units
    of the total linewidth, ``total_intensity`` is the squared Rabi scale
    |s|**2 + |r|**2.
    """
    if not (math.isfinite(total_intensity) and total_intensity > 0.0):
        raise ValueError(f"total_intensity must be finite and > 0, got {total_intensity!r}")
    _require_single_direction(plan, "decoherent_product_profile")
    zeta = g.zeta
    vals = np.ones(len(g))
    for step_index, f in enumerate(plan):
        beams = realize_factor(f)
        norm = (beams.a + beams.b) ** 2
        s2 = total_intensity * (
            beams.a ** 2 + beams.b ** 2
            + 2.0 * beams.a * beams.b * np.cos(2.0 * zeta + beams.phase)
        ) / norm
        s2 = np.maximum(s2, 0.0)  # rounding guard at exact fringe nulls
        r2 = np.maximum(total_intensity - s2, 0.0)
        for j in range(zeta.size):
            try:
                vals[j] *= unit_step_retention(math.sqrt(s2[j]), math.sqrt(r2[j]), p)
            except ConvergenceError as exc:
                raise ConvergenceError(
                    f"step {step_index} at zeta = {zeta[j]:.6g}: {exc}",
                    residual=exc.residual,
                ) from exc
    return Profile(vals, g)


def quench_localization_profile(s_uniform: float, r_peak: float, g: Grid1D,
                                p: LambdaParams) -> Profile:
    """Retention under a uniform s field and an r field with a node at zeta = 0.

    The r amplitude is r_peak*sin(zeta), so the g1 density survives only in
    a neighborhood of the node; without extra decoherence the profile is the
    ideal s**2 / (s**2 + r_peak**2 * sin(zeta)**2).  Rates come from ``p``.
    """
    if not (math.isfinite(r_peak) and r_peak > 0.0):
        raise ValueError(f"r_peak must be finite and > 0, got {r_peak!r}")
    if not (math.isfinite(s_uniform) and s_uniform >= 0.0):
        raise ValueError(f"s_uniform must be finite and >= 0, got {s_uniform!r}")
    vals = np.empty(len(g))
    for j, z in enumerate(g.zeta):
        vals[j] = unit_step_retention(s_uniform, abs(r_peak * math.sin(z)), p)
    return Profile(vals, g)


def product_profile_2d(plan: ExposurePlan, g: Grid2D) -> Profile:
    """Product of fringes over a plane; each factor acts along its direction."""
    zx, zy = g.mesh()
    vals = np.ones(g.shape)
    for f in plan:
        u = zx * math.cos(f.theta) + zy * math.sin(f.theta)
        vals *= (1.0 + 2.0 * np.real(f.r * np.exp(2j * u))) / (1.0 + 2.0 * abs(f.r))
    return Profile(vals, g)


def fringe_period(wavelength: float, n: int) -> float:
    """Spatial period of the n-fold pattern: wavelength / (2*n).

    The base standing wave has period wavelength/2 in z; an order-n plan
    multiplies the spatial frequency by n.
    """
    if not (math.isfinite(wavelength) and wavelength > 0.0):
        raise ValueError(f"wavelength must be finite and > 0, got {wavelength!r}")
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    return wavelength / (2.0 * n)


def fwhm(profile: Profile) -> float:
    """Full width at half maximum of the tallest peak, by linear interpolation.

    The peak must be interior to the grid with both half-maximum crossings
    visible; otherwise a ValueError is raised.
    """
    if not isinstance(profile.grid, Grid1D):
        raise ValueError("fwhm is defined for 1D profiles")
    z = profile.grid.zeta
    v = profile.values
    i = int(np.argmax(v))
    half = v[i] / 2.0
    if v[i] <= 0.0:
        raise ValueError("profile has no positive peak")

    def cross(j0: int, step: int) -> float:
        j = j0
        while 0 <= j + step < len(v):
            if v[j + step] < half <= v[j]:
                # linear interpolation between j and j+step
                t = (half - v[j]) / (v[j + step] - v[j])
                return z[j] + t * (z[j + step] - z[j])
            j += step
        raise ValueError("half-maximum crossing not inside the grid")

    return cross(i, +1) - cross(i, -1)


def write_profile_csv(profile: Profile, path_or_file) -> None:
    """Delimited dump: `zeta,density` rows (1D) or `zeta_x,zeta_y,density` (2D).

    Values are written with 17 significant digits so they round-trip exactly.
    """
    if hasattr(path_or_file, "write"):
        _write_csv(profile, path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            _write_csv(profile, fh)


def _write_csv(profile: Profile, fh) -> None:
    if isinstance(profile.grid, Grid1D):
        fh.write("zeta,density\n")
        for z, v in zip(profile.grid.zeta, profile.values):
            fh.write(f"{z:.17g},{v:.17g}\n")
    else:
        fh.write("zeta_x,zeta_y,density\n")
        zx, zy = profile.grid.zeta_x, profile.grid.zeta_y
        for ix in range(zx.size):
            for iy in range(zy.size):
                fh.write(f"{zx[ix]:.17g},{zy[iy]:.17g},{profile.values[ix, iy]:.17g}\n")
