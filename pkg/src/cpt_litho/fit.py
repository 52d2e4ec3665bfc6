"""Least-squares fitting of exposure plans to sampled targets.

The trial and target profiles are compared shape-only: both sample vectors
are scaled to unit Euclidean norm before taking the 2-norm of their
difference.  Factors are parameterized as r = (1/2)*sin(u)**2 * exp(i*phi),
which keeps every trial feasible (|r| <= 1/2) without clamping.  Each start
of the multi-start search runs a damped (Levenberg-Marquardt) least-squares
descent with an analytic Jacobian and returns its best iterate whose peak
density meets ``FitOptions.peak_floor`` (shape-only comparison makes the
absolute scale nearly free, so unchecked descent can collapse the density
to useless magnitudes).  The winner is the lowest reported distance, ties
broken by the lowest start index, so results are reproducible for a given
seed regardless of how many worker threads are used.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import ConvergenceError
from .fields import ExposurePlan, StandingWaveFactor
from .pattern import Grid1D, Grid2D, product_profile, product_profile_2d

#: Environment fallback for the multi-start worker count.
THREADS_ENV_VAR = "CPT_LITHO_THREADS"

_DEFAULT_STARTS_1D = 32
_DEFAULT_STARTS_2D = 64
_NORM_FLOOR = 1e-150  # keeps the residual finite if a trial profile collapses


@dataclass(frozen=True)
class FitOptions:
    """Multi-start search controls.

    ``starts = None`` picks the per-dimension default (32 for 1D, 64 for 2D);
    ``threads = None`` falls back to the CPT_LITHO_THREADS environment
    variable and then to the machine's CPU count.

    ``peak_floor`` is the minimum usable peak density of a trial profile.
    The shape-only objective leaves the absolute density scale a nearly free
    direction in under-constrained fits, so unchecked descent can trade a
    vanishing overall scale for a negligible shape gain; a plan whose peak
    retention is below numerical noise exposes nothing.  Each start therefore
    returns its lowest-cost evaluated iterate whose profile peak meets the
    floor, and falls back to the raw optimizer endpoint when no iterate does.
    Set 0 to disable and always keep the raw endpoints.
    """

    starts: int | None = None
    max_iterations: int = 500
    step_tol: float = 1e-12
    seed: int = 0
    threads: int | None = None
    peak_floor: float = 1e-8

    def __post_init__(self):
        if self.starts is not None and self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (0.0 < self.step_tol < 1.0):
            raise ValueError("step_tol must lie in (0, 1)")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not (math.isfinite(self.peak_floor) and self.peak_floor >= 0.0):
            raise ValueError("peak_floor must be finite and >= 0")


@dataclass(frozen=True)
class FitProblem:
    """Target samples plus the shape of the plan to fit.

    1D problems set ``order``; 2D problems set ``angles`` and
    ``steps_per_angle``.  Target values must be finite, >= 0, not all zero,
    and at least as numerous as the 2-per-factor real parameters.
    """

    target: np.ndarray
    grid: Grid1D | Grid2D
    order: int | None = None
    angles: tuple[float, ...] | None = None
    steps_per_angle: int | None = None
    options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))

    @classmethod
    def one_dimensional(cls, target, grid: Grid1D, order: int,
                        options: FitOptions | None = None) -> "FitProblem":
        return cls(target=target, grid=grid, order=order,
                   options=options or FitOptions())

    @classmethod
    def two_dimensional(cls, target, grid: Grid2D, angles, steps_per_angle: int,
                        options: FitOptions | None = None) -> "FitProblem":
        return cls(target=target, grid=grid, angles=tuple(float(a) for a in angles),
                   steps_per_angle=steps_per_angle, options=options or FitOptions())


@dataclass(frozen=True)
class StartDiagnostics:
    """Outcome of one optimization start."""

    index: int
    converged: bool
    iterations: int
    distance: float


@dataclass(frozen=True)
class FitResult:
    """Best plan found, its shape distance, and per-start diagnostics.

    ``distance`` is recomputed from the returned plan (not copied from
    optimizer state).  ``peak_density`` is the maximum of the unnormalized
    profile of the plan: over a dense single-period grid for 1D fits, over
    the fit grid for 2D fits.
    """

    plan: ExposurePlan
    distance: float
    peak_density: float
    starts: tuple[StartDiagnostics, ...]

    def to_json_data(self) -> dict:
        return {
            "plan": [{"re": f.r.real, "im": f.r.imag, "theta": f.theta}
                     for f in self.plan],
            "distance": self.distance,
            "peak_density": self.peak_density,
            "starts": [
                {"start": s.index, "converged": s.converged,
                 "iterations": s.iterations, "distance": s.distance}
                for s in self.starts
            ],
        }


def sample_grid_1d() -> Grid1D:
    """The 20-point fitting grid zeta = pi*nu/20, nu = -10..9."""
    return Grid1D(np.arange(-10, 10) * (math.pi / 20.0))


def normalized_distance(v_ta, v_tr) -> float:
    """2-norm distance between the unit-normalized sample vectors."""
    a = np.asarray(v_ta, dtype=float).ravel()
    b = np.asarray(v_tr, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"vector lengths differ: {a.size} vs {b.size}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return float(np.linalg.norm(a / na - b / nb))


def resolve_threads(threads: int | None) -> int:
    """Explicit argument, else CPT_LITHO_THREADS, else the CPU count."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ValueError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def _params_to_factors(x: np.ndarray, thetas) -> list[StandingWaveFactor]:
    u = x[0::2]
    phi = x[1::2]
    rs = 0.5 * np.sin(u) ** 2 * np.exp(1j * phi)
    return [StandingWaveFactor(r, theta) for r, theta in zip(rs, thetas)]


class _ProfileModel:
    """Trial profile P(x) = prod_v g_v and its Jacobian on flat sample points.

    ``w`` holds, per factor, twice the projected coordinate of every sample
    point (2*zeta along the factor's axis), so
    g_v = (1 + s_v*cos(w_v + phi_v)) / (1 + s_v) with s_v = sin(u_v)**2.
    """

    def __init__(self, w: np.ndarray, target_flat: np.ndarray):
        self.w = w  # shape (n_factors, n_samples)
        self.t_hat = target_flat / np.linalg.norm(target_flat)

    def _components(self, x: np.ndarray):
        u = x[0::2]
        phi = x[1::2]
        s = np.sin(u) ** 2
        arg = self.w + phi[:, None]
        cos_arg = np.cos(arg)
        g = (1.0 + s[:, None] * cos_arg) / (1.0 + s)[:, None]
        return u, phi, s, arg, cos_arg, g

    def profile(self, x: np.ndarray) -> np.ndarray:
        return self._components(x)[5].prod(axis=0)

    def residual_parts(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        """Residual vector plus the peak of the unnormalized trial profile."""
        p = self.profile(x)
        norm = max(float(np.linalg.norm(p)), _NORM_FLOOR)
        return p / norm - self.t_hat, float(p.max())

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.residual_parts(x)[0]

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        u, phi, s, arg, cos_arg, g = self._components(x)
        n, m = g.shape
        # products excluding one factor, via prefix/suffix sweeps (robust at g = 0)
        prefix = np.ones((n + 1, m))
        for v in range(n):
            prefix[v + 1] = prefix[v] * g[v]
        suffix = np.ones((n + 1, m))
        for v in range(n - 1, -1, -1):
            suffix[v] = suffix[v + 1] * g[v]
        p = prefix[n]
        dp = np.empty((m, 2 * n))
        one_plus_s = 1.0 + s
        dg_du = np.sin(2.0 * u)[:, None] * (cos_arg - 1.0) / (one_plus_s ** 2)[:, None]
        dg_dphi = -s[:, None] * np.sin(arg) / one_plus_s[:, None]
        for v in range(n):
            excl = prefix[v] * suffix[v + 1]
            dp[:, 2 * v] = excl * dg_du[v]
            dp[:, 2 * v + 1] = excl * dg_dphi[v]
        norm = max(float(np.linalg.norm(p)), _NORM_FLOOR)
        p_hat = p / norm
        return (dp - np.outer(p_hat, p_hat @ dp)) / norm


def _run_multi_start(model: _ProfileModel, n_factors: int, options: FitOptions,
                     default_starts: int):
    starts = options.starts if options.starts is not None else default_starts
    rng = np.random.default_rng(options.seed)
    # one row-major block of draws: adding starts never changes earlier rows
    raw = rng.random((starts, 2 * n_factors))
    x0s = np.empty_like(raw)
    x0s[:, 0::2] = raw[:, 0::2] * (math.pi / 2.0)
    x0s[:, 1::2] = raw[:, 1::2] * (2.0 * math.pi)

    def solve(index: int):
        evals: list[tuple[float, int, np.ndarray]] = []

        def recorded(x):
            r, peak = model.residual_parts(x)
            if peak >= options.peak_floor:
                evals.append((float(r @ r), len(evals), x.copy()))
            return r

        # step_tol maps to xtol; ftol and gtol stay at the solver's defaults.
        # Tightening them pushes every start far down the scale-free valley of
        # the normalized objective, where shapes barely improve but the
        # absolute density scale collapses by orders of magnitude.
        fun = recorded if options.peak_floor > 0.0 else model.residual
        res = least_squares(
            fun, x0s[index], jac=model.jacobian, method="lm",
            xtol=options.step_tol, max_nfev=options.max_iterations,
        )
        # best iterate subject to the density floor; cost ties keep the
        # earliest evaluation, so the pick is deterministic
        x = min(evals)[2] if evals else res.x
        distance = float(np.linalg.norm(model.residual(x)))
        return StartDiagnostics(index=index, converged=bool(res.status > 0),
                                iterations=int(res.nfev), distance=distance), x

    workers = resolve_threads(options.threads)
    if workers == 1 or starts == 1:
        outcomes = [solve(i) for i in range(starts)]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, starts)) as pool:
            outcomes = list(pool.map(solve, range(starts)))

    best_index = 0
    for i in range(1, starts):
        if outcomes[i][0].distance < outcomes[best_index][0].distance:
            best_index = i  # strict comparison: ties keep the lower index
    diagnostics = tuple(diag for diag, _ in outcomes)
    return outcomes[best_index][1], diagnostics


def _validate_target(target: np.ndarray, expected_size: int, n_params: int) -> None:
    if target.size != expected_size:
        raise ValueError(f"target has {target.size} samples, grid has {expected_size}")
    if not np.all(np.isfinite(target)):
        raise ValueError("target samples must be finite")
    if np.any(target < 0.0):
        raise ValueError("target samples must be >= 0")
    if not np.any(target > 0.0):
        raise ValueError("target needs at least one strictly positive sample")
    if target.size < n_params:
        raise ValueError(f"{target.size} samples cannot determine {n_params} parameters")


def _finish(outcome, diagnostics, what: str):
    if not any(d.converged for d in diagnostics):
        raise ConvergenceError(
            f"no {what} start converged within its iteration budget",
            result=outcome,
        )
    return outcome


def fit_1d(problem: FitProblem) -> FitResult:
    """Fit a single-axis plan of ``problem.order`` factors to 1D samples.

    Degenerate targets (all samples equal) are accepted; the expected
    solution is a plan with every |r| near zero, which reproduces a flat
    profile.  Raises ConvergenceError, carrying the best-effort result, if
    no start converges.
    """
    if problem.order is None or problem.order < 1:
        raise ValueError("1D fit needs order >= 1")
    if not isinstance(problem.grid, Grid1D):
        raise ValueError("1D fit needs a Grid1D")
    n = problem.order
    _validate_target(problem.target, len(problem.grid), 2 * n)
    w = np.broadcast_to(2.0 * problem.grid.zeta, (n, len(problem.grid)))
    model = _ProfileModel(np.array(w), problem.target)
    x, diagnostics = _run_multi_start(model, n, problem.options, _DEFAULT_STARTS_1D)

    plan = ExposurePlan(tuple(_params_to_factors(x, [0.0] * n)))
    distance = normalized_distance(problem.target, product_profile(plan, problem.grid).values)
    dense = Grid1D.regular(2000)
    peak = float(np.max(product_profile(plan, dense).values))
    result = FitResult(plan=plan, distance=distance, peak_density=peak,
                       starts=diagnostics)
    return _finish(result, diagnostics, "1D fit")


def fit_2d(problem: FitProblem) -> FitResult:
    """Fit a multi-direction plan to samples on a plane.

    The plan has ``steps_per_angle`` factors along each direction in
    ``problem.angles``, in order.  Raises ConvergenceError, carrying the
    best-effort result, if no start converges.
    """
    if not problem.angles or not problem.steps_per_angle or problem.steps_per_angle < 1:
        raise ValueError("2D fit needs a non-empty angle list and steps_per_angle >= 1")
    if not isinstance(problem.grid, Grid2D):
        raise ValueError("2D fit needs a Grid2D")
    thetas = [a for a in problem.angles for _ in range(problem.steps_per_angle)]
    n = len(thetas)
    target = problem.target
    if target.shape != problem.grid.shape:
        raise ValueError(f"target shape {target.shape} does not match the grid "
                         f"{problem.grid.shape}")
    _validate_target(target, target.size, 2 * n)
    zx, zy = problem.grid.mesh()
    w = np.stack([
        2.0 * (zx * math.cos(theta) + zy * math.sin(theta)).ravel()
        for theta in thetas
    ])
    model = _ProfileModel(w, target.ravel())
    x, diagnostics = _run_multi_start(model, n, problem.options, _DEFAULT_STARTS_2D)

    plan = ExposurePlan(tuple(_params_to_factors(x, thetas)))
    fitted = product_profile_2d(plan, problem.grid).values
    distance = normalized_distance(target, fitted)
    result = FitResult(plan=plan, distance=distance,
                       peak_density=float(np.max(fitted)), starts=diagnostics)
    return _finish(result, diagnostics, "2D fit")
