"""Driven three-level dynamics of the {g1, g2, e1} system.

Basis order is (g1, g2, e1); density matrices are plain complex 3x3 numpy
arrays.  Two resonant fields couple the ground states to the common excited
state: ``omega_s`` drives g2 <-> e1 and ``omega_r`` drives g1 <-> e1.  With
that assignment the superposition

    (omega_s*|g1> - omega_r*|g2>) / sqrt(|omega_s|**2 + |omega_r|**2)

is decoupled from both fields (a dark state), so optical pumping empties its
orthogonal bright partner.  Wherever ``omega_s`` vanishes the dark state is
pure g2 and the retained g1 population is pinned to zero regardless of how
strong the extra coherence damping ``gamma_d`` is; that pinning is what makes
the zeros of a multi-exposure pattern immune to decoherence.

The master equation integrated here is

    drho/dt = -i[H, rho] + gamma1*D[|g1><e1|]rho + gamma2*D[|g2><e1|]rho
              - gamma_d * (off-diagonal damping)

with H = (omega_r*|e1><g1| + omega_s*|e1><g2| + h.c.)/2 on resonance and
D[L]rho = L rho L+ - {L+L, rho}/2.  The ``gamma_d`` term subtracts
gamma_d*rho_ij from every coherence (i != j) on top of the decay-induced
damping.  All rates are in units of a chosen total linewidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError, NumericError

G1, G2, E1 = 0, 1, 2

#: Relative singular-value threshold below which the generator's kernel is
#: considered to contain a direction (see steady_state).
_NULL_SPACE_RTOL = 1e-12


@dataclass(frozen=True)
class LambdaParams:
    """Fields and rates of the three-level system.

    omega_s : complex Rabi amplitude driving g2 <-> e1
    omega_r : complex Rabi amplitude driving g1 <-> e1
    gamma1  : e1 -> g1 population decay rate
    gamma2  : e1 -> g2 population decay rate
    gamma_d : extra damping applied to every coherence
    """

    omega_s: complex = 0.0
    omega_r: complex = 0.0
    gamma1: float = 0.5
    gamma2: float = 0.5
    gamma_d: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega_s", complex(self.omega_s))
        object.__setattr__(self, "omega_r", complex(self.omega_r))
        for name in ("gamma1", "gamma2", "gamma_d"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("omega_s", "omega_r"):
            value = getattr(self, name)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite")

    def with_fields(self, omega_s: complex, omega_r: complex) -> "LambdaParams":
        """Same rates, different drive amplitudes."""
        return replace(self, omega_s=omega_s, omega_r=omega_r)


def ground_state() -> np.ndarray:
    """|g1><g1|, the state every exposure step starts from."""
    rho = np.zeros((3, 3), dtype=complex)
    rho[G1, G1] = 1.0
    return rho


def dark_state(omega_s: complex, omega_r: complex) -> np.ndarray:
    """Density matrix of the field-decoupled superposition of g1 and g2."""
    norm2 = abs(omega_s) ** 2 + abs(omega_r) ** 2
    if norm2 == 0.0:
        raise ValueError("dark state undefined with both fields zero")
    psi = np.array([omega_s, -omega_r, 0.0], dtype=complex) / math.sqrt(norm2)
    return np.outer(psi, psi.conj())


def validate_density_matrix(rho: np.ndarray, *, herm_tol: float = 1e-10,
                            trace_tol: float = 1e-10, eig_floor: float = -1e-9) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return rho as an array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ValueError(f"density matrix must be 3x3, got shape {rho.shape}")
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError("density matrix contains non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(rho.trace().real - 1.0) > trace_tol or abs(rho.trace().imag) > trace_tol:
        raise ValueError("density matrix trace differs from 1 beyond tolerance")
    if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < eig_floor:
        raise ValueError("density matrix has an eigenvalue below the positivity floor")
    return rho


def _vec(rho: np.ndarray) -> np.ndarray:
    # column stacking: vec(A rho B) = (B.T kron A) vec(rho)
    return np.asarray(rho, dtype=complex).reshape(9, order="F")


def _unvec(v: np.ndarray) -> np.ndarray:
    return v.reshape((3, 3), order="F")


# column-major vec indices of the diagonal entries rho[0,0], rho[1,1], rho[2,2]
_DIAG_IDX = (0, 4, 8)
_TRACE_ROW = np.zeros(9, dtype=complex)
_TRACE_ROW[list(_DIAG_IDX)] = 1.0


def build_liouvillian(p: LambdaParams) -> np.ndarray:
    """9x9 generator acting on column-stacked density matrices."""
    h = np.zeros((3, 3), dtype=complex)
    h[E1, G1] = 0.5 * p.omega_r
    h[G1, E1] = 0.5 * np.conj(p.omega_r)
    h[E1, G2] = 0.5 * p.omega_s
    h[G2, E1] = 0.5 * np.conj(p.omega_s)

    ident = np.eye(3, dtype=complex)
    gen = -1j * (np.kron(ident, h) - np.kron(h.T, ident))

    for rate, target in ((p.gamma1, G1), (p.gamma2, G2)):
        if rate == 0.0:
            continue
        c = np.zeros((3, 3), dtype=complex)
        c[target, E1] = 1.0
        cdc = c.conj().T @ c
        gen += rate * (np.kron(c.conj(), c)
                       - 0.5 * (np.kron(ident, cdc) + np.kron(cdc.T, ident)))

    if p.gamma_d > 0.0:
        damp = np.full(9, -p.gamma_d, dtype=complex)
        damp[list(_DIAG_IDX)] = 0.0  # populations untouched, trace preserved
        gen += np.diag(damp)
    return gen


def _rk4_step_matrix(gen: np.ndarray, h: float) -> np.ndarray:
    # One classical Runge-Kutta step of a linear generator is exactly the
    # degree-4 Taylor polynomial of expm(h*gen); precomputing it turns each
    # step into a single 9x9 matvec.
    ident = np.eye(gen.shape[0], dtype=complex)
    hg = h * gen
    step = ident + hg / 4.0
    step = ident + (hg / 3.0) @ step
    step = ident + (hg / 2.0) @ step
    step = ident + hg @ step
    return step


def evolve(p: LambdaParams, rho0: np.ndarray, t: float, dt: float = 1e-3) -> np.ndarray:
    """Propagate rho0 for a duration t with classical 4th-order steps <= dt.

    The output is re-hermitized and trace-renormalized; accumulated drift is
    far below 1e-9 per unit time at the default step.
    """
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be finite and > 0, got {dt!r}")
    rho = validate_density_matrix(rho0)
    if t == 0.0:
        return rho.copy()
    steps = max(1, math.ceil(t / dt - 1e-12))
    step = _rk4_step_matrix(build_liouvillian(p), t / steps)
    v = _vec(rho)
    for _ in range(steps):
        v = step @ v
    if not np.all(np.isfinite(v.view(float))):
        raise NumericError("integration produced non-finite values")
    out = _unvec(v)
    out = 0.5 * (out + out.conj().T)
    trace = out.trace().real
    if not (math.isfinite(trace) and trace > 0.0):
        raise NumericError(f"integration lost the trace (tr = {trace!r})")
    return out / trace


def _steady_from_null_space(gen: np.ndarray) -> np.ndarray | None:
    """Stationary state via a linear solve, or None when it is not unique.

    Solves the 9x9 system augmented with the trace row; only trusted when
    the generator's kernel is one-dimensional, the residual is tiny and the
    result is a physical state.
    """
    sv = np.linalg.svd(gen, compute_uv=False)
    scale = sv[0] if sv[0] > 0.0 else 1.0
    if int(np.sum(sv < scale * _NULL_SPACE_RTOL)) != 1:
        return None
    a = np.vstack([gen, _TRACE_ROW])
    b = np.zeros(10, dtype=complex)
    b[9] = 1.0
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    if float(np.linalg.norm(gen @ x)) > 1e-8 * max(1.0, scale):
        return None
    rho = _unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    trace = rho.trace().real
    if not (math.isfinite(trace) and trace > 0.5):
        return None
    rho = rho / trace
    if np.min(np.linalg.eigvalsh(rho)) < -1e-9:
        return None
    return rho


def steady_state(p: LambdaParams, *, tol: float = 1e-10, dt: float = 1e-3,
                 max_steps: int = 10 ** 6) -> np.ndarray:
    """Long-time limit of the dynamics started from |g1><g1|.

    That limit is the operational definition; a null-space linear solve is
    used as an accelerator when the stationary state is unique.  Otherwise
    (for example with one field exactly zero and the matching decay branch
    closed) the limit is taken by direct integration from the g1 ground
    state until ||drho/dt|| <= tol.

    Raises ConvergenceError (carrying the residual) if the integration
    budget of ``max_steps`` steps of size ``dt`` is exhausted first.
    """
    if p.gamma1 + p.gamma2 <= 0.0:
        raise ValueError("steady state needs gamma1 + gamma2 > 0")
    gen = build_liouvillian(p)
    rho = _steady_from_null_space(gen)
    if rho is not None:
        return rho
    return _steady_by_integration(gen, ground_state(), tol, dt, max_steps)


def _steady_by_integration(gen: np.ndarray, rho0: np.ndarray, tol: float,
                           dt: float, max_steps: int) -> np.ndarray:
    v = _vec(rho0)
    residual = float(np.linalg.norm(gen @ v))
    if residual <= tol:
        return np.asarray(rho0, dtype=complex)
    step = _rk4_step_matrix(gen, dt)
    check_every = 200
    done = 0
    while done < max_steps:
        block = min(check_every, max_steps - done)
        for _ in range(block):
            v = step @ v
        done += block
        if not np.all(np.isfinite(v.view(float))):
            raise NumericError("steady-state integration produced non-finite values")
        residual = float(np.linalg.norm(gen @ v))
        if residual <= tol:
            rho = _unvec(v)
            rho = 0.5 * (rho + rho.conj().T)
            return rho / rho.trace().real
    raise ConvergenceError(
        f"steady state not reached within {max_steps} steps of {dt}"
        f" (||drho/dt|| = {residual:.3e}, tol = {tol:.1e})",
        residual=residual,
    )


def quench_retention(rho: np.ndarray, gamma1: float, gamma2: float) -> float:
    """Fraction retained in g1 once the fields quench and e1 finishes decaying.

    The excited population splits between the ground states with branching
    gamma1/(gamma1+gamma2), so the retained share is
    rho_g1g1 + gamma1/(gamma1+gamma2) * rho_e1e1.
    """
    rho = validate_density_matrix(rho)
    if not (gamma1 >= 0.0 and gamma2 >= 0.0):
        raise ValueError("decay rates must be >= 0")
    pe = rho[E1, E1].real
    pg1 = rho[G1, G1].real
    if gamma1 + gamma2 <= 0.0:
        if pe > 1e-12:
            raise ValueError("excited population cannot decay with both rates zero")
        value = pg1
    else:
        value = pg1 + gamma1 / (gamma1 + gamma2) * pe
    # rounding guard only; inputs are validated states
    return min(max(value, 0.0), 1.0)


def unit_step_retention(s: complex, r: complex, p: LambdaParams) -> float:
    """Retention of one exposure step: pump to stationarity, then quench.

    ``s`` and ``r`` override the drive amplitudes of ``p`` (its rates are
    kept).  Both fields zero means nothing is pumped at all, so the atom
    stays in g1 and the retention is exactly 1.
    """
    s = complex(s)
    r = complex(r)
    if s == 0 and r == 0:
        return 1.0
    rho = steady_state(p.with_fields(s, r))
    return quench_retention(rho, p.gamma1, p.gamma2)
