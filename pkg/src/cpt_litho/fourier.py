"""Harmonic content of plan profiles and of sampled targets.

A plan profile times its normalization prod_v (1 + 2*|r_v|) is a Laurent
polynomial in exp(2i*zeta) of degree n (the plan order):

    profile(zeta) * prod_v (1 + 2*|r_v|) = sum_{mu=-n}^{n} c_mu exp(2i*mu*zeta)

with c_{-mu} = conj(c_mu).  Two independent routes compute the c_mu: an
iterated trinomial convolution (the production path) and a direct sum over
index subsets (a combinatorial oracle).  Coefficients are stored without the
normalization; it is reapplied only when evaluating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import ExposurePlan

#: Largest plan length accepted by the subset-sum oracle (3**n pair growth).
SYMMETRIC_MAX_ORDER = 16


@dataclass(frozen=True)
class LaurentCoeffs:
    """One-sided coefficients c_0..c_order of a real-valued harmonic series.

    The represented function is

        c_0 + sum_{mu=1}^{order} (c_mu exp(2i*mu*zeta) + conj(c_mu) exp(-2i*mu*zeta))

    so negative harmonics are implied by conjugation and c_0 must be real.
    """

    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if c.shape != (self.order + 1,):
            raise ValueError(f"expected {self.order + 1} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("coefficients must be finite")
        if abs(c[0].imag) > 1e-12:
            raise ValueError(f"c_0 must be real within 1e-12, got {c[0]!r}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def evaluate(self, zeta, prefactor: float = 1.0) -> np.ndarray:
        """Series value at zeta (scalar or array), scaled by prefactor."""
        z = np.asarray(zeta, dtype=float)
        acc = np.full(z.shape, self.coeffs[0].real)
        for mu in range(1, self.order + 1):
            acc += 2.0 * np.real(self.coeffs[mu] * np.exp(2j * mu * z))
        return prefactor * acc

    def to_json_data(self) -> dict:
        return {
            "order": self.order,
            "coeffs": [
                {"mu": mu, "re": self.coeffs[mu].real, "im": self.coeffs[mu].imag}
                for mu in range(self.order + 1)
            ],
        }

    @classmethod
    def from_json_data(cls, data) -> "LaurentCoeffs":
        try:
            order = int(data["order"])
            entries = {int(e["mu"]): complex(float(e["re"]), float(e["im"]))
                       for e in data["coeffs"]}
        except (TypeError, KeyError, ValueError) as exc:
            raise ValueError(f"malformed coefficient JSON: {exc}") from exc
        if sorted(entries) != list(range(order + 1)):
            raise ValueError("coefficient JSON must carry mu = 0..order exactly once each")
        return cls(order, np.array([entries[mu] for mu in range(order + 1)]))


def product_normalization(plan: ExposurePlan) -> float:
    """prod_v (1 + 2*|r_v|), the factor removed from stored coefficients."""
    out = 1.0
    for f in plan:
        out *= 1.0 + 2.0 * abs(f.r)
    return out


def _require_single_direction(plan: ExposurePlan) -> None:
    if plan.common_theta() is None:
        raise ValueError("coefficients are defined along a single wave axis; "
                         "the plan mixes directions")


def product_coefficients(plan: ExposurePlan) -> LaurentCoeffs:
    """Coefficients by convolving the per-factor trinomials (conj r_v, 1, r_v).

    Each factor contributes conj(r_v)*w**-1 + 1 + r_v*w with w = exp(2i*zeta);
    the plan polynomial is the product, i.e. the n-fold convolution.
    """
    _require_single_direction(plan)
    poly = np.array([1.0 + 0j])
    for f in plan:
        poly = np.convolve(poly, np.array([np.conj(f.r), 1.0 + 0j, f.r]))
    n = plan.order
    c = np.array(poly[n:], dtype=complex)  # degrees 0..n
    c[0] = complex(c[0].real, 0.0)  # imaginary dust cancels pairwise
    return LaurentCoeffs(n, c)


def symmetric_coefficients(plan: ExposurePlan) -> LaurentCoeffs:
    """Coefficients by direct summation over disjoint index subsets.

    c_mu = sum over disjoint subsets A, B of {1..n} with |A| = |B| + mu of
    prod_{a in A} r_a * prod_{b in B} conj(r_b); all indices distinct.  This
    is a validation oracle for product_coefficients: it enumerates every
    subset pair with no pruning, so it is limited to short plans.
    """
    _require_single_direction(plan)
    n = plan.order
    if n > SYMMETRIC_MAX_ORDER:
        raise ValueError(
            f"plan length {n} exceeds {SYMMETRIC_MAX_ORDER}; the subset sum "
            "grows as 3**n, use product_coefficients instead"
        )
    rs = [complex(f.r) for f in plan]
    full = 1 << n
    # product of r over every index subset, built from the lowest set bit
    sub_prod = np.empty(full, dtype=complex)
    sub_prod[0] = 1.0
    for mask in range(1, full):
        low = mask & -mask
        sub_prod[mask] = sub_prod[mask ^ low] * rs[low.bit_length() - 1]
    bits = [bin(mask).count("1") for mask in range(full)]
    c = np.zeros(n + 1, dtype=complex)
    for a_mask in range(full):
        comp = (full - 1) ^ a_mask
        pa = sub_prod[a_mask]
        na = bits[a_mask]
        b_mask = comp
        while True:  # all submasks of the complement, empty set included
            mu = na - bits[b_mask]
            if mu >= 0:
                c[mu] += pa * np.conj(sub_prod[b_mask])
            if b_mask == 0:
                break
            b_mask = (b_mask - 1) & comp
    c[0] = complex(c[0].real, 0.0)
    return LaurentCoeffs(n, c)


def truncated_target_series(samples, n: int) -> LaurentCoeffs:
    """Interpolating harmonic series of 2n equally spaced target samples.

    The samples are taken over one period pi at zeta_nu = pi*nu/(2n) for
    nu = -n..n-1 (the fitting grid).  The discrete transform keeps harmonics
    mu = -n..n-1 of the base frequency 2; the lone mu = -n (Nyquist) weight
    is real for real samples and is stored split in half on c_n, so the
    conjugate-symmetric evaluation of :class:`LaurentCoeffs` reproduces the
    samples exactly at the sample points.
    """
    v = np.asarray(samples, dtype=float)
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    if v.shape != (2 * n,):
        raise ValueError(f"expected exactly {2 * n} samples, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("samples must be finite")
    spectrum = np.fft.fft(v)
    # bin k holds exp(+2pi i jk/2n); sample j sits at zeta_0 + pi*j/(2n) with
    # zeta_0 = -pi/2, so harmonic mu picks up the phase exp(-2i*mu*zeta_0) = (-1)**mu
    c = np.empty(n + 1, dtype=complex)
    for mu in range(n):
        c[mu] = (-1) ** mu * spectrum[mu] / (2 * n)
    nyquist = (-1) ** n * spectrum[n] / (2 * n)
    if abs(nyquist.imag) > 1e-9 * max(1.0, abs(nyquist.real)):
        raise ValueError("Nyquist weight of real samples should be real")
    c[n] = 0.5 * nyquist.real
    c[0] = complex(c[0].real, 0.0)
    return LaurentCoeffs(n, c)
