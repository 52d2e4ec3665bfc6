"""Exposure plans built from standing-wave modulation factors.

Each exposure step imprints a fringe on the retained ground-state density.
The step is summarized by a single complex coefficient ``r`` with
``|r| <= 1/2`` and an in-plane propagation direction ``theta``: along the
wave axis the step multiplies the density by

    (1 + 2*Re(r * exp(2i*zeta))) / (1 + 2*|r|)

where ``zeta = k0*z`` is the dimensionless position.  ``|r|`` sets the
fringe visibility (1/2 is a full-contrast null) and ``arg(r)`` sets the
fringe phase.  A plan is an ordered sequence of such factors; profiles of a
plan are products of its factor fringes and are evaluated in
:mod:`cpt_litho.pattern`.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

#: Physical ceiling on the modulation coefficient magnitude.
R_MAX = 0.5

# Slack for magnitudes that are 1/2 up to floating-point noise (e.g. built
# from sin(u)**2 transforms).  Anything above is rejected, never clamped.
_R_TOL = 1e-12


@dataclass(frozen=True)
class StandingWaveFactor:
    """One exposure step: modulation coefficient ``r`` and direction ``theta``.

    ``theta`` is canonicalized to ``[0, pi)``.  A standing wave along
    ``theta + pi`` is the same physical wave traversed in the opposite
    sense, which reverses the sign convention of the fringe phase, so the
    coefficient is conjugated whenever the direction is folded by ``pi``.
    The fringe profile is therefore exactly preserved by canonicalization.
    """

    r: complex
    theta: float = 0.0

    def __post_init__(self):
        r = complex(self.r)
        theta = float(self.theta)
        if not (math.isfinite(r.real) and math.isfinite(r.imag) and math.isfinite(theta)):
            raise ValueError("factor fields must be finite")
        if abs(r) > R_MAX + _R_TOL:
            raise ValueError(
                f"|r| = {abs(r):.12g} exceeds the physical bound 1/2; "
                "build factors with |r| <= 1/2"
            )
        folds = math.floor(theta / math.pi)
        theta -= folds * math.pi
        if theta >= math.pi:  # rounding right at the fold boundary
            theta -= math.pi
            folds += 1
        if theta < 0.0:
            theta = 0.0
        if folds % 2:
            r = r.conjugate()
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)

    @property
    def magnitude(self) -> float:
        return abs(self.r)


@dataclass(frozen=True)
class ExposurePlan:
    """Ordered sequence of standing-wave factors, one per exposure step."""

    factors: tuple[StandingWaveFactor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("an exposure plan needs at least one factor")
        for f in factors:
            if not isinstance(f, StandingWaveFactor):
                raise TypeError(f"plan entries must be StandingWaveFactor, got {type(f)!r}")
        object.__setattr__(self, "factors", factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self) -> Iterator[StandingWaveFactor]:
        return iter(self.factors)

    def __getitem__(self, index):
        return self.factors[index]

    @property
    def order(self) -> int:
        """Number of exposure steps, i.e. the resolution-enhancement order."""
        return len(self.factors)

    def common_theta(self) -> float | None:
        """The direction shared by every factor, or None if directions mix."""
        thetas = {f.theta for f in self.factors}
        if len(thetas) == 1:
            return next(iter(thetas))
        return None


def uniform_phase_plan(n: int) -> ExposurePlan:
    """Full-visibility plan whose v-th fringe is phase stepped by 2*pi*(v-1)/n.

    The factors are r_v = -(1/2) * exp(2i*pi*(v-1)/n) along theta = 0.  The
    product of the n fringes is a single fringe at n times the base spatial
    frequency, sin(n*zeta)**2 / 4**(n-1); see
    :func:`cpt_litho.pattern.closed_form_uniform`.
    """
    if n < 1:
        raise ValueError(f"plan order must be >= 1, got {n}")
    return ExposurePlan(tuple(
        StandingWaveFactor(-0.5 * cmath.exp(2j * math.pi * v / n)) for v in range(n)
    ))


def point_plan(n: int) -> ExposurePlan:
    """Plan of n identical full-visibility factors r = +1/2.

    Every step multiplies the density by cos(zeta)**2, so the product is the
    point-spread fringe cos(zeta)**(2n) concentrated at zeta = 0.
    """
    if n < 1:
        raise ValueError(f"plan order must be >= 1, got {n}")
    return ExposurePlan(tuple(StandingWaveFactor(0.5 + 0j) for _ in range(n)))


def rotated_plan(angles: Sequence[float], per_angle: Sequence[ExposurePlan]) -> ExposurePlan:
    """Concatenate per-direction plans, stamping each factor with its direction.

    ``angles[i]`` is applied to every factor of ``per_angle[i]``; the result
    is the flat concatenation in the given order.
    """
    if len(angles) != len(per_angle):
        raise ValueError("angles and per_angle must have the same length")
    factors: list[StandingWaveFactor] = []
    for theta, plan in zip(angles, per_angle):
        factors.extend(StandingWaveFactor(f.r, theta) for f in plan)
    return ExposurePlan(tuple(factors))


@dataclass(frozen=True)
class BeamRealization:
    """Two-beam realization of one factor.

    ``a`` and ``b`` are the forward and backward beam amplitudes of the
    partial-visibility standing wave (``a`` normalized to 1, ``a >= b``),
    ``phase`` is the fringe phase of its intensity pattern
    ``a**2 + b**2 + 2*a*b*cos(2*zeta + phase)``, and ``r_amplitude`` is the
    amplitude scale sqrt(2*a*b) of the full-visibility companion wave whose
    intensity modulation matches the ac component 2*a*b of the first.
    """

    a: float
    b: float
    phase: float
    r_amplitude: float

    def factor(self, theta: float = 0.0) -> StandingWaveFactor:
        """Reconstruct the modulation factor this pair of beams produces."""
        mag = self.a * self.b / (self.a ** 2 + self.b ** 2)
        return StandingWaveFactor(mag * cmath.exp(1j * self.phase), theta)


def realize_factor(f: StandingWaveFactor) -> BeamRealization:
    """Beam amplitudes whose interference reproduces the factor's fringe.

    With ``a = 1`` the backward amplitude solves b/(1 + b**2) = |r| (the
    root with b <= a), which makes the normalized intensity pattern
    (a**2 + b**2 + 2ab*cos(2*zeta + arg r)) / (a + b)**2 equal the factor
    profile.  The stored phase is arg(r): for a dark fringe written as
    -(1/2)*exp(i*phi) the intensity maximum sits where the retained density
    dips, so the physical standing-wave phase is phi + pi.
    """
    m = abs(complex(f.r))
    if m > R_MAX + _R_TOL:  # unreachable for constructed factors; keep loud
        raise ValueError(f"|r| = {m:.12g} exceeds 1/2")
    if m == 0.0:
        b = 0.0
        phase = 0.0
    else:
        b = (1.0 - math.sqrt(max(0.0, 1.0 - 4.0 * m * m))) / (2.0 * m)
        phase = cmath.phase(f.r)
    return BeamRealization(a=1.0, b=b, phase=phase, r_amplitude=math.sqrt(2.0 * b))


def plan_to_json(plan: ExposurePlan) -> list[dict]:
    """Plain-data form of a plan: one {"re", "im", "theta"} object per factor."""
    return [{"re": f.r.real, "im": f.r.imag, "theta": f.theta} for f in plan]


def plan_from_json(data) -> ExposurePlan:
    """Rebuild a plan from the list-of-objects form produced by plan_to_json."""
    if not isinstance(data, list):
        raise ValueError("plan JSON must be a list of factor objects")
    factors = []
    for i, entry in enumerate(data):
        try:
            r = complex(float(entry["re"]), float(entry["im"]))
            theta = float(entry.get("theta", 0.0))
        except (TypeError, KeyError, ValueError) as exc:
            raise ValueError(f"factor {i}: expected keys re/im/theta, got {entry!r}") from exc
        factors.append(StandingWaveFactor(r, theta))
    return ExposurePlan(tuple(factors))


def save_plan(plan: ExposurePlan, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan_to_json(plan), fh, indent=2)
        fh.write("\n")


def load_plan(path) -> ExposurePlan:
    with open(path, "r", encoding="utf-8") as fh:
        return plan_from_json(json.load(fh))
