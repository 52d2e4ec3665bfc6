"""Coefficient routes checked against each other and against closed forms."""

import math

import numpy as np
import pytest

from cpt_litho.fields import ExposurePlan, StandingWaveFactor, point_plan, rotated_plan, uniform_phase_plan
from cpt_litho.fourier import (
    SYMMETRIC_MAX_ORDER,
    LaurentCoeffs,
    product_coefficients,
    product_normalization,
    symmetric_coefficients,
    truncated_target_series,
)
from cpt_litho.pattern import Grid1D, product_profile


def _random_plan(rng, n):
    return ExposurePlan(tuple(
        StandingWaveFactor(0.5 * rng.random() * np.exp(2j * math.pi * rng.random()))
        for _ in range(n)
    ))


def _sample_points(n):
    return -math.pi / 2 + math.pi * np.arange(2 * n) / (2 * n)


def test_coeffs_validation():
    with pytest.raises(ValueError):
        LaurentCoeffs(-1, np.array([], dtype=complex))
    with pytest.raises(ValueError):
        LaurentCoeffs(2, np.array([1.0, 0.5j]))
    with pytest.raises(ValueError):
        LaurentCoeffs(1, np.array([1e-3j, 0.5]))  # c_0 not real
    with pytest.raises(ValueError):
        LaurentCoeffs(1, np.array([1.0, math.nan]))
    LaurentCoeffs(1, np.array([1.0, 0.5j]))  # higher coefficients may be complex


def test_uniform_plan_closed_form_coefficients():
    # sin(n z)**2 / 4**(n-1) = 2**(1-n)/2**n - 2*Re(2**-n * e**(2i n z))/2**n
    for n in range(1, 9):
        got = product_coefficients(uniform_phase_plan(n))
        want = np.zeros(n + 1, dtype=complex)
        want[0] = 2.0 ** (1 - n)
        want[n] = -(2.0 ** -n)
        np.testing.assert_allclose(got.coeffs, want, atol=1e-15)
        assert product_normalization(uniform_phase_plan(n)) == pytest.approx(2.0 ** n, rel=1e-15)


def test_point_plan_binomial_coefficients():
    # cos(z)**(2n) expands to binomial weights C(2n, n-mu) / 4**n
    for n in range(1, 7):
        got = product_coefficients(point_plan(n))
        want = np.array([math.comb(2 * n, n - mu) / 2.0 ** n for mu in range(n + 1)])
        np.testing.assert_allclose(got.coeffs, want, atol=1e-14)


def test_routes_agree_on_random_plans():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3, 5, 8, 10):
        plan = _random_plan(rng, n)
        a = product_coefficients(plan).coeffs
        b = symmetric_coefficients(plan).coeffs
        scale = max(1.0, np.abs(a).max())
        assert np.max(np.abs(a - b)) <= 1e-12 * scale


def test_coefficients_reproduce_profile():
    rng = np.random.default_rng(12)
    grid = Grid1D(np.sort(rng.uniform(-2.0, 2.0, 37)))
    for n in (1, 3, 6):
        plan = _random_plan(rng, n)
        series = product_coefficients(plan)
        pref = 1.0 / product_normalization(plan)
        direct = product_profile(plan, grid).values
        np.testing.assert_allclose(series.evaluate(grid.zeta, pref), direct, atol=1e-13)


def test_symmetric_route_rejects_long_plans():
    plan = ExposurePlan(tuple(StandingWaveFactor(0.1) for _ in range(SYMMETRIC_MAX_ORDER + 1)))
    with pytest.raises(ValueError):
        symmetric_coefficients(plan)


def test_routes_reject_mixed_directions():
    mixed = rotated_plan([0.0, 0.5], [point_plan(1), point_plan(1)])
    with pytest.raises(ValueError):
        product_coefficients(mixed)
    with pytest.raises(ValueError):
        symmetric_coefficients(mixed)


def test_truncation_recovers_band_limited_series():
    rng = np.random.default_rng(13)
    for n in (1, 2, 5, 10):
        c_true = np.empty(n + 1, dtype=complex)
        c_true[0] = rng.normal()
        for mu in range(1, n):
            c_true[mu] = rng.normal() + 1j * rng.normal()
        c_true[n] = rng.normal()  # sampling at 2n points aliases the top harmonic
        zeta = _sample_points(n)
        vals = np.full(2 * n, c_true[0].real)
        for mu in range(1, n + 1):
            vals += 2.0 * np.real(c_true[mu] * np.exp(2j * mu * zeta))
        got = truncated_target_series(vals, n)
        np.testing.assert_allclose(got.coeffs, c_true, atol=1e-12)


def test_truncation_matches_direct_transform():
    rng = np.random.default_rng(14)
    n = 10
    vals = rng.random(2 * n)
    got = truncated_target_series(vals, n).coeffs
    zeta = _sample_points(n)
    want = np.empty(n + 1, dtype=complex)
    for mu in range(n + 1):
        want[mu] = np.sum(vals * np.exp(-2j * mu * zeta)) / (2 * n)
    want[n] *= 0.5  # shared between +n and -n so conjugate evaluation interpolates
    np.testing.assert_allclose(got, want, atol=1e-13)


def test_truncation_interpolates_any_samples():
    # even for non-harmonic data the series passes through every sample
    rng = np.random.default_rng(15)
    for n in (2, 7, 10):
        vals = rng.random(2 * n)
        series = truncated_target_series(vals, n)
        zeta = _sample_points(n)
        np.testing.assert_allclose(series.evaluate(zeta), vals, atol=1e-12)


def test_truncation_validation():
    with pytest.raises(ValueError):
        truncated_target_series(np.zeros(5), 3)
    with pytest.raises(ValueError):
        truncated_target_series(np.zeros(0), 0)
    with pytest.raises(ValueError):
        truncated_target_series(np.array([0.0, math.inf, 0.0, 0.0]), 2)


def test_json_round_trip():
    rng = np.random.default_rng(16)
    plan = _random_plan(rng, 4)
    series = product_coefficients(plan)
    clone = LaurentCoeffs.from_json_data(series.to_json_data())
    assert clone.order == series.order
    np.testing.assert_array_equal(clone.coeffs, series.coeffs)


def test_json_rejects_malformed_payloads():
    good = product_coefficients(point_plan(2)).to_json_data()
    missing = dict(good, coeffs=good["coeffs"][1:])
    with pytest.raises(ValueError):
        LaurentCoeffs.from_json_data(missing)
    dupe = dict(good, coeffs=good["coeffs"][:-1] + [good["coeffs"][0]])
    with pytest.raises(ValueError):
        LaurentCoeffs.from_json_data(dupe)
    with pytest.raises(ValueError):
        LaurentCoeffs.from_json_data({"order": 1})
    with pytest.raises(ValueError):
        LaurentCoeffs.from_json_data({"order": 1, "coeffs": [{"mu": 0, "re": 1.0}]})
