import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite_e import hermeval

from homog_infer.gaussian import (HermiteCoeffs, PathGrid, SeedSpec, fbm_path,
                                  fgn_autocov, fgn_increments, hermite_eval,
                                  hermite_series)


def test_hermite_low_orders():
    assert hermite_eval(0, 3.7) == 1.0
    assert hermite_eval(2, 0.5) == pytest.approx(-0.75, abs=1e-15)
    assert hermite_eval(3, 2.0) == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=19),
       st.floats(min_value=-5, max_value=5, allow_nan=False))
def test_hermite_recurrence(n, x):
    lhs = hermite_eval(n + 1, x)
    rhs = x * hermite_eval(n, x) - n * hermite_eval(n - 1, x)
    scale = max(1.0, abs(lhs))
    assert abs(lhs - rhs) <= 1e-10 * scale


def test_hermite_matches_numpy_hermite_e():
    # independent reference: numpy's probabilists' Hermite evaluation
    xs = np.linspace(-4, 4, 41)
    for n in range(8):
        coef = np.zeros(n + 1)
        coef[n] = 1.0
        np.testing.assert_allclose(hermite_eval(n, xs), hermeval(xs, coef),
                                   rtol=1e-12, atol=1e-12)


def test_hermite_series_examples():
    assert hermite_series(HermiteCoeffs.single(2), 0.0) == pytest.approx(-1.0)
    assert hermite_series(HermiteCoeffs.single(1, 2.0), 1.5) == pytest.approx(3.0)
    c13 = HermiteCoeffs((0.0, 1.0, 0.0, 1.0))
    assert hermite_series(c13, 1.0) == pytest.approx(-1.0)


def test_hermite_series_matches_numpy():
    c = HermiteCoeffs((0.0, 0.3, -1.2, 0.0, 0.7))
    xs = np.linspace(-3, 3, 17)
    np.testing.assert_allclose(hermite_series(c, xs), hermeval(xs, c.coeffs),
                               rtol=1e-12, atol=1e-12)


def test_hermite_coeffs_validation():
    with pytest.raises(ValueError):
        HermiteCoeffs((1.0, 1.0))      # c_0 != 0
    with pytest.raises(ValueError):
        HermiteCoeffs((0.0, 0.0))      # nothing nonzero
    c = HermiteCoeffs((0.0, 0.0, 3.0, 1.0))
    assert c.rank == 2
    assert c.max_order == 3
    assert c.norm_sq() == pytest.approx(9.0 * 2 + 1.0 * 6)
    assert not c.is_single_term()
    assert HermiteCoeffs.single(3).is_single_term()


def test_gaussian_product_moments():
    # jointly Gaussian pair with correlation r: E[H_m(X) H_n(Y)] is
    # n! r^n on the diagonal and 0 off it (checked to 4 standard errors)
    rng = SeedSpec(314159, 0).generator()
    n_draws = 10 ** 5
    for r in (0.2, 0.8):
        x = rng.standard_normal(n_draws)
        z = rng.standard_normal(n_draws)
        y = r * x + math.sqrt(1.0 - r * r) * z
        for mm in range(1, 5):
            for nn in range(1, 5):
                prod = hermite_eval(mm, x) * hermite_eval(nn, y)
                mean = prod.mean()
                se = prod.std(ddof=1) / math.sqrt(n_draws)
                target = math.factorial(nn) * r ** nn if mm == nn else 0.0
                assert abs(mean - target) <= 4.0 * se, (r, mm, nn)


def test_fgn_autocov_values():
    assert fgn_autocov(0.6, 0.5, 0) == pytest.approx(0.5 ** 1.2)
    assert fgn_autocov(0.5, 1.0, 1) == pytest.approx(0.0, abs=1e-15)
    assert fgn_autocov(0.5, 1.0, 7) == pytest.approx(0.0, abs=1e-15)
    # frozen: (|2|^{1.5} + 0 - 2)/2 = sqrt(2) - 1
    assert fgn_autocov(0.75, 1.0, 1) == pytest.approx(math.sqrt(2.0) - 1.0)


def test_fbm_determinism_and_streams():
    a = fbm_path(0.7, 500, 0.1, SeedSpec(99, 3))
    b = fbm_path(0.7, 500, 0.1, SeedSpec(99, 3))
    c = fbm_path(0.7, 500, 0.1, SeedSpec(99, 4))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.values[0] == 0.0
    assert len(a) == 500


def test_fbm_brownian_case_independent_increments():
    n = 2 ** 14
    path = fbm_path(0.5, n, 0.25, SeedSpec(2024, 0))
    inc = np.diff(path.values)
    r1 = np.dot(inc[:-1], inc[1:]) / (n - 2)
    se = 0.25 / math.sqrt(n - 2)   # sd of lag-1 product ~ var(inc) = dt
    assert abs(r1) <= 3.0 * se
    v = inc.var(ddof=1)
    assert abs(v - 0.25) <= 4.0 * 0.25 * math.sqrt(2.0 / (n - 1))


@pytest.mark.parametrize("H", [0.3, 0.6, 0.9])
def test_fbm_increment_autocovariance(H):
    n, reps = 2 ** 12, 40
    lags = np.arange(6)
    acc = np.zeros((reps, len(lags)))
    for rep in range(reps):
        path = fbm_path(H, n + 1, 1.0, SeedSpec(555, rep))
        inc = np.diff(path.values)
        for k in lags:
            acc[rep, k] = np.dot(inc[: n - k], inc[k:]) / (n - k)
    mean = acc.mean(axis=0)
    se = acc.std(axis=0, ddof=1) / math.sqrt(reps)
    target = fgn_autocov(H, 1.0, lags)
    assert np.all(np.abs(mean - target) <= 4.0 * se)


def test_fbm_terminal_variance_rough_case():
    # var of the endpoint matches t^{2H} (t = (n-1) dt since the path
    # starts at zero)
    H, n, reps = 0.3, 2 ** 12, 300
    finals = np.array([fbm_path(H, n, 1.0, SeedSpec(77, r)).values[-1]
                       for r in range(reps)])
    v = finals.var(ddof=1)
    target = float(n - 1) ** (2 * H)
    se = v * math.sqrt(2.0 / (reps - 1))
    assert abs(v - target) <= 3.0 * se


def test_pathgrid_validation():
    with pytest.raises(ValueError):
        PathGrid(0.0, 0.0, np.array([1.0]))
    with pytest.raises(ValueError):
        PathGrid(0.0, 1.0, np.array([]))
    g = PathGrid(1.0, 0.5, np.array([0.0, 1.0, 2.0]))
    np.testing.assert_allclose(g.times(), [1.0, 1.5, 2.0])


def test_fgn_increments_requires_positive_count():
    with pytest.raises(ValueError):
        fgn_increments(0.5, 0, 1.0, SeedSpec(1, 0).generator())
