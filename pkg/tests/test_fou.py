import math

import numpy as np
import pytest
from scipy.stats import kstest

from homog_infer.fou import (FouSpec, cov_tail_coeff, covariance_power_integral,
                             fou_covariance, fou_kernel, fou_path, rho_table,
                             stationary_sigma2)
from homog_infer.gaussian import SeedSpec


def test_fouspec_sigma2_derived():
    spec = FouSpec(H=0.7, eps=0.01)
    assert spec.sigma2 == pytest.approx(2.0 / math.gamma(2.4), rel=1e-14)
    FouSpec(H=0.7, eps=0.01, sigma2=spec.sigma2)   # consistent value accepted
    with pytest.raises(ValueError):
        FouSpec(H=0.7, eps=0.01, sigma2=spec.sigma2 * (1 + 1e-9))


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7, 0.9])
def test_covariance_at_zero_is_one(H):
    assert fou_covariance(H, 0.0) == pytest.approx(1.0, abs=1e-10)


def test_covariance_exponential_at_half():
    for s in (0.2, 1.0, 4.0):
        assert fou_covariance(0.5, s) == pytest.approx(math.exp(-s), rel=1e-10)


def test_covariance_tail_matches_coefficient():
    s = 1e4
    ratio = fou_covariance(0.7, s) / (cov_tail_coeff(0.7) * s ** (2 * 0.7 - 2.0))
    assert abs(ratio - 1.0) < 0.01


def test_covariance_negative_tail_below_half():
    assert cov_tail_coeff(0.3) < 0
    assert fou_covariance(0.3, 200.0) < 0


def test_tail_coeff_values():
    assert cov_tail_coeff(0.75) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)
    for H in (0.6, 0.75, 0.9):
        assert cov_tail_coeff(H) == pytest.approx(1.0 / math.gamma(2 * H - 1.0),
                                                  rel=1e-10)
    with pytest.raises(ValueError):
        cov_tail_coeff(0.5)


@pytest.mark.parametrize("H", [0.3, 0.6, 0.85])
def test_rho_table_interpolation_budget(H):
    table = rho_table(H)
    rng = np.random.default_rng(5)
    pts = np.concatenate([rng.uniform(0, 2, 8), rng.uniform(2, 500, 8),
                          rng.uniform(500, 1.9e4, 4)])
    for s in pts:
        assert abs(table(float(s)) - fou_covariance(H, float(s))) < 1e-6


def test_covariance_power_integral_cauchy():
    # convergence of the numeric integral in its domain: the analytic-tail
    # completion makes successive windows agree
    for (H, q) in [(0.7, 5), (0.6, 4)]:
        a = covariance_power_integral(H, q, s_max=1e4)
        b = covariance_power_integral(H, q, s_max=2e4)
        assert abs(a - b) < 1e-6
    with pytest.raises(ValueError):
        covariance_power_integral(0.7, 1)   # exponent -0.6 >= -1: divergent


def test_covariance_integral_vanishes_below_half():
    # spectral density vanishes at the origin for H < 1/2, so the full
    # covariance integral is zero
    val = covariance_power_integral(0.3, 1)
    assert abs(val) < 1e-3


def test_fou_kernel_shape():
    assert fou_kernel(0.8, 0.0) == 0.0
    s = 1e3
    assert fou_kernel(0.8, s) * s ** (1.5 - 0.8) == pytest.approx(1.0, rel=0.02)
    # continuity across the asymptotic switch
    lo = fou_kernel(0.8, 49.9)
    hi = 49.9 ** (0.8 - 1.5)
    assert lo == pytest.approx(hi, rel=0.02)
    # small-s regime g ~ s^{H-1/2}
    r1 = fou_kernel(0.8, 1e-3) / 1e-3 ** 0.3
    r2 = fou_kernel(0.8, 1e-4) / 1e-4 ** 0.3
    assert r1 == pytest.approx(r2, rel=0.01)
    with pytest.raises(ValueError):
        fou_kernel(0.4, 1.0)


def test_fou_path_preconditions_and_determinism():
    spec = FouSpec(H=0.7, eps=0.02)
    with pytest.raises(ValueError):
        fou_path(spec, 100, spec.eps / 10.0, SeedSpec(1, 0))
    a = fou_path(spec, 200, spec.eps / 25.0, SeedSpec(1, 0))
    b = fou_path(spec, 200, spec.eps / 25.0, SeedSpec(1, 0))
    assert np.array_equal(a.values, b.values)


def test_fou_path_stationary_variance():
    spec = FouSpec(H=0.5, eps=0.01)
    dt = spec.eps / 50.0
    n = 10 ** 6
    path = fou_path(spec, n, dt, SeedSpec(7, 0))
    y = path.values
    # batch means over windows of 10 eps give an honest standard error for
    # the variance of a correlated sequence
    w = int(round(10 * spec.eps / dt))
    nb = n // w
    batches = (y[: nb * w] ** 2).reshape(nb, w).mean(axis=1)
    v = batches.mean()
    se = batches.std(ddof=1) / math.sqrt(nb)
    assert abs(v - 1.0) <= 3.0 * se


def test_fou_path_autocorrelation_matches_covariance():
    H, eps = 0.7, 0.01
    spec = FouSpec(H=H, eps=eps)
    dt = eps / 40.0
    lag = int(round(5 * eps / dt))
    n = 60_000
    reps = 60
    target = fou_covariance(H, 5.0)
    vals = np.empty(reps)
    for rep in range(reps):
        y = fou_path(spec, n, dt, SeedSpec(1234, rep)).values
        vals[rep] = np.dot(y[:-lag], y[lag:]) / (n - lag)
    mean = vals.mean()
    se = vals.std(ddof=1) / math.sqrt(reps)
    assert abs(mean - target) <= 4.0 * se


def test_fou_path_marginal_ks():
    # thinned by 10 eps in model time; pooled across replicates
    H, eps = 0.6, 0.01
    spec = FouSpec(H=H, eps=eps)
    dt = eps / 20.0
    stride = int(round(10 * eps / dt))
    per, reps = 2500, 40
    n = per * stride
    samples = np.concatenate([
        fou_path(spec, n, dt, SeedSpec(42, rep)).values[::stride]
        for rep in range(reps)])
    stat, pvalue = kstest(samples, "norm")
    assert pvalue > 1e-3


def test_fou_exponential_integrator_dt_consistency():
    # halving dt moves the lag-eps autocorrelation by less than its SE
    for H in (0.6, 0.9):
        spec = FouSpec(H=H, eps=0.02)
        est = {}
        for factor in (20, 40):
            dt = spec.eps / factor
            lag = factor
            n = 40_000
            reps = 30
            vals = np.empty(reps)
            for rep in range(reps):
                y = fou_path(spec, n, dt, SeedSpec(919, rep)).values
                vals[rep] = np.dot(y[:-lag], y[lag:]) / (n - lag)
            est[factor] = (vals.mean(), vals.std(ddof=1) / math.sqrt(reps))
        diff = abs(est[20][0] - est[40][0])
        se = math.hypot(est[20][1], est[40][1])
        assert diff <= 2.0 * se
