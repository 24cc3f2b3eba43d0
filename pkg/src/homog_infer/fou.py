"""Stationary fractional Ornstein-Uhlenbeck process at a fast time scale.

The fast variable solves  dY = -(1/eps) Y dt + (sigma/eps^H) dB^H  with
sigma^2 = 2/Gamma(2H+1), which normalizes the stationary variance to one.
Its unit-speed covariance rho(s) = E[Y_0 Y_s] is computed by quadrature of
the spectral representation

    rho(s) = (2 sin(pi H)/pi) * int_0^inf cos(s x) x^{1-2H} / (1+x^2) dx,

valid for every H in (0,1), and decays like kappa_H s^{2H-2} with
kappa_H = sigma^2 H (2H-1) (negative for H < 1/2, equal to 1/Gamma(2H-1)
for H > 1/2).

For H > 1/2 the process also has a moving-average representation against a
standard Brownian motion with kernel eps^{-1/2} g((t-s)/eps), where
g(s) = e^{-s} int_0^s e^v v^{H-3/2} dv; ``fou_kernel`` evaluates g.  The
kernel carries a normalization constant p with
p^2 = 1/(beta(H-1/2, 2-2H) Gamma(2H-1)), recorded here for reference; no
operation in this package consumes it.
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar
from scipy.signal import lfilter
from scipy.special import gamma as _gamma

from .gaussian import PathGrid, SeedSpec, fgn_increments
from .numerics import QuadratureError


def stationary_sigma2(H: float) -> float:
    """sigma^2 = 2/Gamma(2H+1), making the stationary variance exactly 1."""
    return 2.0 / _gamma(2.0 * H + 1.0)


def cov_tail_coeff(H: float) -> float:
    """Leading coefficient of the covariance tail, rho(s) ~ coeff * s^{2H-2}.

    Equals sigma^2 H (2H-1): positive and equal to 1/Gamma(2H-1) for
    H > 1/2, negative for H < 1/2.  H = 1/2 is rejected (the coefficient
    crosses zero; the covariance is then exponential, not algebraic).
    """
    if not 0.0 < H < 1.0:
        raise ValueError("H must lie in (0,1)")
    if abs(H - 0.5) < 1e-12:
        raise ValueError("tail coefficient is degenerate at H = 1/2")
    return stationary_sigma2(H) * H * (2.0 * H - 1.0)


@dataclass(frozen=True)
class FouSpec:
    """Fast-process parameters: Hurst index H, scale separation eps.

    ``sigma2`` is derived; constructing with an inconsistent value raises.
    """

    H: float
    eps: float
    sigma2: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not 0.0 < self.H < 1.0:
            raise ValueError("H must lie in (0,1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        s2 = stationary_sigma2(self.H)
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", s2)
        elif abs(self.sigma2 / s2 - 1.0) > 1e-12:
            raise ValueError("sigma2 must equal 2/Gamma(2H+1)")


def fou_covariance(H: float, s: float, rel_tol: float = 1e-8) -> float:
    """Unit-speed stationary covariance rho(s) = E[Y_0 Y_s], s >= 0.

    Adaptive oscillatory quadrature of the spectral integral; the achieved
    error is checked against rel_tol (with a 1e-11 absolute floor near the
    zero crossings of rho).  When the infinite-range Fourier rule cannot
    certify the tolerance, the tail is retried on a finite range with a
    two-term integration-by-parts remainder, which carries an analytic
    error bound.
    """
    if not 0.0 < H < 1.0:
        raise ValueError("H must lie in (0,1)")
    if s < 0:
        raise ValueError("s must be nonnegative (covariance is even)")
    pref = 2.0 * np.sin(np.pi * H) / np.pi
    expo = 1.0 - 2.0 * H

    def g(x):
        if x <= 0.0:
            return 0.0
        return x ** expo / (1.0 + x * x)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if s == 0.0:
            v1, e1 = integrate.quad(g, 0, 1, epsabs=1e-14, epsrel=1e-12, limit=300)
            v2, e2 = integrate.quad(g, 1, np.inf, epsabs=1e-14, epsrel=1e-12,
                                    limit=300)
        else:
            v1, e1 = integrate.quad(g, 0, 1, weight="cos", wvar=s,
                                    epsabs=1e-14, epsrel=1e-12, limit=500)
            v2, e2 = integrate.quad(g, 1, np.inf, weight="cos", wvar=s,
                                    epsabs=1e-14, epsrel=1e-12, limit=500,
                                    limlst=300)
        value = pref * (v1 + v2)
        err = pref * (abs(e1) + abs(e2))
        if s > 0.0 and err > rel_tol * abs(value) + 1e-11:
            # certified fallback: finite-range Fourier rule plus the first
            # two integration-by-parts terms of the tail; the cut X is set
            # so the |g''|-based remainder bound is below 1e-11
            X = max(100.0, (24.0 / (s ** 3 * 1e-11)) ** (1.0 / (2.0 - expo)))
            X = min(X, 1e7)
            v2, e2 = integrate.quad(g, 1, X, weight="cos", wvar=s,
                                    epsabs=1e-14, epsrel=1e-12, limit=1500)
            gX = X ** expo / (1.0 + X * X)
            dgX = (expo * X ** (expo - 1.0) * (1.0 + X * X)
                   - X ** expo * 2.0 * X) / (1.0 + X * X) ** 2
            tail = -gX * np.sin(s * X) / s - dgX * np.cos(s * X) / s ** 2
            d2_bound = 12.0 * X ** (expo - 2.0)
            value = pref * (v1 + v2 + tail)
            err = pref * (abs(e1) + abs(e2) + 2.0 * d2_bound / s ** 3)
    if err > rel_tol * abs(value) + 1e-11:
        raise QuadratureError(
            f"covariance quadrature at s={s:g} reached error {err:.2e} "
            f"(target {rel_tol:.0e} relative)", value, err)
    return value


class RhoTable:
    """Memoized rho on a geometric grid with monotone-spline interpolation.

    The chaos integrals evaluate rho millions of times; direct quadrature
    per point is far too slow.  Inside [0, s_max] a PCHIP interpolant over
    a dense geometric grid keeps the absolute error under ~1e-7; beyond
    s_max the algebraic tail coefficient takes over (error there is
    O(s^{2H-4}), negligible at s_max = 2e4).  Instances are read-only after
    construction and safe to share across threads.
    """

    def __init__(self, H: float, s_max: float = 2e4, points_per_decade: int = 64):
        self.H = float(H)
        self.s_max = float(s_max)
        n = int(np.ceil(points_per_decade * np.log10(self.s_max / 1e-4)))
        grid = np.concatenate([[0.0], np.geomspace(1e-4, self.s_max, n)])
        vals = np.empty_like(grid)
        vals[0] = 1.0
        for i, s in enumerate(grid[1:], start=1):
            vals[i] = fou_covariance(self.H, float(s))
        self._spline = PchipInterpolator(grid, vals, extrapolate=False)
        self._tail = None if abs(H - 0.5) < 1e-12 else cov_tail_coeff(H)

    def __call__(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.empty_like(s)
        inside = s <= self.s_max
        out[inside] = self._spline(s[inside])
        if np.any(~inside):
            if self._tail is None:
                out[~inside] = 0.0
            else:
                out[~inside] = self._tail * s[~inside] ** (2.0 * self.H - 2.0)
        return float(out[0]) if scalar else out


@functools.lru_cache(maxsize=16)
def rho_table(H: float) -> RhoTable:
    return RhoTable(H)


def covariance_power_integral(H: float, q: int, s_max: float = 1e4) -> float:
    """int_0^inf rho(s)^q ds, for q with q(2H-2) < -1 (else divergent).

    Numerical integral to s_max plus the analytic completion of the
    algebraic tail int_{s_max}^inf (kappa s^{2H-2})^q ds.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    p = q * (2.0 * H - 2.0)
    if abs(H - 0.5) > 1e-12 and p >= -1.0:
        raise ValueError(f"rho^{q} is not integrable for H={H}")
    from .numerics import QuadratureSpec, adaptive_quad

    rho = rho_table(H)
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13, max_depth=55)
    value = 0.0
    cuts = [0.0, 1.0, 10.0, 100.0, s_max]
    for lo, hi in zip(cuts, cuts[1:]):
        if hi > lo:
            v, _ = adaptive_quad(lambda s: rho(s) ** q, lo, hi, spec)
            value += v
    if abs(H - 0.5) > 1e-12:
        kap = cov_tail_coeff(H)
        value += kap ** q * s_max ** (p + 1.0) / (-(p + 1.0))
    return value


def fou_kernel(H: float, s: float, asymptotic_from: float = 50.0) -> float:
    """Moving-average kernel g(s) = e^{-s} int_0^s e^v v^{H-3/2} dv, H > 1/2.

    Evaluated in the stable form int_0^s e^{-u} (s-u)^{H-3/2} du (no large
    exponentials); for s > ``asymptotic_from`` the algebraic regime
    g(s) ~ s^{H-3/2} is used directly.  g(0) = 0, g(s) ~ s^{H-1/2} near 0.
    """
    if not 0.5 < H < 1.0:
        raise ValueError("kernel is defined for H in (1/2, 1)")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 0.0
    if s > asymptotic_from:
        return s ** (H - 1.5)
    val, _ = integrate.quad(
        lambda u: np.exp(-u) * (s - u) ** (H - 1.5), 0.0, s,
        points=[s], epsabs=1e-13, epsrel=1e-10, limit=300,
    )
    return val


@functools.lru_cache(maxsize=16)
def fou_kernel_peak(H: float) -> float:
    """Location s* of the maximum of the kernel g."""
    res = minimize_scalar(lambda s: -fou_kernel(H, s, asymptotic_from=np.inf),
                          bounds=(1e-3, 30.0), method="bounded",
                          options={"xatol": 1e-8})
    return float(res.x)


def fou_path(spec: FouSpec, n: int, dt: float, seed: SeedSpec) -> PathGrid:
    """Approximately stationary sample of the fast process on a uniform grid.

    Exponential-integrator update driven by exact fBm increments,

        Y_{k+1} = e^{-dt/eps} Y_k + (sigma/eps^H) e^{-dt/(2 eps)} dB^H_k,

    started from an N(0,1) draw and preceded by a discarded burn-in of
    length 10*eps in model time.  The grid must resolve the fast scale:
    dt <= eps/20.
    """
    if n < 2:
        raise ValueError("need n >= 2 samples")
    if dt > spec.eps / 20.0 * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:g} too coarse: need dt <= eps/20 = {spec.eps/20:g}")
    n_burn = int(np.ceil(10.0 * spec.eps / dt))
    y0 = float(seed.generator(tag=1).standard_normal())
    inc = fgn_increments(spec.H, n_burn + n - 1, dt, seed.generator())
    a = np.exp(-dt / spec.eps)
    w = (np.sqrt(spec.sigma2) / spec.eps ** spec.H) * np.exp(-dt / (2.0 * spec.eps)) * inc
    driven = lfilter([1.0], [1.0, -a], w, zi=np.array([a * y0]))[0]
    values = np.concatenate([[y0], driven])[n_burn:]
    return PathGrid(t0=0.0, dt=dt, values=values)
