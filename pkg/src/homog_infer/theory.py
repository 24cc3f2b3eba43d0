"""Closed-form constants, exact expectations, and predicted rates.

This module is the oracle layer: every quantity here comes from a closed
formula or a deterministic quadrature, never from simulation.  Monte Carlo
experiments and the chaos-decomposition integrals are checked against it.

Conventions.  The model observes X on [0, 1] (horizon scalings are the
caller's business).  ``hstar`` is the reduced index H*(m) = (H-1)m + 1,
``hprime = max(hstar, 1/2)`` the self-similarity index of the limit, and
``kappa = sigma^2 H(2H-1)`` the covariance tail coefficient.  Asymptotic
orders are recorded as prefactor * delta^a * eps^b with optional
logarithmic corrections.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as _beta
from scipy.special import zeta as _zeta

from .fou import cov_tail_coeff, covariance_power_integral, rho_table, stationary_sigma2
from .multiscale import ModelSpec, Regime
from .numerics import QuadratureSpec, adaptive_quad


class LogCorrection(enum.Enum):
    NONE = "none"
    LOG = "log"
    LOG_SQUARED = "log-squared"


@dataclass(frozen=True)
class RatePrediction:
    """An asymptotic order prefactor * delta^delta_exp * eps^eps_exp.

    ``log_correction`` flags an extra logarithmic factor whose argument is
    named by ``log_arg`` ("delta", "delta_over_eps", or "product" for
    |log delta| * |log(delta/eps)|).  ``tight`` marks whether the prefactor
    (when present) is an exact leading constant or only an upper bound.
    Rate-fitting consumers should strip log factors before regressing.
    """

    delta_exp: float
    eps_exp: float
    prefactor: float | None = None
    log_correction: LogCorrection = LogCorrection.NONE
    log_arg: str = "delta"
    tight: bool = True

    def __post_init__(self) -> None:
        if self.prefactor is not None and not self.prefactor > 0:
            raise ValueError("prefactor, when present, must be positive")

    @property
    def base(self) -> str:
        """The single small quantity carrying the rate, when one exists."""
        if self.eps_exp == 0.0:
            return "delta"
        if self.delta_exp == 0.0:
            return "eps"
        if self.delta_exp == -self.eps_exp:
            return "eps/delta"
        return "mixed"

    @property
    def exponent(self) -> float:
        b = self.base
        if b == "delta":
            return self.delta_exp
        if b in ("eps", "eps/delta"):
            return self.eps_exp
        raise ValueError("no single-base exponent for a mixed rate")

    def evaluate(self, eps: float, delta: float, with_log: bool = True) -> float:
        """Numeric value of the order at given (eps, delta)."""
        v = delta ** self.delta_exp * eps ** self.eps_exp
        if self.prefactor is not None:
            v *= self.prefactor
        if with_log and self.log_correction is not LogCorrection.NONE:
            ld = abs(math.log(delta))
            lr = abs(math.log(delta / eps))
            if self.log_correction is LogCorrection.LOG:
                v *= ld if self.log_arg == "delta" else lr
            else:
                v *= {"delta": ld * ld, "delta_over_eps": lr * lr,
                      "product": ld * lr}[self.log_arg]
        return v


@dataclass(frozen=True)
class CriticalIndices:
    r_integrable: int   # smallest r with r(2H-2) < -1 (rho^r integrable)
    r_summable: int     # smallest r >= floor(m/2) with 2(m-r)(2H-2) > -1


def critical_indices(H: float, m: int) -> CriticalIndices:
    """Thresholds in r for integral and lag-sum convergence, H*(m) < 1/2.

    Scanned by direct inequality test; both exist in the stated regime
    (r = m makes rho^m integrable, and the lag sum at r = m is trivially
    convergent).
    """
    from .multiscale import reduced_hurst

    if reduced_hurst(H, m) >= 0.5:
        raise ValueError("critical indices are defined for hstar < 1/2")
    two_h2 = 2.0 * H - 2.0
    r_i = next(r for r in range(0, m + 1) if r * two_h2 < -1.0)
    r_s = next(r for r in range(m // 2, m + 1) if 2 * (m - r) * two_h2 > -1.0)
    return CriticalIndices(r_integrable=r_i, r_summable=r_s)


def limit_diffusivity_sq(model: ModelSpec) -> float:
    """The limiting squared diffusivity C^2 = E[X_1^2].

    Supercritical (hstar > 1/2):
        c_m^2 m! (sigma^2 H (2H-1))^m / (hstar (2 hstar - 1)).
    Subcritical (hstar < 1/2):
        sum_q c_q^2 q! * 2 int_0^inf rho(s)^q ds  (finite series).
    The critical case is handled by ``limit_diffusivity_sq_critical``.
    """
    if model.regime is Regime.CRITICAL:
        raise ValueError("hstar = 1/2: use limit_diffusivity_sq_critical")
    H, m = model.H, model.rank
    if model.regime is Regime.SUPERCRITICAL:
        cm = model.g_coeffs.coeffs[m]
        base = stationary_sigma2(H) * H * (2.0 * H - 1.0)
        hs = model.hstar
        return cm * cm * math.factorial(m) * base ** m / (hs * (2.0 * hs - 1.0))
    total = 0.0
    for q, cq in enumerate(model.g_coeffs.coeffs):
        if q >= 1 and cq != 0.0:
            total += cq * cq * math.factorial(q) * 2.0 * covariance_power_integral(H, q)
    return total


def limit_diffusivity_sq_critical(model: ModelSpec) -> float:
    """Leading coefficient of E[C_hat] in the critical case hstar = 1/2.

    The supercritical closed form is singular at hstar = 1/2; the operative
    constant, multiplying |log(delta/eps)| / |log eps| in the expansion of
    the expectation, is 2 c_m^2 m! (sigma^2 H (2H-1))^m.
    """
    if model.regime is not Regime.CRITICAL:
        raise ValueError("model is not critical (hstar != 1/2)")
    H, m = model.H, model.rank
    base = stationary_sigma2(H) * H * (2.0 * H - 1.0)
    if abs(base) < 1e-14:
        raise ValueError("degenerate critical model: H = 1/2 makes the "
                         "tail coefficient vanish")
    cm = model.g_coeffs.coeffs[m]
    return 2.0 * cm * cm * math.factorial(m) * base ** m


def _correlation_of_g(model: ModelSpec):
    """R(s) = E[G(Y_0) G(Y_s)] = sum_q c_q^2 q! rho(s)^q, vectorized."""
    rho = rho_table(model.H)
    terms = [(q, cq * cq * math.factorial(q))
             for q, cq in enumerate(model.g_coeffs.coeffs) if q >= 1 and cq != 0.0]

    def R(s):
        r = rho(s)
        out = 0.0
        for q, w in terms:
            out = out + w * r ** q
        return out

    return R


def qv_mean_exact(model: ModelSpec, eps: float, delta: float) -> float:
    """Exact E[C_hat] on horizon T = 1 by quadrature (tolerance ~1e-7).

    Stationarity of the increments reduces the expectation to two 1-d
    integrals of R(s) = E[G(Y_0)G(Y_s)] over [0, delta/eps]:

        E[C] = 2 a^2 delta^{-2 hprime} (eps*delta*I1 - eps^2*I2),
        I1 = int_0^{delta/eps} R,   I2 = int_0^{delta/eps} s R(s) ds,

    with a the drift scale, which encodes the regime (including the
    critical one).  Valid for any delta/eps ratio; the quadrature is split
    at s = 1 to separate the near-zero plateau of R from its algebraic
    tail.
    """
    if not (eps > 0 and delta > 0):
        raise ValueError("eps and delta must be positive")
    from .multiscale import drift_scale

    R = _correlation_of_g(model)
    x0 = delta / eps
    spec = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-15, max_depth=60)
    split = min(1.0, x0)
    i1, _ = adaptive_quad(R, 0.0, split, spec)
    i2, _ = adaptive_quad(lambda s: np.asarray(s) * R(s), 0.0, split, spec)
    if x0 > split:
        v, _ = adaptive_quad(R, split, x0, spec)
        i1 += v
        v, _ = adaptive_quad(lambda s: np.asarray(s) * R(s), split, x0, spec)
        i2 += v
    a = drift_scale(eps, model.hstar)
    ex2 = 2.0 * a * a * (eps * delta * i1 - eps * eps * i2)
    return delta ** (-2.0 * model.hprime) * ex2


def bias_rate(model: ModelSpec) -> RatePrediction:
    """Leading order of E[C_hat] - C^2 in powers of eps/delta.

    Subcritical: (eps/delta)^{1 - (2 hstar v 0)}; supercritical:
    (eps/delta)^{2 hstar - 1}.  Positive exponents: the bias vanishes as
    eps/delta -> 0.
    """
    if model.regime is Regime.CRITICAL:
        raise ValueError("no power-law bias rate in the critical case")
    hs = model.hstar
    if model.regime is Regime.SUPERCRITICAL:
        e = 2.0 * hs - 1.0
    else:
        e = 1.0 - max(2.0 * hs, 0.0)
    return RatePrediction(delta_exp=-e, eps_exp=e)


def triangular_lag_integral(H: float, m: int, r: int) -> float:
    """int_0^1 (1-x) x^p dx with p = 2(m-r)(2H-2), requiring p > -1.

    Closed form 1/(p+1) - 1/(p+2); this is the limit of the triangular
    lag-weight sums appearing in the off-diagonal asymptotics.
    """
    p = 2.0 * (m - r) * (2.0 * H - 2.0)
    if p <= -1.0:
        raise ValueError(f"exponent p = {p:g} <= -1: integral diverges")
    return 1.0 / (p + 1.0) - 1.0 / (p + 2.0)


def second_chaos_const(H: float, m: int) -> float:
    """Leading constant of the second-chaos variance, H > 3/4, hstar > 1/2:

        4 kappa^{2m} / [(4H-3)(2H-1) ((m-1)(2H-2)+2)^2 ((m-1)(2H-2)+1)^2],

    with kappa = 1/Gamma(2H-1).
    """
    from .multiscale import reduced_hurst

    if not 0.75 < H < 1.0:
        raise ValueError("requires H in (3/4, 1)")
    if reduced_hurst(H, m) <= 0.5:
        raise ValueError("requires hstar > 1/2")
    kap = cov_tail_coeff(H)
    d2 = (m - 1) * (2.0 * H - 2.0) + 2.0
    d1 = (m - 1) * (2.0 * H - 2.0) + 1.0
    return 4.0 * kap ** (2 * m) / ((4.0 * H - 3.0) * (2.0 * H - 1.0) * d2 * d2 * d1 * d1)


def noncentral_scale(H: float, m: int, c_m: float) -> float:
    """Scale constant of the second-order (Rosenblatt) fluctuation limit:

        c = (c_m m!/sqrt((m-1)!))^2 * kappa^m / [((m-1)(2H-2)+2)((m-1)(2H-2)+1)]
            * sqrt(8 / ((4H-3)(2H-1))).

    Satisfies c^2 = 2 * second_chaos_const * (c_m m!/sqrt((m-1)!))^4.
    """
    from .multiscale import reduced_hurst

    if not 0.75 < H < 1.0:
        raise ValueError("requires H in (3/4, 1)")
    if reduced_hurst(H, m) <= 0.5:
        raise ValueError("requires hstar > 1/2")
    if c_m == 0.0:
        raise ValueError("c_m must be nonzero")
    kap = cov_tail_coeff(H)
    w = (c_m * math.factorial(m) / math.sqrt(math.factorial(m - 1))) ** 2
    d2 = (m - 1) * (2.0 * H - 2.0) + 2.0
    d1 = (m - 1) * (2.0 * H - 2.0) + 1.0
    return w * kap ** m / (d2 * d1) * math.sqrt(8.0 / ((4.0 * H - 3.0) * (2.0 * H - 1.0)))


def hermite_norm_const(H: float, m: int) -> float:
    """Normalization K(H, m) giving the order-m self-similar process unit
    variance at time 1:

        K(H,m) = ( m! H(2H-1) / beta(1/2 + (H-1)/m, 2(1-H)/m)^m )^{1/2}.
    """
    if not 0.5 < H < 1.0:
        raise ValueError("requires H in (1/2, 1)")
    b = _beta(0.5 + (H - 1.0) / m, 2.0 * (1.0 - H) / m)
    return math.sqrt(math.factorial(m) * H * (2.0 * H - 1.0) / b ** m)


def noncentral_overlap_limit(H: float, m: int) -> float:
    """Limiting inner product between the renormalized second-chaos kernel
    and the unit-variance second-order kernel:

        2 kappa^m / [((m-1)(2H-2)+2)((m-1)(2H-2)+1) sqrt(2(4H-3)(2H-1))].

    Multiplied by (c_m m!/sqrt((m-1)!))^2 this equals half the
    ``noncentral_scale`` constant (the cancellation that closes the
    second-order convergence argument).
    """
    from .multiscale import reduced_hurst

    if not 0.75 < H < 1.0:
        raise ValueError("requires H in (3/4, 1)")
    if reduced_hurst(H, m) <= 0.5:
        raise ValueError("requires hstar > 1/2")
    kap = cov_tail_coeff(H)
    d2 = (m - 1) * (2.0 * H - 2.0) + 2.0
    d1 = (m - 1) * (2.0 * H - 2.0) + 1.0
    return 2.0 * kap ** m / (d2 * d1 * math.sqrt((4.0 * H - 3.0) * (2.0 * H - 1.0) * 2.0))


def variance_rate(model: ModelSpec, r: int) -> RatePrediction:
    """Asymptotic order of the order-(2m-2r) chaos contribution E[T^2].

    Supercritical: the r = m-1 term carries the whole variance,
    order delta^{2(2-2H) ^ 1} with the ``second_chaos_const`` prefactor for
    H > 3/4 (an extra |log delta| at H = 3/4); r < m-1 terms are bounded by
    delta^{2(m-r)(2-2H) ^ 1}.

    Subcritical: the off-diagonal order f(delta, eps, m, r), selected by
    which of the integral/lag-sum convergence conditions hold, with
    logarithmic corrections on the exact borderlines.  (The diagonal part
    contributes an additional O(delta) in all subcritical cases.)
    """
    m = model.rank
    if not 0 <= r <= m - 1:
        raise ValueError("r must lie in 0..m-1")
    H = model.H
    two_h2 = 2.0 * H - 2.0
    if model.regime is Regime.CRITICAL:
        raise ValueError("no variance rate in the critical case")
    if model.regime is Regime.SUPERCRITICAL:
        if r == m - 1:
            e = min(2.0 * (2.0 - 2.0 * H), 1.0)
            if abs(H - 0.75) < 1e-12:
                return RatePrediction(delta_exp=1.0, eps_exp=0.0,
                                      log_correction=LogCorrection.LOG)
            pref = second_chaos_const(H, m) if H > 0.75 else None
            return RatePrediction(delta_exp=e, eps_exp=0.0, prefactor=pref)
        e = min(2.0 * (m - r) * (2.0 - 2.0 * H), 1.0)
        return RatePrediction(delta_exp=e, eps_exp=0.0, tight=False)

    # subcritical: classify by actual convergence, log corrections on ties
    int_bound = r * two_h2          # integral converges iff < -1
    sum_bound = 2.0 * (m - r) * two_h2   # lag sum converges iff > -1
    hs = model.hstar
    tol = 1e-12
    if abs(int_bound + 1.0) < tol and abs(sum_bound + 1.0) < tol:
        return RatePrediction(delta_exp=0.0, eps_exp=1.0,
                              log_correction=LogCorrection.LOG_SQUARED,
                              log_arg="product", tight=False)
    if abs(int_bound + 1.0) < tol:
        e = 2.0 * (m - r) * (2.0 - 2.0 * H)
        if hs > 0.25:
            # delta * (eps/delta)^e * log(delta/eps)^2
            return RatePrediction(delta_exp=1.0 - e, eps_exp=e,
                                  log_correction=LogCorrection.LOG_SQUARED,
                                  log_arg="delta_over_eps", tight=False)
        return RatePrediction(delta_exp=0.0, eps_exp=e,
                              log_correction=LogCorrection.LOG_SQUARED,
                              log_arg="delta_over_eps", tight=False)
    if abs(sum_bound + 1.0) < tol:
        e = 2.0 * (m - r) * (2.0 - 2.0 * H)
        if hs > 0.25:
            return RatePrediction(delta_exp=0.0, eps_exp=e,
                                  log_correction=LogCorrection.LOG,
                                  log_arg="delta", tight=False)
        e_ratio = 2.0 * m * (2.0 - 2.0 * H) - 2.0
        return RatePrediction(delta_exp=-e_ratio, eps_exp=e_ratio,
                              log_correction=LogCorrection.LOG,
                              log_arg="delta", tight=False)
    integral_conv = int_bound < -1.0
    sum_conv = sum_bound > -1.0
    if not integral_conv and not sum_conv:
        # delta * (eps/delta)^{2m(2-2H)-2}
        e = 2.0 * m * (2.0 - 2.0 * H) - 2.0
        return RatePrediction(delta_exp=1.0 - e, eps_exp=e, tight=False)
    if integral_conv and sum_conv:
        # eps^{2(m-r)(2-2H)}
        e = 2.0 * (m - r) * (2.0 - 2.0 * H)
        return RatePrediction(delta_exp=0.0, eps_exp=e, tight=False)
    if not integral_conv and sum_conv:
        # delta^{2(m-r)(2H-2)} * (eps/delta)^{2m(2-2H)-2}
        e = 2.0 * m * (2.0 - 2.0 * H) - 2.0
        return RatePrediction(delta_exp=2.0 * (m - r) * two_h2 - e,
                              eps_exp=e, tight=False)
    # integral convergent, lag sum divergent: delta * (eps/delta)^{2(m-r)(2-2H)}
    e = 2.0 * (m - r) * (2.0 - 2.0 * H)
    return RatePrediction(delta_exp=1.0 - e, eps_exp=e, tight=False)


def block_asymptote(H: float, m: int, r: int, which: str) -> RatePrediction:
    """Leading asymptote of the diagonal or off-diagonal inner-product block
    of the order-(2m-2r) chaos term, on horizon T = 1.

    ``which`` is "diag" or "off".  For m = 1 both blocks carry exact
    constants; for m > 1 the diagonal constant is an upper bound (flagged
    ``tight=False``), and the off-diagonal constants are exact.  All
    off-diagonal constants count ordered index pairs, i.e. each lag k
    appears with weight 2(N - k).
    """
    from .multiscale import reduced_hurst

    if which not in ("diag", "off"):
        raise ValueError("which must be 'diag' or 'off'")
    if not 0 <= r <= m - 1:
        raise ValueError("r must lie in 0..m-1")
    two_h2 = 2.0 * H - 2.0
    eps_exp = 2.0 * m * (2.0 - 2.0 * H)
    hs = reduced_hurst(H, m)
    if abs(hs - 0.5) < 1e-12:
        raise ValueError("no block asymptote on the critical line hstar = 1/2")
    if which == "diag":
        if hs > 0.5:
            kap = cov_tail_coeff(H)
            d2 = m * two_h2 + 2.0
            d1 = m * two_h2 + 1.0
            pref = 4.0 * kap ** (2 * m) / (d2 * d2 * d1 * d1)
            return RatePrediction(delta_exp=3.0 + 2.0 * m * two_h2,
                                  eps_exp=eps_exp, prefactor=pref,
                                  tight=(m == 1))
        tail = covariance_power_integral(H, m)
        pref = 4.0 * tail * tail
        if pref <= 0.0:
            # the closed constant can vanish (the covariance integrates to
            # zero for H < 1/2 at m = 1); report the order without it
            return RatePrediction(delta_exp=1.0, eps_exp=2.0, tight=False)
        return RatePrediction(delta_exp=1.0, eps_exp=2.0, prefactor=pref,
                              tight=(m == 1))
    if hs > 0.5 or m == 1:
        # exact off-diagonal constants; for m = 1, H < 1/2 only the
        # convergent-sum (zeta) case below is reachable
        kap = cov_tail_coeff(H)
        dr2 = r * two_h2 + 2.0
        dr1 = r * two_h2 + 1.0
        denom = dr2 * dr2 * dr1 * dr1
        p = 2.0 * (m - r) * two_h2
        if abs(p + 1.0) < 1e-12:
            return RatePrediction(delta_exp=3.0 + 2.0 * m * two_h2,
                                  eps_exp=eps_exp,
                                  prefactor=8.0 * kap ** (2 * m) / denom,
                                  log_correction=LogCorrection.LOG)
        if p > -1.0:
            a = triangular_lag_integral(H, m, r)
            return RatePrediction(delta_exp=2.0 * r * two_h2 + 2.0,
                                  eps_exp=2.0 * (m - r) * (2.0 - 2.0 * H),
                                  prefactor=8.0 * a * kap ** (2 * m) / denom)
        return RatePrediction(delta_exp=3.0 + 2.0 * m * two_h2,
                              eps_exp=eps_exp,
                              prefactor=8.0 * float(_zeta(-p)) * kap ** (2 * m) / denom)
    # m > 1, hstar < 1/2: order bounds only
    int_conv = r * two_h2 < -1.0
    sum_conv = 2.0 * (m - r) * two_h2 > -1.0
    if not int_conv and not sum_conv:
        # delta^3 (eps/delta)^{2m(2-2H)}
        return RatePrediction(delta_exp=3.0 - eps_exp, eps_exp=eps_exp, tight=False)
    if int_conv and sum_conv:
        # eps^{2(m-r)(2-2H)+2}
        return RatePrediction(delta_exp=0.0,
                              eps_exp=2.0 * (m - r) * (2.0 - 2.0 * H) + 2.0,
                              tight=False)
    if not int_conv and sum_conv:
        # delta^{2+2(m-r)(2H-2)} (eps/delta)^{2m(2-2H)}
        return RatePrediction(delta_exp=2.0 + 2.0 * (m - r) * two_h2 - eps_exp,
                              eps_exp=eps_exp, tight=False)
    # integral convergent, lag sum divergent: delta eps^2 (eps/delta)^{2(m-r)(2-2H)}
    e = 2.0 * (m - r) * (2.0 - 2.0 * H)
    return RatePrediction(delta_exp=1.0 - e, eps_exp=2.0 + e, tight=False)
