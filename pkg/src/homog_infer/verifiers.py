"""Executable verifiers for the technical asymptotics behind the theory.

Each check instantiates a lemma-style claim with a concrete test function
satisfying its hypotheses, evaluates both sides numerically, and returns
the measured ratio / pair / fitted exponent.  They are deterministic (no
randomness) and exposed through the command line ``verify`` battery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import beta as _beta
from scipy.special import zeta as _zeta

from .fou import fou_kernel, fou_kernel_peak
from .numerics import QuadratureSpec, adaptive_quad, graded_edges, panel_rule


def check_cov_square_integral(alpha: float, k: int, h: float) -> float:
    """Asymptotics of int_{[0,h]^2} beta(s-t)^k ds dt for the test
    covariance beta(s) = (1+s)^alpha (non-increasing, beta(0) = 1, tail
    coefficient 1).

    Reduces to 2 int_0^h (h-s) beta(s)^k ds and divides by the case
    asymptote:  2 h^{ak+2}/((ak+2)(ak+1)) for ak > -1,
                2h int_0^inf beta^k     for ak < -1,
                2h log h                 for ak = -1.
    Returns the ratio (should approach 1 as h grows).
    """
    if alpha >= 0:
        raise ValueError("alpha must be negative")
    if h <= 1:
        raise ValueError("h must exceed 1")
    ak = alpha * k
    spec = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-14, max_depth=60)

    def f(s):
        s = np.asarray(s, dtype=float)
        return (h - s) * (1.0 + s) ** ak

    val, _ = adaptive_quad(f, 0.0, min(1.0, h), spec)
    if h > 1.0:
        v2, _ = adaptive_quad(f, 1.0, h, spec)
        val += v2
    val *= 2.0
    if ak > -1.0:
        asym = 2.0 * h ** (ak + 2.0) / ((ak + 2.0) * (ak + 1.0))
    elif ak < -1.0:
        tail = 1.0 / (-ak - 1.0)   # int_0^inf (1+s)^{ak} ds
        asym = 2.0 * h * tail
    else:
        asym = 2.0 * h * math.log(h)
    return val / asym


def check_lag_sum(alpha: float, N: int) -> dict:
    """Asymptotics of S_N = (1/N) sum_{k=1}^{N-1} (1 - k/N)(k/N)^alpha.

    Returns the exact sum, the case asymptote, and their ratio.  For
    alpha = -1 the sum telescopes to the exact identity
    S_N = H_{N-1} - 1 + 1/N with H_n the n-th harmonic number.
    """
    if N < 10:
        raise ValueError("N must be >= 10")
    k = np.arange(1, N, dtype=float)
    s_exact = float(np.sum((1.0 - k / N) * (k / N) ** alpha)) / N
    if -1.0 < alpha < 0.0:
        asym = 1.0 / (alpha + 1.0) - 1.0 / (alpha + 2.0)
    elif alpha == -1.0:
        asym = math.log(N) + np.euler_gamma - 1.0
    else:
        asym = float(_zeta(-alpha)) * N ** (-(alpha + 1.0))
    out = {"sum": s_exact, "asymptote": asym, "ratio": s_exact / asym}
    if alpha == -1.0:
        harmonic = float(np.sum(1.0 / k))
        out["exact_identity_residual"] = abs(s_exact - (harmonic - 1.0 + 1.0 / N))
    return out


def _kernel_growth_inner(s: float, a_exp: float, b_exp: float, gamma: float,
                         m: int, q: int = 24) -> float:
    """F(s) = int_{[0,s]^2} x^a y^b (1+|x-y|)^{gamma (m-1)} dx dy by graded
    composite quadrature (x^a and y^b are endpoint singularities, the nu
    factor has a diagonal cusp scale of order 1)."""
    if s <= 0:
        return 0.0
    g = gamma * (m - 1)
    xe = graded_edges([0.0], min(1.0, s) / 10.0, 0.0, s)
    xn, xw = panel_rule(xe, q)
    total = 0.0
    for x, wx in zip(xn, xw):
        ye = graded_edges([0.0, x], min(1.0, s) / 10.0, 0.0, s)
        yn, yw = panel_rule(ye, q)
        vals = x ** a_exp * yn ** b_exp * (1.0 + np.abs(x - yn)) ** g
        total += wx * float(np.sum(vals * yw))
    return total


def check_triple_kernel_growth(a_exp: float, b_exp: float, gamma: float,
                               m: int, h: float) -> dict:
    """Growth exponent of int_{[0,h]^3} (s-u)_+^a (s-v)_+^b nu(u-v)^{m-1}
    with nu(s) = (1+|s|)^gamma, fitted on h/4, h/2, h.

    Requires a, b > -1 and a + b + (m-1)gamma > -2.  The integral equals
    int_0^h F(s) ds with F(s) ~ s^{a+b+(m-1)gamma+2}, so the h-integral
    grows like h^{a+b+(m-1)gamma+3}; the fitted exponent is returned along
    with that prediction (and the off-by-one variant a+b+(m-1)gamma+2 that
    one obtains by forgetting the outer integration, reported for
    comparison).
    """
    if not (a_exp > -1 and b_exp > -1):
        raise ValueError("endpoint exponents must exceed -1")
    if a_exp + b_exp + (m - 1) * gamma <= -2:
        raise ValueError("combined exponent must exceed -2")
    hs = np.array([h / 4.0, h / 2.0, h])
    vals = []
    for hh in hs:
        se = graded_edges([0.0], 0.1, 0.0, hh)
        sn, sw = panel_rule(se, 32)
        fs = np.array([_kernel_growth_inner(s, a_exp, b_exp, gamma, m) for s in sn])
        vals.append(float(np.sum(fs * sw)))
    vals = np.array(vals)
    slope = np.polyfit(np.log(hs), np.log(vals), 1)[0]
    inner = a_exp + b_exp + (m - 1) * gamma + 2.0
    return {
        "fitted_exponent": float(slope),
        "predicted_exponent": inner + 1.0,
        "inner_growth_exponent": inner,
        "values": vals.tolist(),
    }


def check_beta_identity(kind: str, H: float, u: float, v: float) -> tuple[float, float]:
    """Beta-function identities and bounds for products of fractional kernels.

    kind:
      "tail-product":   int_{-inf}^{u^v} (u-x)^{H-3/2}(v-x)^{H-3/2} dx
                        = beta(H-1/2, 2-2H) |u-v|^{2H-2}          (equality)
      "forward-bound":  int_{u v v}^1 (s-u)^{H-3/2}(s-v)^{H-3/2} ds
                        < beta(H-1/2, 2-2H) |u-v|^{2H-2}          (strict)
      "mixed-bound":    int_{u}^1 (s-u)^{H-3/2}(s-v)^{2H-2} ds
                        < beta(H-1/2, 5/2-3H) |u-v|^{3H-5/2}      (strict,
                        3/4 < H < 5/6, u > v; swapped roles use
                        beta(2H-1, 5/2-3H))
      "bridge-product": int_v^u (u-s)^{H-3/2}(s-v)^{2H-2} ds
                        = beta(H-1/2, 2H-1) (u-v)^{3H-5/2}        (equality,
                        3/4 < H < 1, u > v)

    Returns (lhs, rhs); equalities should match to ~1e-6 relative,
    bounds should satisfy lhs < rhs strictly.
    """
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-16, max_depth=60)
    if kind == "tail-product":
        if not 0.5 < H < 1.0:
            raise ValueError("requires H in (1/2, 1)")
        lo, hi = min(u, v), max(u, v)
        gap = hi - lo

        def f(t):   # x = lo - t
            t = np.asarray(t, dtype=float)
            return (t + gap) ** (H - 1.5) * t ** (H - 1.5)

        lhs, _ = adaptive_quad(f, 0.0, np.inf, spec, singular_power=H - 1.5)
        rhs = float(_beta(H - 0.5, 2.0 - 2.0 * H)) * gap ** (2.0 * H - 2.0)
        return lhs, rhs
    if kind == "forward-bound":
        if not 0.5 < H < 1.0:
            raise ValueError("requires H in (1/2, 1)")
        lo, hi = min(u, v), max(u, v)
        gap = hi - lo

        def f(t):   # s = hi + t, t in [0, 1-hi]
            t = np.asarray(t, dtype=float)
            return t ** (H - 1.5) * (t + gap) ** (H - 1.5)

        lhs, _ = adaptive_quad(f, 0.0, 1.0 - hi, spec, singular_power=H - 1.5)
        rhs = float(_beta(H - 0.5, 2.0 - 2.0 * H)) * gap ** (2.0 * H - 2.0)
        return lhs, rhs
    if kind == "mixed-bound":
        if not 0.75 < H < 5.0 / 6.0:
            raise ValueError("requires H in (3/4, 5/6)")
        if u == v:
            raise ValueError("requires u != v")
        gap = abs(u - v)
        if u > v:
            def f(t):   # s = u + t
                t = np.asarray(t, dtype=float)
                return t ** (H - 1.5) * (t + gap) ** (2.0 * H - 2.0)

            lhs, _ = adaptive_quad(f, 0.0, 1.0 - u, spec, singular_power=H - 1.5)
            rhs = float(_beta(H - 0.5, 2.5 - 3.0 * H)) * gap ** (3.0 * H - 2.5)
        else:
            def f(t):   # s = v + t
                t = np.asarray(t, dtype=float)
                return t ** (2.0 * H - 2.0) * (t + gap) ** (H - 1.5)

            lhs, _ = adaptive_quad(f, 0.0, 1.0 - v, spec, singular_power=2.0 * H - 2.0)
            rhs = float(_beta(2.0 * H - 1.0, 2.5 - 3.0 * H)) * gap ** (3.0 * H - 2.5)
        return lhs, rhs
    if kind == "bridge-product":
        if not 0.75 < H < 1.0:
            raise ValueError("requires H in (3/4, 1)")
        if not u > v:
            raise ValueError("requires u > v")
        gap = u - v

        def f(t):   # s = u - t: (u-s)^{H-3/2} (s-v)^{2H-2}
            t = np.asarray(t, dtype=float)
            return t ** (H - 1.5) * (gap - t) ** (2.0 * H - 2.0)

        lhs, _ = adaptive_quad(f, 0.0, gap, spec, singular_power=H - 1.5)
        rhs = float(_beta(H - 0.5, 2.0 * H - 1.0)) * gap ** (3.0 * H - 2.5)
        return lhs, rhs
    raise ValueError(f"unknown identity kind: {kind!r}")


def check_kernel_convolution(H: float, s_gap: float, eps_list) -> dict:
    """Small-eps behaviour of the fOU kernel convolved with a fractional
    kernel.  With K_eps(w) = eps^{-1/2} g(w/eps):

      behind the kernel (gap ahead):
        int_0^inf K_eps(s_gap + w) w^{H-3/2} dw
          ~ eps^{1-H} s_gap^{2H-2} beta(H-1/2, 2-2H);

      across the kernel peak (gap behind): the near-peak remainder
        A_eps = int_0^{s*} g(w) (s_gap + eps w)^{H-3/2} dw * eps^{1/2}
      is bounded by a constant times eps^{1/2} s_gap^{H-3/2}.

    Returns the convolution/asymptote ratios per eps (they must approach 1
    from consistent sides) and the remainder-to-bound ratios.  The kernel g
    is evaluated by exact quadrature here, not by its algebraic tail, so
    the comparison is informative.
    """
    if not 0.75 < H < 1.0:
        raise ValueError("requires H in (3/4, 1)")
    if s_gap <= 0:
        raise ValueError("s_gap must be positive")
    spec = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-16, max_depth=60)
    ratios = []
    remainders = []
    s_star = fou_kernel_peak(H)
    for eps in eps_list:
        def f(w):
            w = np.asarray(w, dtype=float)
            g = np.array([fou_kernel(H, (s_gap + wi) / eps, asymptotic_from=np.inf)
                          for wi in np.atleast_1d(w)])
            return eps ** -0.5 * g * np.atleast_1d(w) ** (H - 1.5)

        val, _ = adaptive_quad(f, 0.0, np.inf, spec, singular_power=H - 1.5)
        asym = eps ** (1.0 - H) * s_gap ** (2.0 * H - 2.0) * float(_beta(H - 0.5, 2.0 - 2.0 * H))
        ratios.append(val / asym)

        def rem(w):
            w = np.asarray(w, dtype=float)
            g = np.array([fou_kernel(H, wi, asymptotic_from=np.inf)
                          for wi in np.atleast_1d(w)])
            return g * (s_gap + eps * np.atleast_1d(w)) ** (H - 1.5)

        rv, _ = adaptive_quad(rem, 0.0, s_star, spec)
        remainders.append(eps ** 0.5 * rv / (eps ** 0.5 * s_gap ** (H - 1.5)))
    return {"ratios": ratios, "remainder_bound_ratios": remainders}
