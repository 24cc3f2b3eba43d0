"""Variance of the renormalized quadratic variation via its chaos expansion.

For G = c_m H_m the estimator splits across Wiener chaoses of orders
2m - 2r, r = 0..m-1, and its variance is a weighted sum of squared-kernel
inner products.  Each inner product reduces to a 4-d correlation integral

    I(b, k) = int_{[0,1]^4} rho(b(u-v))^r rho(b(l-s))^r
                            rho(b(u-s) + kb)^{m-r} rho(b(v-l) + kb)^{m-r},

with b = delta/eps and k the block lag.  ``diag_block`` sums the k = 0
contributions, ``offdiag_block`` the k >= 1 ones (each ordered pair
counted, weight 2(N-k)), and ``variance_prediction`` assembles the chaos
sum.  The result is exact for m = 1 and an upper bound for m >= 2.

Numerical scheme.  The integrand factorizes over u and l once (v, s) are
fixed, so I(b, k) is computed as a 2-d outer integral of a product of two
1-d integrals.  All axes use composite Gauss-Legendre panels graded at the
correlation plateau (width 1/b) around the moving ridge locations; the
order-q rule is validated by an order-(q+8) recomputation.  Plain
tensor-product Gauss-Legendre cannot resolve the 1/b plateau once
delta/eps is large, which is why the graded panels are not optional.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fou import cov_tail_coeff, rho_table
from .multiscale import ModelSpec, drift_scale
from .numerics import gl_rule

DEFAULT_ORDER = 24
RICHARDSON_STEP = 8
RICHARDSON_RTOL = 1e-4
FAR_FIELD_ARG = 1e3     # asymptotic tail substitution beyond this rho argument
FAR_FIELD_MIN_K = 8     # and never before this block lag (lag-curvature error
                        # of the substitution decays like 1/k^2)


class ChaosQuadratureError(RuntimeError):
    """The order-q and order-(q+8) evaluations disagree beyond tolerance."""


@dataclass(frozen=True)
class ChaosTerm:
    """One chaos contribution to the variance decomposition."""

    r: int
    order: int          # 2m - 2r
    weight: float       # (c_m m! / ((m-r)! sqrt(r!)))^2
    e_diag: float
    e_off: float
    exact: bool         # True iff r = m-1 (no symmetrization dropped)

    def __post_init__(self) -> None:
        if self.order < 2 or self.order % 2 != 0:
            raise ValueError("chaos order must be a positive even integer")


def chaos_weight(c_m: float, m: int, r: int) -> float:
    """(c_m m! / ((m-r)! sqrt(r!)))^2, the product-formula weight."""
    if not 0 <= r <= m:
        raise ValueError("r must lie in 0..m")
    return (c_m * math.factorial(m)
            / (math.factorial(m - r) * math.sqrt(math.factorial(r)))) ** 2


def _edge_template(centers: list[np.ndarray], beta: float) -> np.ndarray:
    """Row-wise sorted panel edges on [0,1], graded at scale 1/beta around
    each center column.  Centers outside [0,1] are clipped, which turns
    their panels into zero-width (zero-weight) ones."""
    offs = np.array([1.0, 8.0, 64.0, 512.0]) / beta
    rel = np.concatenate([-offs[::-1], [0.0], offs])
    base = centers[0]
    pieces = [np.broadcast_to(np.array([0.0, 0.5, 1.0]), base.shape + (3,))]
    for c in centers:
        pieces.append(c[..., None] + rel)
    edges = np.clip(np.concatenate(pieces, axis=-1), 0.0, 1.0)
    return np.sort(edges, axis=-1)


def _panel_nodes(edges: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gl_rule(q)
    lo = edges[..., :-1, None]
    hi = edges[..., 1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x + 1.0)
    wts = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), wts.reshape(shape)


def _line_integrals(rho: Callable, r: int, mr: int, beta: float, shift: float,
                    plain_centers: np.ndarray, shifted_centers: np.ndarray,
                    q: int) -> np.ndarray:
    """For each row i, integral over w in [0,1] of
        rho(beta*(w - plain_centers[i]))^r
      * rho(beta*(w - shifted_centers[i]) + shift*beta)^mr  dw.

    Panels are graded around the ridge of each factor that can actually
    enter [0,1]: the plain ridge always does, the shifted one only for
    |shift| <= 1 (otherwise its argument stays >= (|shift|-1)*beta, where
    the correlation tail is smooth on the unit scale)."""
    cols = []
    if r > 0:
        cols.append(plain_centers)
    if mr > 0 and abs(shift) <= 1.0:
        cols.append(shifted_centers - shift)
    if cols:
        edges = _edge_template(cols, beta)
    else:
        edges = np.broadcast_to(np.array([0.0, 0.5, 1.0]),
                                plain_centers.shape + (3,))
    nodes, wts = _panel_nodes(edges, q)
    f = np.ones_like(nodes)
    if r > 0:
        f = rho(beta * (nodes - plain_centers[..., None])) ** r
    if mr > 0:
        f = f * rho(beta * (nodes - shifted_centers[..., None])
                    + shift * beta) ** mr
    return np.sum(f * wts, axis=-1)


def _block_integral_once(rho: Callable, m: int, r: int, beta: float, k: int,
                         q: int) -> float:
    """One evaluation of I(beta, k) at Gauss-Legendre order q."""
    mr = m - r
    v_nodes, v_wts = _panel_nodes(np.array([0.0, 0.5, 1.0]), q)
    # the product A(v,s) B(v,s) has a ridge along s = v + k (and s = v - k);
    # only lags 0 and 1 bring it into the unit square
    total = 0.0
    for v, wv in zip(v_nodes, v_wts):
        if mr > 0 and k <= 1:
            s_edges = _edge_template(
                [np.array([v + k]), np.array([v - k])], beta)[0]
        else:
            s_edges = np.array([0.0, 0.5, 1.0])
        s_nodes, s_wts = _panel_nodes(s_edges, q)
        v_arr = np.full_like(s_nodes, v)
        # A(v, s): integral over u of rho(b(u-v))^r rho(b(u-s)+kb)^mr
        a = _line_integrals(rho, r, mr, beta, float(k), v_arr, s_nodes, q)
        # B(v, s): integral over l of rho(b(l-s))^r rho(b(l-v)-kb)^mr
        b = _line_integrals(rho, r, mr, beta, -float(k), s_nodes, v_arr, q)
        total += wv * float(np.sum(a * b * s_wts))
    return total


def block_integral(rho: Callable, m: int, r: int, beta: float, k: int,
                   q: int = DEFAULT_ORDER) -> float:
    """I(beta, k) with an order-(q+8) consistency check.

    Raises ChaosQuadratureError if the two orders differ by more than
    RICHARDSON_RTOL relatively; returns the higher-order value.
    """
    v1 = _block_integral_once(rho, m, r, beta, k, q)
    v2 = _block_integral_once(rho, m, r, beta, k, q + RICHARDSON_STEP)
    scale = max(abs(v2), 1e-300)
    if abs(v2 - v1) > RICHARDSON_RTOL * scale:
        raise ChaosQuadratureError(
            f"block integral (m={m}, r={r}, beta={beta:g}, k={k}) did not "
            f"converge: orders {q}/{q+8} differ by {abs(v2-v1)/scale:.2e}")
    return v2


def _pair_integral(rho: Callable, r: int, beta: float,
                   q: int = DEFAULT_ORDER) -> float:
    """J_r(beta) = int_{[0,1]^2} rho(beta(u-v))^r du dv, by the 1-d
    reduction 2 int_0^1 (1-t) rho(beta t)^r dt on graded panels."""
    if r == 0:
        return 1.0
    edges = _edge_template([np.array([0.0])], beta)[0]
    nodes, wts = _panel_nodes(edges, q + RICHARDSON_STEP)
    f = (1.0 - nodes) * rho(beta * nodes) ** r
    return 2.0 * float(np.sum(f * wts))


def diag_block(H: float, m: int, r: int, eps: float, delta: float, N: int,
               q: int = DEFAULT_ORDER, rho: Callable | None = None) -> float:
    """Sum over the N diagonal (zero-lag) squared-kernel inner products:

        N * delta^4 * I(delta/eps, 0).
    """
    if not 0 <= r <= m - 1:
        raise ValueError("r must lie in 0..m-1")
    if N < 1:
        raise ValueError("N must be >= 1")
    beta = delta / eps
    if rho is None:
        rho = rho_table(H)
    return N * delta ** 4 * block_integral(rho, m, r, beta, 0, q)


def offdiag_block(H: float, m: int, r: int, eps: float, delta: float, N: int,
                  q: int = DEFAULT_ORDER, rho: Callable | None = None) -> float:
    """Sum over the lagged inner products, ordered pairs counted:

        sum_{k=1}^{N-1} 2 (N-k) delta^4 I(delta/eps, k).

    Lags with k*delta/eps beyond FAR_FIELD_ARG (and k >= FAR_FIELD_MIN_K)
    replace the two shifted correlation factors by the algebraic tail
    kappa^{2(m-r)} (k delta/eps)^{2(m-r)(2H-2)}, which factorizes the
    integral into J_r(beta)^2; the substitution error is below 0.1%.
    """
    if not 0 <= r <= m - 1:
        raise ValueError("r must lie in 0..m-1")
    if N < 2:
        raise ValueError("N must be >= 2")
    beta = delta / eps
    if rho is None:
        rho = rho_table(H)
    mr = m - r
    total = 0.0
    far_ks = []
    for k in range(1, N):
        if k >= FAR_FIELD_MIN_K and k * beta > FAR_FIELD_ARG:
            far_ks.append(k)
        else:
            total += 2.0 * (N - k) * delta ** 4 * block_integral(rho, m, r, beta, k, q)
    if far_ks:
        kap = cov_tail_coeff(H)
        jr = _pair_integral(rho, r, beta, q)
        ks = np.asarray(far_ks, dtype=float)
        lag_sum = float(np.sum(2.0 * (N - ks) * (ks * beta) ** (2 * mr * (2.0 * H - 2.0))))
        total += delta ** 4 * kap ** (2 * mr) * jr * jr * lag_sum
    return total


def chaos_terms(model: ModelSpec, eps: float, delta: float, N: int,
                q: int = DEFAULT_ORDER) -> list[ChaosTerm]:
    """All variance-carrying chaos terms for a single-term G = c_m H_m."""
    if not model.g_coeffs.is_single_term():
        raise ValueError("chaos decomposition requires G = c_m H_m "
                         "(a single nonzero coefficient)")
    m = model.rank
    c_m = model.g_coeffs.coeffs[m]
    rho = rho_table(model.H)
    terms = []
    for r in range(m):
        ed = diag_block(model.H, m, r, eps, delta, N, q=q, rho=rho)
        eo = offdiag_block(model.H, m, r, eps, delta, N, q=q, rho=rho)
        # for H < 1/2 the correlation takes negative values and roundoff can
        # push a block slightly negative; materially negative values are a
        # sign anomaly worth surfacing, tiny ones are clipped
        for name, val in (("diag", ed), ("off", eo)):
            if val < -1e-6:
                warnings.warn(f"{name} block (m={m}, r={r}) is negative: {val:.3e}",
                              RuntimeWarning, stacklevel=2)
        terms.append(ChaosTerm(
            r=r, order=2 * (m - r), weight=chaos_weight(c_m, m, r),
            e_diag=max(ed, 0.0), e_off=max(eo, 0.0), exact=(r == m - 1)))
    return terms


def variance_prediction(model: ModelSpec, eps: float, delta: float, N: int,
                        q: int = DEFAULT_ORDER) -> tuple[float, bool]:
    """Predicted Var(C_hat) for G = c_m H_m on horizon T = N*delta:

        sum_r weight(r)^2 (2m-2r)! N^{2(2H'-1)} a^4 (diag + off),

    with a the drift scale and H' = max(hstar, 1/2).  The boolean flag is
    True when the value is exact (m = 1; every term has r = m-1) and False
    when it is an upper bound (m >= 2: symmetrization is dropped for
    r < m-1).
    """
    terms = chaos_terms(model, eps, delta, N, q=q)
    a4 = drift_scale(eps, model.hstar) ** 4
    nf = float(N) ** (2.0 * (2.0 * model.hprime - 1.0))
    total = 0.0
    for t in terms:
        total += (t.weight ** 2 * math.factorial(t.order)
                  * nf * a4 * (t.e_diag + t.e_off))
    return total, model.rank == 1
