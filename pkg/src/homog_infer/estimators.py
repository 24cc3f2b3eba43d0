"""Subsampled quadratic-variation estimators and the two-step plug-in.

Given observations X_0, X_delta, ..., X_{N delta} of the slow process, the
diffusivity statistic is

    C_hat = N^{2H'-1} * sum (X_{(i+1)d} - X_{id})^2     (H' > 1/2)
    C_hat =             sum (X_{(i+1)d} - X_{id})^2     (H' = 1/2)

and the self-similarity index is estimated scale-free from the ratio of
quadratic variations on the nested delta/2 and delta grids,

    H_hat = 1/2 - log(QV_fine / QV_coarse) / (2 log 2).

The plug-in pipeline estimates H' first, clamps it into [1/2, 1), and then
normalizes the diffusivity statistic with the estimate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .gaussian import PathGrid

HPRIME_CLAMP = (0.5, 1.0 - 1e-6)


class SamplingRule(enum.Enum):
    EXPLICIT = "explicit"          # delta given directly
    POWER = "power"                # delta = eps**a, 0 < a < 1 standard
    LOG = "log"                    # delta = exp(-|log eps|**a)


@dataclass(frozen=True)
class SamplingScheme:
    """Observation design: horizon T split into N even steps of size delta.

    N * delta = T holds exactly (delta is derived as T/N); N is even so the
    ratio estimator's delta/2 grid exists.
    """

    T: float
    delta: float
    N: int
    rule: SamplingRule = SamplingRule.EXPLICIT
    rule_param: float | None = None

    def __post_init__(self) -> None:
        if self.N < 2 or self.N % 2 != 0:
            raise ValueError("N must be even and >= 2")
        if not (self.T > 0 and self.delta > 0):
            raise ValueError("T and delta must be positive")
        if abs(self.N * self.delta - self.T) > 1e-12 * self.T:
            raise ValueError("N * delta must equal T")

    @classmethod
    def explicit(cls, T: float, delta: float) -> "SamplingScheme":
        N = int(round(T / delta))
        if N % 2 == 1:
            raise ValueError("T/delta must be even")
        return cls(T=T, delta=T / N, N=N)

    @classmethod
    def from_rule(cls, T: float, eps: float, rule: SamplingRule,
                  a: float) -> "SamplingScheme":
        """delta from a subsampling rule, rounded to an even divisor of T."""
        if rule is SamplingRule.POWER:
            raw = eps ** a
        elif rule is SamplingRule.LOG:
            raw = math.exp(-abs(math.log(eps)) ** a)
        else:
            raise ValueError("use explicit() for an explicit delta")
        half = max(1, round(T / (2.0 * raw)))
        N = 2 * half
        return cls(T=T, delta=T / N, N=N, rule=rule, rule_param=a)


@dataclass(frozen=True)
class EstimateResult:
    qv_coarse: float
    qv_fine: float
    h_hat: float
    c_hat: float
    hprime_used: float
    regime_used: str    # "subcritical" or "supercritical" normalization branch


def quad_var(samples) -> float:
    """Plain quadratic variation sum (x_{i+1} - x_i)^2."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need at least two samples")
    return float(np.sum(np.diff(x) ** 2))


def diffusivity_estimator(samples, hprime: float) -> float:
    """Renormalized quadratic variation N^{2 hprime - 1} * QV.

    At hprime = 1/2 this is the plain quadratic variation (the branch used
    when the limit is of Wiener type).
    """
    x = np.asarray(samples, dtype=float)
    if not 0.5 <= hprime < 1.0:
        raise ValueError("hprime must lie in [1/2, 1)")
    N = len(x) - 1
    return float(N) ** (2.0 * hprime - 1.0) * quad_var(x)


class DegenerateEstimateError(ValueError):
    """A quadratic variation vanished; the ratio estimator is undefined."""


def hurst_estimator(samples_fine, samples_coarse) -> float:
    """Ratio estimator of the self-similarity index on nested grids.

    ``samples_fine`` has 2N+1 points at step delta/2, ``samples_coarse``
    the N+1 points at step delta obtained by taking every second fine
    point (this nesting is verified).
    """
    fine = np.asarray(samples_fine, dtype=float)
    coarse = np.asarray(samples_coarse, dtype=float)
    if len(fine) != 2 * len(coarse) - 1:
        raise ValueError("fine grid must have 2N+1 points for N+1 coarse points")
    if not np.array_equal(fine[::2], coarse):
        raise ValueError("grids are not nested: coarse != fine[::2]")
    qv_f = quad_var(fine)
    qv_c = quad_var(coarse)
    if qv_f <= 0.0 or qv_c <= 0.0:
        raise DegenerateEstimateError("zero quadratic variation")
    return 0.5 - math.log(qv_f / qv_c) / (2.0 * math.log(2.0))


def subsample(path: PathGrid, step: float, count: int) -> np.ndarray:
    """count+1 samples of ``path`` at spacing ``step`` from its origin.

    ``step`` must be an exact multiple of the path's grid spacing: silent
    interpolation would bias the quadratic variations.
    """
    ratio = step / path.dt
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-9 * max(ratio, 1.0):
        raise ValueError(f"step {step:g} is not a multiple of the path dt {path.dt:g}")
    needed = stride * count + 1
    if len(path) < needed:
        raise ValueError(f"path too short: {len(path)} samples, need {needed}")
    return path.values[: needed : stride]


def plugin_estimate(fine_path: PathGrid, scheme: SamplingScheme) -> EstimateResult:
    """Two-step plug-in: estimate H', clamp to [1/2, 1), then estimate C.

    The ratio estimator needs both the delta/2 and the delta grid, so the
    fine path's spacing must divide delta/2 exactly.
    """
    fine = subsample(fine_path, scheme.delta / 2.0, 2 * scheme.N)
    coarse = fine[::2]
    h_hat = hurst_estimator(fine, coarse)
    hprime_used = min(max(h_hat, HPRIME_CLAMP[0]), HPRIME_CLAMP[1])
    c_hat = diffusivity_estimator(coarse, hprime_used)
    regime = "supercritical" if hprime_used > 0.5 else "subcritical"
    return EstimateResult(
        qv_coarse=quad_var(coarse),
        qv_fine=quad_var(fine),
        h_hat=h_hat,
        c_hat=c_hat,
        hprime_used=hprime_used,
        regime_used=regime,
    )
