"""Slow/fast model assembly and integration of the slow component.

The slow variable is a pure time integral

    dX = scale(eps, H*) * G(Y^eps) dt,     X_0 = 0,

with Y^eps the fast fOU process and G a finite Hermite series of rank m.
The reduced index H*(m) = (H-1)m + 1 decides the scaling and the nature of
the limit: Wiener below 1/2, Hermite-type above.  A bounded-drift variant

    x' = h(x) g(y) + scale(eps) G(y)

is integrated with Heun's method on the same frozen fast path.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fou import FouSpec, fou_path
from .gaussian import HermiteCoeffs, PathGrid, SeedSpec, hermite_series


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"      # H* < 1/2, Wiener-type limit
    CRITICAL = "critical"            # H* = 1/2
    SUPERCRITICAL = "supercritical"  # H* > 1/2, Hermite-type limit


def reduced_hurst(H: float, m: int) -> float:
    """Reduced self-similarity index H*(m) = (H-1)m + 1 (may be negative)."""
    if not 0.0 < H < 1.0:
        raise ValueError("H must lie in (0,1)")
    if m < 1:
        raise ValueError("m must be a positive integer")
    return (H - 1.0) * m + 1.0


def drift_scale(eps: float, hstar: float) -> float:
    """Normalization applied to the slow drift so fluctuations are O(1):

        eps^{H*-1}            if H* > 1/2,
        1/sqrt(eps |log eps|)  if H* = 1/2,
        eps^{-1/2}            if H* < 1/2.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0,1): |log eps| degenerates otherwise")
    if hstar > 0.5:
        return eps ** (hstar - 1.0)
    if hstar == 0.5:
        return 1.0 / math.sqrt(eps * abs(math.log(eps)))
    return eps ** -0.5


@dataclass(frozen=True)
class ModelSpec:
    """Full slow/fast model: fast-process parameters plus the nonlinearity G."""

    fou: FouSpec
    g_coeffs: HermiteCoeffs

    @classmethod
    def make(cls, H: float, eps: float, coeffs) -> "ModelSpec":
        if isinstance(coeffs, int):
            coeffs = HermiteCoeffs.single(coeffs)
        elif not isinstance(coeffs, HermiteCoeffs):
            coeffs = HermiteCoeffs(tuple(coeffs))
        return cls(fou=FouSpec(H=H, eps=eps), g_coeffs=coeffs)

    @property
    def H(self) -> float:
        return self.fou.H

    @property
    def eps(self) -> float:
        return self.fou.eps

    @property
    def rank(self) -> int:
        return self.g_coeffs.rank

    @property
    def hstar(self) -> float:
        return reduced_hurst(self.fou.H, self.g_coeffs.rank)

    @property
    def hprime(self) -> float:
        return max(self.hstar, 0.5)

    @property
    def regime(self) -> Regime:
        hs = self.hstar
        if abs(hs - 0.5) < 1e-12:
            return Regime.CRITICAL
        return Regime.SUPERCRITICAL if hs > 0.5 else Regime.SUBCRITICAL

    def scale(self) -> float:
        return drift_scale(self.eps, self.hstar)


@dataclass(frozen=True)
class DriftSpec:
    """Bounded drift h(x) g(y) for the fluctuation ODE.

    ``h`` must be bounded and twice differentiable, ``g`` bounded and
    continuous; the declared bounds are spot-checked on sampled arguments.
    Both callables must accept numpy arrays.
    """

    h: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    sup_h: float
    sup_g: float

    def __post_init__(self) -> None:
        if not (self.sup_h >= 0 and self.sup_g >= 0):
            raise ValueError("bounds must be nonnegative")
        probe = np.linspace(-30.0, 30.0, 101)
        if np.max(np.abs(np.asarray(self.h(probe)))) > self.sup_h * (1 + 1e-9):
            raise ValueError("h exceeds its declared bound on probe points")
        if np.max(np.abs(np.asarray(self.g(probe)))) > self.sup_g * (1 + 1e-9):
            raise ValueError("g exceeds its declared bound on probe points")


def _check_grid(model: ModelSpec, T: float, dt: float) -> int:
    if dt > model.eps / 20.0 * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:g} must satisfy dt <= eps/20 = {model.eps/20:g}")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * T:
        raise ValueError("T must be an integer multiple of dt")
    if n_steps < 10:
        raise ValueError("need T/dt >= 10")
    return n_steps


def fast_path_for(model: ModelSpec, T: float, dt: float, seed: SeedSpec) -> PathGrid:
    """The frozen fast path used by both integrators for a given seed."""
    n_steps = _check_grid(model, T, dt)
    return fou_path(model.fou, n_steps + 1, dt, seed)


def simulate_slow(model: ModelSpec, T: float, dt: float, seed: SeedSpec,
                  fast: PathGrid | None = None) -> PathGrid:
    """Slow component on the fine grid, trapezoidal quadrature of the drift.

    The slow equation has no stochastic-integral subtlety (the noise enters
    only through Y), so X_{k+1} = X_k + dt*(aG_k + aG_{k+1})/2 with
    aG = scale * G(Y) is second-order accurate.  Passing a precomputed fast
    path lets one path serve several sampling schemes.
    """
    n_steps = _check_grid(model, T, dt)
    if fast is None:
        fast = fou_path(model.fou, n_steps + 1, dt, seed)
    elif len(fast) != n_steps + 1 or abs(fast.dt - dt) > 1e-15:
        raise ValueError("fast path grid does not match (T, dt)")
    ag = model.scale() * hermite_series(model.g_coeffs, fast.values)
    incs = 0.5 * dt * (ag[:-1] + ag[1:])
    values = np.empty(n_steps + 1)
    values[0] = 0.0
    np.cumsum(incs, out=values[1:])
    return PathGrid(t0=0.0, dt=dt, values=values)


def simulate_random_ode(model: ModelSpec, drift: DriftSpec, T: float, dt: float,
                        seed: SeedSpec, fast: PathGrid | None = None,
                        divergence_guard: float = 1e8) -> PathGrid:
    """Heun integration of x' = h(x) g(y) + scale * G(y) on the frozen fast path.

    Uses the same driving path as ``simulate_slow`` for the same seed, so
    h = 0 reproduces the driftless trajectory exactly.  Aborts if |x| ever
    exceeds the divergence guard, which signals a misdeclared drift.
    """
    n_steps = _check_grid(model, T, dt)
    if fast is None:
        fast = fou_path(model.fou, n_steps + 1, dt, seed)
    elif len(fast) != n_steps + 1 or abs(fast.dt - dt) > 1e-15:
        raise ValueError("fast path grid does not match (T, dt)")
    y = fast.values
    ag = model.scale() * hermite_series(model.g_coeffs, y)
    gy = np.asarray(drift.g(y), dtype=float)
    h = drift.h
    values = np.empty(n_steps + 1)
    x = 0.0
    values[0] = x
    half_dt = 0.5 * dt
    for k in range(n_steps):
        f0 = float(h(x)) * gy[k] + ag[k]
        xp = x + dt * f0
        f1 = float(h(xp)) * gy[k + 1] + ag[k + 1]
        x = x + half_dt * (f0 + f1)
        if abs(x) > divergence_guard:
            raise RuntimeError(
                f"trajectory diverged (|x| > {divergence_guard:g} at step {k+1}); "
                "check the declared drift bounds")
        values[k + 1] = x
    return PathGrid(t0=0.0, dt=dt, values=values)
