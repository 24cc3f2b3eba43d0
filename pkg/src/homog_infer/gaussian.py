"""Gaussian primitives: seeded streams, Hermite polynomials, exact fBm synthesis.

Everything downstream is built from three ingredients defined here:

* reproducible Gaussian variates drawn from counter-based streams, so that
  a (base_seed, stream_id) pair fully determines every sample ever drawn;
* probabilists' Hermite polynomials H_n (H_2(x) = x^2 - 1) and finite
  Hermite series, the nonlinearities applied to the fast process;
* exact-in-law fractional Brownian motion on a uniform grid, sampled by
  circulant embedding of the increment autocovariance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft, next_fast_len


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one reproducible random stream.

    Distinct (base_seed, stream_id) pairs give statistically independent
    streams; identical pairs give bit-identical output. ``stream_id`` is
    conventionally the replicate index of a Monte Carlo experiment.
    """

    base_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self, tag: int = 0) -> np.random.Generator:
        """Counter-based generator for this stream.

        ``tag`` separates independent substreams consumed by one operation
        (e.g. the driving noise and an initial condition).
        """
        ss = np.random.SeedSequence(
            entropy=self.base_seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(self.stream_id, tag),
        )
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PathGrid:
    """A trajectory sampled on a uniform grid: sample k sits at t0 + k*dt."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))


@dataclass(frozen=True)
class HermiteCoeffs:
    """A finite Hermite series G(x) = sum_q c_q H_q(x) with G centered.

    ``coeffs[q]`` is c_q; c_0 must vanish and at least one c_q with q >= 1
    must not.  The rank is the smallest such q: it controls how fast the
    correlation E[G(Y_0) G(Y_s)] decays, through rho(s)**rank.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        c = tuple(float(x) for x in self.coeffs)
        if len(c) < 2:
            raise ValueError("need at least coefficients c_0, c_1")
        if c[0] != 0.0:
            raise ValueError("c_0 must be zero (G centered under the Gaussian)")
        if not any(x != 0.0 for x in c[1:]):
            raise ValueError("at least one coefficient with q >= 1 must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def single(cls, rank: int, c: float = 1.0) -> "HermiteCoeffs":
        """G = c * H_rank."""
        if rank < 1:
            raise ValueError("rank must be >= 1")
        return cls((0.0,) * rank + (float(c),))

    @property
    def rank(self) -> int:
        return next(q for q, c in enumerate(self.coeffs) if q >= 1 and c != 0.0)

    @property
    def max_order(self) -> int:
        return max(q for q, c in enumerate(self.coeffs) if c != 0.0)

    def norm_sq(self) -> float:
        """Squared L2 norm under the standard Gaussian: sum c_q^2 q!."""
        return sum(c * c * math.factorial(q) for q, c in enumerate(self.coeffs))

    def is_single_term(self) -> bool:
        return sum(1 for c in self.coeffs[1:] if c != 0.0) == 1


def hermite_eval(n: int, x):
    """Probabilists' Hermite polynomial H_n(x).

    Three-term recurrence H_{n+1} = x H_n - n H_{n-1}, H_0 = 1, H_1 = x.
    Accepts scalars or arrays.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(x, dtype=float)
    hm1 = np.ones_like(x)
    if n == 0:
        return hm1 if hm1.ndim else float(hm1)
    h = x.copy()
    for j in range(1, n):
        hm1, h = h, x * h - j * hm1
    return h if h.ndim else float(h)


def hermite_series(coeffs: HermiteCoeffs, x):
    """Evaluate G(x) = sum_q c_q H_q(x) for scalar or array x."""
    x = np.asarray(x, dtype=float)
    c = coeffs.coeffs
    out = np.full_like(x, c[0])
    hm1 = np.ones_like(x)
    h = x.copy()
    for q in range(1, len(c)):
        if c[q] != 0.0:
            out = out + c[q] * h
        hm1, h = h, x * h - q * hm1
    return out if out.ndim else float(out)


def fgn_autocov(H: float, dt: float, k) -> np.ndarray | float:
    """Autocovariance of fBm increments at lag k:

        gamma(k) = (dt^{2H}/2) (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    karr = np.asarray(k, dtype=float)
    g = 0.5 * dt ** (2 * H) * (
        np.abs(karr + 1) ** (2 * H)
        + np.abs(karr - 1) ** (2 * H)
        - 2.0 * np.abs(karr) ** (2 * H)
    )
    return g if g.ndim else float(g)


class EmbeddingError(RuntimeError):
    """Circulant embedding produced a materially negative eigenvalue."""


def fgn_increments(H: float, n_inc: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """n_inc stationary fBm increments, exact in law via circulant embedding.

    The increment autocovariance is embedded in a circulant of size 2L with
    L = next_fast_len(n_inc); eigenvalues below -1e-8 * max are treated as a
    failure of the embedding, smaller negatives are clipped to zero.
    """
    if n_inc < 1:
        raise ValueError("need at least one increment")
    L = next_fast_len(max(n_inc, 2))
    g = fgn_autocov(H, dt, np.arange(L + 1))
    circ = np.concatenate([g, g[-2:0:-1]])
    lam = np.real(fft(circ))
    lmax = lam.max()
    if lam.min() < -1e-8 * lmax:
        raise EmbeddingError(
            f"negative embedding eigenvalue {lam.min():.3e} (max {lmax:.3e}) "
            f"for H={H}, n={n_inc}"
        )
    lam = np.clip(lam, 0.0, None)
    M = 2 * L
    z = np.empty(M, dtype=complex)
    z[0] = rng.standard_normal()
    z[L] = rng.standard_normal()
    u = rng.standard_normal(L - 1)
    v = rng.standard_normal(L - 1)
    z[1:L] = (u + 1j * v) / np.sqrt(2.0)
    z[L + 1:] = np.conj(z[1:L][::-1])
    w = fft(z * np.sqrt(lam / M))
    return np.real(w[:n_inc])


def fbm_path(H: float, n: int, dt: float, seed: SeedSpec, t0: float = 0.0) -> PathGrid:
    """Discrete fractional Brownian motion, exact in law.

    Returns n samples B(t0), ..., B(t0 + (n-1) dt) with B(t0) = 0; the n-1
    increments form a stationary Gaussian sequence with autocovariance
    ``fgn_autocov``. Same SeedSpec, same output, bit for bit.
    """
    if not 0.0 < H < 1.0:
        raise ValueError("H must lie in (0,1)")
    if n < 2:
        raise ValueError("need n >= 2 samples")
    inc = fgn_increments(H, n - 1, dt, seed.generator())
    values = np.empty(n)
    values[0] = 0.0
    np.cumsum(inc, out=values[1:])
    return PathGrid(t0=t0, dt=dt, values=values)
