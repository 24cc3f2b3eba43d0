"""Simulation and plug-in inference for homogenization limits of slow/fast
systems driven by a fractional Ornstein-Uhlenbeck fast variable."""

__version__ = "0.1.0"

from .chaos import ChaosTerm, chaos_weight, diag_block, offdiag_block, variance_prediction
from .estimators import (EstimateResult, SamplingRule, SamplingScheme,
                         diffusivity_estimator, hurst_estimator, plugin_estimate,
                         quad_var, subsample)
from .fou import FouSpec, cov_tail_coeff, fou_covariance, fou_kernel, fou_path, rho_table
from .gaussian import (HermiteCoeffs, PathGrid, SeedSpec, fbm_path, fgn_autocov,
                       hermite_eval, hermite_series)
from .multiscale import (DriftSpec, ModelSpec, Regime, drift_scale, reduced_hurst,
                         simulate_random_ode, simulate_slow)
from .theory import (CriticalIndices, LogCorrection, RatePrediction, bias_rate,
                     block_asymptote, critical_indices, hermite_norm_const,
                     limit_diffusivity_sq, limit_diffusivity_sq_critical,
                     noncentral_overlap_limit, noncentral_scale, qv_mean_exact,
                     second_chaos_const, triangular_lag_integral, variance_rate)

__all__ = [name for name in dir() if not name.startswith("_")]
