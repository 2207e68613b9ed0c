"""Uniform filter-facing interface.

Every filter exposes the same cycle so the harness can drive them
interchangeably: `initialize(rng)` builds the belief from the
configured prior, `step(dt, measurement, context, rng)` advances one
time step (measurement may be None on steps without one), `estimate()`
returns the current point estimate and covariance, recorded after the
measurement update and before resampling.
"""

from __future__ import annotations

import numpy as np

from gmfilter.errors import ContractViolationError

__all__ = ["BayesFilter", "normalize_log_weights", "systematic_resample", "make_filter"]


class BayesFilter:
    name: str = "filter"

    def initialize(self, rng) -> None:
        raise NotImplementedError

    def step(self, dt: float, measurement, context, rng) -> dict:
        """Advance one step; returns a diagnostics dict (may be empty)."""
        raise NotImplementedError

    def estimate(self):
        """(mean, cov) of the current belief."""
        raise NotImplementedError

    def num_components(self) -> float:
        """Mixture count behind the current estimate (NaN if none exists)."""
        raise NotImplementedError

    def snapshot(self):
        """Current belief as a GaussianMixture for serialization."""
        raise NotImplementedError


def normalize_log_weights(log_like: np.ndarray, prior: np.ndarray):
    """Multiply prior weights by exp(log_like) with max-shift, then normalize.

    Returns (weights, collapsed); a total underflow or non-finite sum
    yields a uniform reset with collapsed=True instead of an abort.
    """
    with np.errstate(invalid="ignore"):
        # all-(-inf) input yields nan here; that is the collapse path below
        shifted = log_like - log_like.max()
        weights = prior * np.exp(shifted)
    total = weights.sum()
    if not np.isfinite(total) or total <= 0:
        return np.full(len(weights), 1.0 / len(weights)), True
    return weights / total, False


def systematic_resample(weights: np.ndarray, count: int, rng) -> np.ndarray:
    """Indices of `count` draws proportional to weights, systematic scheme.

    One uniform offset stratified over `count` equal slots; allocation
    error per index is below one draw, so weights (0.9, 0.1) at
    count=1000 give exactly 900/100.
    """
    weights = np.asarray(weights, dtype=float)
    if count < 1:
        raise ContractViolationError(f"resample count must be >= 1, got {count}")
    total = weights.sum()
    if not np.isfinite(total) or total <= 0:
        raise ContractViolationError("resample weights must sum to a positive finite value")
    positions = (np.arange(count) + rng.uniform()) / count
    cumulative = np.cumsum(weights / total)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="right")


def make_filter(kind: str, model, **kwargs) -> BayesFilter:
    """Construct a filter by name: gmf, pf, pgm-ds, pgm-du."""
    from gmfilter.filters.gmf import GmfConfig, GmfFilter
    from gmfilter.filters.pf import ParticleFilter, PfConfig
    from gmfilter.filters.pgm import PgmConfig, PgmFilter

    if kind == "gmf":
        return GmfFilter(model, GmfConfig(**kwargs))
    if kind == "pf":
        return ParticleFilter(model, PfConfig(**kwargs))
    if kind in ("pgm-ds", "pgm-du"):
        return PgmFilter(model, PgmConfig(**kwargs), variant=kind[-2:])
    raise ValueError(f"unknown filter kind {kind!r}; expected gmf, pf, pgm-ds or pgm-du")
