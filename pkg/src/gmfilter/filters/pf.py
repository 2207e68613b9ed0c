"""Sequential importance resampling particle filter."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gmfilter.errors import ConfigError, ShapeMismatchError
from gmfilter.filters.base import BayesFilter, systematic_resample
from gmfilter.mixture import GaussianMixture
from gmfilter.statcore import cholesky_factor, effective_sample_size, symmetrize

__all__ = ["PfConfig", "ParticleSet", "ParticleFilter", "pf_step"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PfConfig:
    num_samples: int
    initial_mean: tuple
    initial_cov: tuple
    ess_resample_fraction: float = 0.5

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be >= 1, got {self.num_samples}")
        if not 0.0 <= self.ess_resample_fraction <= 1.0:
            raise ConfigError(
                f"ess_resample_fraction must be in [0, 1], got {self.ess_resample_fraction}")


class ParticleSet:
    __slots__ = ("states", "weights")

    def __init__(self, states: np.ndarray, weights: np.ndarray):
        states = np.asarray(states, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if states.ndim != 2 or weights.shape != (states.shape[0],):
            raise ShapeMismatchError(
                f"states {states.shape} and weights {weights.shape} do not align")
        self.states = states
        self.weights = weights

    def __len__(self):
        return self.states.shape[0]

    def moments(self):
        mean = self.weights @ self.states
        centered = self.states - mean
        cov = np.einsum("n,ni,nj->ij", self.weights, centered, centered)
        return mean, symmetrize(cov)


def pf_step(pset: ParticleSet, model, dt, measurement, context, rng,
            ess_threshold: float):
    """Propagate, reweight by the measurement likelihood, resample on low ESS.

    `ess_threshold` is the absolute particle count below which the set is
    resampled. Returns (ParticleSet, diagnostics); diagnostics carries the
    post-update pre-resample moments under "estimate".
    """
    states = model.propagate(pset.states, dt, context, rng)
    weights = pset.weights
    diag = {"resampled": False, "weight_collapse": False}
    if measurement is not None:
        log_like = model.log_likelihood(states, measurement, context)
        with np.errstate(invalid="ignore"):
            # all-(-inf) input yields nan here; that is the collapse path below
            scaled = weights * np.exp(log_like - log_like.max())
        total = scaled.sum()
        if not np.isfinite(total) or total <= 0:
            log.warning("particle weights collapsed, reset to uniform")
            weights = np.full(len(states), 1.0 / len(states))
            diag["weight_collapse"] = True
        else:
            weights = scaled / total
    out = ParticleSet(states, weights)
    diag["estimate"] = out.moments()
    if measurement is not None and effective_sample_size(weights) < ess_threshold:
        idx = systematic_resample(weights, len(states), rng)
        out = ParticleSet(states[idx], np.full(len(states), 1.0 / len(states)))
        diag["resampled"] = True
    return out, diag


class ParticleFilter(BayesFilter):
    name = "pf"

    def __init__(self, model, config: PfConfig):
        self.model = model
        self.config = config
        self.pset: ParticleSet | None = None
        self._estimate = None

    def initialize(self, rng) -> None:
        mean0 = np.asarray(self.config.initial_mean, dtype=float)
        cov0 = np.asarray(self.config.initial_cov, dtype=float)
        if cov0.ndim == 1:
            cov0 = np.diag(cov0)
        n = self.config.num_samples
        states = mean0 + rng.standard_normal((n, mean0.shape[0])) @ cholesky_factor(cov0).T
        states = self.model.normalize_state(states)
        self.pset = ParticleSet(states, np.full(n, 1.0 / n))
        self._estimate = self.pset.moments()

    def step(self, dt, measurement, context, rng) -> dict:
        threshold = self.config.ess_resample_fraction * self.config.num_samples
        self.pset, diag = pf_step(self.pset, self.model, dt, measurement,
                                  context, rng, threshold)
        self._estimate = diag.pop("estimate")
        return diag

    def estimate(self):
        return self._estimate

    def num_components(self) -> float:
        return float(len(self.pset))

    def snapshot(self) -> GaussianMixture:
        n, dim = self.pset.states.shape
        covs = np.zeros((n, dim, dim))
        return GaussianMixture(self.pset.states.copy(), covs,
                               self.pset.weights.copy(), normalized=False)
