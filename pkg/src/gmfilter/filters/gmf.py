"""Gaussian mixture filter where every sample is a full Gaussian component.

Cycle per step: propagate every component mean through the dynamics
with its own process-noise draw and its covariance through the Jacobian
form; cap any covariance that is no longer dominated (Loewner order) by
the scaled sample covariance of the current means; EKF-update each
component against the measurement and scale its weight by the
measurement likelihood; resample new component means from the posterior
mixture and reset every covariance to the scaled sample covariance of
the resampled means.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gmfilter.errors import ConfigError
from gmfilter.filters.base import BayesFilter, normalize_log_weights, systematic_resample
from gmfilter.mixture import GaussianMixture
from gmfilter.statcore import (
    bandwidth,
    cholesky_factor,
    effective_sample_size,
    mvn_sample_batch,
    psd_exceeds,
    scaled_sample_covariance,
    symmetrize,
)

__all__ = [
    "GmfConfig",
    "GmfFilter",
    "gmf_init",
    "gmf_propagate",
    "gmf_mi_bound",
    "gmf_update",
    "gmf_resample",
    "gmf_estimate",
]

log = logging.getLogger(__name__)

COV_FLOOR = 1e-9


@dataclass(frozen=True)
class GmfConfig:
    num_samples: int
    initial_mean: tuple
    initial_cov: tuple
    bandwidth_exponent: float = -0.2
    mi_bounding: bool = True
    joseph_update: bool = False
    # resample every measurement step when None, else only when
    # ESS < fraction * num_samples
    ess_resample_fraction: float | None = None

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.bandwidth_exponent >= 0:
            raise ConfigError(
                f"bandwidth_exponent must be < 0, got {self.bandwidth_exponent}")

    def mean_array(self):
        return np.asarray(self.initial_mean, dtype=float)

    def cov_array(self):
        cov = np.asarray(self.initial_cov, dtype=float)
        if cov.ndim == 1:
            cov = np.diag(cov)
        return cov


def _floor_cov(dim: int) -> np.ndarray:
    return COV_FLOOR * np.eye(dim)


def _scaled_cov_or_floor(means: np.ndarray, num_samples: int, exponent: float):
    """Scaled sample covariance of the means, or a jitter floor when degenerate."""
    dim = means.shape[1]
    if len(means) < 2:
        return _floor_cov(dim), True
    scaled = scaled_sample_covariance(means, num_samples, exponent=exponent)
    if not np.any(scaled):
        return _floor_cov(dim), True
    return scaled, False


def gmf_init(config: GmfConfig, rng) -> GaussianMixture:
    """Means drawn from the prior; every covariance starts at bandwidth^2 * I."""
    mean0 = config.mean_array()
    cov0 = config.cov_array()
    n, dim = config.num_samples, mean0.shape[0]
    chol0 = cholesky_factor(cov0)
    means = mean0 + rng.standard_normal((n, dim)) @ chol0.T
    h2 = bandwidth(n, exponent=config.bandwidth_exponent) ** 2
    covs = np.broadcast_to(h2 * np.eye(dim), (n, dim, dim)).copy()
    weights = np.full(n, 1.0 / n)
    return GaussianMixture(means, covs, weights, normalized=False)


def gmf_propagate(mix: GaussianMixture, model, dt: float, context, rng) -> GaussianMixture:
    """Means through the noisy dynamics, covariances through F P Ft + G Q Gt."""
    jac = model.dynamics_jacobian(mix.means, dt, context)
    noise_cov = model.process_noise_matrix(mix.means, dt, context)
    means = model.propagate(mix.means, dt, context, rng)
    covs = np.einsum("nij,njk,nlk->nil", jac, mix.covs, jac) + noise_cov
    return GaussianMixture(means, symmetrize(covs), mix.weights, normalized=False)


def gmf_mi_bound(mix: GaussianMixture, config: GmfConfig) -> GaussianMixture:
    """Replace any covariance not dominated by the scaled sample covariance."""
    scaled, degenerate = _scaled_cov_or_floor(
        mix.means, config.num_samples, config.bandwidth_exponent)
    if degenerate:
        log.warning("mi-bound: degenerate mean spread, covariances floored")
        covs = np.broadcast_to(scaled, mix.covs.shape).copy()
        return GaussianMixture(mix.means, covs, mix.weights, normalized=False)
    exceeds = psd_exceeds(mix.covs, scaled)
    if not np.any(exceeds):
        return mix
    covs = mix.covs.copy()
    covs[exceeds] = scaled
    return GaussianMixture(mix.means, covs, mix.weights, normalized=False)


def gmf_update(mix: GaussianMixture, measurement, model, context,
               joseph: bool = False):
    """Per-component EKF measurement update plus likelihood reweighting.

    Returns (mixture, diagnostics). The likelihood enters at the prior
    mean (innovation of the pre-update component), the mean and
    covariance through the standard gain equations.
    """
    means, covs = mix.means, mix.covs
    n, dim = means.shape
    jac = model.measurement_jacobian(means, context)
    r = model.measurement_noise(context)
    pht = np.einsum("nij,nkj->nik", covs, jac)
    s = np.einsum("nij,njk->nik", jac, pht) + r
    s = 0.5 * (s + np.transpose(s, (0, 2, 1)))
    gain = np.transpose(np.linalg.solve(s, np.transpose(pht, (0, 2, 1))), (0, 2, 1))

    predicted = model.measurement(means, context)
    innov = model.innovation(np.asarray(measurement, dtype=float), predicted)
    log_like = model.log_likelihood(means, measurement, context, innovation_covs=s)

    new_means = means + np.einsum("nij,nj->ni", gain, innov)
    new_means = model.normalize_state(new_means)
    if joseph:
        ikh = np.eye(dim) - np.einsum("nij,njk->nik", gain, jac)
        new_covs = (np.einsum("nij,njk,nlk->nil", ikh, covs, ikh)
                    + np.einsum("nij,jk,nlk->nil", gain, r, gain))
    else:
        kh = np.einsum("nij,njk->nik", gain, jac)
        new_covs = covs - np.einsum("nij,njk->nik", kh, covs)
    new_covs = symmetrize(new_covs)

    weights, collapsed = normalize_log_weights(log_like, mix.weights)
    if collapsed:
        log.warning("measurement update: all likelihoods underflowed, weights reset")
    out = GaussianMixture(new_means, new_covs, weights, normalized=True)
    return out, {"weight_collapse": collapsed}


def gmf_resample(mix: GaussianMixture, config: GmfConfig, rng) -> GaussianMixture:
    """Draw new means from the mixture; reset covariances to the scaled
    sample covariance of the new means."""
    n = config.num_samples
    idx = systematic_resample(mix.weights, n, rng)
    means = mvn_sample_batch(mix.means[idx], mix.covs[idx], rng)
    scaled, _ = _scaled_cov_or_floor(means, n, config.bandwidth_exponent)
    covs = np.broadcast_to(scaled, (n,) + scaled.shape).copy()
    weights = np.full(n, 1.0 / n)
    return GaussianMixture(means, covs, weights, normalized=False)


def gmf_estimate(mix: GaussianMixture):
    """Mixture mean and full mixture covariance."""
    return mix.moments()


class GmfFilter(BayesFilter):
    name = "gmf"

    def __init__(self, model, config: GmfConfig):
        self.model = model
        self.config = config
        self.mix: GaussianMixture | None = None
        self._estimate = None

    def initialize(self, rng) -> None:
        self.mix = gmf_init(self.config, rng)
        self._estimate = gmf_estimate(self.mix)

    def step(self, dt, measurement, context, rng) -> dict:
        cfg = self.config
        mix = gmf_propagate(self.mix, self.model, dt, context, rng)
        if cfg.mi_bounding and len(mix) >= 2:
            mix = gmf_mi_bound(mix, cfg)
        diag = {}
        if measurement is not None:
            mix, diag = gmf_update(mix, measurement, self.model, context,
                                   joseph=cfg.joseph_update)
            self._estimate = gmf_estimate(mix)
            if self._should_resample(mix):
                mix = gmf_resample(mix, cfg, rng)
                mix.means = self.model.normalize_state(mix.means)
        else:
            self._estimate = gmf_estimate(mix)
        self.mix = mix
        return diag

    def _should_resample(self, mix) -> bool:
        frac = self.config.ess_resample_fraction
        if frac is None:
            return True
        return effective_sample_size(mix.weights) < frac * len(mix)

    def estimate(self):
        return self._estimate

    def num_components(self) -> float:
        return float(len(self.mix))

    def snapshot(self) -> GaussianMixture:
        return self.mix.copy()
