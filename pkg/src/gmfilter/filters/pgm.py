"""Particle Gaussian mixture filters: DBSCAN clustering plus either a
linearized (ds) or unscented (du) per-cluster mean update.

Each measurement step the particle cloud is clustered, every cluster is
fitted with a weighted Gaussian, the cluster means are updated against
the measurement while the cluster covariances are deliberately left at
their sample values (no covariance update; an ablation flag enables
it), component weights are scaled by the measurement likelihood, and
the next particle cloud is drawn from the resulting mixture.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gmfilter.errors import ConfigError, ShapeMismatchError
from gmfilter.filters.base import (
    BayesFilter,
    normalize_log_weights,
    systematic_resample,
)
from gmfilter.filters.pf import ParticleSet
from gmfilter.filters.unscented import UtParams, ut_sigma_points_batch
from gmfilter.mixture import GaussianMixture
from gmfilter.statcore import cholesky_factor, mvn_sample_batch, symmetrize

__all__ = [
    "NOISE",
    "PgmConfig",
    "PgmFilter",
    "dbscan",
    "fit_cluster_gaussians",
    "pgm_ds_update",
    "pgm_du_update",
    "pgm_resample",
]

log = logging.getLogger(__name__)

NOISE = -1
COV_FLOOR = 1e-9
# cap on scratch elements per distance block (keeps big clouds off the heap)
_BLOCK_ELEMS = 6_000_000


@dataclass(frozen=True)
class PgmConfig:
    num_samples: int
    initial_mean: tuple
    initial_cov: tuple
    eps: float
    min_pts: int
    ut: UtParams | None = None
    covariance_update: bool = False

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.eps <= 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        if self.min_pts < 1:
            raise ConfigError(f"min_pts must be >= 1, got {self.min_pts}")


def _within_eps(block: np.ndarray, points: np.ndarray, eps2: float) -> np.ndarray:
    """(len(block), n) boolean neighbor mask by direct squared differences."""
    diff = block[:, None, :] - points[None, :, :]
    return np.einsum("bnd,bnd->bn", diff, diff) <= eps2


def dbscan(points, eps: float, min_pts: int) -> np.ndarray:
    """Density clustering; returns per-point labels, NOISE (-1) for outliers.

    Core points have at least min_pts neighbors within eps, the point
    itself included. Clusters are grown fully from the lowest-index
    unlabeled core point, so labels are deterministic in input order and
    border points go to the first cluster that reaches them.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ShapeMismatchError(f"points must be (N, dim), got {points.shape}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    n, dim = points.shape
    eps2 = eps * eps
    chunk = max(1, _BLOCK_ELEMS // max(n * dim, 1))

    degree = np.empty(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        degree[lo:hi] = _within_eps(points[lo:hi], points, eps2).sum(axis=1)
    core = degree >= min_pts

    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for seed in range(n):
        if labels[seed] != NOISE or not core[seed]:
            continue
        labels[seed] = cluster
        frontier = np.array([seed])
        while frontier.size:
            reach = np.zeros(n, dtype=bool)
            for lo in range(0, frontier.size, chunk):
                block = points[frontier[lo:lo + chunk]]
                reach |= _within_eps(block, points, eps2).any(axis=0)
            newly = reach & (labels == NOISE)
            labels[newly] = cluster
            frontier = np.flatnonzero(newly & core)
        cluster += 1
    return labels


def fit_cluster_gaussians(pset: ParticleSet, labels: np.ndarray):
    """Weighted Gaussian per cluster; noise particles are excluded.

    Component weight is the cluster's share of particle weight,
    renormalized over clusters. With no cluster at all, falls back to a
    single Gaussian over every particle. Returns (mixture, diagnostics).
    """
    states, weights = pset.states, pset.weights
    labels = np.asarray(labels)
    if labels.shape != (len(states),):
        raise ShapeMismatchError(
            f"labels {labels.shape} do not align with {len(states)} particles")
    ids = np.unique(labels[labels >= 0])
    diag = {"fallback": False, "num_clusters": int(ids.size),
            "num_noise": int(np.sum(labels == NOISE))}
    dim = states.shape[1]
    if ids.size == 0:
        log.warning("clustering marked every particle as noise; "
                    "falling back to one global component")
        diag["fallback"] = True
        masks = [np.ones(len(states), dtype=bool)]
    else:
        masks = [labels == i for i in ids]

    means = np.empty((len(masks), dim))
    covs = np.empty((len(masks), dim, dim))
    comp_weights = np.empty(len(masks))
    for j, mask in enumerate(masks):
        w = weights[mask]
        wsum = w.sum()
        if wsum <= 0:
            # dead cluster: zero-weight members only; keep it inert
            w = np.full(mask.sum(), 1.0 / mask.sum())
            wsum_out = 0.0
        else:
            w = w / wsum
            wsum_out = wsum
        x = states[mask]
        mean = w @ x
        centered = x - mean
        cov = np.einsum("n,ni,nj->ij", w, centered, centered)
        if mask.sum() < 2 or not np.any(cov):
            cov = COV_FLOOR * np.eye(dim)
        means[j] = mean
        covs[j] = symmetrize(cov)
        comp_weights[j] = wsum_out
    if comp_weights.sum() <= 0:
        comp_weights[:] = 1.0
    return GaussianMixture(means, covs, comp_weights), diag


def pgm_ds_update(mix: GaussianMixture, measurement, model, context,
                  covariance_update: bool = False):
    """Linearized per-cluster mean update with the cluster sample covariance.

    The covariance is left untouched unless covariance_update is set.
    Returns (mixture, diagnostics).
    """
    means, covs = mix.means, mix.covs
    jac = model.measurement_jacobian(means, context)
    r = model.measurement_noise(context)
    pht = np.einsum("nij,nkj->nik", covs, jac)
    s = np.einsum("nij,njk->nik", jac, pht) + r
    s = 0.5 * (s + np.transpose(s, (0, 2, 1)))
    gain = np.transpose(np.linalg.solve(s, np.transpose(pht, (0, 2, 1))), (0, 2, 1))

    predicted = model.measurement(means, context)
    innov = model.innovation(np.asarray(measurement, dtype=float), predicted)
    log_like = model.log_likelihood(means, measurement, context, innovation_covs=s)

    new_means = model.normalize_state(means + np.einsum("nij,nj->ni", gain, innov))
    if covariance_update:
        kh = np.einsum("nij,njk->nik", gain, jac)
        new_covs = symmetrize(covs - np.einsum("nij,njk->nik", kh, covs))
    else:
        new_covs = covs.copy()
    weights, collapsed = normalize_log_weights(log_like, mix.weights)
    if collapsed:
        log.warning("cluster update: all likelihoods underflowed, weights reset")
    return GaussianMixture(new_means, new_covs, weights, normalized=True), {
        "weight_collapse": collapsed}


def pgm_du_update(mix: GaussianMixture, measurement, model, context,
                  params: UtParams, covariance_update: bool = False):
    """Unscented per-cluster mean update; covariance convention as pgm_ds_update.

    Sigma points run through the full nonlinear measurement function;
    innovation moments are reconstructed relative to the central point
    so angular measurements stay wrap-consistent. Returns
    (mixture, diagnostics).
    """
    means, covs = mix.means, mix.covs
    c, dim = means.shape
    points, wm, wc = ut_sigma_points_batch(means, covs, params)
    flat = points.reshape(c * points.shape[1], dim)
    z_pts = model.measurement(flat, context).reshape(c, points.shape[1], -1)
    m = z_pts.shape[2]

    z0 = z_pts[:, 0:1, :]
    dz = model.innovation(z_pts, np.broadcast_to(z0, z_pts.shape))
    dz_mean = np.einsum("p,npj->nj", wm, dz)
    z_hat = z0[:, 0, :] + dz_mean
    dev_z = dz - dz_mean[:, None, :]
    dev_x = points - np.einsum("p,npj->nj", wm, points)[:, None, :]

    r = model.measurement_noise(context)
    s = np.einsum("p,npi,npj->nij", wc, dev_z, dev_z) + r
    s = 0.5 * (s + np.transpose(s, (0, 2, 1)))
    pxz = np.einsum("p,npi,npj->nij", wc, dev_x, dev_z)
    gain = np.transpose(np.linalg.solve(s, np.transpose(pxz, (0, 2, 1))), (0, 2, 1))

    innov = model.innovation(np.asarray(measurement, dtype=float), z_hat)
    log_like = model.log_likelihood(means, measurement, context, innovation_covs=s)

    new_means = model.normalize_state(means + np.einsum("nij,nj->ni", gain, innov))
    if covariance_update:
        new_covs = symmetrize(covs - np.einsum("nij,njk,nlk->nil", gain, s, gain))
    else:
        new_covs = covs.copy()
    weights, collapsed = normalize_log_weights(log_like, mix.weights)
    if collapsed:
        log.warning("cluster update: all likelihoods underflowed, weights reset")
    return GaussianMixture(new_means, new_covs, weights, normalized=True), {
        "weight_collapse": collapsed}


def pgm_resample(mix: GaussianMixture, num_particles: int, rng) -> ParticleSet:
    """Fresh particle cloud drawn from the mixture, uniform weights."""
    idx = systematic_resample(mix.weights, num_particles, rng)
    states = mvn_sample_batch(mix.means[idx], mix.covs[idx], rng)
    return ParticleSet(states, np.full(num_particles, 1.0 / num_particles))


class PgmFilter(BayesFilter):
    def __init__(self, model, config: PgmConfig, variant: str = "ds"):
        if variant not in ("ds", "du"):
            raise ConfigError(f"variant must be 'ds' or 'du', got {variant!r}")
        if variant == "du" and config.ut is None:
            raise ConfigError("pgm-du needs UtParams in the config")
        self.model = model
        self.config = config
        self.variant = variant
        self.name = f"pgm-{variant}"
        self.pset: ParticleSet | None = None
        self._estimate = None
        self._num_components = float("nan")

    def initialize(self, rng) -> None:
        cfg = self.config
        mean0 = np.asarray(cfg.initial_mean, dtype=float)
        cov0 = np.asarray(cfg.initial_cov, dtype=float)
        if cov0.ndim == 1:
            cov0 = np.diag(cov0)
        states = mean0 + rng.standard_normal(
            (cfg.num_samples, mean0.shape[0])) @ cholesky_factor(cov0).T
        states = self.model.normalize_state(states)
        self.pset = ParticleSet(states, np.full(cfg.num_samples, 1.0 / cfg.num_samples))
        self._estimate = self.pset.moments()
        self._num_components = float("nan")

    def step(self, dt, measurement, context, rng) -> dict:
        cfg = self.config
        states = self.model.propagate(self.pset.states, dt, context, rng)
        self.pset = ParticleSet(states, self.pset.weights)
        if measurement is None:
            self._estimate = self.pset.moments()
            self._num_components = float("nan")
            return {}
        labels = dbscan(states, cfg.eps, cfg.min_pts)
        mix, diag = fit_cluster_gaussians(self.pset, labels)
        if self.variant == "ds":
            mix, udiag = pgm_ds_update(mix, measurement, self.model, context,
                                       covariance_update=cfg.covariance_update)
        else:
            mix, udiag = pgm_du_update(mix, measurement, self.model, context,
                                       cfg.ut, covariance_update=cfg.covariance_update)
        diag.update(udiag)
        self._estimate = mix.moments()
        self._num_components = float(len(mix))
        pset = pgm_resample(mix, cfg.num_samples, rng)
        self.pset = ParticleSet(self.model.normalize_state(pset.states), pset.weights)
        return diag

    def estimate(self):
        return self._estimate

    def num_components(self) -> float:
        return self._num_components

    def snapshot(self) -> GaussianMixture:
        n, dim = self.pset.states.shape
        return GaussianMixture(self.pset.states.copy(), np.zeros((n, dim, dim)),
                               self.pset.weights.copy(), normalized=False)
