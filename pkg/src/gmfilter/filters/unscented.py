"""Scaled unscented transform sigma points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gmfilter.errors import ConfigError
from gmfilter.statcore import cholesky_factor, _cholesky_factor_batch

__all__ = ["UtParams", "ut_weights", "ut_sigma_points", "ut_sigma_points_batch"]


@dataclass(frozen=True)
class UtParams:
    alpha: float
    beta: float = 2.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")

    def lam(self, dim: int) -> float:
        return self.alpha**2 * (dim + self.kappa) - dim


def ut_weights(dim: int, params: UtParams):
    """Mean and covariance weights for the 2*dim+1 scaled sigma points."""
    lam = params.lam(dim)
    scale = dim + lam
    if scale == 0:
        raise ConfigError(f"dim + lambda must be nonzero (dim={dim}, lambda={lam})")
    wm = np.full(2 * dim + 1, 1.0 / (2.0 * scale))
    wc = wm.copy()
    wm[0] = lam / scale
    wc[0] = lam / scale + 1.0 - params.alpha**2 + params.beta
    return wm, wc


def ut_sigma_points(mean, cov, params: UtParams):
    """(points (2n+1, n), wm, wc); offsets are sqrt(n+lambda) Cholesky columns."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    dim = mean.shape[0]
    wm, wc = ut_weights(dim, params)
    scale = dim + params.lam(dim)
    if scale < 0:
        raise ConfigError(f"dim + lambda must be positive for sigma offsets, got {scale}")
    offsets = np.sqrt(scale) * cholesky_factor(cov)
    points = np.vstack([mean[None, :], mean + offsets.T, mean - offsets.T])
    return points, wm, wc


def ut_sigma_points_batch(means, covs, params: UtParams):
    """Sigma points for a batch: (C, 2n+1, n) plus the shared weights."""
    means = np.asarray(means, dtype=float)
    covs = np.asarray(covs, dtype=float)
    c, dim = means.shape
    wm, wc = ut_weights(dim, params)
    scale = dim + params.lam(dim)
    if scale < 0:
        raise ConfigError(f"dim + lambda must be positive for sigma offsets, got {scale}")
    chols = np.sqrt(scale) * _cholesky_factor_batch(covs)
    offsets = np.transpose(chols, (0, 2, 1))
    points = np.concatenate([
        means[:, None, :],
        means[:, None, :] + offsets,
        means[:, None, :] - offsets,
    ], axis=1)
    return points, wm, wc
