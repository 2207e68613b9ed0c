"""Deterministic statistical and linear-algebra kernels shared by all filters.

Everything here is a pure function of its inputs except `mvn_sample`,
which consumes draws from the caller's RngStream.  Matrix arguments are
plain numpy arrays; batched variants accept a leading component axis and
are used by the filters to stay vectorized across samples.
"""

from __future__ import annotations

import numpy as np

from gmfilter.errors import (
    ContractViolationError,
    DegenerateInputError,
    NumericalError,
    ShapeMismatchError,
)
from gmfilter.rng import RngStream

__all__ = [
    "bandwidth",
    "sample_covariance",
    "scaled_sample_covariance",
    "psd_exceeds",
    "mvn_sample",
    "mvn_sample_batch",
    "effective_sample_size",
    "mvn_logpdf",
    "cholesky_factor",
    "symmetrize",
]

# Relative jitter allowed when factoring a semi-definite covariance.
CHOLESKY_JITTER_REL = 1e-9
# Loewner-order tolerance: lambda_min(bound - candidate) may dip this far
# (times trace of the bound) below zero before the bound counts as exceeded.
PSD_TOL_REL = 1e-10
# Tolerance on |sum(weights) - 1| for inputs contracted to be normalized.
WEIGHT_SUM_TOL = 1e-9


def bandwidth(num_samples: int, exponent: float = -0.2) -> float:
    """Kernel-density bandwidth: num_samples raised to the exponent.

    The default exponent -1/5 is the usual bias/variance rule of thumb
    for Gaussian kernels.
    """
    if num_samples < 1:
        raise DegenerateInputError(f"num_samples must be >= 1, got {num_samples}")
    if exponent >= 0:
        raise ValueError(f"bandwidth exponent must be negative, got {exponent}")
    return float(num_samples) ** exponent


def sample_covariance(samples: np.ndarray) -> np.ndarray:
    """Unbiased sample covariance (1/(N-1) normalization) about the sample mean.

    `samples` is (N, dim) with N >= 2.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2:
        raise ShapeMismatchError(f"samples must be a (N, dim) array, got shape {pts.shape}")
    n = pts.shape[0]
    if n < 2:
        raise DegenerateInputError(f"sample covariance needs >= 2 samples, got {n}")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    return symmetrize(cov)


def scaled_sample_covariance(
    samples: np.ndarray, num_samples: int, exponent: float = -0.2
) -> np.ndarray:
    """Sample covariance shrunk by the squared bandwidth of `num_samples`."""
    h = bandwidth(num_samples, exponent)
    return h * h * sample_covariance(samples)


def symmetrize(mat: np.ndarray) -> np.ndarray:
    """Average a nearly-symmetric matrix with its transpose."""
    return 0.5 * (mat + np.swapaxes(mat, -1, -2))


def psd_exceeds(candidate: np.ndarray, bound: np.ndarray) -> bool | np.ndarray:
    """True where `candidate` is NOT dominated by `bound` in the Loewner order.

    Tests the minimum eigenvalue of (bound - candidate) against
    -PSD_TOL_REL * trace(bound).  Accepts batched inputs with a leading
    component axis; returns a boolean array in that case.
    """
    cand = np.asarray(candidate, dtype=float)
    bnd = np.asarray(bound, dtype=float)
    if cand.shape[-2:] != bnd.shape[-2:]:
        raise ShapeMismatchError(
            f"dimension mismatch: candidate {cand.shape[-2:]} vs bound {bnd.shape[-2:]}"
        )
    diff = symmetrize(bnd - cand)
    min_eig = np.linalg.eigvalsh(diff)[..., 0]
    tol = PSD_TOL_REL * np.maximum(np.trace(bnd, axis1=-2, axis2=-1), 0.0)
    out = min_eig < -tol
    if out.ndim == 0:
        return bool(out)
    return out


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular factor L with L @ L.T ~= cov.

    Falls back to a diagonal jitter of CHOLESKY_JITTER_REL * trace for
    semi-definite inputs; an all-zero matrix factors to zero.  Raises
    NumericalError when the matrix is indefinite beyond the jitter.
    """
    cov = np.asarray(cov, dtype=float)
    if not np.any(cov):
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = CHOLESKY_JITTER_REL * max(float(np.trace(cov)), 0.0)
    if jitter > 0.0:
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[-1]))
        except np.linalg.LinAlgError:
            pass
    raise NumericalError("covariance is indefinite beyond the jitter tolerance")


def _cholesky_factor_batch(covs: np.ndarray) -> np.ndarray:
    """Batched cholesky_factor over a (N, dim, dim) stack."""
    try:
        return np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        out = np.empty_like(covs)
        for i in range(covs.shape[0]):
            out[i] = cholesky_factor(covs[i])
        return out


def mvn_sample(mean: np.ndarray, cov: np.ndarray, rng: RngStream) -> np.ndarray:
    """One draw from N(mean, cov) via a Cholesky-type factor.

    The standard-normal vector is always consumed from `rng`, so the
    stream position does not depend on the covariance contents.
    """
    mean = np.asarray(mean, dtype=float)
    factor = cholesky_factor(cov)
    u = rng.standard_normal(mean.shape[0])
    return mean + factor @ u


def mvn_sample_batch(means: np.ndarray, covs: np.ndarray, rng: RngStream) -> np.ndarray:
    """One draw from each N(means[i], covs[i]); a single batched rng call.

    The i-th output uses the i-th block of the normal draw, so results
    are independent of how the batch might be split across workers.
    """
    means = np.asarray(means, dtype=float)
    factors = _cholesky_factor_batch(np.asarray(covs, dtype=float))
    u = rng.standard_normal(means.shape)
    return means + np.einsum("nij,nj->ni", factors, u)


def effective_sample_size(weights: np.ndarray) -> float:
    """1 / sum(w_i^2) for a normalized weight vector."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ContractViolationError("weights must be non-negative")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ContractViolationError(f"weights must be normalized; sum = {total!r}")
    return 1.0 / float((w * w).sum())


def mvn_logpdf(residuals: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """Log density of N(0, covs[i]) at residuals[i], batched.

    `residuals` is (N, m) and `covs` is (N, m, m) or (m, m) broadcast to
    all rows.
    """
    res = np.atleast_2d(np.asarray(residuals, dtype=float))
    covs = np.asarray(covs, dtype=float)
    if covs.ndim == 2:
        covs = np.broadcast_to(covs, (res.shape[0],) + covs.shape)
    m = res.shape[1]
    sign, logdet = np.linalg.slogdet(covs)
    if np.any(sign <= 0):
        raise NumericalError("innovation covariance is not positive definite")
    solved = np.linalg.solve(covs, res[..., None])[..., 0]
    maha = np.einsum("ni,ni->n", res, solved)
    return -0.5 * (m * np.log(2.0 * np.pi) + logdet + maha)
