"""Gaussian mixture belief representation and snapshot serialization.

The mixture is stored struct-of-arrays (means, covariances, weights) so
filters can stay vectorized across components; `GaussianComponent` is a
per-element view used at API boundaries and in tests.

Snapshot formats (one record per component: weight, mean entries,
row-major covariance entries):

* CSV: header ``weight,m0..m{n-1},c00,c01,..,c{n-1}{n-1}``, '.' decimal.
* binary: little-endian; magic ``GMSNAP1\\n`` (8 bytes), then uint32
  component count, uint32 state dimension, then count records of
  (1 + n + n*n) float64 values in the CSV's field order.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gmfilter.errors import DegenerateInputError, IngestError, ShapeMismatchError
from gmfilter.statcore import symmetrize

__all__ = [
    "GaussianComponent",
    "GaussianMixture",
    "write_snapshot_csv",
    "read_snapshot_csv",
    "write_snapshot_binary",
    "read_snapshot_binary",
]

_MAGIC = b"GMSNAP1\n"
WEIGHT_SUM_ATOL = 1e-12


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture element: mean vector, covariance matrix, scalar weight."""

    mean: np.ndarray
    cov: np.ndarray
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f"component weight must be >= 0, got {self.weight}")


class GaussianMixture:
    """Ordered collection of Gaussian components with normalized weights."""

    __slots__ = ("means", "covs", "weights")

    def __init__(self, means: np.ndarray, covs: np.ndarray, weights: np.ndarray,
                 normalized: bool = True):
        means = np.asarray(means, dtype=float)
        covs = np.asarray(covs, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if means.ndim != 2:
            raise ShapeMismatchError(f"means must be (N, dim), got {means.shape}")
        n, dim = means.shape
        if n < 1:
            raise DegenerateInputError("a mixture needs at least one component")
        if covs.shape != (n, dim, dim):
            raise ShapeMismatchError(
                f"covs must be ({n}, {dim}, {dim}), got {covs.shape}")
        if weights.shape != (n,):
            raise ShapeMismatchError(f"weights must be ({n},), got {weights.shape}")
        if np.any(weights < 0):
            raise ValueError("mixture weights must be non-negative")
        self.means = means
        self.covs = covs
        self.weights = weights
        if normalized:
            self.normalize()

    @classmethod
    def from_components(cls, components) -> "GaussianMixture":
        comps = list(components)
        means = np.stack([np.asarray(c.mean, dtype=float) for c in comps])
        covs = np.stack([np.asarray(c.cov, dtype=float) for c in comps])
        weights = np.array([c.weight for c in comps], dtype=float)
        return cls(means, covs, weights)

    def __len__(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def __getitem__(self, i: int) -> GaussianComponent:
        return GaussianComponent(self.means[i], self.covs[i], float(self.weights[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def normalize(self) -> "GaussianMixture":
        total = float(self.weights.sum())
        if total <= 0:
            raise DegenerateInputError("mixture weights sum to zero; cannot normalize")
        self.weights = self.weights / total
        return self

    def copy(self) -> "GaussianMixture":
        return GaussianMixture(self.means.copy(), self.covs.copy(),
                               self.weights.copy(), normalized=False)

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mixture mean and full mixture covariance (law of total variance)."""
        w = self.weights
        mean = w @ self.means
        centered = self.means - mean
        spread = np.einsum("n,ni,nj->ij", w, centered, centered)
        within = np.einsum("n,nij->ij", w, self.covs)
        return mean, symmetrize(within + spread)


def _header(dim: int) -> list[str]:
    cols = ["weight"] + [f"m{i}" for i in range(dim)]
    cols += [f"c{i}{j}" for i in range(dim) for j in range(dim)]
    return cols


def _flatten(mix: GaussianMixture) -> np.ndarray:
    n, dim = mix.means.shape
    return np.hstack([
        mix.weights[:, None],
        mix.means,
        mix.covs.reshape(n, dim * dim),
    ])


def _unflatten(table: np.ndarray, dim: int) -> GaussianMixture:
    weights = table[:, 0]
    means = table[:, 1:1 + dim]
    covs = table[:, 1 + dim:].reshape(len(table), dim, dim)
    return GaussianMixture(means, covs, weights, normalized=False)


def write_snapshot_csv(mix: GaussianMixture, path) -> None:
    table = _flatten(mix)
    buf = io.StringIO()
    buf.write(",".join(_header(mix.dim)) + "\n")
    for row in table:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_snapshot_csv(path) -> GaussianMixture:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise IngestError(f"{path}: empty snapshot file")
    ncols = len(lines[0].split(","))
    # columns: 1 + dim + dim^2
    dim = int(round((-1 + np.sqrt(4 * ncols - 3)) / 2))
    if 1 + dim + dim * dim != ncols:
        raise IngestError(f"{path}: line 1: malformed snapshot header ({ncols} columns)")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != ncols:
            raise IngestError(f"{path}: line {lineno}: expected {ncols} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise IngestError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise IngestError(f"{path}: snapshot has no components")
    return _unflatten(np.array(rows, dtype=float), dim)


def write_snapshot_binary(mix: GaussianMixture, path) -> None:
    n, dim = mix.means.shape
    table = np.ascontiguousarray(_flatten(mix), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", n, dim))
        fh.write(table.tobytes())


def read_snapshot_binary(path) -> GaussianMixture:
    raw = Path(path).read_bytes()
    if len(raw) < len(_MAGIC) + 8 or raw[: len(_MAGIC)] != _MAGIC:
        raise IngestError(f"{path}: not a mixture snapshot (bad magic)")
    n, dim = struct.unpack_from("<II", raw, len(_MAGIC))
    rec = 1 + dim + dim * dim
    body = raw[len(_MAGIC) + 8:]
    expected = n * rec * 8
    if len(body) != expected:
        raise IngestError(f"{path}: truncated snapshot ({len(body)} of {expected} payload bytes)")
    table = np.frombuffer(body, dtype="<f8").reshape(n, rec)
    return _unflatten(np.array(table, dtype=float), dim)
