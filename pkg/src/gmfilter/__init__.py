"""Nonlinear Bayesian state estimation with per-sample Gaussian mixtures.

Every sample carries its own mean, covariance, and weight; component
covariances are capped by a scaled-sample-covariance bound and reset on
resampling.  Baseline filters (SIR particle filter, density-clustered
particle Gaussian mixtures) share the same scenario interface so the
benchmark harness can compare them on equal footing.
"""

from gmfilter.mixture import GaussianComponent, GaussianMixture
from gmfilter.rng import RngStream

__version__ = "0.1.0"

__all__ = ["GaussianComponent", "GaussianMixture", "RngStream", "__version__"]
