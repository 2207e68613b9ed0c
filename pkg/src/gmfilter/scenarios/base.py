"""Scenario model interface shared by every filter.

A scenario bundles the dynamics, the measurement function, their
Jacobians, and the noise models. All array-facing methods are batched:
states are (N, state_dim), measurements broadcast against them. Models
are immutable after construction and every method is pure, so they are
safe to evaluate concurrently from any number of filter components.

`context` is an opaque per-step object the scenario itself produced
(measurement availability, robot pose, adaptive noise inputs); filters
pass it through without inspecting it.
"""

from __future__ import annotations

import numpy as np

from gmfilter.statcore import mvn_logpdf


class ScenarioModel:
    """Abstract dynamics + measurement model. Subclasses fill in the arrays."""

    state_dim: int
    meas_dim: int

    # dynamics ---------------------------------------------------------

    def dynamics(self, states: np.ndarray, dt: float, context) -> np.ndarray:
        """Noise-free mean dynamics applied to each row of `states`."""
        raise NotImplementedError

    def dynamics_jacobian(self, states: np.ndarray, dt: float, context) -> np.ndarray:
        """(N, n, n) Jacobians of `dynamics` at each state."""
        raise NotImplementedError

    def process_noise_matrix(self, states: np.ndarray, dt: float, context) -> np.ndarray:
        """(N, n, n) additive covariance Γ Q Γᵀ entering each component."""
        raise NotImplementedError

    def sample_process_noise(self, states: np.ndarray, dt: float, context, rng) -> np.ndarray:
        """(N, n) draws of Γ w, w ~ N(0, Q), one per state row."""
        raise NotImplementedError

    def propagate(self, states, dt, context, rng=None):
        """Push states through the dynamics, optionally with sampled noise."""
        out = self.dynamics(states, dt, context)
        if rng is not None:
            out = out + self.sample_process_noise(states, dt, context, rng)
        return self.normalize_state(out)

    # measurement ------------------------------------------------------

    def measurement(self, states: np.ndarray, context) -> np.ndarray:
        """(N, m) predicted measurements."""
        raise NotImplementedError

    def measurement_jacobian(self, states: np.ndarray, context) -> np.ndarray:
        """(N, m, n) measurement Jacobians."""
        raise NotImplementedError

    def measurement_noise(self, context) -> np.ndarray:
        """(m, m) measurement noise covariance for this step."""
        raise NotImplementedError

    # hooks with sensible defaults --------------------------------------

    def innovation(self, measured: np.ndarray, predicted: np.ndarray) -> np.ndarray:
        """Residual measured - predicted; scenarios with angular channels wrap it."""
        return measured - predicted

    def normalize_state(self, states: np.ndarray) -> np.ndarray:
        """Canonical state representation (angle wrapping); identity by default."""
        return states

    def log_likelihood(self, states: np.ndarray, measured: np.ndarray, context,
                       innovation_covs: np.ndarray | None = None) -> np.ndarray:
        """Per-state log density of the measurement.

        The default is the multivariate normal of the innovation under
        `innovation_covs` (one (m, m) matrix per state) when provided,
        else under the step's R. Scenarios with non-Gaussian likelihoods
        override this.
        """
        predicted = self.measurement(states, context)
        resid = self.innovation(np.asarray(measured, dtype=float), predicted)
        if innovation_covs is None:
            r = self.measurement_noise(context)
            innovation_covs = np.broadcast_to(r, (len(states),) + r.shape)
        return mvn_logpdf(resid, innovation_covs)
