"""Planar radio-source localization with a bimodal log-linear SNR model.

The source state is a static 2-D position. The only observable is the
SNR in dB, predicted from the robot-to-source distance d by

    snr = p1 * log10(d) + p2

with separate (p1, p2) pairs for line-of-sight and non-line-of-sight
propagation. Each candidate source position gets LOS/NLOS mode
probabilities from a distance threshold test against the robot, and the
measurement likelihood is the probability-weighted sum of the two mode
densities. The mode probabilities are used exactly as configured even
though the far branch does not sum to one; the likelihood is a weight,
not a normalized density.

Measurement noise variance adapts to the measured SNR: high SNR (close
range) interpolates toward r_min, low SNR toward r_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gmfilter.scenarios.base import ScenarioModel

__all__ = [
    "D_FLOOR",
    "SnrContext",
    "snr_predict",
    "los_mode_probabilities",
    "adaptive_measurement_noise",
    "bimodal_likelihood",
    "bimodal_log_likelihood",
    "RadioSourceModel",
]

D_FLOOR = 0.1
LN10 = math.log(10.0)


@dataclass(frozen=True)
class SnrContext:
    """Per-step measurement context for the radio scenario."""

    robot_position: tuple
    snr_measured: float
    los_params: tuple = (-20.0, 55.0)
    nlos_params: tuple = (-30.0, 45.0)
    los_threshold: float = 15.0
    r_min: float = 8.0
    r_max: float = 35.0
    snr_low: float = 0.0
    snr_high: float = 50.0
    prob_near: tuple = (0.95, 0.05)
    prob_far: tuple = (0.05, 0.5)

    def __post_init__(self):
        if self.r_min > self.r_max:
            raise ValueError(f"r_min {self.r_min} exceeds r_max {self.r_max}")
        if self.los_threshold <= 0:
            raise ValueError(f"los_threshold must be > 0, got {self.los_threshold}")


def _distances(sources: np.ndarray, context: SnrContext) -> np.ndarray:
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    delta = sources - np.asarray(context.robot_position, dtype=float)
    return np.hypot(delta[:, 0], delta[:, 1])


def snr_predict(sources, context: SnrContext, mode: str) -> np.ndarray:
    """Predicted SNR (dB) per source row; distance clamped to D_FLOOR."""
    if mode == "los":
        p1, p2 = context.los_params
    elif mode == "nlos":
        p1, p2 = context.nlos_params
    else:
        raise ValueError(f"mode must be 'los' or 'nlos', got {mode!r}")
    d = np.maximum(_distances(sources, context), D_FLOOR)
    return p1 * np.log10(d) + p2


def los_mode_probabilities(sources, context: SnrContext):
    """(p_los, p_nlos) arrays; distance exactly at the threshold counts as near."""
    d = _distances(sources, context)
    near = d <= context.los_threshold
    p_los = np.where(near, context.prob_near[0], context.prob_far[0])
    p_nlos = np.where(near, context.prob_near[1], context.prob_far[1])
    return p_los, p_nlos


def adaptive_measurement_noise(snr_measured: float, snr_low: float, snr_high: float,
                               r_min: float, r_max: float) -> float:
    """Interpolate r_max (low SNR) -> r_min (high SNR), clamped at the ends."""
    if not snr_low < snr_high:
        raise ValueError(f"snr_low {snr_low} must be < snr_high {snr_high}")
    lam = (snr_measured - snr_low) / (snr_high - snr_low)
    lam = min(max(lam, 0.0), 1.0)
    return lam * r_min + (1.0 - lam) * r_max


def _context_noise(context: SnrContext) -> float:
    return adaptive_measurement_noise(context.snr_measured, context.snr_low,
                                      context.snr_high, context.r_min, context.r_max)


def bimodal_log_likelihood(sources, context: SnrContext) -> np.ndarray:
    """Log of the probability-weighted two-mode SNR density per source row."""
    r = _context_noise(context)
    z = context.snr_measured
    p_los, p_nlos = los_mode_probabilities(sources, context)
    resid_los = z - snr_predict(sources, context, "los")
    resid_nlos = z - snr_predict(sources, context, "nlos")
    log_norm = -0.5 * math.log(2.0 * math.pi * r)
    log_los = np.log(p_los) + log_norm - 0.5 * resid_los**2 / r
    log_nlos = np.log(p_nlos) + log_norm - 0.5 * resid_nlos**2 / r
    hi = np.maximum(log_los, log_nlos)
    return hi + np.log(np.exp(log_los - hi) + np.exp(log_nlos - hi))


def bimodal_likelihood(sources, context: SnrContext) -> np.ndarray:
    return np.exp(bimodal_log_likelihood(sources, context))


class RadioSourceModel(ScenarioModel):
    """Static planar source with random-walk process noise.

    The per-axis random-walk variance is `process_variance` per second;
    logs recorded at 1 Hz see exactly that value per step.
    """

    state_dim = 2
    meas_dim = 1

    def __init__(self, process_variance: float = 0.5):
        if process_variance < 0:
            raise ValueError(f"process_variance must be >= 0, got {process_variance}")
        self.process_variance = float(process_variance)

    def dynamics(self, states, dt, context):
        return np.array(states, dtype=float, copy=True)

    def dynamics_jacobian(self, states, dt, context):
        n = len(states)
        return np.broadcast_to(np.eye(2), (n, 2, 2)).copy()

    def process_noise_matrix(self, states, dt, context):
        n = len(states)
        q = self.process_variance * dt
        return np.broadcast_to(q * np.eye(2), (n, 2, 2)).copy()

    def sample_process_noise(self, states, dt, context, rng):
        q = self.process_variance * dt
        return math.sqrt(q) * rng.standard_normal((len(states), 2))

    def measurement(self, states, context: SnrContext):
        """Probability-weighted prediction (p_los z_los + p_nlos z_nlos) / (p_los + p_nlos)."""
        p_los, p_nlos = los_mode_probabilities(states, context)
        z_los = snr_predict(states, context, "los")
        z_nlos = snr_predict(states, context, "nlos")
        z = (p_los * z_los + p_nlos * z_nlos) / (p_los + p_nlos)
        return z[:, None]

    def measurement_jacobian(self, states, context: SnrContext):
        states = np.atleast_2d(np.asarray(states, dtype=float))
        delta = states - np.asarray(context.robot_position, dtype=float)
        d = np.hypot(delta[:, 0], delta[:, 1])
        p_los, p_nlos = los_mode_probabilities(states, context)
        p1 = (p_los * context.los_params[0] + p_nlos * context.nlos_params[0]) / (p_los + p_nlos)
        # d(p1 log10 d)/dx = p1 (x - rx) / (d^2 ln 10); zero inside the clamp floor
        scale = np.where(d > D_FLOOR, p1 / (LN10 * np.maximum(d, D_FLOOR) ** 2), 0.0)
        return (scale[:, None] * delta)[:, None, :]

    def measurement_noise(self, context: SnrContext):
        return np.array([[_context_noise(context)]])

    def log_likelihood(self, states, measured, context: SnrContext,
                       innovation_covs=None):
        # the weight update deliberately uses the adaptive scalar R,
        # not the per-component innovation covariance
        return bimodal_log_likelihood(states, context)
