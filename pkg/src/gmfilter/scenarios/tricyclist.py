"""Bearings-only park-navigation benchmark.

A tricyclist with known wheel speed and steering profile dead-reckons
around a park and occasionally measures relative bearings to two
friends riding merry-go-rounds at known centers and radii. The state

    [X, Y, theta, phi1, phi1_dot, phi2, phi2_dot]

carries the vehicle pose plus each friend's carousel angle and angular
rate. Bearings are intermittent, which makes the problem weakly
observable and strongly nonlinear.

Discrete-time forward-Euler kinematics with wheelbase b:

    X     += v dt cos(theta)
    Y     += v dt sin(theta)
    theta += v dt tan(gamma) / b
    phi_j += phi_j_dot dt

Process noise enters through a state-dependent 7x5 matrix G acting on
(speed, steering, phi1_dot, phi2_dot, heading) noise channels: speed
noise displaces X, Y, theta through the kinematic derivatives times dt,
steering noise enters theta through v dt / (b cos^2 gamma), the rate
noises add directly to the rates, heading noise adds directly to theta.
The shipped q_diag zeroes the steering and heading channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gmfilter.errors import NumericalError
from gmfilter.scenarios.base import ScenarioModel
from gmfilter.statcore import cholesky_factor

__all__ = ["TricyclistConfig", "TricyclistStepContext", "TricyclistModel", "wrap_angle"]

ANGLE_IDX = (2, 3, 5)  # theta, phi1, phi2


def wrap_angle(x):
    """Reduce angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)


@dataclass(frozen=True)
class TricyclistConfig:
    wheelbase: float = 1.0
    dt: float = 0.5
    num_steps: int = 120
    # nominal initial state [X, Y, theta, phi1, phi1_dot, phi2, phi2_dot]
    initial_mean: tuple = (0.0, 0.0, math.pi / 2, 0.0, 2 * math.pi / 30, math.pi, 2 * math.pi / 45)
    initial_cov_diag: tuple = (
        18.75**2, 18.75**2, (5 * math.pi / 8) ** 2,
        (5 * math.pi / 6) ** 2, (1.857e-2) ** 2,
        (5 * math.pi / 6) ** 2, (1.857e-2) ** 2,
    )
    # per-step noise variances on (speed, steering, phi1_dot, phi2_dot, heading)
    q_diag: tuple = (0.0567, 0.0, 0.0063, 0.0063, 0.0)
    r_diag: tuple = (1e-3 * 0.3046, 1e-3 * 0.1354)
    carousel_centers: tuple = ((-18.0, 35.0), (18.0, 35.0))
    carousel_radii: tuple = (4.0, 4.0)
    # (steps, speed m/s, steering rad) segments, concatenated to num_steps
    control_segments: tuple = ((40, 2.5, 0.0), (40, 2.5, 0.18), (40, 2.5, 0.0))
    # bearings available every meas_period-th step (step index k = 1..num_steps)
    meas_period: int = 4
    meas_offset: int = 0

    def control_arrays(self):
        speeds = np.empty(self.num_steps)
        steers = np.empty(self.num_steps)
        k = 0
        for steps, v, g in self.control_segments:
            take = min(steps, self.num_steps - k)
            speeds[k:k + take] = v
            steers[k:k + take] = g
            k += take
            if k >= self.num_steps:
                break
        if k < self.num_steps:
            # hold the last segment's controls to the end
            speeds[k:] = self.control_segments[-1][1]
            steers[k:] = self.control_segments[-1][2]
        return speeds, steers


@dataclass(frozen=True)
class TricyclistStepContext:
    """Controls applied over the step and bearing availability at its end."""

    speed: float
    steer: float
    available: tuple = (True, True)


class TricyclistModel(ScenarioModel):
    state_dim = 7
    meas_dim = 2

    def __init__(self, config: TricyclistConfig | None = None):
        self.config = config or TricyclistConfig()
        self.wheelbase = self.config.wheelbase
        self.q_diag = np.asarray(self.config.q_diag, dtype=float)
        self.r_full = np.diag(self.config.r_diag)
        self.centers = np.asarray(self.config.carousel_centers, dtype=float)
        self.radii = np.asarray(self.config.carousel_radii, dtype=float)

    # dynamics ---------------------------------------------------------

    def dynamics(self, states, dt, context):
        x = np.array(states, dtype=float, copy=True)
        v, g = context.speed, context.steer
        theta = x[:, 2]
        x[:, 0] += v * dt * np.cos(theta)
        x[:, 1] += v * dt * np.sin(theta)
        x[:, 2] += v * dt * math.tan(g) / self.wheelbase
        x[:, 3] += x[:, 4] * dt
        x[:, 5] += x[:, 6] * dt
        if not np.all(np.isfinite(x)):
            bad = int(np.argwhere(~np.all(np.isfinite(x), axis=1))[0, 0])
            raise NumericalError(f"non-finite propagated state at component {bad}")
        return x

    def dynamics_jacobian(self, states, dt, context):
        states = np.asarray(states, dtype=float)
        n = len(states)
        v = context.speed
        theta = states[:, 2]
        jac = np.broadcast_to(np.eye(7), (n, 7, 7)).copy()
        jac[:, 0, 2] = -v * dt * np.sin(theta)
        jac[:, 1, 2] = v * dt * np.cos(theta)
        jac[:, 3, 4] = dt
        jac[:, 5, 6] = dt
        return jac

    def _noise_gain(self, states, dt, context):
        """(N, 7, 5) mapping of the five noise channels into the state."""
        states = np.asarray(states, dtype=float)
        n = len(states)
        v, g = context.speed, context.steer
        theta = states[:, 2]
        gain = np.zeros((n, 7, 5))
        gain[:, 0, 0] = dt * np.cos(theta)
        gain[:, 1, 0] = dt * np.sin(theta)
        gain[:, 2, 0] = dt * math.tan(g) / self.wheelbase
        gain[:, 2, 1] = v * dt / (self.wheelbase * math.cos(g) ** 2)
        gain[:, 4, 2] = 1.0
        gain[:, 6, 3] = 1.0
        gain[:, 2, 4] = 1.0
        return gain

    def process_noise_matrix(self, states, dt, context):
        gain = self._noise_gain(states, dt, context)
        return np.einsum("nik,k,njk->nij", gain, self.q_diag, gain)

    def sample_process_noise(self, states, dt, context, rng):
        gain = self._noise_gain(states, dt, context)
        w = np.sqrt(self.q_diag) * rng.standard_normal((len(states), 5))
        return np.einsum("nik,nk->ni", gain, w)

    def normalize_state(self, states):
        x = np.array(states, dtype=float, copy=True)
        x[:, ANGLE_IDX] = wrap_angle(x[:, ANGLE_IDX])
        return x

    # measurement ------------------------------------------------------

    def friend_positions(self, states):
        """(N, 2, 2) world positions of the two carousel riders."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        phis = states[:, (3, 5)]
        offsets = self.radii[None, :, None] * np.stack(
            [np.cos(phis), np.sin(phis)], axis=-1)
        return self.centers[None, :, :] + offsets

    def measurement(self, states, context):
        states = np.atleast_2d(np.asarray(states, dtype=float))
        friends = self.friend_positions(states)
        delta = friends - states[:, None, 0:2]
        if np.any(np.all(delta == 0.0, axis=-1)):
            raise NumericalError("bearing undefined: friend coincides with vehicle position")
        psi = np.arctan2(delta[..., 1], delta[..., 0]) - states[:, 2:3]
        return wrap_angle(psi)[:, self._channels(context)]

    def measurement_jacobian(self, states, context):
        states = np.atleast_2d(np.asarray(states, dtype=float))
        n = len(states)
        friends = self.friend_positions(states)
        delta = friends - states[:, None, 0:2]
        rho2 = np.einsum("ncj,ncj->nc", delta, delta)
        if np.any(rho2 == 0):
            raise NumericalError("bearing undefined: friend coincides with vehicle position")
        jac = np.zeros((n, 2, 7))
        jac[:, :, 0] = delta[..., 1] / rho2
        jac[:, :, 1] = -delta[..., 0] / rho2
        jac[:, :, 2] = -1.0
        phis = states[:, (3, 5)]
        dpsi_dphi = self.radii[None, :] * (
            delta[..., 1] * np.sin(phis) + delta[..., 0] * np.cos(phis)) / rho2
        jac[:, 0, 3] = dpsi_dphi[:, 0]
        jac[:, 1, 5] = dpsi_dphi[:, 1]
        return jac[:, self._channels(context), :]

    def measurement_noise(self, context):
        ch = self._channels(context)
        return self.r_full[np.ix_(ch, ch)]

    def innovation(self, measured, predicted):
        return wrap_angle(np.asarray(measured, dtype=float) - predicted)

    @staticmethod
    def _channels(context):
        avail = getattr(context, "available", (True, True))
        return [j for j in range(2) if avail[j]]

    # truth simulation --------------------------------------------------

    def step_contexts(self):
        cfg = self.config
        speeds, steers = cfg.control_arrays()
        contexts = []
        for k in range(1, cfg.num_steps + 1):
            on = (k % cfg.meas_period) == (cfg.meas_offset % cfg.meas_period)
            contexts.append(TricyclistStepContext(
                speed=float(speeds[k - 1]), steer=float(steers[k - 1]),
                available=(on, on)))
        return contexts

    def simulate(self, rng):
        """Draw a truth trajectory and its measurement sequence.

        Returns (truth, contexts, measurements): truth is
        (num_steps + 1, 7) starting from a draw about the nominal mean
        with the initial covariance; measurements[k] is None on steps
        without available bearings.
        """
        cfg = self.config
        mean0 = np.asarray(cfg.initial_mean, dtype=float)
        chol0 = cholesky_factor(np.diag(cfg.initial_cov_diag))
        x = mean0 + chol0 @ rng.standard_normal(7)
        x = self.normalize_state(x[None, :])[0]
        contexts = self.step_contexts()
        truth = np.empty((cfg.num_steps + 1, 7))
        truth[0] = x
        meas_chol = cholesky_factor(self.r_full)
        measurements = []
        for k, ctx in enumerate(contexts, start=1):
            truth[k] = self.propagate(truth[k - 1][None, :], cfg.dt, ctx, rng)[0]
            noise = meas_chol @ rng.standard_normal(2)
            if any(ctx.available):
                ch = self._channels(ctx)
                z = self.measurement(truth[k][None, :], ctx)[0]
                measurements.append(wrap_angle(z + noise[ch]))
            else:
                measurements.append(None)
        return truth, contexts, measurements
