import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmfilter.errors import NumericalError
from gmfilter.rng import RngStream
from gmfilter.scenarios.tricyclist import (
    TricyclistConfig,
    TricyclistModel,
    TricyclistStepContext,
    wrap_angle,
)

from oracles import finite_difference_jacobian

BOTH = TricyclistStepContext(speed=0.0, steer=0.0, available=(True, True))


def default_model(**overrides):
    return TricyclistModel(TricyclistConfig(**overrides))


def random_states(n, seed=0):
    rng = np.random.default_rng(seed)
    states = rng.normal(size=(n, 7)) * np.array([20, 20, 1.5, 1.5, 0.3, 1.5, 0.3])
    states[:, 1] += 5.0  # keep clear of the carousels
    return states


class TestWrapAngle:
    @pytest.mark.parametrize("x,expected", [
        (0.0, 0.0),
        (math.pi, math.pi),
        (-math.pi, math.pi),
        (3 * math.pi / 2, -math.pi / 2),
        (2 * math.pi, 0.0),
        (-5 * math.pi / 2, -math.pi / 2),
    ])
    def test_values(self, x, expected):
        assert wrap_angle(x) == pytest.approx(expected, abs=1e-12)

    def test_array(self):
        out = wrap_angle(np.array([0.0, 4 * math.pi, -math.pi]))
        assert np.allclose(out, [0.0, 0.0, math.pi], atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-50.0, 50.0), st.integers(-5, 5))
    def test_range_and_periodicity(self, x, k):
        w = float(wrap_angle(x))
        assert -math.pi < w <= math.pi
        assert float(wrap_angle(x + 2 * math.pi * k)) == pytest.approx(w, abs=1e-9)


class TestDynamics:
    def test_stationary_vehicle(self):
        model = default_model()
        state = np.array([[1.0, 2.0, 0.3, 0.5, 0.2, -0.4, 0.1]])
        ctx = TricyclistStepContext(speed=0.0, steer=0.0)
        out = model.propagate(state, 0.5, ctx)
        assert np.allclose(out[0, :3], state[0, :3], atol=1e-15)
        assert out[0, 3] == pytest.approx(0.5 + 0.2 * 0.5)
        assert out[0, 5] == pytest.approx(-0.4 + 0.1 * 0.5)
        assert out[0, 4] == state[0, 4] and out[0, 6] == state[0, 6]

    def test_straight_line(self):
        model = default_model()
        state = np.array([[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]])
        ctx = TricyclistStepContext(speed=2.5, steer=0.0)
        out = model.propagate(state, 0.5, ctx)
        assert out[0, 0] == pytest.approx(2.5 * 0.5)
        assert out[0, 1] == pytest.approx(0.0, abs=1e-15)
        assert out[0, 2] == pytest.approx(0.0, abs=1e-15)

    def test_full_carousel_revolution_wraps(self):
        model = default_model()
        period = 30.0
        rate = 2 * math.pi / period
        state = np.array([[0.0, 0.0, 0.0, 0.3, rate, -1.2, rate]])
        ctx = TricyclistStepContext(speed=0.0, steer=0.0)
        out = model.propagate(state, period, ctx)
        assert out[0, 3] == pytest.approx(0.3, abs=1e-12)
        assert out[0, 5] == pytest.approx(-1.2, abs=1e-12)

    def test_steering_turns_heading(self):
        model = default_model(wheelbase=2.0)
        state = np.zeros((1, 7))
        ctx = TricyclistStepContext(speed=3.0, steer=0.2)
        out = model.dynamics(state, 0.5, ctx)
        assert out[0, 2] == pytest.approx(3.0 * 0.5 * math.tan(0.2) / 2.0)

    def test_nonfinite_state_rejected(self):
        model = default_model()
        state = np.zeros((2, 7))
        state[1, 0] = np.inf
        with pytest.raises(NumericalError, match="component 1"):
            model.dynamics(state, 0.5, TricyclistStepContext(speed=2.0, steer=0.0))

    def test_process_noise_zero_channels(self):
        # shipped q zeroes the steering and heading channels
        model = default_model()
        cov = model.process_noise_matrix(np.zeros((1, 7)), 0.5,
                                         TricyclistStepContext(speed=2.5, steer=0.1))
        gain = model._noise_gain(np.zeros((1, 7)), 0.5,
                                 TricyclistStepContext(speed=2.5, steer=0.1))
        q = np.asarray(model.q_diag)
        expected = gain[0] @ np.diag(q) @ gain[0].T
        assert np.allclose(cov[0], expected, atol=1e-15)


class TestMeasurement:
    def geometry_model(self):
        # single-carousel style geometry: both carousels stacked at one center
        return default_model(carousel_centers=((10.0, 0.0), (0.0, 10.0)),
                             carousel_radii=(4.0, 4.0))

    def test_friend_due_east(self):
        model = self.geometry_model()
        # phi1 = 0 puts friend 1 at (14, 0); vehicle at origin, heading 0
        state = np.array([[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]])
        ctx = TricyclistStepContext(speed=0.0, steer=0.0, available=(True, False))
        psi = model.measurement(state, ctx)
        assert psi.shape == (1, 1)
        assert psi[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_friend_due_north(self):
        model = self.geometry_model()
        # phi2 = pi/2 puts friend 2 at (0, 14)
        state = np.array([[0.0, 0.0, 0.0, 0.0, 0.0, math.pi / 2, 0.0]])
        ctx = TricyclistStepContext(speed=0.0, steer=0.0, available=(False, True))
        psi = model.measurement(state, ctx)
        assert psi[0, 0] == pytest.approx(math.pi / 2, abs=1e-12)

    def test_friend_due_north_heading_pi(self):
        model = self.geometry_model()
        state = np.array([[0.0, 0.0, math.pi, 0.0, 0.0, math.pi / 2, 0.0]])
        ctx = TricyclistStepContext(speed=0.0, steer=0.0, available=(False, True))
        psi = model.measurement(state, ctx)
        assert psi[0, 0] == pytest.approx(-math.pi / 2, abs=1e-12)

    def test_coincident_friend_rejected(self):
        model = self.geometry_model()
        # vehicle exactly at friend 1's position (14, 0)
        state = np.array([[14.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]])
        with pytest.raises(NumericalError):
            model.measurement(state, BOTH)
        with pytest.raises(NumericalError):
            model.measurement_jacobian(state, BOTH)

    def test_bearings_wrapped(self):
        model = default_model()
        states = random_states(50, seed=1)
        psi = model.measurement(states, BOTH)
        assert np.all(psi > -math.pi) and np.all(psi <= math.pi)

    def test_rotation_invariance(self):
        alpha = 0.7
        rot = np.array([[math.cos(alpha), -math.sin(alpha)],
                        [math.sin(alpha), math.cos(alpha)]])
        base = default_model()
        centers = np.asarray(base.config.carousel_centers)
        rotated = default_model(carousel_centers=tuple(map(tuple, centers @ rot.T)))
        states = random_states(20, seed=2)
        moved = states.copy()
        moved[:, 0:2] = states[:, 0:2] @ rot.T
        moved[:, 2] += alpha
        moved[:, 3] += alpha
        moved[:, 5] += alpha
        psi_a = base.measurement(states, BOTH)
        psi_b = rotated.measurement(moved, BOTH)
        assert np.allclose(wrap_angle(psi_a - psi_b), 0.0, atol=1e-9)

    def test_channel_selection(self):
        model = default_model()
        state = random_states(3, seed=3)
        full = model.measurement(state, BOTH)
        first = model.measurement(
            state, TricyclistStepContext(speed=0, steer=0, available=(True, False)))
        second = model.measurement(
            state, TricyclistStepContext(speed=0, steer=0, available=(False, True)))
        assert np.array_equal(first[:, 0], full[:, 0])
        assert np.array_equal(second[:, 0], full[:, 1])
        r = model.measurement_noise(
            TricyclistStepContext(speed=0, steer=0, available=(False, True)))
        assert r.shape == (1, 1)
        assert r[0, 0] == pytest.approx(model.config.r_diag[1])

    def test_innovation_wraps(self):
        model = default_model()
        innov = model.innovation(np.array([3.0]), np.array([-3.0]))
        assert innov[0] == pytest.approx(6.0 - 2 * math.pi)


class TestJacobians:
    def test_dynamics_jacobian_matches_finite_differences(self):
        model = default_model()
        ctx = TricyclistStepContext(speed=2.5, steer=0.18)
        states = random_states(100, seed=4)
        jac = model.dynamics_jacobian(states, 0.5, ctx)
        for i in range(0, 100, 7):
            ref = finite_difference_jacobian(
                lambda x: model.dynamics(x[None, :], 0.5, ctx)[0], states[i])
            assert np.allclose(jac[i], ref, rtol=1e-5, atol=1e-7)

    def test_measurement_jacobian_matches_finite_differences(self):
        model = default_model()
        states = random_states(100, seed=5)
        jac = model.measurement_jacobian(states, BOTH)

        def h(x):
            return model.measurement(x[None, :], BOTH)[0]

        for i in range(0, 100, 7):
            base = h(states[i])
            ref = np.empty((2, 7))
            for j in range(7):
                hi = states[i].copy()
                lo = states[i].copy()
                hi[j] += 1e-6
                lo[j] -= 1e-6
                ref[:, j] = wrap_angle(h(hi) - h(lo)) / 2e-6
            scale = np.maximum(np.abs(ref), np.abs(base[:, None]))
            assert np.allclose(jac[i], ref, rtol=1e-5, atol=1e-5 * (1 + scale.max()))


class TestSchedule:
    def test_availability_period(self):
        model = default_model(meas_period=4, meas_offset=0, num_steps=12)
        contexts = model.step_contexts()
        available = [ctx.available[0] for ctx in contexts]
        assert available == [False, False, False, True] * 3

    def test_availability_offset(self):
        model = default_model(meas_period=3, meas_offset=1, num_steps=6)
        available = [ctx.available[0] for ctx in model.step_contexts()]
        # steps k = 1..6, available when k % 3 == 1
        assert available == [True, False, False, True, False, False]

    def test_control_segments_hold_last(self):
        cfg = TricyclistConfig(num_steps=6,
                               control_segments=((2, 1.0, 0.0), (2, 2.0, 0.1)))
        speeds, steers = cfg.control_arrays()
        assert list(speeds) == [1.0, 1.0, 2.0, 2.0, 2.0, 2.0]
        assert list(steers) == [0.0, 0.0, 0.1, 0.1, 0.1, 0.1]


class TestSimulate:
    def test_shapes_and_schedule(self):
        model = default_model(num_steps=12, meas_period=4)
        truth, contexts, measurements = model.simulate(RngStream(7))
        assert truth.shape == (13, 7)
        assert len(contexts) == len(measurements) == 12
        for k, z in enumerate(measurements, start=1):
            if k % 4 == 0:
                assert z.shape == (2,)
                assert np.all(np.abs(z) <= math.pi)
            else:
                assert z is None
        assert np.all(np.isfinite(truth))

    def test_deterministic(self):
        model = default_model(num_steps=10)
        t1, _, m1 = model.simulate(RngStream(123))
        t2, _, m2 = model.simulate(RngStream(123))
        assert np.array_equal(t1, t2)
        for a, b in zip(m1, m2):
            assert (a is None and b is None) or np.array_equal(a, b)

    def test_truth_independent_of_measurement_schedule(self):
        # noise streams are consumed every step whether or not a bearing arrives
        t1, _, _ = default_model(num_steps=10, meas_period=4).simulate(RngStream(55))
        t2, _, _ = default_model(num_steps=10, meas_period=3).simulate(RngStream(55))
        assert np.array_equal(t1, t2)

    def test_truth_angles_wrapped(self):
        truth, _, _ = default_model(num_steps=40).simulate(RngStream(9))
        angles = truth[:, (2, 3, 5)]
        assert np.all(angles > -math.pi) and np.all(angles <= math.pi)
