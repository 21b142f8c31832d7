import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leafvsa import mechanism as m
from leafvsa.control import (MOTOR1_GAINS, MOTOR2_GAINS, PidController, PidGains, PidState,
                             constant, pid_step, position_command, ramp, stiffness_command)
from leafvsa.dynamics import ActuatorParams, ActuatorState, DriveInputs, VsaModel, simulate
from leafvsa.errors import InvalidParameterError

SP, SC = m.DEFAULT_SPRING, m.DEFAULT_SCREW
ACT = ActuatorParams()


def test_gain_validation():
    with pytest.raises(InvalidParameterError):
        PidGains(kp=-1.0)
    with pytest.raises(InvalidParameterError):
        PidGains(kp=1.0, d_filter_tc=0.0)
    with pytest.raises(InvalidParameterError):
        PidGains(kp=1.0, u_min=1.0, u_max=1.0)
    with pytest.raises(InvalidParameterError):
        PidGains(kp=1.0, windup_clamp=-1.0)


def test_proportional_only():
    u, _ = pid_step(PidGains(kp=2.0), PidState(), 1.0, 0.0, 0.01)
    assert u == 2.0


def test_zero_error_zero_output():
    u, _ = pid_step(MOTOR1_GAINS, PidState(), 0.3, 0.3, 1e-4)
    assert u == 0.0


def test_integral_accumulation():
    g, s = PidGains(kp=0.0, ki=10.0), PidState()
    for _ in range(5):
        u, s = pid_step(g, s, 1.0, 0.0, 0.01)
    assert s.integral == pytest.approx(0.5, abs=1e-15)
    assert u == pytest.approx(0.5, abs=1e-15)


def test_derivative_acts_on_measurement_only():
    g = PidGains(kp=0.0, kd=1.0, d_filter_tc=1e-3)
    _, s = pid_step(g, PidState(), 0.0, 0.0, 1e-3)
    u, _ = pid_step(g, s, 5.0, 0.0, 1e-3)  # setpoint jump, measurement still
    assert u == 0.0
    u, _ = pid_step(g, s, 0.0, 1e-3, 1e-3)  # measurement moves up
    assert u < 0


def test_pid_rejects_nonpositive_dt():
    with pytest.raises(InvalidParameterError):
        pid_step(MOTOR1_GAINS, PidState(), 1.0, 0.0, 0.0)


gains_st = st.builds(
    lambda kp, ki, kd, lim, clamp: PidGains(kp, ki, kd, 1e-3, -lim, lim, clamp),
    st.floats(0, 100), st.floats(0, 1e4), st.floats(0, 10), st.floats(0.1, 10), st.floats(0, 5))


@settings(max_examples=50)
@given(gains_st, st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=40))
def test_windup_and_saturation_bounds(g, seq):
    s = PidState()
    for sp, meas in seq:
        u, s = pid_step(g, s, sp, meas, 1e-3)
        assert abs(s.integral) <= g.windup_clamp
        assert abs(u) <= max(abs(g.u_min), abs(g.u_max))


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=20))
def test_pid_is_deterministic(seq):
    outs = []
    for _ in range(2):
        s, us = PidState(), []
        for sp, meas in seq:
            u, s = pid_step(MOTOR2_GAINS, s, sp, meas, 1e-4)
            us.append(u)
        outs.append(us)
    assert outs[0] == outs[1]


def test_ramp_profile():
    r = ramp(1.0, 3.0, 0.5, 1.5)
    assert (r(0.0), r(1.0), r(2.0)) == (1.0, 2.0, 3.0)
    assert r.rate == 2.0
    assert constant(4.0)(123.0) == 4.0


def clamped_link_step(x_r, dt, duration=0.5):
    model = VsaModel(ACT, SP, SC, frozen={"q_l", "q_m2"})
    drive = position_command(constant(0.1))
    start = ActuatorState(q_m2=m.motor_from_roller(x_r))
    tr = simulate(start, duration, dt, model, DriveInputs(tau_m1=drive))
    return tr, drive


@pytest.mark.parametrize("x_r, dt", [(0.02, 1e-4), (0.08, 1e-4), (0.04, 1e-5)])
def test_motor1_step_overshoot_and_static_balance(x_r, dt):
    tr, drive = clamped_link_step(x_r, dt)
    assert tr.ok
    q = tr["q_m1"]
    assert q.max() <= 0.1 * 1.05
    assert q[-1] == pytest.approx(0.1, abs=1e-6)
    assert drive.last_u == pytest.approx(float(m.spring_torque(0.1, x_r)), rel=1e-4)
    if x_r == 0.04:
        assert drive.last_u == pytest.approx(51.820, rel=1e-4)


def test_motor1_holds_without_load():
    model = VsaModel(frozen={"q_m2"})
    drive = position_command(constant(0.0))
    tr = simulate(ActuatorState(), 0.2, 1e-4, model, DriveInputs(tau_m1=drive))
    assert drive.last_u == 0.0 and np.all(tr["P_m1"] == 0)


def test_motor1_ramp_with_free_link_is_bounded():
    model = VsaModel(frozen={"q_m2"})
    drive = position_command(ramp(0.0, 0.5, 0.0, 1.0))
    tr = simulate(ActuatorState(q_m2=m.motor_from_roller(0.08)), 1.5, 1e-4, model,
                  DriveInputs(tau_m1=drive))
    assert tr.ok
    lag = np.abs(tr["q_m1"] - np.clip(tr["t"], 0, 1) * 0.5)
    assert lag.max() < 0.05
    assert np.abs(tr["q_m1"] - tr["q_l"]).max() < 0.3


@pytest.mark.parametrize("dt", [1e-4, 1e-5])
def test_motor2_step_overshoot(dt):
    x0, x1 = 0.05, 0.04
    q0, q1 = m.motor_from_roller(x0), m.motor_from_roller(x1)
    ctl = PidController(MOTOR2_GAINS, "q_m2", constant(q1))
    model = VsaModel(frozen={"q_m1", "q_l"})
    tr = simulate(ActuatorState(q_m2=q0), 1.0, dt, model, DriveInputs(tau_m2=ctl))
    overshoot = (q0 - tr["q_m2"].min()) / (q0 - q1) - 1
    assert overshoot < 0.05
    assert tr["x_r"][-1] == pytest.approx(x1, abs=1e-5)


@pytest.mark.parametrize("x_r", [0.01, 0.03, 0.08])
def test_constant_stiffness_hold_draws_no_power(x_r):
    k = float(m.joint_stiffness(0.0, x_r))
    ctl = stiffness_command(constant(k), SP, SC)
    model = VsaModel(frozen={"q_m1", "q_l"})
    tr = simulate(ActuatorState(q_m2=m.motor_from_roller(x_r)), 0.5, 1e-4, model,
                  DriveInputs(tau_m2=ctl))
    assert np.all(tr["P_m2"] == 0.0)
    assert ctl.last_u == 0.0
    assert tr.ledger.W_m2_abs == 0.0


def test_stiffness_target_clamping_reported():
    ctl = stiffness_command(constant(1e4), SP, SC)
    assert ctl.setpoint(0.0) == pytest.approx(m.motor_from_roller(0.01))
    assert ctl.target.clamped


def from_rest_bound(duration, speed):
    # constant-speed friction work plus spin-up and spin-down of the rotor
    w = speed / SC.pitch_radius
    return ACT.b_m2 * w * w * duration + ACT.J_m2 * w * w


def sweep_from_rest(q_d):
    ctl = stiffness_command(ramp(253.125, 2025.0, 0.0, 1e-9), SP, SC, max_speed=0.07,
                            friction=ACT.b_m2, x_start=0.08)
    model = VsaModel(frozen={"q_m1", "q_l"})
    tr = simulate(ActuatorState(q_m1=q_d), 1.5, 1e-4, model, DriveInputs(tau_m2=ctl))
    return tr, ctl


def test_stiffness_step_at_equilibrium_from_rest():
    tr, _ = sweep_from_rest(0.0)
    assert tr.ok
    assert tr["x_r"][-1] == pytest.approx(0.01, abs=1e-4)
    bound = from_rest_bound(0.07 / 0.07, 0.07)
    assert bound == pytest.approx(0.967, abs=1e-3)
    assert 0.9 * bound <= tr.ledger.W_m2_abs <= 1.25 * bound


def test_stiffness_step_off_equilibrium_excess():
    eq, _ = sweep_from_rest(0.0)
    off, _ = sweep_from_rest(0.15)
    dU = float(m.potential_energy(0.15, 0.01) - m.potential_energy(0.15, 0.08))
    excess = off.ledger.W_m2_abs - eq.ledger.W_m2_abs
    assert excess == pytest.approx(20.47, rel=0.05)
    assert abs(excess / dU - 1) < 0.05


def test_controller_runs_are_deterministic():
    a, _ = sweep_from_rest(0.05)
    b, _ = sweep_from_rest(0.05)
    assert np.array_equal(a["P_m2"], b["P_m2"])
