import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leafvsa import mechanism as m
from leafvsa.control import MOTOR1_GAINS, position_command, ramp
from leafvsa.dynamics import (TRAJECTORY_COLUMNS, ActuatorParams, ActuatorState, DriveInputs,
                              VsaModel, mechanical_power, rk4_step, simulate, state_derivative,
                              with_frozen)
from leafvsa.errors import InvalidParameterError

X04 = m.motor_from_roller(0.04)
FRICTIONLESS = ActuatorParams(1e-3, 1e-5, 1e-2, 0.0, 0.0, 0.0)


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        ActuatorParams(J_m1=0.0)
    with pytest.raises(InvalidParameterError):
        ActuatorParams(b_l=-1.0)
    with pytest.raises(InvalidParameterError):
        VsaModel(frozen={"q_x"})


def test_zero_state_is_fixed_point():
    assert state_derivative(ActuatorState(), VsaModel()) == (0.0,) * 6
    s = rk4_step(ActuatorState(), 1e-3, VsaModel())
    assert s.as_tuple() == (0.0,) * 6 and s.t == 1e-3


def test_deflected_derivative():
    d = state_derivative(ActuatorState(q_m1=0.1, q_m2=X04), VsaModel())
    tau = float(m.spring_torque(0.1, 0.04))
    assert d[:3] == (0.0, 0.0, 0.0)
    assert d[5] == pytest.approx(tau / 1e-2, rel=1e-12)
    assert d[5] == pytest.approx(5182.0, rel=1e-4)
    assert d[3] == pytest.approx(-tau / 1e-3, rel=1e-12)
    # spring pushes the carriage toward the soft end
    assert d[4] > 0


def test_equilibrium_motor2_sees_only_its_drive():
    d = state_derivative(ActuatorState(q_m2=X04), VsaModel(), DriveInputs(tau_m2=2e-3))
    assert d[4] == 2e-3 / 1e-5


@given(st.floats(-0.25, 0.25), st.floats(0.01, 0.08), st.floats(-5, 5), st.floats(-5, 5))
def test_position_derivatives_are_velocities(q, x, w1, w2):
    s = ActuatorState(q_m1=q, q_m2=m.motor_from_roller(x), dq_m1=w1, dq_m2=w2, dq_l=-w1)
    d = state_derivative(s, VsaModel())
    assert d[:3] == (w1, w2, -w1)


def test_mechanical_power():
    assert mechanical_power(0.1, 10) == pytest.approx(1.0)
    assert mechanical_power(3.7, 0.0) == 0.0
    assert mechanical_power(-0.02038, 219.91) == pytest.approx(-4.482, abs=1e-3)


def test_zero_run_stays_zero():
    tr = simulate(ActuatorState(), 1.0, 1e-3, VsaModel())
    for c in TRAJECTORY_COLUMNS[1:-1]:
        if c not in ("x_r", "k"):
            assert np.all(tr[c] == 0), c
    led = tr.ledger
    assert (led.E_kin, led.U_spring, led.W_m1, led.W_m2, led.W_m2_abs, led.D_fric) == (0,) * 6


def test_linear_oscillator():
    model = VsaModel(FRICTIONLESS, roller_pin=0.08, frozen={"q_m1"})
    w = math.sqrt(253.125 / 0.01)
    assert w == pytest.approx(159.10, abs=0.005)
    T = 2 * math.pi / w
    tr = simulate(ActuatorState(q_l=0.01), T, 1e-5, model)
    late = np.abs(tr["q_l"][len(tr) // 2:])
    assert abs(late.max() - 0.01) < 1e-6
    # cosine up to the O(q^2) stiffening of the nonlinear spring
    assert np.max(np.abs(tr["q_l"] - 0.01 * np.cos(w * tr["t"]))) < 1e-5


def test_self_convergence_order():
    model = VsaModel()
    drives = DriveInputs(tau_m1=lambda t, s: 5 * math.sin(30 * t), tau_l=0.5)

    def final(dt):
        s = simulate(ActuatorState(q_m1=0.1, q_m2=X04), 0.1, dt, model, drives).final
        return np.array(s.as_tuple())

    a, b, c = final(2e-4), final(1e-4), final(5e-5)
    order = np.log2(np.abs(a - b) / np.abs(b - c))
    assert order.min() >= 3.9
    assert np.abs(a - b).max() / np.abs(b - c).max() == pytest.approx(16, rel=0.25)


def test_energy_balance_with_drives_and_friction():
    model = VsaModel()
    drives = DriveInputs(tau_m1=position_command(ramp(0.0, 0.1, 0.0, 0.5)),
                         tau_m2=lambda t, s: 2e-3 * math.sin(10 * t),
                         tau_l=lambda t, s: -0.5 * s.q_l)
    tr = simulate(ActuatorState(q_m2=X04), 1.0, 1e-5, model, drives, record_every=100)
    assert tr.ok
    assert tr.max_balance_residual < 1e-3 * tr.peak_energy
    led = tr.ledger
    assert abs(led.balance_residual) < 1e-3 * tr.peak_energy
    assert led.W_m2_abs >= abs(led.W_m2)
    assert led.D_fric > 0


def test_passive_energy_conservation():
    model = VsaModel(FRICTIONLESS, roller_pin=0.04)
    tr = simulate(ActuatorState(q_m1=0.1), 1.0, 1e-5, model, record_every=100)
    E = tr["E_kin"] + tr["U_spring"]
    assert np.max(np.abs(E - E[0])) / E[0] < 1e-3


def test_determinism():
    model = VsaModel()
    drives = lambda: DriveInputs(tau_m1=position_command(ramp(0.0, 0.1, 0.0, 0.2)))
    a = simulate(ActuatorState(q_m2=X04), 0.3, 1e-4, model, drives())
    b = simulate(ActuatorState(q_m2=X04), 0.3, 1e-4, model, drives())
    for c in TRAJECTORY_COLUMNS[:-1]:
        assert np.array_equal(a[c], b[c])
    assert a.flags == b.flags


def test_decoupled_motor2_matches_inertia_damper():
    tau, J, b = -1e-4, 1e-5, 1e-5
    model = VsaModel(frozen={"q_m1", "q_l"})
    tr = simulate(ActuatorState(), 1.0, 1e-4, model, DriveInputs(tau_m2=tau))
    t = tr["t"]
    q = tau / b * (t - J / b * (1 - np.exp(-b * t / J)))
    assert np.all(tr["tau_sd"] == 0)
    assert np.max(np.abs(tr["q_m2"] - q)) < 1e-12


def test_pinned_roller_isolates_motor2():
    def run(q2, w2, tau2):
        model = VsaModel(roller_pin=0.03)
        tr = simulate(ActuatorState(q_m1=0.05, q_m2=q2, dq_m2=w2), 0.2, 1e-4, model,
                      DriveInputs(tau_m1=0.3, tau_m2=tau2))
        return tr["q_m1"], tr["q_l"], tr["dq_l"]

    a = run(0.0, 0.0, 0.0)
    b = run(-50.0, 30.0, 1e-3)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def test_travel_stop_clamps_and_flags():
    model = VsaModel()
    tr = simulate(ActuatorState(q_m2=-0.5), 0.05, 1e-4, model, DriveInputs(tau_m2=1e-2))
    assert tr.clamped and "stop" in tr.flags
    assert tr["x_r"].max() == 0.08
    assert tr.ledger.D_stop > 0
    assert abs(tr.ledger.balance_residual) < 1e-9


def test_deflection_band_abort_returns_partial_run():
    tr = simulate(ActuatorState(q_m2=X04), 1.0, 1e-4, VsaModel(frozen={"q_l"}),
                  DriveInputs(tau_m1=200.0))
    assert not tr.ok and "admissible band" in tr.error
    assert 0 < tr.final.t < 1.0
    assert np.all(np.abs(tr["q_m1"]) < 0.3)


def test_frozen_coordinates_do_not_move():
    model = with_frozen(VsaModel(), "q_l")
    tr = simulate(ActuatorState(q_m1=0.05, q_m2=X04, dq_l=3.0), 0.05, 1e-4, model)
    assert np.all(tr["q_l"] == 0) and np.all(tr["dq_l"] == 0)


def test_torque_limits_saturate():
    model = VsaModel(torque_limits=(1.0, None), frozen={"q_l"})
    tr = simulate(ActuatorState(q_m2=X04), 0.01, 1e-4, model, DriveInputs(tau_m1=5.0))
    assert "sat_m1" in tr.flags[1]
    assert tr["P_m1"][1] == pytest.approx(1.0 * tr["dq_m1"][1])


def test_rejects_bad_timing():
    with pytest.raises(InvalidParameterError):
        simulate(ActuatorState(), 0.0, 1e-3, VsaModel())
    with pytest.raises(InvalidParameterError):
        simulate(ActuatorState(), 1e5, 1e-4, VsaModel())
    with pytest.raises(InvalidParameterError):
        rk4_step(ActuatorState(), -1e-3, VsaModel())
