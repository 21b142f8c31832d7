"""Scenario runners producing the characteristic curves and experiment analogs.

Each runner takes a :class:`ScenarioSpec` and a :class:`~leafvsa.config.Config`
and returns a :class:`ScenarioResult`: the table rows, the CSV column order,
named pass/fail checks evaluated on the rows, and a summary of headline
numbers. Rows are sorted by their sweep coordinates so output never depends on
evaluation order.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import mechanism as mech
from .config import Config
from .control import PidController, position_command, ramp
from .dynamics import TRAJECTORY_COLUMNS, ActuatorParams, ActuatorState, DriveInputs, VsaModel, simulate
from .elastica import COMPARISON_COLUMNS, compare_with_linear, force_from_constraint, linear_force
from .errors import InvalidParameterError

KINDS = (
    "static-torque", "stiffness-curve", "disturbance-map", "deflection-experiment",
    "stiffness-sweep-energy", "passive-audit", "simulate", "elastica-compare",
)

QD_GRID = tuple(k / 100 for k in range(-30, 31))
XR_FAMILY = tuple(k / 100 for k in range(1, 9))
XR_CURVE = tuple(k / 1000 for k in range(10, 81))

COLUMNS = {
    "static-torque": ("q_d", "x_r", "tau_s"),
    "stiffness-curve": ("x_r", "k"),
    "disturbance-map": ("q_d", "x_r", "Q_x", "tau_sd_abs"),
    "elastica-compare": COMPARISON_COLUMNS,
}


@dataclass(frozen=True)
class ScenarioSpec:
    """What to run. Empty grids and ``None`` timings mean scenario defaults."""

    kind: str
    qd: tuple = ()
    xr: tuple = ()
    duration: float = None
    dt: float = None
    out: str = None
    oracle: str = "closed-form"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown scenario kind {self.kind!r}")
        if self.oracle not in ("closed-form", "elastica"):
            raise InvalidParameterError(f"unknown force model {self.oracle!r}")
        for name in ("duration", "dt"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidParameterError(f"{name} must be positive, got {v}")


@dataclass
class ScenarioResult:
    kind: str
    columns: tuple
    rows: list
    checks: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.checks = {k: bool(v) for k, v in self.checks.items()}

    @property
    def passed(self):
        return all(self.checks.values())


def _grid_qd(spec, default=QD_GRID):
    grid = spec.qd or default
    bad = [q for q in grid if not abs(q) <= mech.QD_MAX]
    if bad:
        raise InvalidParameterError(f"q_d values {bad} outside the admissible band +-{mech.QD_MAX}")
    return tuple(float(q) for q in grid)


def _grid_xr(spec, cfg, default):
    grid = spec.xr or default
    sc = cfg.screw
    bad = [x for x in grid if not sc.x_min <= x <= sc.x_max]
    if bad:
        raise InvalidParameterError(
            f"x_r values {bad} outside roller travel [{sc.x_min}, {sc.x_max}]")
    return tuple(float(x) for x in grid)


def _elastica_ratio(q, x, spring):
    """F_elastica / F_linear for one spring at ``(q_d, x_r)`` (1 at equilibrium)."""
    a, d = x * math.cos(q), x * math.sin(q)
    if d == 0:
        return 1.0
    F, _ = force_from_constraint(d, a, spring.EI)
    return F / linear_force(d, a, spring.EI)


def _torque(q, x, spring, oracle):
    tau = float(mech.spring_torque(q, x, spring))
    if oracle == "elastica":
        tau *= _elastica_ratio(q, x, spring)
    return tau


def run_static_torque_sweep(spec, cfg=Config()):
    """Output torque over deflection for a family of roller positions."""
    qd = _grid_qd(spec)
    xr = _grid_xr(spec, cfg, XR_FAMILY)
    rows = [{"q_d": q, "x_r": x, "tau_s": _torque(q, x, cfg.spring, spec.oracle)}
            for x in sorted(xr) for q in sorted(qd)]
    by_q = {}
    for r in rows:
        by_q.setdefault(r["q_d"], []).append(r)
    ordered = all(
        all(a["tau_s"] > b["tau_s"] for a, b in zip(rs, rs[1:]))
        for q, rs in by_q.items() if q > 0)
    lookup = {(r["q_d"], r["x_r"]): r["tau_s"] for r in rows}
    odd = all(lookup[(-q, x)] == -t for (q, x), t in lookup.items() if (-q, x) in lookup)
    checks = {
        "zero_at_equilibrium": all(r["tau_s"] == 0.0 for r in rows if r["q_d"] == 0.0),
        "stiffer_setting_higher_torque": ordered,
        "odd_in_deflection": odd,
    }
    return ScenarioResult(spec.kind, COLUMNS["static-torque"], rows, checks,
                          {"max_tau_s": max(abs(r["tau_s"]) for r in rows)})


def run_stiffness_curve(spec, cfg=Config()):
    """Equilibrium stiffness as a function of roller position."""
    xr = sorted(_grid_xr(spec, cfg, XR_CURVE))
    if spec.oracle == "elastica":
        h = 1e-4
        ks = [(_torque(h, x, cfg.spring, "elastica") - _torque(-h, x, cfg.spring, "elastica"))
              / (2 * h) for x in xr]
    else:
        ks = [float(mech.joint_stiffness(0.0, x, cfg.spring)) for x in xr]
    rows = [{"x_r": x, "k": k} for x, k in zip(xr, ks)]
    ratio = ks[0] / ks[-1]
    expected = xr[-1] / xr[0]
    tol = 1e-12 if spec.oracle == "closed-form" else 1e-3
    checks = {
        "strictly_decreasing": all(a > b for a, b in zip(ks, ks[1:])),
        "endpoint_ratio_equals_travel_ratio": abs(ratio / expected - 1) <= tol,
    }
    return ScenarioResult(spec.kind, COLUMNS["stiffness-curve"], rows, checks,
                          {"k_min": ks[-1], "k_max": ks[0], "ratio": ratio})


def run_disturbance_map(spec, cfg=Config()):
    """Disturbance torque on the stiffness motor over the (q_d, x_r) box."""
    qd = _grid_qd(spec)
    xr = _grid_xr(spec, cfg, XR_FAMILY)
    rows = []
    for q in sorted(qd):
        for x in sorted(xr):
            Q, tau_sd = mech.screw_reaction(q, x, cfg.spring, cfg.screw)
            Q, tau_sd = float(Q), float(tau_sd)
            if spec.oracle == "elastica":
                ratio = _elastica_ratio(q, x, cfg.spring)
                Q, tau_sd = Q * ratio, tau_sd * ratio
            rows.append({"q_d": q, "x_r": x, "Q_x": Q, "tau_sd_abs": abs(tau_sd)})
    peak = max(rows, key=lambda r: r["tau_sd_abs"])
    q_edge = max(abs(q) for q in qd)
    checks = {
        "zero_at_equilibrium": all(r["tau_sd_abs"] == 0.0 for r in rows if r["q_d"] == 0.0),
        "all_finite": all(math.isfinite(r["tau_sd_abs"]) for r in rows),
        "max_on_stiff_corner": abs(peak["q_d"]) == q_edge and peak["x_r"] == min(xr),
    }
    return ScenarioResult(spec.kind, COLUMNS["disturbance-map"], rows, checks,
                          {"max_tau_sd_abs": peak["tau_sd_abs"], "argmax_q_d": peak["q_d"],
                           "argmax_x_r": peak["x_r"]})


def _traj_rows(tr, **extra):
    rows = list(tr.records())
    for r in rows:
        r.update(extra)
    return rows


def run_deflection_experiment(spec, cfg=Config(), hold=0.5):
    """Clamped-link deflection ramp in a stiff and a soft setting.

    Motor 1 ramps the deflection from 0 to the target over ``duration``
    and holds it for ``hold`` seconds; motor 2 is locked at each roller
    position. The interaction torque is the spring torque reacting on the
    clamped link.
    """
    target = max(spec.qd) if spec.qd else 0.1
    if not 0 < target < mech.QD_MAX:
        raise InvalidParameterError(f"deflection target {target} outside (0, {mech.QD_MAX})")
    x_stiff, x_soft = (min(spec.xr), max(spec.xr)) if spec.xr else (0.02, 0.08)
    _grid_xr(replace(spec, xr=(x_stiff, x_soft)), cfg, ())
    ramp_time = spec.duration or cfg.sim.duration
    dt = spec.dt or cfg.sim.dt

    runs = {}
    for label, x in (("stiff", x_stiff), ("soft", x_soft)):
        model = VsaModel(cfg.dynamics, cfg.spring, cfg.screw, frozen={"q_l", "q_m2"})
        drive = position_command(ramp(0.0, target, 0.0, ramp_time), cfg.motor1)
        start = ActuatorState(q_m2=mech.motor_from_roller(x, cfg.screw))
        tr = simulate(start, ramp_time + hold, dt, model, DriveInputs(tau_m1=drive),
                      record_every=cfg.sim.record_every)
        if not tr.ok:
            raise RuntimeError(f"{label} deflection run failed: {tr.error}")
        runs[label] = tr

    stiff, soft = runs["stiff"], runs["soft"]
    # stiff-run torque at the soft run's deflection samples
    q_s = np.maximum.accumulate(stiff["q_m1"])
    matched = [(q, t, float(np.interp(q, q_s, stiff["tau_s"])))
               for q, t in zip(soft["q_m1"], soft["tau_s"]) if 0 < q <= q_s[-1]]
    ratio = stiff["tau_s"][-1] / soft["tau_s"][-1]
    qs_err = max(abs(tr["tau_s"][-1] / float(mech.spring_torque(target, x, cfg.spring)) - 1)
                 for tr, x in ((stiff, x_stiff), (soft, x_soft)))
    checks = {
        "start_at_zero_torque": stiff["tau_s"][0] == 0.0 and soft["tau_s"][0] == 0.0,
        "soft_below_stiff": bool(matched) and all(t_soft < t_stiff for _, t_soft, t_stiff in matched),
        "quasi_static_within_2pct": qs_err < 0.02,
        "ratio_matches_travel_ratio": abs(ratio - x_soft / x_stiff) <= 0.05,
    }
    rows = _traj_rows(stiff) + _traj_rows(soft)
    rows.sort(key=lambda r: (r["x_r"], r["t"]))
    summary = {
        "target_q_d": target, "x_stiff": x_stiff, "x_soft": x_soft,
        "tau_stiff_final": float(stiff["tau_s"][-1]), "tau_soft_final": float(soft["tau_s"][-1]),
        "ratio": float(ratio), "quasi_static_rel_err": qs_err, "matched_samples": len(matched),
    }
    return ScenarioResult(spec.kind, TRAJECTORY_COLUMNS, rows, checks, summary)


def sweep_friction_bound(actuator, screw, x_from, x_to, duration):
    """Viscous work of a constant-speed carriage move, ``b_m2 w^2 T``.

    The sweep enters and leaves at speed, so it has no acceleration phase
    and hence no inertial term.
    """
    w = (x_to - x_from) / screw.pitch_radius / duration
    return actuator.b_m2 * w * w * duration


def stiffness_sweep(cfg, q_d, duration, dt, record_every=10):
    """Soft-to-stiff roller sweep with the deflection held at ``q_d``.

    Motor 1 and the link are locked; motor 2 tracks a constant-speed ramp
    from ``x_max`` to ``x_min``, entering it already at speed.
    """
    sc = cfg.screw
    q0 = mech.motor_from_roller(sc.x_max, sc)
    q1 = mech.motor_from_roller(sc.x_min, sc)
    profile = ramp(q0, q1, 0.0, duration)
    gain = cfg.dynamics.b_m2 + cfg.motor2.kd
    ctl = PidController(cfg.motor2, "q_m2", profile, feedforward=lambda t: gain * profile.rate)
    ctl.preload(0.0, profile.rate)
    model = VsaModel(cfg.dynamics, cfg.spring, cfg.screw, frozen={"q_m1", "q_l"})
    start = ActuatorState(q_m1=q_d, q_m2=q0, dq_m2=profile.rate)
    return simulate(start, duration, dt, model, DriveInputs(tau_m2=ctl), record_every)


def hold_stiffness(cfg, q_d, x_r, duration, dt, record_every=10):
    """Motor 2 holding ``x_r`` at rest while the deflection is held at ``q_d``."""
    q = mech.motor_from_roller(x_r, cfg.screw)
    _, tau_sd = mech.screw_reaction(q_d, x_r, cfg.spring, cfg.screw)
    ctl = PidController(cfg.motor2, "q_m2", lambda t: q)
    ctl.preload(float(tau_sd))
    model = VsaModel(cfg.dynamics, cfg.spring, cfg.screw, frozen={"q_m1", "q_l"})
    return simulate(ActuatorState(q_m1=q_d, q_m2=q), duration, dt, model,
                    DriveInputs(tau_m2=ctl), record_every)


def run_stiffness_sweep_energy(spec, cfg=Config(), hold=0.2):
    """Energy drained by motor 2 sweeping the stiffness at and off equilibrium."""
    q_off = max(spec.qd) if spec.qd else 0.15
    if not 0 < q_off < mech.QD_MAX:
        raise InvalidParameterError(f"held deflection {q_off} outside (0, {mech.QD_MAX})")
    duration = spec.duration or cfg.sim.duration
    dt = spec.dt or cfg.sim.dt
    sc = cfg.screw

    eq = stiffness_sweep(cfg, 0.0, duration, dt, cfg.sim.record_every)
    off = stiffness_sweep(cfg, q_off, duration, dt, cfg.sim.record_every)
    holds = [hold_stiffness(cfg, 0.0, x, hold, dt, cfg.sim.record_every) for x in XR_FAMILY]
    holds.append(hold_stiffness(cfg, q_off, sc.x_min, hold, dt, cfg.sim.record_every))
    for name, tr in [("equilibrium sweep", eq), ("deflected sweep", off)] + [("hold", h) for h in holds]:
        if not tr.ok:
            raise RuntimeError(f"{name} failed: {tr.error}")
    hold_peak = max(float(np.max(np.abs(h["P_m2"]))) for h in holds)

    bound = sweep_friction_bound(cfg.dynamics, sc, sc.x_max, sc.x_min, duration)
    dU = float(mech.potential_energy(q_off, sc.x_min, cfg.spring)
               - mech.potential_energy(q_off, sc.x_max, cfg.spring))
    excess = off.ledger.W_m2_abs - eq.ledger.W_m2_abs
    checks = {
        "equilibrium_cost_within_10pct_of_friction_bound":
            abs(eq.ledger.W_m2_abs / bound - 1) <= 0.10,
        "deflected_excess_within_5pct_of_dU": abs(excess / dU - 1) <= 0.05,
        "deflected_excess_positive": excess > 0,
        "hold_power_exactly_zero": hold_peak == 0.0,
    }
    rows = _traj_rows(eq) + _traj_rows(off)
    rows.sort(key=lambda r: (r["q_m1"], r["t"]))
    summary = {
        "W_m2_abs_equilibrium": eq.ledger.W_m2_abs, "W_m2_abs_deflected": off.ledger.W_m2_abs,
        "excess": excess, "delta_U": dU, "friction_bound": bound, "held_q_d": q_off,
        "hold_max_abs_P_m2": hold_peak,
    }
    return ScenarioResult(spec.kind, TRAJECTORY_COLUMNS, rows, checks, summary)


def passive_audit(cfg, q_d, x_r, duration, dt, record_every=10):
    """Undriven, frictionless run from a deflected state with the roller pinned."""
    act = ActuatorParams(cfg.dynamics.J_m1, cfg.dynamics.J_m2, cfg.dynamics.J_l, 0.0, 0.0, 0.0)
    model = VsaModel(act, cfg.spring, cfg.screw, roller_pin=x_r)
    tr = simulate(ActuatorState(q_m1=q_d), duration, dt, model, record_every=record_every)
    E = tr["E_kin"] + tr["U_spring"]
    E0 = E[0]
    drift = float(np.max(np.abs(E - E0)) / E0) if E0 != 0 else float(np.max(np.abs(E - E0)))
    return tr, drift


def run_passive_audit(spec, cfg=Config(), compare_dt=True):
    """Energy drift of the conservative coupling under RK4.

    With ``compare_dt`` the run is repeated at ten times the step to report
    how fast the drift shrinks with the step size.
    """
    q_d = spec.qd[0] if spec.qd else 0.1
    x_r = spec.xr[0] if spec.xr else 0.04
    _grid_xr(replace(spec, xr=(x_r,)), cfg, ())
    duration = spec.duration or 1.0
    dt = spec.dt or 1e-5
    tr, drift = passive_audit(cfg, q_d, x_r, duration, dt, cfg.sim.record_every)
    if not tr.ok:
        raise RuntimeError(f"passive run failed: {tr.error}")
    summary = {"drift": drift, "dt": dt, "E0": float(tr["E_kin"][0] + tr["U_spring"][0])}
    checks = {"drift_below_0.1pct": drift < 1e-3}
    if compare_dt:
        _, coarse = passive_audit(cfg, q_d, x_r, duration, 10 * dt, cfg.sim.record_every)
        summary["drift_coarse"] = coarse
        summary["drift_ratio"] = coarse / drift if drift > 0 else math.inf
    return ScenarioResult(spec.kind, TRAJECTORY_COLUMNS, _traj_rows(tr), checks, summary)


def run_simulate(spec, cfg=Config()):
    """Free response from an initial deflection, with the configured friction."""
    q_d = spec.qd[0] if spec.qd else 0.1
    x_r = spec.xr[0] if spec.xr else cfg.screw.x_ref
    _grid_xr(replace(spec, xr=(x_r,)), cfg, ())
    model = VsaModel(cfg.dynamics, cfg.spring, cfg.screw)
    start = ActuatorState(q_m1=q_d, q_m2=mech.motor_from_roller(x_r, cfg.screw))
    tr = simulate(start, spec.duration or cfg.sim.duration, spec.dt or cfg.sim.dt, model,
                  record_every=cfg.sim.record_every)
    summary = {"error": tr.error, "max_balance_residual": tr.max_balance_residual,
               "hit_travel_stop": tr.clamped}
    return ScenarioResult(spec.kind, TRAJECTORY_COLUMNS, _traj_rows(tr),
                          {"completed": tr.ok}, summary)


def run_elastica_compare(spec, cfg=Config()):
    """Small-deflection versus elastica contact force over a grid."""
    qd = _grid_qd(spec, default=(-0.02, -0.01, 0.0, 0.01, 0.02))
    xr = _grid_xr(spec, cfg, XR_CURVE)
    rows, band = compare_with_linear(qd, xr, cfg.spring)
    records = [{c: getattr(r, c) for c in COMPARISON_COLUMNS} for r in rows]
    small = [v for q, v in band.items() if q <= 0.02]
    checks = {
        "all_cells_solved": all(r.status == "ok" for r in rows),
        "within_1pct_for_small_deflection": all(v < 0.01 for v in small),
    }
    return ScenarioResult(spec.kind, COMPARISON_COLUMNS, records, checks,
                          {"band_max_rel_dev": {repr(q): v for q, v in sorted(band.items())}})


RUNNERS = {
    "static-torque": run_static_torque_sweep,
    "stiffness-curve": run_stiffness_curve,
    "disturbance-map": run_disturbance_map,
    "deflection-experiment": run_deflection_experiment,
    "stiffness-sweep-energy": run_stiffness_sweep_energy,
    "passive-audit": run_passive_audit,
    "simulate": run_simulate,
    "elastica-compare": run_elastica_compare,
}


def run(spec, cfg=Config()):
    return RUNNERS[spec.kind](spec, cfg)
