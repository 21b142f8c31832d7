"""Three-body dynamics of the variable stiffness actuator.

Motor 1 sets the equilibrium position, motor 2 turns the ball screw that moves
the roller carriage, and the output link hangs off the spring bank::

    J_m1 q_m1'' + b_m1 q_m1' = tau_m1 - tau_s
    J_m2 q_m2'' + b_m2 q_m2' = tau_m2 - tau_sd
    J_l  q_l''  + b_l  q_l'  = tau_s  - tau_l

with ``tau_s`` and ``tau_sd`` from :mod:`leafvsa.mechanism` at
``q_d = q_m1 - q_l`` and ``x_r = roller_from_motor(q_m2)``.

Integration is fixed-step classical RK4. Work and dissipation integrals are
carried as extra RK4 states so the energy ledger is as accurate as the motion.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameterError, ModelDomainError
from .mechanism import DEFAULT_SCREW, DEFAULT_SPRING, QD_MAX, mechanism_terms

COORDS = ("q_m1", "q_m2", "q_l")

TRAJECTORY_COLUMNS = (
    "t", "q_m1", "q_m2", "q_l", "dq_m1", "dq_m2", "dq_l", "x_r", "tau_s", "tau_sd",
    "k", "P_m1", "P_m2", "E_kin", "U_spring", "W_m2_abs", "flags",
)


def actuator_problems(**fields):
    problems = []
    for name, value in fields.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            problems.append(f"dynamics.{name} must be a number (got {value!r})")
        elif name.startswith("J") and not value > 0:
            problems.append(f"dynamics.{name}: inertia must be positive (got {value})")
        elif name.startswith("b") and not value >= 0:
            problems.append(f"dynamics.{name}: friction must be non-negative (got {value})")
    return problems


@dataclass(frozen=True)
class ActuatorParams:
    """Reflected inertias (kg m^2) and viscous friction (N m s/rad)."""

    J_m1: float = 1e-3
    J_m2: float = 1e-5
    J_l: float = 1e-2
    b_m1: float = 1e-3
    b_m2: float = 1e-5
    b_l: float = 1e-3

    def __post_init__(self):
        problems = actuator_problems(**self.__dict__)
        if problems:
            raise InvalidParameterError("; ".join(problems))


@dataclass(frozen=True)
class ActuatorState:
    q_m1: float = 0.0
    q_m2: float = 0.0
    q_l: float = 0.0
    dq_m1: float = 0.0
    dq_m2: float = 0.0
    dq_l: float = 0.0
    t: float = 0.0

    @property
    def q_d(self):
        return self.q_m1 - self.q_l

    def as_tuple(self):
        return (self.q_m1, self.q_m2, self.q_l, self.dq_m1, self.dq_m2, self.dq_l)


@dataclass(frozen=True)
class VsaModel:
    """Everything the right-hand side needs besides the drives.

    ``frozen`` names coordinates held at their initial value (zero velocity,
    zero acceleration), e.g. a clamped link or a motor locked at a deflection.
    ``roller_pin`` fixes ``x_r`` independently of motor 2; the carriage
    reaction then goes into the pin and motor 2 sees no spring load.
    ``torque_limits`` optionally saturates ``(tau_m1, tau_m2)`` symmetrically.
    """

    actuator: ActuatorParams = ActuatorParams()
    spring: object = DEFAULT_SPRING
    screw: object = DEFAULT_SCREW
    qd_max: float = QD_MAX
    frozen: frozenset = frozenset()
    roller_pin: float = None
    torque_limits: tuple = (None, None)

    def __post_init__(self):
        unknown = set(self.frozen) - set(COORDS)
        if unknown:
            raise InvalidParameterError(f"cannot freeze unknown coordinates {sorted(unknown)}")
        object.__setattr__(self, "frozen", frozenset(self.frozen))

    def roller(self, q_m2):
        """``(x_r, at_stop)`` for a motor-2 angle."""
        if self.roller_pin is not None:
            return self.roller_pin, False
        sc = self.screw
        x = sc.x_ref + sc.pitch_radius * q_m2
        if x <= sc.x_min:
            return sc.x_min, x < sc.x_min
        if x >= sc.x_max:
            return sc.x_max, x > sc.x_max
        return x, False

    def potential(self, q_d, q_m2):
        x_r, _ = self.roller(q_m2)
        return mechanism_terms(q_d, x_r, self.spring.bank_constant, 1.0)[0]

    def kinetic(self, dq_m1, dq_m2, dq_l):
        a = self.actuator
        return 0.5 * (a.J_m1 * dq_m1 * dq_m1 + a.J_m2 * dq_m2 * dq_m2 + a.J_l * dq_l * dq_l)


@dataclass
class DriveInputs:
    """Motor and load torques.

    Each entry is a number, a callable ``f(t, state) -> torque`` evaluated at
    every RK4 stage, or a sampled controller (an object with a
    ``sample(t, state, dt)`` method) evaluated once per step and held.
    """

    tau_m1: object = 0.0
    tau_m2: object = 0.0
    tau_l: object = 0.0


@dataclass
class EnergyLedger:
    E_kin: float = 0.0
    U_spring: float = 0.0
    W_m1: float = 0.0
    W_m2: float = 0.0
    W_m2_abs: float = 0.0
    W_ext: float = 0.0
    D_fric: float = 0.0
    D_stop: float = 0.0
    E0: float = 0.0

    @property
    def balance_residual(self):
        """Stored energy change not explained by work in minus losses."""
        return (self.E_kin + self.U_spring
                - (self.W_m1 + self.W_m2 + self.W_ext - self.D_fric - self.D_stop) - self.E0)


def mechanical_power(tau, omega):
    return tau * omega


def _resolve(drive, t, state, dt):
    if hasattr(drive, "sample"):
        return drive.sample(t, state, dt)
    if callable(drive):
        return None
    return float(drive)


def _saturate(tau, limit):
    if limit is None:
        return tau, False
    if tau > limit:
        return limit, True
    if tau < -limit:
        return -limit, True
    return tau, False


class _Rhs:
    """Right-hand side over ``y = (q_m1, q_m2, q_l, dq_m1, dq_m2, dq_l, W_m1,
    W_m2, W_ext, D_fric, W_m2_abs)``."""

    def __init__(self, model, drives):
        self.model = model
        self.drives = drives
        a = model.actuator
        self.J = (a.J_m1, a.J_m2, a.J_l)
        self.bJ = (a.b_m1 / a.J_m1, a.b_m2 / a.J_m2, a.b_l / a.J_l)
        self.b = (a.b_m1, a.b_m2, a.b_l)
        self.C = model.spring.bank_constant
        self.r = model.screw.pitch_radius
        self.eff = model.screw.efficiency
        self.free = tuple(c not in model.frozen for c in COORDS)
        self.held = [None, None, None]
        self.saturated = [False, False]

    def begin_step(self, t, y, dt):
        """Sample the held (controller) torques at the start of a step."""
        state = _as_state(y, t)
        for i, d in enumerate((self.drives.tau_m1, self.drives.tau_m2, self.drives.tau_l)):
            self.held[i] = _resolve(d, t, state, dt)

    def torques(self, t, y):
        d = self.drives
        out = []
        for i, drive in enumerate((d.tau_m1, d.tau_m2, d.tau_l)):
            tau = self.held[i]
            if tau is None:
                tau = float(drive(t, _as_state(y, t)))
            out.append(tau)
        lim = self.model.torque_limits
        out[0], self.saturated[0] = _saturate(out[0], lim[0])
        out[1], self.saturated[1] = _saturate(out[1], lim[1])
        return out

    def terms(self, y):
        """``(q_d, x_r, U, tau_s, tau_sd)``; raises outside the deflection band."""
        q_d = y[0] - y[2]
        if not abs(q_d) < self.model.qd_max:
            raise ModelDomainError(
                f"deflection q_d={q_d:.6g} rad left the admissible band "
                f"+-{self.model.qd_max} (q_m1={y[0]:.6g}, q_l={y[2]:.6g})", y[:6])
        x_r, _ = self.model.roller(y[1])
        U, tau_s, tau_sd = mechanism_terms(q_d, x_r, self.C, self.r, self.eff)
        if self.model.roller_pin is not None:
            tau_sd = 0.0
        return q_d, x_r, U, tau_s, tau_sd

    def __call__(self, t, y):
        tau1, tau2, taul = self.torques(t, y)
        _, _, _, tau_s, tau_sd = self.terms(y)
        w1, w2, wl = y[3], y[4], y[5]
        J, bJ, free = self.J, self.bJ, self.free
        a1 = (tau1 - tau_s) / J[0] - bJ[0] * w1 if free[0] else 0.0
        a2 = (tau2 - tau_sd) / J[1] - bJ[1] * w2 if free[1] else 0.0
        al = (tau_s - taul) / J[2] - bJ[2] * wl if free[2] else 0.0
        p2 = tau2 * w2
        b = self.b
        return (w1, w2, wl, a1, a2, al,
                tau1 * w1, p2, -taul * wl,
                b[0] * w1 * w1 + b[1] * w2 * w2 + b[2] * wl * wl, abs(p2))


def _as_state(y, t):
    return ActuatorState(y[0], y[1], y[2], y[3], y[4], y[5], t)


def _rk4(f, t, y, dt):
    h2 = 0.5 * dt
    k1 = f(t, y)
    k2 = f(t + h2, [yi + h2 * ki for yi, ki in zip(y, k1)])
    k3 = f(t + h2, [yi + h2 * ki for yi, ki in zip(y, k2)])
    k4 = f(t + dt, [yi + dt * ki for yi, ki in zip(y, k3)])
    h6 = dt / 6.0
    return [yi + h6 * (a + 2.0 * (b + c) + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4)]


def _clamp_carriage(model, y):
    """Plastic travel stop. Returns ``(y, hit, kinetic energy destroyed)``."""
    if model.roller_pin is not None:
        return y, False, 0.0
    sc = model.screw
    x = sc.x_ref + sc.pitch_radius * y[1]
    if sc.x_min <= x <= sc.x_max:
        return y, False, 0.0
    stop = sc.x_min if x < sc.x_min else sc.x_max
    lost = 0.5 * model.actuator.J_m2 * y[4] * y[4]
    y = list(y)
    y[1] = (stop - sc.x_ref) / sc.pitch_radius
    y[4] = 0.0
    return y, True, lost


def _initial_vector(state, model):
    y = list(state.as_tuple()) + [0.0] * 5
    for i, c in enumerate(COORDS):
        if c in model.frozen:
            y[3 + i] = 0.0
    return y


def state_derivative(state, model, drives=None):
    """Time derivative of the six mechanical states at ``state``.

    Returns ``(dq_m1, dq_m2, dq_l, ddq_m1, ddq_m2, ddq_l)``. Sampled
    controllers are evaluated as if a step were starting.
    """
    drives = drives or DriveInputs()
    f = _Rhs(model, drives)
    y = _initial_vector(state, model)
    f.begin_step(state.t, y, 0.0)
    return tuple(f(state.t, y)[:6])


def rk4_step(state, dt, model, drives=None):
    """One classical RK4 step followed by the carriage travel clamp."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    drives = drives or DriveInputs()
    f = _Rhs(model, drives)
    y = _initial_vector(state, model)
    f.begin_step(state.t, y, dt)
    y = _rk4(f, state.t, y, dt)
    y, _, _ = _clamp_carriage(model, y)
    if not all(math.isfinite(v) for v in y):
        raise FloatingPointError(f"non-finite state after step at t={state.t}: {y[:6]}")
    return ActuatorState(*y[:6], t=state.t + dt)


@dataclass
class Trajectory:
    """Recorded rollout. ``data`` maps each trajectory column to an array."""

    data: dict
    flags: list
    ledger: EnergyLedger
    final: ActuatorState
    max_balance_residual: float = 0.0
    peak_energy: float = 0.0
    error: str = None
    clamped: bool = False
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def __len__(self):
        return len(self.flags)

    @property
    def ok(self):
        return self.error is None

    def records(self):
        cols = TRAJECTORY_COLUMNS[:-1]
        for i, flag in enumerate(self.flags):
            row = {c: float(self.data[c][i]) for c in cols}
            row["flags"] = flag
            yield row


def simulate(initial, duration, dt, model, drives=None, record_every=1):
    """Fixed-step rollout from ``initial`` over ``duration`` seconds.

    Rows are recorded every ``record_every`` steps (and at the end). A model
    domain violation or a non-finite state stops the run; the partial
    trajectory is returned with ``error`` set.
    """
    if not (duration > 0 and dt > 0):
        raise InvalidParameterError("duration and dt must be positive")
    n_steps = int(round(duration / dt))
    if n_steps > 1e8:
        raise InvalidParameterError(f"duration/dt = {n_steps} exceeds 1e8 steps")
    if record_every < 1:
        raise InvalidParameterError("record_every must be >= 1")
    drives = drives or DriveInputs()
    f = _Rhs(model, drives)
    y = _initial_vector(initial, model)
    t0 = initial.t

    rows = {c: [] for c in TRAJECTORY_COLUMNS[:-1]}
    flags = []
    d_stop = 0.0
    e0 = model.kinetic(*y[3:6]) + f.terms(y)[2]
    ledger = EnergyLedger(E0=e0)
    peak = abs(e0)
    worst = 0.0
    error = None
    any_clamp = False
    t_cur = t0

    def record(t, y, tau1, tau2, flag):
        q_d, x_r, U, tau_s, tau_sd = f.terms(y)
        s, c = math.sin(q_d), math.cos(q_d)
        s2, c2 = s * s, c * c
        k = 0.5 * f.C / x_r * (2 * c2 + 3 * s2 * c2 + 8 * s2 + 4 * s2 * s2) / c**5
        E_kin = model.kinetic(*y[3:6])
        vals = (t, y[0], y[1], y[2], y[3], y[4], y[5], x_r, tau_s, tau_sd, k,
                tau1 * y[3], tau2 * y[4], E_kin, U, y[10])
        for col, v in zip(TRAJECTORY_COLUMNS[:-1], vals):
            rows[col].append(v)
        flags.append(flag)

    def torques_now(t, y):
        f.begin_step(t, y, dt)
        return f.torques(t, y)

    try:
        tau = torques_now(t0, y)
        record(t0, y, tau[0], tau[1], "")
        for i in range(n_steps):
            t = t0 + i * dt
            if i > 0:
                f.begin_step(t, y, dt)
            y = _rk4(f, t, y, dt)
            y, hit, lost = _clamp_carriage(model, y)
            flag_parts = []
            if hit:
                d_stop += lost
                any_clamp = True
                flag_parts.append("stop")
            if f.saturated[0]:
                flag_parts.append("sat_m1")
            if f.saturated[1]:
                flag_parts.append("sat_m2")
            for d, name in ((drives.tau_m1, "ctl_m1"), (drives.tau_m2, "ctl_m2")):
                if getattr(d, "saturated", False):
                    flag_parts.append(name + "_sat")
            step_flags = "|".join(flag_parts)
            if not all(math.isfinite(v) for v in y):
                raise FloatingPointError(f"non-finite state at t={t + dt:.6g}: {y[:6]}")
            t_next = t0 + (i + 1) * dt
            t_cur = t_next
            E = model.kinetic(*y[3:6]) + f.terms(y)[2]
            resid = E - (y[6] + y[7] + y[8] - y[9] - d_stop) - e0
            worst = max(worst, abs(resid))
            peak = max(peak, abs(E))
            if (i + 1) % record_every == 0 or i + 1 == n_steps:
                # power columns use the torque held over the step just taken
                tau1, tau2 = _step_torques(f, t_next, y)
                record(t_next, y, tau1, tau2, step_flags)
    except (ModelDomainError, FloatingPointError) as exc:
        error = str(exc)

    state = _as_state(y, t_cur)
    U = _safe_terms(f, y)[2]
    ledger = EnergyLedger(
        E_kin=model.kinetic(*y[3:6]), U_spring=U, W_m1=y[6], W_m2=y[7], W_m2_abs=y[10],
        W_ext=y[8], D_fric=y[9], D_stop=d_stop, E0=e0)
    data = {c: np.asarray(v, dtype=float) for c, v in rows.items()}
    return Trajectory(data=data, flags=flags, ledger=ledger, final=state,
                      max_balance_residual=worst, peak_energy=peak, error=error,
                      clamped=any_clamp)


def _step_torques(f, t, y):
    # torque values reported with a recorded row: held values if sampled,
    # otherwise the callables at the row's own time
    out = []
    for i, drive in enumerate((f.drives.tau_m1, f.drives.tau_m2)):
        tau = f.held[i]
        if tau is None:
            tau = float(drive(t, _as_state(y, t)))
        out.append(_saturate(tau, f.model.torque_limits[i])[0])
    return out


def _safe_terms(f, y):
    try:
        return f.terms(y)
    except ModelDomainError:
        return math.nan, math.nan, math.nan, math.nan, math.nan


def with_frozen(model, *coords):
    return replace(model, frozen=frozenset(model.frozen) | set(coords))
