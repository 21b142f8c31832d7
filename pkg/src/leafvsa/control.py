"""Simple servo loops for the two motors.

Motor 1 runs a position PID on ``q_m1`` (equilibrium position); motor 2 runs a
position PID on ``q_m2`` whose setpoint comes from a stiffness target via the
equilibrium inversion ``x_r = 3 n E I / k``.

Both loops are sampled: the simulator calls :meth:`PidController.sample` once
per integration step and holds the torque over the step.
"""

import math
from dataclasses import dataclass, replace

from .errors import InvalidParameterError
from .mechanism import motor_from_roller, stiffness_to_roller


def pid_problems(prefix, kp, ki, kd, d_filter_tc, u_min, u_max, windup_clamp):
    problems = []
    values = dict(kp=kp, ki=ki, kd=kd, d_filter_tc=d_filter_tc, u_min=u_min, u_max=u_max,
                  windup_clamp=windup_clamp)
    for name, v in values.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            problems.append(f"{prefix}.{name} must be a number (got {v!r})")
    if problems:
        return problems
    for name in ("kp", "ki", "kd"):
        if values[name] < 0:
            problems.append(f"{prefix}.{name} must be non-negative (got {values[name]})")
    if not d_filter_tc > 0:
        problems.append(f"{prefix}.d_filter_tc must be positive (got {d_filter_tc})")
    if not u_min < u_max:
        problems.append(f"{prefix}: u_min must be below u_max (got {u_min}, {u_max})")
    if windup_clamp < 0:
        problems.append(f"{prefix}.windup_clamp must be non-negative (got {windup_clamp})")
    return problems


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    d_filter_tc: float = 1e-3
    u_min: float = -math.inf
    u_max: float = math.inf
    windup_clamp: float = math.inf

    def __post_init__(self):
        problems = pid_problems("pid", self.kp, self.ki, self.kd, self.d_filter_tc,
                                self.u_min, self.u_max, self.windup_clamp)
        if problems:
            raise InvalidParameterError("; ".join(problems))


# Tuned on the default plant (see README): motor 1 against a clamped link at
# x_r = 0.02 and 0.08, motor 2 on a 10 mm carriage step; both < 5 % overshoot
# at dt = 1e-4 and 1e-5.
MOTOR1_GAINS = PidGains(kp=2000.0, ki=1e5, kd=5.0, d_filter_tc=1e-4)
MOTOR2_GAINS = PidGains(kp=0.9, ki=5.0, kd=6e-3, d_filter_tc=1e-3)


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    d_filtered: float = 0.0
    last_measurement: float = None
    last_time: float = None
    saturated: bool = False


def pid_step(gains, state, setpoint, measurement, dt, t=None):
    """One PID update. Returns ``(u, new_state)``.

    The derivative acts on the (negated) measurement through a first-order
    filter, so setpoint steps do not kick. The integral is clamped to
    ``windup_clamp`` and frozen while the output is saturated in the
    direction the error pushes.
    """
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    e = setpoint - measurement

    if state.last_measurement is None:
        # no history yet: keep the (possibly primed) filter value
        raw = state.d_filtered
    else:
        raw = -(measurement - state.last_measurement) / dt
    alpha = dt / (gains.d_filter_tc + dt)
    d_f = state.d_filtered + alpha * (raw - state.d_filtered)

    p = gains.kp * e
    d = gains.kd * d_f
    integral = state.integral + gains.ki * e * dt
    integral = min(max(integral, -gains.windup_clamp), gains.windup_clamp)
    u = p + integral + d
    if (u > gains.u_max and e > 0) or (u < gains.u_min and e < 0):
        integral = state.integral
        u = p + integral + d
    saturated = not gains.u_min <= u <= gains.u_max
    u = min(max(u, gains.u_min), gains.u_max)

    return u, PidState(integral, d_f, measurement, t, saturated)


class PidController:
    """Sampled PID drive for the simulator.

    ``setpoint`` maps time to a target for ``coordinate``; ``feedforward``
    (optional) maps time to a torque added after the PID output.
    """

    def __init__(self, gains, coordinate, setpoint, feedforward=None, state=None):
        self.gains = gains
        self.coordinate = coordinate
        self.setpoint = setpoint
        self.feedforward = feedforward
        self.state = state or PidState()
        self.last_error = 0.0
        self.last_u = 0.0

    @property
    def saturated(self):
        return self.state.saturated

    def preload(self, u=0.0, rate=0.0):
        """Bumpless start.

        The integral starts out holding ``u`` and the derivative filter starts
        at the measurement rate ``rate``, so a loop entered in steady motion or
        under a static load does not kick.
        """
        self.state = replace(self.state, integral=u, d_filtered=-rate)

    def sample(self, t, state, dt):
        if not dt > 0:
            return self.last_u
        target = self.setpoint(t)
        measured = getattr(state, self.coordinate)
        u, self.state = pid_step(self.gains, self.state, target, measured, dt, t)
        if self.feedforward is not None:
            u = u + self.feedforward(t)
        self.last_error = target - measured
        self.last_u = u
        return u


def constant(value):
    return lambda t: value


def ramp(start, end, t0, t1):
    """Linear move from ``start`` to ``end`` between ``t0`` and ``t1``, held outside."""
    span = t1 - t0

    def profile(t):
        if t <= t0:
            return start
        if t >= t1:
            return end
        return start + (end - start) * (t - t0) / span

    profile.rate = (end - start) / span
    profile.window = (t0, t1)
    return profile


def position_command(profile, gains=MOTOR1_GAINS):
    """Motor-1 drive closing a PID on ``q_m1`` around ``profile(t)``."""
    return PidController(gains, "q_m1", profile)


def stiffness_command(k_target, spring, screw, gains=MOTOR2_GAINS, max_speed=None,
                      friction=0.0, x_start=None):
    """Motor-2 drive tracking a stiffness target ``k_target(t)`` (N m/rad).

    Each target is inverted at equilibrium (``x_r = 3 n E I / k``), clamped to
    the roller travel and converted to a motor-2 angle. With ``max_speed``
    (m/s) the roller setpoint slews from ``x_start`` toward the target at that
    speed, and a velocity feedforward ``(friction + kd) * dq_ref`` cancels the
    viscous drag and the derivative path's bias during the move.

    The controller's ``target`` attribute exposes the setpoint generator;
    ``target.clamped`` records whether any stiffness target was out of range.
    """
    cmd = _StiffnessSetpoint(k_target, spring, screw, max_speed, x_start)
    ff = None
    if max_speed is not None:
        gain = friction + gains.kd

        def ff(t):
            return gain * cmd.rate

    ctl = PidController(gains, "q_m2", cmd, ff)
    ctl.target = cmd
    return ctl


class _StiffnessSetpoint:
    """Stiffness target -> (optionally slew-limited) motor-2 angle."""

    def __init__(self, k_target, spring, screw, max_speed, x_start):
        self.k_target = k_target
        self.spring = spring
        self.screw = screw
        self.max_rate = None if max_speed is None else max_speed / screw.pitch_radius
        self.q = None if x_start is None else motor_from_roller(x_start, screw)
        self.last_t = None
        self.rate = 0.0
        self.clamped = False

    def __call__(self, t):
        x, hit = stiffness_to_roller(self.k_target(t), self.spring, self.screw)
        self.clamped = self.clamped or hit
        goal = motor_from_roller(x, self.screw)
        if self.max_rate is None or self.q is None:
            self.q, self.last_t = goal, t
            return goal
        if self.last_t is None:
            self.last_t = t
        dt = t - self.last_t
        limit = self.max_rate * dt
        step = goal - self.q
        if abs(step) > limit:
            step = math.copysign(limit, step)
        self.rate = step / dt if dt > 0 else 0.0
        self.q += step
        self.last_t = t
        return self.q
