"""Leaf-spring stiffness modulation mechanism.

A bank of ``n`` identical leaf springs is clamped at the root and loaded by a
roller carriage sitting at distance ``x_r`` from the root. Deflecting the
output link by ``q_d`` rotates the roller about the joint axis, so the roller
imposes a lateral displacement ``delta = x_r sin(q_d)`` at horizontal station
``a = x_r cos(q_d)``. Each spring answers with the small-deflection cantilever
force ``3 E I delta / a**3``.

Everything the rest of the package needs follows from one potential::

    U(q_d, x_r) = (3 n E I / 2) * sin(q_d)**2 / (x_r * cos(q_d)**3)

    tau_s = dU/dq_d        output spring torque
    k     = d2U/dq_d2      joint stiffness
    Q_x   = -dU/dx_r       axial push of the springs on the roller carriage

Deriving all of them from ``U`` keeps the coupled dynamics conservative, which
is what the energy audits in :mod:`leafvsa.dynamics` rely on.

All spring functions accept floats or numpy arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ModelDomainError

#: Default deflection band for grids, scenarios and simulation aborts (rad).
QD_MAX = 0.3


def second_moment(b, t):
    """Second moment of area of a ``b`` x ``t`` rectangle about its neutral axis."""
    if not (b > 0 and t > 0):
        raise InvalidParameterError(f"section dimensions must be positive, got b={b}, t={t}")
    return b * t**3 / 12.0


def spring_problems(E, b, t, L, n):
    """List every violated invariant of a spring bank definition."""
    problems = []
    for name, value in (("E", E), ("b", b), ("t", t), ("L", L)):
        if not (isinstance(value, (int, float)) and value > 0):
            problems.append(f"spring.{name} must be a positive number (got {value!r})")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        problems.append(f"spring.n must be an integer >= 1 (got {n!r})")
    if not problems and t > b:
        problems.append(f"spring.t: thickness exceeds width (t={t} > b={b})")
    return problems


@dataclass(frozen=True)
class SpringBankParams:
    """Geometry and material of the parallel leaf springs (SI units).

    ``I`` is always recomputed from ``b`` and ``t``; it is never stored.
    """

    E: float = 200e9
    b: float = 0.015
    t: float = 0.0015
    L: float = 0.08
    n: int = 8

    def __post_init__(self):
        problems = spring_problems(self.E, self.b, self.t, self.L, self.n)
        if problems:
            raise InvalidParameterError("; ".join(problems))

    @property
    def I(self):
        return second_moment(self.b, self.t)

    @property
    def EI(self):
        """Flexural rigidity of a single spring."""
        return self.E * self.I

    @property
    def bank_constant(self):
        """``3 n E I``: the stiffness-length product ``k(0, x_r) * x_r``."""
        return 3.0 * self.n * self.E * self.I


def screw_problems(lead, x_min, x_max, x_ref, efficiency, L=None):
    problems = []
    for name, value in (("lead", lead), ("x_min", x_min), ("x_max", x_max),
                        ("x_ref", x_ref), ("efficiency", efficiency)):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            problems.append(f"screw.{name} must be a number (got {value!r})")
    if problems:
        return problems
    if lead <= 0:
        problems.append(f"screw.lead must be positive (got {lead})")
    if x_min <= 0:
        problems.append(
            f"screw.x_min must be strictly positive: the roller can never reach the "
            f"clamped root (got {x_min})")
    if x_max <= x_min:
        problems.append(f"screw.x_max must exceed x_min (got x_min={x_min}, x_max={x_max})")
    if L is not None and x_max > L:
        problems.append(f"screw.x_max must not exceed the spring length L={L} (got {x_max})")
    if not x_min <= x_ref <= x_max:
        problems.append(f"screw.x_ref must lie in [x_min, x_max] (got {x_ref})")
    if not 0 < efficiency <= 1:
        problems.append(f"screw.efficiency must lie in (0, 1] (got {efficiency})")
    return problems


@dataclass(frozen=True)
class ScrewParams:
    """Ball screw driving the roller carriage.

    Positive motor-2 rotation moves the rollers toward the free end (softer).
    """

    lead: float = 0.002
    x_min: float = 0.01
    x_max: float = 0.08
    x_ref: float = 0.08
    efficiency: float = 1.0

    def __post_init__(self):
        problems = screw_problems(self.lead, self.x_min, self.x_max, self.x_ref,
                                  self.efficiency)
        if problems:
            raise InvalidParameterError("; ".join(problems))

    @property
    def pitch_radius(self):
        """Carriage travel per radian of screw rotation (m/rad)."""
        return self.lead / (2.0 * math.pi)

    def check_fits(self, spring):
        if self.x_max > spring.L:
            raise InvalidParameterError(
                f"roller travel x_max={self.x_max} exceeds spring length L={spring.L}")


DEFAULT_SPRING = SpringBankParams()
DEFAULT_SCREW = ScrewParams()


def _check_input(q_d, x_r):
    if np.any(np.abs(q_d) >= math.pi / 2):
        raise ModelDomainError(f"|q_d| must stay below pi/2, got {q_d}")
    if np.any(np.asarray(x_r) <= 0):
        raise ModelDomainError(f"roller position must be positive, got {x_r}")


def contact_kinematics(q_d, x_r):
    """Horizontal station ``a`` and lateral deflection ``delta`` at the roller."""
    _check_input(q_d, x_r)
    return x_r * np.cos(q_d), x_r * np.sin(q_d)


def potential_energy(q_d, x_r, params=DEFAULT_SPRING):
    """Elastic energy stored in the whole spring bank (J)."""
    _check_input(q_d, x_r)
    s, c = np.sin(q_d), np.cos(q_d)
    return 0.5 * params.bank_constant * s * s / (x_r * c**3)


def spring_torque(q_d, x_r, params=DEFAULT_SPRING):
    """Torque the springs exert between motor 1 and the output link (N m)."""
    _check_input(q_d, x_r)
    s, c = np.sin(q_d), np.cos(q_d)
    return 0.5 * params.bank_constant / x_r * s * (2.0 + s * s) / c**4 + 0.0


def joint_stiffness(q_d, x_r, params=DEFAULT_SPRING):
    """Tangent stiffness ``d tau_s / d q_d`` (N m/rad).

    At ``q_d = 0`` this is exactly ``3 n E I / x_r``.
    """
    _check_input(q_d, x_r)
    s, c = np.sin(q_d), np.cos(q_d)
    s2, c2 = s * s, c * c
    num = 2.0 * c2 + 3.0 * s2 * c2 + 8.0 * s2 + 4.0 * s2 * s2
    return 0.5 * params.bank_constant / x_r * num / c**5


def screw_reaction(q_d, x_r, params=DEFAULT_SPRING, screw=DEFAULT_SCREW):
    """Axial spring push on the carriage and the torque it reflects onto motor 2.

    Returns ``(Q_x, tau_sd)``. ``Q_x >= 0`` points toward larger ``x_r``: the
    loaded springs backdrive the carriage toward the soft end. ``tau_sd`` is
    the load torque in the motor-2 equation ``J q'' + b q' = tau_m2 - tau_sd``,
    so it is ``<= 0`` (it assists positive, softening rotation).
    """
    _check_input(q_d, x_r)
    s, c = np.sin(q_d), np.cos(q_d)
    Q = 0.5 * params.bank_constant * s * s / (c**3 * x_r * x_r) + 0.0
    tau_sd = -screw.pitch_radius * Q / screw.efficiency + 0.0
    return Q, tau_sd


def roller_from_motor(q_m2, screw=DEFAULT_SCREW):
    """Roller position for motor-2 angle ``q_m2``.

    Returns ``(x_r, clamped)``; ``clamped`` is set when a travel stop was hit.
    """
    x = screw.x_ref + screw.pitch_radius * q_m2
    if x < screw.x_min:
        return screw.x_min, True
    if x > screw.x_max:
        return screw.x_max, True
    return x, False


def motor_from_roller(x_r, screw=DEFAULT_SCREW):
    """Motor-2 angle that places the rollers at ``x_r``."""
    if not screw.x_min <= x_r <= screw.x_max:
        raise InvalidParameterError(
            f"x_r={x_r} outside roller travel [{screw.x_min}, {screw.x_max}]")
    return (x_r - screw.x_ref) / screw.pitch_radius


def stiffness_to_roller(k_target, params=DEFAULT_SPRING, screw=DEFAULT_SCREW):
    """Roller position giving equilibrium stiffness ``k_target``.

    Returns ``(x_r, clamped)``. Targets outside
    ``[k(0, x_max), k(0, x_min)]`` are clamped to the nearest stop.
    """
    if not k_target > 0:
        raise InvalidParameterError(f"stiffness target must be positive, got {k_target}")
    x = params.bank_constant / k_target
    if x < screw.x_min:
        return screw.x_min, True
    if x > screw.x_max:
        return screw.x_max, True
    return x, False


def stiffness_range(params=DEFAULT_SPRING, screw=DEFAULT_SCREW):
    """``(k_min, k_max)`` reachable at equilibrium within the roller travel."""
    return params.bank_constant / screw.x_max, params.bank_constant / screw.x_min


def mechanism_terms(q_d, x_r, bank_constant, pitch_radius, efficiency=1.0):
    """Scalar fast path used inside the integrator.

    Same closed forms as the public functions, evaluated with :mod:`math`.
    Returns ``(U, tau_s, tau_sd)``.
    """
    s = math.sin(q_d)
    c = math.cos(q_d)
    c3 = c * c * c
    half = 0.5 * bank_constant
    U = half * s * s / (x_r * c3)
    tau = half / x_r * s * (2.0 + s * s) / (c3 * c) + 0.0
    Q = half * s * s / (c3 * x_r * x_r)
    return U, tau, -pitch_radius * Q / efficiency + 0.0
