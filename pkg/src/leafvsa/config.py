"""JSON configuration: parsing, defaults and validation.

Layout (every block and field optional, SI units)::

    {
      "spring":   {"E": 200e9, "b": 0.015, "t": 0.0015, "L": 0.08, "n": 8},
      "screw":    {"lead": 0.002, "x_min": 0.01, "x_max": 0.08, "x_ref": 0.08,
                   "efficiency": 1.0},
      "dynamics": {"J_m1": 1e-3, "J_m2": 1e-5, "J_l": 1e-2,
                   "b_m1": 1e-3, "b_m2": 1e-5, "b_l": 1e-3},
      "control":  {"motor1": {"kp": ..., "ki": ..., "kd": ..., "d_filter_tc": ...,
                              "u_min": null, "u_max": null, "windup_clamp": null},
                   "motor2": {...}},
      "sim":      {"dt": 1e-4, "duration": 1.0, "record_every": 10}
    }

``null`` saturation limits mean unbounded.
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .control import MOTOR1_GAINS, MOTOR2_GAINS, PidGains, pid_problems
from .dynamics import ActuatorParams, actuator_problems
from .errors import ConfigError
from .mechanism import ScrewParams, SpringBankParams, screw_problems, spring_problems


@dataclass(frozen=True)
class SimSettings:
    dt: float = 1e-4
    duration: float = 1.0
    record_every: int = 10


def sim_problems(dt, duration, record_every):
    problems = []
    for name, v in (("dt", dt), ("duration", duration)):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            problems.append(f"sim.{name} must be a positive number (got {v!r})")
    if isinstance(record_every, bool) or not isinstance(record_every, int) or record_every < 1:
        problems.append(f"sim.record_every must be an integer >= 1 (got {record_every!r})")
    if not problems and duration / dt > 1e8:
        problems.append(f"sim: duration/dt = {duration / dt:.3g} exceeds 1e8 steps")
    return problems


@dataclass(frozen=True)
class Config:
    spring: SpringBankParams = field(default_factory=SpringBankParams)
    screw: ScrewParams = field(default_factory=ScrewParams)
    dynamics: ActuatorParams = field(default_factory=ActuatorParams)
    motor1: PidGains = MOTOR1_GAINS
    motor2: PidGains = MOTOR2_GAINS
    sim: SimSettings = field(default_factory=SimSettings)


_GAIN_FIELDS = ("kp", "ki", "kd", "d_filter_tc", "u_min", "u_max", "windup_clamp")
_UNBOUNDED = {"u_min": -math.inf, "u_max": math.inf, "windup_clamp": math.inf}


def _block(data, name, defaults, problems):
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        problems.append(f"{name} must be an object (got {type(raw).__name__})")
        return dict(defaults)
    for key in raw:
        if key not in defaults:
            problems.append(f"{name}.{key} is not a recognised field")
    merged = dict(defaults)
    merged.update({k: v for k, v in raw.items() if k in defaults})
    return merged


def _gains(data, name, default, problems):
    fields = {k: getattr(default, k) for k in _GAIN_FIELDS}
    merged = _block(data, name, fields, problems)
    for key, inf in _UNBOUNDED.items():
        if merged[key] is None:
            merged[key] = inf
    found = pid_problems(f"control.{name}", **merged)
    problems.extend(found)
    return None if found else PidGains(**merged)


def config_from_dict(data):
    """Validated :class:`Config` from a parsed JSON object.

    Every violation is collected before raising :class:`ConfigError`.
    """
    problems = []
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    for key in data:
        if key not in ("spring", "screw", "dynamics", "control", "sim"):
            problems.append(f"{key} is not a recognised block")

    sp = _block(data, "spring", dataclasses.asdict(SpringBankParams()), problems)
    sc = _block(data, "screw", dataclasses.asdict(ScrewParams()), problems)
    dy = _block(data, "dynamics", dataclasses.asdict(ActuatorParams()), problems)
    si = _block(data, "sim", dataclasses.asdict(SimSettings()), problems)

    spring_issues = spring_problems(**sp)
    problems.extend(spring_issues)
    problems.extend(screw_problems(**sc, L=None if spring_issues else sp["L"]))
    problems.extend(actuator_problems(**dy))
    problems.extend(sim_problems(**si))

    control = data.get("control", {})
    if not isinstance(control, dict):
        problems.append("control must be an object")
        control = {}
    for key in control:
        if key not in ("motor1", "motor2"):
            problems.append(f"control.{key} is not a recognised field")
    m1 = _gains(control, "motor1", MOTOR1_GAINS, problems)
    m2 = _gains(control, "motor2", MOTOR2_GAINS, problems)

    if problems:
        raise ConfigError("invalid configuration", problems)
    return Config(SpringBankParams(**sp), ScrewParams(**sc), ActuatorParams(**dy), m1, m2,
                  SimSettings(**si))


def load_config(path):
    """Read and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def _finite_or_none(v):
    return None if isinstance(v, float) and math.isinf(v) else v


def config_to_dict(cfg):
    """Plain-JSON form of a resolved configuration (inverse of :func:`config_from_dict`)."""
    def gains(g):
        return {k: _finite_or_none(getattr(g, k)) for k in _GAIN_FIELDS}

    return {
        "spring": dataclasses.asdict(cfg.spring),
        "screw": dataclasses.asdict(cfg.screw),
        "dynamics": dataclasses.asdict(cfg.dynamics),
        "control": {"motor1": gains(cfg.motor1), "motor2": gains(cfg.motor2)},
        "sim": dataclasses.asdict(cfg.sim),
    }
