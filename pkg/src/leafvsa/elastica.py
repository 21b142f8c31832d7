"""Large-deflection (elastica) solutions for a clamped leaf spring.

The loaded part of the beam carries a force ``F`` along ``y`` applied at
horizontal coordinate ``x_c``. Along the arc length ``s``::

    dphi/ds = F * (x_c - x(s)) / EI
    dx/ds   = cos(phi)
    dy/ds   = sin(phi)

with a clamped root ``phi(0) = x(0) = y(0) = 0``. The system is integrated with
fixed-step classical RK4.

Two problems are solved:

* :func:`solve_tip_load` -- a cantilever of arc length ``S`` with a tip load.
  The tip coordinate ``x_c = x(S)`` is unknown and found by shooting.
* :func:`force_from_constraint` -- the roller problem: the contact point must
  sit at horizontal station ``a`` with lateral deflection ``delta``. Here
  ``x_c = a`` is known; the unknowns are ``F`` and the contact arc length.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ElasticaDomainError, InvalidParameterError

MAX_DEFLECTION_RATIO = 0.5


@dataclass(frozen=True)
class ElasticaParams:
    EI: float
    F: float
    S: float
    n_steps: int = 2000
    tol: float = 1e-12

    def __post_init__(self):
        if not self.EI > 0:
            raise InvalidParameterError(f"EI must be positive, got {self.EI}")
        if not self.S > 0:
            raise InvalidParameterError(f"arc length S must be positive, got {self.S}")
        if self.n_steps < 100:
            raise InvalidParameterError(f"n_steps must be >= 100, got {self.n_steps}")
        if not self.tol > 0:
            raise InvalidParameterError(f"tol must be positive, got {self.tol}")


@dataclass
class ElasticaSolution:
    """Deflected shape sampled at the integration stations.

    ``delta_x`` is the foreshortening at the contact (undeformed station minus
    deformed ``x``), ``delta_y`` the lateral deflection there and ``phi_c`` the
    slope. Stations past the contact, if any, belong to the unloaded straight
    remainder of the spring.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    phi: np.ndarray
    s_contact: float
    delta_x: float
    delta_y: float
    phi_c: float
    F: float
    residual: float

    @property
    def x_contact(self):
        return self.s_contact - self.delta_x


def _integrate(k, x_c, length, n_steps, keep=False):
    """RK4 over ``[0, length]`` with curvature gain ``k = F / EI``.

    Returns ``(phi, x, y)`` at the end, or full station lists when ``keep``.
    """
    h = length / n_steps
    h2 = 0.5 * h
    h6 = h / 6.0
    cos, sin = math.cos, math.sin
    phi = x = y = 0.0
    if keep:
        ps, xs, ys = [0.0], [0.0], [0.0]
    for _ in range(n_steps):
        k1p = k * (x_c - x)
        c1, s1 = cos(phi), sin(phi)
        p2 = phi + h2 * k1p
        x2 = x + h2 * c1
        k2p = k * (x_c - x2)
        c2, s2 = cos(p2), sin(p2)
        p3 = phi + h2 * k2p
        x3 = x + h2 * c2
        k3p = k * (x_c - x3)
        c3, s3 = cos(p3), sin(p3)
        p4 = phi + h * k3p
        x4 = x + h * c3
        k4p = k * (x_c - x4)
        c4, s4 = cos(p4), sin(p4)
        phi += h6 * (k1p + 2.0 * (k2p + k3p) + k4p)
        x += h6 * (c1 + 2.0 * (c2 + c3) + c4)
        y += h6 * (s1 + 2.0 * (s2 + s3) + s4)
        if keep:
            ps.append(phi)
            xs.append(x)
            ys.append(y)
    if keep:
        return ps, xs, ys
    return phi, x, y


def _check_slope(phi):
    if abs(phi) >= 0.5 * math.pi or not math.isfinite(phi):
        raise ElasticaDomainError("load drives the beam slope to 90 degrees or beyond")


def solve_tip_load(params, max_iter=60):
    """Cantilever of arc length ``S`` under a transverse tip force ``F``.

    The unknown tip abscissa is found with a secant iteration on
    ``x(S; x_tip) - x_tip`` seeded by one fixed-point step. Heavy loads are
    safeguarded by bisection on the bracket ``[0, S]``.
    """
    EI, F, S, N = params.EI, params.F, params.S, params.n_steps
    if F == 0:
        s = np.linspace(0.0, S, N + 1)
        zeros = np.zeros(N + 1)
        return ElasticaSolution(s, s.copy(), zeros, zeros.copy(), S, 0.0, 0.0, 0.0, 0.0, 0.0)
    alpha = abs(F) * S * S / EI
    if alpha > 20:
        raise ElasticaDomainError(f"tip load F*S^2/EI = {alpha:.3g} is too large")
    k = F / EI
    x1 = _shoot_tip(abs(k), S, N, params.tol, max_iter)
    ps, xs, ys = _integrate(k, x1, S, N, keep=True)
    _check_slope(max(ps, key=abs))
    return ElasticaSolution(
        s=np.linspace(0.0, S, N + 1), x=np.array(xs), y=np.array(ys), phi=np.array(ps),
        s_contact=S, delta_x=S - xs[-1], delta_y=ys[-1], phi_c=ps[-1], F=F,
        residual=abs(xs[-1] - x1) / S)


def _tip_residual(k, x_tip, S, n_steps):
    """``x(S) - x_tip`` for a trial tip abscissa, with two physical guards.

    A tip-loaded cantilever never crosses its own load line and never reaches
    a 90 degree slope. A trial shape crossing ``x_tip`` at arc length ``s``
    means ``x_tip`` is too small (returns ``+(S - s)``); one reaching 90
    degrees means it is too large (returns a negative value). Both guards
    keep the iteration on the physical branch.
    """
    h = S / n_steps
    h2 = 0.5 * h
    h6 = h / 6.0
    cos = math.cos
    limit = 0.5 * math.pi
    phi = x = 0.0
    for i in range(n_steps):
        k1 = k * (x_tip - x)
        c1 = cos(phi)
        x2 = x + h2 * c1
        k2 = k * (x_tip - x2)
        c2 = cos(phi + h2 * k1)
        x3 = x + h2 * c2
        k3 = k * (x_tip - x3)
        c3 = cos(phi + h2 * k2)
        k4 = k * (x_tip - x - h * c3)
        c4 = cos(phi + h * k3)
        phi += h6 * (k1 + 2.0 * (k2 + k3) + k4)
        x += h6 * (c1 + 2.0 * (c2 + c3) + c4)
        remaining = S - (i + 1) * h
        if x > x_tip and i + 1 < n_steps:
            return remaining
        if abs(phi) >= limit:
            return min(x - x_tip, 0.0) - remaining - h
    return x - x_tip


def _shoot_tip(k, S, N, tol, max_iter):
    """Tip abscissa solving ``x(S; x_tip) = x_tip`` for ``k = |F| / EI``.

    The guarded residual is positive at ``x_tip = 0`` and negative at
    ``x_tip = S``; secant steps that leave the current bracket, or creep in
    from one side, are replaced by bisection.
    """
    lo, hi = 0.0, S
    x0, r0 = S, _tip_residual(k, S, S, N)
    x1 = x0 + r0
    same_side = 0
    for _ in range(max_iter):
        if not lo < x1 < hi:
            x1 = 0.5 * (lo + hi)
        r1 = _tip_residual(k, x1, S, N)
        if abs(r1) < tol * S:
            return x1
        if r1 > 0:
            lo = x1
        else:
            hi = x1
        same_side = same_side + 1 if (r1 > 0) == (r0 > 0) else 0
        if r1 == r0 or same_side >= 2:
            x_next = 0.5 * (lo + hi)
            same_side = 0
        else:
            x_next = x1 - r1 * (x1 - x0) / (r1 - r0)
        x0, r0, x1 = x1, r1, x_next
    raise ConvergenceError("tip-load shooting did not converge", abs(r1) / S)


def linear_force(delta_y, a, EI):
    """Small-deflection cantilever force ``3 EI delta / a^3``."""
    return 3.0 * EI * delta_y / a**3


def force_from_constraint(delta_y, a, EI, tol=1e-10, n_steps=400, length=None,
                          max_iter=40, material_point=False):
    """Force that puts the contact point at ``(a, delta_y)``.

    Damped Newton on ``(F, s_contact)`` with a forward-difference Jacobian;
    steps are halved up to eight times while the residual grows. Returns
    ``(F, solution)``; ``F`` carries the sign of ``delta_y``.

    With ``material_point=True`` the contact is tied to the material point at
    arc length ``a`` instead of the horizontal station ``a`` (sensitivity
    check only).

    When ``length`` is given, the straight unloaded remainder up to that arc
    length is appended to the returned stations.
    """
    if not a > 0:
        raise ElasticaDomainError(f"contact station must be positive, got {a}")
    if not EI > 0:
        raise InvalidParameterError(f"EI must be positive, got {EI}")
    ratio = abs(delta_y) / a
    if ratio >= MAX_DEFLECTION_RATIO:
        raise ElasticaDomainError(
            f"|delta|/a = {ratio:.3f} outside the solver envelope (< {MAX_DEFLECTION_RATIO})")
    if delta_y == 0:
        return 0.0, _straight(a, n_steps, length)
    sign = 1.0 if delta_y > 0 else -1.0
    d = abs(delta_y)

    if material_point:
        sol = _material_point(d, a, EI, tol, n_steps, max_iter)
    else:
        sol = _station_constraint(d, a, EI, tol, n_steps, max_iter)
    if length is not None and length > sol.s_contact:
        sol = _extend(sol, length)
    if sign < 0:
        sol.y, sol.phi = -sol.y, -sol.phi
        sol.delta_y, sol.phi_c, sol.F = -sol.delta_y, -sol.phi_c, -sol.F
    return sol.F, sol


def _station_constraint(d, a, EI, tol, n_steps, max_iter):
    def res(F, s):
        phi, x, y = _integrate(F / EI, a, s, n_steps)
        _check_slope(phi)
        return (x - a) / a, (y - d) / a

    F = linear_force(d, a, EI)
    s = a + 0.6 * d * d / a
    r = res(F, s)
    norm = math.hypot(*r)
    for _ in range(max_iter):
        if norm < tol:
            break
        hF = 1e-6 * F
        hs = 1e-7 * a
        rF = res(F + hF, s)
        rs = res(F, s + hs)
        j11, j21 = (rF[0] - r[0]) / hF, (rF[1] - r[1]) / hF
        j12, j22 = (rs[0] - r[0]) / hs, (rs[1] - r[1]) / hs
        det = j11 * j22 - j12 * j21
        if det == 0 or not math.isfinite(det):
            raise ConvergenceError("singular Jacobian in contact solve", norm)
        dF = -(j22 * r[0] - j12 * r[1]) / det
        ds = -(-j21 * r[0] + j11 * r[1]) / det
        step = 1.0
        for _ in range(9):
            Fn, sn = F + step * dF, s + step * ds
            try:
                rn = res(Fn, sn) if sn > 0 else None
            except ElasticaDomainError:
                rn = None
            if rn is not None and math.hypot(*rn) < norm:
                break
            step *= 0.5
        else:
            raise ConvergenceError("damped Newton could not reduce the contact residual", norm)
        F, s, r = Fn, sn, rn
        norm = math.hypot(*r)
    else:
        raise ConvergenceError("contact solve exceeded its iteration budget", norm)

    ps, xs, ys = _integrate(F / EI, a, s, n_steps, keep=True)
    return ElasticaSolution(
        s=np.linspace(0.0, s, n_steps + 1), x=np.array(xs), y=np.array(ys), phi=np.array(ps),
        s_contact=s, delta_x=s - xs[-1], delta_y=ys[-1], phi_c=ps[-1], F=F, residual=norm)


def _material_point(d, a, EI, tol, n_steps, max_iter):
    # contact at arc length a; solve the scalar problem y(a; F) = d
    def y_of(F):
        sol = solve_tip_load(ElasticaParams(EI, F, a, n_steps, tol=min(tol, 1e-12)))
        return sol, sol.delta_y

    F0 = linear_force(d, a, EI)
    sol0, y0 = y_of(F0)
    F1 = F0 * d / y0
    sol1, y1 = y_of(F1)
    for _ in range(max_iter):
        if abs(y1 - d) < tol * a:
            sol1.residual = abs(y1 - d) / a
            return sol1
        F0, F1 = F1, F1 - (y1 - d) * (F1 - F0) / (y1 - y0)
        y0 = y1
        sol1, y1 = y_of(F1)
    raise ConvergenceError("material-point contact solve did not converge", abs(y1 - d) / a)


def _straight(a, n_steps, length):
    end = a if length is None else max(a, length)
    s = np.linspace(0.0, end, n_steps + 1)
    zeros = np.zeros_like(s)
    return ElasticaSolution(s, s.copy(), zeros, zeros.copy(), a, 0.0, 0.0, 0.0, 0.0, 0.0)


def _extend(sol, length, n_extra=50):
    ds = np.linspace(0.0, length - sol.s_contact, n_extra + 1)[1:]
    c, sn = math.cos(sol.phi_c), math.sin(sol.phi_c)
    sol.s = np.concatenate([sol.s, sol.s_contact + ds])
    sol.x = np.concatenate([sol.x, sol.x[-1] + c * ds])
    sol.y = np.concatenate([sol.y, sol.y[-1] + sn * ds])
    sol.phi = np.concatenate([sol.phi, np.full_like(ds, sol.phi_c)])
    return sol


@dataclass
class ComparisonRow:
    q_d: float
    x_r: float
    F_linear: float
    F_elastica: float
    rel_dev: float
    status: str


COMPARISON_COLUMNS = ("q_d", "x_r", "F_linear", "F_elastica", "rel_dev", "status")


def compare_with_linear(qd_grid, xr_grid, params, n_steps=400, tol=1e-10):
    """Per-spring contact force from the small-deflection law and from the elastica.

    Returns ``(rows, band_max)`` where ``band_max`` maps each ``|q_d|`` to the
    largest ``|rel_dev|`` among the cells that solved. Failed cells are kept in
    the table with a ``failed: ...`` status and NaN force.
    """
    EI = params.EI
    rows = []
    for q in qd_grid:
        for xr in xr_grid:
            q, xr = float(q), float(xr)
            a, d = xr * math.cos(q), xr * math.sin(q)
            F_lin = linear_force(d, a, EI)
            try:
                F_el, _ = force_from_constraint(d, a, EI, tol=tol, n_steps=n_steps)
            except (ConvergenceError, ElasticaDomainError) as exc:
                rows.append(ComparisonRow(q, xr, F_lin, math.nan, math.nan,
                                          f"failed: {type(exc).__name__}"))
                continue
            dev = 0.0 if F_lin == 0 and F_el == 0 else (F_el - F_lin) / F_lin
            rows.append(ComparisonRow(q, xr, F_lin, F_el, dev, "ok"))
    rows.sort(key=lambda r: (r.q_d, r.x_r))
    band_max = {}
    for r in rows:
        if r.status != "ok":
            continue
        key = abs(r.q_d)
        band_max[key] = max(band_max.get(key, 0.0), abs(r.rel_dev))
    return rows, band_max
