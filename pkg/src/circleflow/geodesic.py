"""Euler-Arnold structure operators and geodesic integrators.

Lie bracket convention: [u, v] = u_x v - u v_x. All nonlinear products are
truncated by the 2/3 rule unless ``dealiased=False`` is passed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diffeo import Diffeo, compose_field, metric_inner, pull_back
from .errors import ConfigurationError, NotADiffeomorphism
from .multiplier import MultiplierSymbol, apply, invert_on_range
from .spectral import (GridSpec, PeriodicField, analyze, dealias, differentiate, l2_inner,
                       product)

RANGE_TOL = 1e-10


def _mul(a, b, dealiased):
    return product(a, b, dealiased=dealiased)


def bracket(u: PeriodicField, v: PeriodicField, dealiased: bool = True) -> PeriodicField:
    return _mul(differentiate(u), v, dealiased) - _mul(u, differentiate(v), dealiased)


def coadjoint_term(u: PeriodicField, m: PeriodicField, dealiased: bool = True) -> PeriodicField:
    """m_x u + 2 m u_x (the transport term of the momentum equation)."""
    return _mul(differentiate(m), u, dealiased) + 2.0 * _mul(m, differentiate(u), dealiased)


def ad_transpose(A: MultiplierSymbol, u: PeriodicField, v: PeriodicField,
                 dealiased: bool = True, tol: float = RANGE_TOL) -> PeriodicField:
    """ad_u^T v = A^{-1}(2 (Av) u_x + (Av)_x u)."""
    return invert_on_range(A, coadjoint_term(u, apply(A, v), dealiased), tol)


def christoffel_B(A: MultiplierSymbol, u: PeriodicField, v: PeriodicField,
                  dealiased: bool = True, tol: float = RANGE_TOL) -> PeriodicField:
    """B(u,v) = 1/2 A^{-1}[2(Av)u_x + (Av)_x u + 2(Au)v_x + (Au)_x v]."""
    rhs = coadjoint_term(u, apply(A, v), dealiased) + coadjoint_term(v, apply(A, u), dealiased)
    return 0.5 * invert_on_range(A, rhs, tol)


def covariant_derivative(A: MultiplierSymbol, u: PeriodicField, w: PeriodicField,
                         w_t: PeriodicField, dealiased: bool = True) -> PeriodicField:
    """Dw/Dt = w_t - 1/2 [u, w] + B(u, w) along a curve with Eulerian velocity u.

    With [u, w] = u_x w - u w_x this is the sign that makes the derivative
    compatible with the metric; both signs agree on w = u.
    """
    return w_t - 0.5 * bracket(u, w, dealiased) + christoffel_B(A, u, w, dealiased)


def spray_S(A: MultiplierSymbol, u: PeriodicField, dealiased: bool = True,
            tol: float = RANGE_TOL) -> PeriodicField:
    """S(u) = A^{-1}{[A,u]u_x - 2(Au)u_x} with [A,u]w = A(uw) - uA(w)."""
    ux = differentiate(u)
    au = apply(A, u)
    comm = apply(A, _mul(u, ux, dealiased)) - _mul(u, apply(A, ux), dealiased)
    return invert_on_range(A, comm - 2.0 * _mul(au, ux, dealiased), tol)


def euler_rhs(A: MultiplierSymbol, u: PeriodicField, dealiased: bool = True,
              tol: float = RANGE_TOL) -> PeriodicField:
    """u_t = -A^{-1}{(Au)_x u + 2(Au)u_x}."""
    return -invert_on_range(A, coadjoint_term(u, apply(A, u), dealiased), tol)


def energy(A: MultiplierSymbol, u: PeriodicField) -> float:
    """1/2 <u, Au> with the normalized measure."""
    return 0.5 * l2_inner(apply(A, u), u)


# ---------------------------------------------------------------------------
# states and trajectories


@dataclass
class GeodesicState:
    phi: Diffeo
    v: PeriodicField
    t: float = 0.0

    @property
    def grid(self) -> GridSpec:
        return self.v.grid

    def eulerian_velocity(self) -> PeriodicField:
        return pull_back(self.v, self.phi)


@dataclass
class EulerState:
    u: PeriodicField
    m: PeriodicField
    t: float = 0.0


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    final_time: float = 0.0
    blowup: str | None = None
    constraint_drift: float = 0.0

    @property
    def completed(self) -> bool:
        return self.blowup is None

    @property
    def last(self):
        return self.states[-1]

    def append(self, t, state):
        self.times.append(t)
        self.states.append(state)


@dataclass
class Diagnostics:
    energy: float
    noether_field: PeriodicField
    noether_drift: float
    mean_momentum: float


def _pack(*fields):
    return np.concatenate([f.half for f in fields])


def _unpack(grid, y, count):
    n = grid.kmax + 1
    return [PeriodicField(grid, y[i * n:(i + 1) * n]) for i in range(count)]


def _rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _adaptive_step(rhs, t, y, h, atol, depth=0, max_depth=12):
    full = _rk4_step(rhs, t, y, h)
    mid = _rk4_step(rhs, t, y, 0.5 * h)
    two = _rk4_step(rhs, t + 0.5 * h, mid, 0.5 * h)
    if np.max(np.abs(full - two)) <= atol or depth >= max_depth:
        return two
    mid = _adaptive_step(rhs, t, y, 0.5 * h, atol, depth + 1, max_depth)
    return _adaptive_step(rhs, t + 0.5 * h, mid, 0.5 * h, atol, depth + 1, max_depth)


def run_rk4(rhs, y0, T, dt, *, on_sample, check=None, cadence=1, adaptive=False,
            atol=1e-10):
    """Fixed-step RK4 from 0 to T; ``on_sample(t, y)`` every ``cadence`` steps.

    ``check(t, y)`` returns an error message to stop early. Returns
    (final_time, blowup message or None).
    """
    if dt <= 0 or T < 0:
        raise ConfigurationError("need dt > 0 and T >= 0")
    steps = max(int(round(T / dt)), 0)
    if steps and abs(steps * dt - T) > 1e-9 * max(T, 1.0):
        steps = int(np.ceil(T / dt))
    h = T / steps if steps else 0.0
    y = y0
    on_sample(0.0, y)
    t = 0.0
    for n in range(1, steps + 1):
        try:
            y_new = _adaptive_step(rhs, t, y, h, atol) if adaptive else _rk4_step(rhs, t, y, h)
        except (NotADiffeomorphism, FloatingPointError, OverflowError) as exc:
            return t, f"step failed at t={t:.6g}: {exc}"
        if not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new)) > 1e12:
            return t, f"non-finite or overflowing coefficients after t={t:.6g}"
        if check is not None:
            msg = check(n * h, y_new)
            if msg:
                return t, msg
        y = y_new
        t = n * h
        if n % cadence == 0 or n == steps:
            on_sample(t, y)
    return t, None


class LagrangianSpray:
    """Right-hand side (f, v) -> (v, S_phi(v)) on packed coefficient vectors."""

    def __init__(self, A: MultiplierSymbol, grid: GridSpec, dealiased: bool = True,
                 eulerian_rhs=None, project=None):
        self.A = A
        self.grid = grid
        self.dealiased = dealiased
        self._rhs = eulerian_rhs or (lambda u: euler_rhs(A, u, dealiased))
        self._project = project
        self._guess = None

    def velocity_field(self, u: PeriodicField) -> PeriodicField:
        """S(u) = u u_x + u_t."""
        return _mul(u, differentiate(u), self.dealiased) + self._rhs(u)

    def __call__(self, t, y):
        f, v = _unpack(self.grid, y, 2)
        phi = Diffeo(f)
        nodes = phi.inverse_nodes(guess=self._guess)
        self._guess = nodes
        u = pull_back(v, phi)
        if self.dealiased:
            u = dealias(u)
        if self._project is not None:
            u = self._project(u)
        s = compose_field(self.velocity_field(u), phi)
        if self.dealiased:
            s = dealias(s)
        return _pack(v, s)


def _monotone_check(grid):
    def check(t, y):
        f = _unpack(grid, y, 2)[0]
        dmin = Diffeo(f, check=False).min_derivative()
        if not dmin > 0.0:
            return f"monotonicity lost near t={t:.6g} (min phi_x={dmin:.3e})"
        return None
    return check


def integrate_lagrangian(A: MultiplierSymbol, state0: GeodesicState, T: float, dt: float,
                         cadence: int = 1, adaptive: bool = False,
                         dealiased: bool = True) -> Trajectory:
    """RK4 on (phi, v) with phi_t = v, v_t = S_phi(v)."""
    grid = state0.grid
    rhs = LagrangianSpray(A, grid, dealiased)
    traj = Trajectory()

    def sample(t, y):
        f, v = _unpack(grid, y, 2)
        traj.append(t, GeodesicState(Diffeo(f, check=False), v, t))

    final, msg = run_rk4(rhs, _pack(state0.phi.displacement, state0.v), T, dt,
                         on_sample=sample, check=_monotone_check(grid), cadence=cadence,
                         adaptive=adaptive)
    traj.final_time = final
    traj.blowup = msg
    return traj


def integrate_euler(A: MultiplierSymbol, u0: PeriodicField, T: float, dt: float,
                    cadence: int = 1, adaptive: bool = False) -> Trajectory:
    """RK4 on the coefficients of u for u_t = -A^{-1}{(Au)_x u + 2(Au)u_x}."""
    grid = u0.grid
    traj = Trajectory()

    def rhs(t, y):
        return euler_rhs(A, PeriodicField(grid, y)).half

    def sample(t, y):
        u = PeriodicField(grid, y)
        traj.append(t, EulerState(u, apply(A, u), t))

    final, msg = run_rk4(rhs, u0.half.copy(), T, dt, on_sample=sample, cadence=cadence,
                         adaptive=adaptive)
    traj.final_time = final
    traj.blowup = msg
    return traj


def noether_field(A: MultiplierSymbol, state: GeodesicState) -> PeriodicField:
    """(m o phi) phi_x^2 with m = A(v o phi^{-1})."""
    m = apply(A, state.eulerian_velocity())
    m_phi = compose_field(m, state.phi)
    return analyze(m_phi.samples() * state.phi.derivative_samples() ** 2, state.grid)


def diagnostics(A: MultiplierSymbol, state: GeodesicState,
                reference: PeriodicField | None = None) -> Diagnostics:
    u = state.eulerian_velocity()
    m = apply(A, u)
    nf = noether_field(A, state)
    drift = 0.0
    if reference is not None:
        drift = float(np.max(np.abs(nf.samples() - reference.samples())))
    return Diagnostics(
        energy=0.5 * metric_inner(A, state.phi, state.v, state.v),
        noether_field=nf,
        noether_drift=drift,
        mean_momentum=m.mean,
    )
