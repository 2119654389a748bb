"""Exponential map at the identity, its local inverse by shooting, and path lengths."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffeo import Diffeo, metric_inner
from .errors import ConfigurationError, NoConvergence, OutsideDomain
from .geodesic import GeodesicState, integrate_lagrangian
from .multiplier import MultiplierSymbol
from .spectral import PeriodicField, sobolev_norm

DEFAULT_DT = 0.05
NEWTON_MODES = 16


@dataclass
class PolarCoords:
    rho: float
    w: PeriodicField | None

    def __post_init__(self):
        if self.rho < 0:
            raise ConfigurationError("rho must be nonnegative")


def exp_flow(A: MultiplierSymbol, v0: PeriodicField, T: float = 1.0, dt: float = DEFAULT_DT,
             cadence: int = 1):
    """Geodesic through id with initial velocity v0, sampled every ``cadence`` steps."""
    traj = integrate_lagrangian(A, GeodesicState(Diffeo.identity(v0.grid), v0), T, dt,
                                cadence=cadence)
    if not traj.completed:
        raise OutsideDomain(f"flow stopped before t={T}: {traj.blowup}", traj.final_time)
    return traj


def exp_id(A: MultiplierSymbol, v0: PeriodicField, dt: float = DEFAULT_DT) -> Diffeo:
    """Time-one map of the geodesic flow from (id, v0)."""
    if not np.any(v0.half):
        return Diffeo.identity(v0.grid)
    steps = max(int(round(1.0 / dt)), 1)
    return exp_flow(A, v0, 1.0, dt, cadence=steps).last.phi


# ---------------------------------------------------------------------------
# shooting


def _to_real(half: np.ndarray, kmax: int) -> np.ndarray:
    return np.concatenate([[half[0].real], half[1:kmax + 1].real, half[1:kmax + 1].imag])


def _from_real(x: np.ndarray, kmax: int, size: int) -> np.ndarray:
    half = np.zeros(size, dtype=np.complex128)
    half[0] = x[0]
    half[1:kmax + 1] = x[1:kmax + 1] + 1j * x[kmax + 1:]
    return half


class _Shooter:
    def __init__(self, A, target: Diffeo, kn: int, dt: float):
        self.A = A
        self.grid = target.grid
        self.kn = kn
        self.dt = dt
        self.target = _to_real(target.displacement.half, self.grid.kmax)

    def field(self, x) -> PeriodicField:
        return PeriodicField(self.grid, _from_real(x, self.kn, self.grid.kmax + 1))

    def residual(self, x) -> np.ndarray:
        phi = exp_id(self.A, self.field(x), self.dt)
        return _to_real(phi.displacement.half, self.grid.kmax) - self.target

    def jacobian(self, x, eps: float = 1e-6) -> np.ndarray:
        cols = []
        for j in range(x.size):
            e = np.zeros_like(x)
            e[j] = eps
            cols.append((self.residual(x + e) - self.residual(x - e)) / (2.0 * eps))
        return np.stack(cols, axis=1)


def log_map(A: MultiplierSymbol, phi_target: Diffeo, v_init: PeriodicField | None = None,
            max_iter: int = 30, tol: float = 1e-12, dt: float = DEFAULT_DT,
            newton_modes: int | None = None) -> PeriodicField:
    """Initial velocity v with exp_id(v) = phi_target, by damped Gauss-Newton.

    The unknown is restricted to |k| <= min(K, 16). The finite-difference Jacobian
    is reused while each step cuts the residual at least in half and refreshed
    otherwise. Raises NoConvergence when the target looks outside the normal
    neighbourhood.
    """
    grid = phi_target.grid
    kn = min(grid.kmax, NEWTON_MODES if newton_modes is None else newton_modes)
    shoot = _Shooter(A, phi_target, kn, dt)
    start = phi_target.displacement if v_init is None else v_init
    x = _to_real(start.half, kn)
    try:
        r = shoot.residual(x)
    except OutsideDomain as exc:
        raise NoConvergence(f"initial guess leaves the chart: {exc}", np.inf, start) from exc
    res = float(np.linalg.norm(r))
    jac, fresh = None, False
    for _ in range(max_iter):
        if res <= tol:
            return shoot.field(x)
        if jac is None:
            jac, fresh = shoot.jacobian(x), True
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam, accepted = 1.0, False
        for _ in range(9):  # full step plus up to 8 halvings
            try:
                r_new = shoot.residual(x + lam * step)
            except OutsideDomain:
                lam *= 0.5
                continue
            res_new = float(np.linalg.norm(r_new))
            if res_new ** 2 <= (1.0 - 1e-4 * lam) * res ** 2:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if not fresh:
                jac = None  # stale chord: refresh before giving up
                continue
            break
        fresh = False
        if res_new > 0.5 * res:
            jac = None
        x, r, res = x + lam * step, r_new, res_new
    if res <= tol:
        return shoot.field(x)
    raise NoConvergence(f"outside normal neighbourhood: residual {res:.3e} > {tol:.1e}",
                        res, shoot.field(x))


def polar_coords(A: MultiplierSymbol, s: float, phi: Diffeo, **log_kwargs) -> PolarCoords:
    v = log_map(A, phi, **log_kwargs)
    rho = sobolev_norm(v, s)
    if rho == 0.0:
        return PolarCoords(0.0, None)
    return PolarCoords(rho, v * (1.0 / rho))


def path_length(A: MultiplierSymbol, path, velocities, times=None,
                rtol: float = 5e-2, atol: float = 1e-8) -> float:
    """Trapezoid rule for the integral of sqrt(<phi_t, phi_t>_phi).

    The velocities must match the trapezoid-averaged finite difference of the
    path displacements within ``atol + rtol * max|phi_t|``.
    """
    path, velocities = list(path), list(velocities)
    if len(path) != len(velocities) or len(path) < 2:
        raise ConfigurationError("path and velocities need equal length >= 2")
    t = np.linspace(0.0, 1.0, len(path)) if times is None else np.asarray(times, dtype=float)
    scale = max(float(np.max(np.abs(v.samples()))) for v in velocities)
    for i in range(len(path) - 1):
        h = t[i + 1] - t[i]
        fd = (path[i + 1].displacement.samples() - path[i].displacement.samples()) / h
        avg = 0.5 * (velocities[i].samples() + velocities[i + 1].samples())
        err = float(np.max(np.abs(fd - avg)))
        if err > atol + rtol * scale:
            raise ConfigurationError(
                f"velocity inconsistent with path between samples {i} and {i + 1} (err {err:.3e})")
    speed = [np.sqrt(max(metric_inner(A, p, v, v), 0.0)) for p, v in zip(path, velocities)]
    return float(np.trapezoid(speed, t))
