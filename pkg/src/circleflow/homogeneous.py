"""Geodesic flows on Diff/Rot and Diff/PSL(2,R), realized on fixed-point subgroups."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffeo import Diffeo
from .errors import ConfigurationError, ConstraintDrift, DegeneratePoints, RangeViolation
from .geodesic import (GeodesicState, LagrangianSpray, Trajectory, _monotone_check, _pack,
                       _unpack, coadjoint_term, run_rk4)
from .multiplier import MultiplierSymbol, apply
from .spectral import GridSpec, PeriodicField, differentiate, l2_inner, synthesize

REPROJECT_TOL = 1e-11
DRIFT_LIMIT = 1e-9


@dataclass(frozen=True)
class Constraint:
    kind: str
    points: tuple

    def __post_init__(self):
        expected = {"fix1": 1, "fix3": 3}.get(self.kind)
        if expected is None:
            raise ConfigurationError(f"unknown constraint kind {self.kind!r}")
        pts = tuple(float(p) % (2.0 * np.pi) for p in self.points)
        if len(pts) != expected:
            raise ConfigurationError(f"{self.kind} needs {expected} point(s), got {len(pts)}")
        object.__setattr__(self, "points", pts)
        if len(set(np.round(pts, 14))) != len(pts):
            raise DegeneratePoints(f"constraint points not distinct: {pts}")
        if not np.isfinite(self.condition_number) or self.condition_number > 1e12:
            raise DegeneratePoints(f"interpolation matrix singular at {pts}")

    @classmethod
    def fix1(cls, x0: float = 0.0) -> "Constraint":
        return cls("fix1", (x0,))

    @classmethod
    def fix3(cls, points=(0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)) -> "Constraint":
        return cls("fix3", tuple(points))

    @property
    def kernel_wavenumbers(self) -> tuple:
        return (0,) if self.kind == "fix1" else (0, 1)

    def basis_values(self, x) -> np.ndarray:
        """Columns 1 (and cos, sin for fix3) evaluated at x."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        cols = [np.ones_like(x)]
        if self.kind == "fix3":
            cols += [np.cos(x), np.sin(x)]
        return np.stack(cols, axis=1)

    @property
    def matrix(self) -> np.ndarray:
        return self.basis_values(self.points)

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def kernel_basis(self, grid: GridSpec) -> list:
        out = [PeriodicField.constant(grid, 1.0)]
        if self.kind == "fix3":
            out += [PeriodicField.trig(grid, cos={1: 1.0}), PeriodicField.trig(grid, sin={1: 1.0})]
        return out

    def values_at_points(self, u: PeriodicField) -> np.ndarray:
        return synthesize(u, np.array(self.points))

    def drift(self, u: PeriodicField) -> float:
        return float(np.max(np.abs(self.values_at_points(u))))


def _basis_field(c: Constraint, grid: GridSpec, coeffs) -> PeriodicField:
    half = np.zeros(grid.kmax + 1, dtype=np.complex128)
    half[0] = coeffs[0]
    if c.kind == "fix3":
        # a cos x + b sin x  ->  coefficient (a - ib)/2 at k = 1
        half[1] = 0.5 * (coeffs[1] - 1j * coeffs[2])
    return PeriodicField(grid, half)


def project_to_fixed(u: PeriodicField, c: Constraint) -> PeriodicField:
    """Subtract the kernel-basis combination that interpolates u at the points."""
    coeffs = np.linalg.solve(c.matrix, c.values_at_points(u))
    return u - _basis_field(c, u.grid, coeffs)


def constrained_invert(A: MultiplierSymbol, m: PeriodicField, c: Constraint,
                       tol: float = 1e-10) -> PeriodicField:
    """Solve A u = m with u vanishing at the constraint points.

    m must carry no content on the kernel modes of the constraint.
    """
    vals = A.values(m.grid.kmax)
    kern = np.zeros(m.grid.kmax + 1, dtype=bool)
    kern[list(c.kernel_wavenumbers)] = True
    scale = float(np.sqrt(np.sum(np.abs(m.half) ** 2)))
    for k in np.nonzero(kern)[0]:
        if abs(m.half[k]) > tol * max(scale, 1e-300):
            raise RangeViolation(int(k), float(abs(m.half[k])), tol)
    free = ~kern
    if np.any(vals[free] == 0):
        bad = int(np.nonzero(free & (vals == 0))[0][0])
        raise ConfigurationError(f"symbol vanishes at k={bad}, outside the constraint kernel")
    half = np.zeros_like(m.half)
    half[free] = m.half[free] / vals[free]
    return project_to_fixed(PeriodicField(m.grid, half), c)


def constrained_euler_rhs(A: MultiplierSymbol, u: PeriodicField, c: Constraint,
                          tol: float = 1e-10, dealiased: bool = True) -> PeriodicField:
    scale = max(float(np.max(np.abs(u.samples()))), 1.0)
    if c.drift(u) > 1e-10 * scale:
        raise ConfigurationError(f"state violates the constraint by {c.drift(u):.3e}")
    return -constrained_invert(A, coadjoint_term(u, apply(A, u), dealiased), c, tol)


def _exact_product(a: PeriodicField, b: PeriodicField) -> PeriodicField:
    # coefficient convolution, truncated back to |k| <= K (no aliasing, no FFT roundoff)
    K = a.grid.kmax
    full = np.convolve(a.coeffs, b.coeffs)  # index 0 <-> k = -2K
    return PeriodicField(a.grid, full[2 * K: 3 * K + 1])


def verify_equivariance(A: MultiplierSymbol, w: PeriodicField, u: PeriodicField) -> float:
    """L2 size of A ad_w u - ad*_w A u over |k| <= K - 2.

    ad_w u = w_x u - w u_x and ad*_w m = -(w m_x + 2 w_x m); the residual is zero
    for every multiplier when w is constant.
    """
    au = apply(A, u)
    lhs = apply(A, _exact_product(differentiate(w), u) - _exact_product(w, differentiate(u)))
    rhs = -(_exact_product(w, differentiate(au)) + 2.0 * _exact_product(differentiate(w), au))
    diff = (lhs - rhs).half.copy()
    diff[u.grid.kmax - 1:] = 0.0
    r = PeriodicField(u.grid, diff)
    return float(np.sqrt(max(l2_inner(r, r), 0.0)))


def constrained_energy(A: MultiplierSymbol, u: PeriodicField) -> float:
    return 0.5 * l2_inner(apply(A, u), u)


def integrate_constrained(A: MultiplierSymbol, c: Constraint, u0: PeriodicField, T: float,
                          dt: float, cadence: int = 1, phi0: Diffeo | None = None,
                          adaptive: bool = False) -> Trajectory:
    """Lagrangian RK4 with the constrained inverse; (phi, v) re-projected on drift."""
    grid = u0.grid
    phi0 = phi0 or Diffeo.identity(grid)
    if c.drift(u0) > 1e-10 or c.drift(phi0.displacement) > 1e-10:
        raise ConfigurationError("initial data must vanish at the constraint points")
    rhs = LagrangianSpray(A, grid, eulerian_rhs=lambda u: constrained_euler_rhs(A, u, c),
                          project=lambda u: project_to_fixed(u, c))
    traj = Trajectory()
    mono = _monotone_check(grid)
    n = grid.kmax + 1

    def check(t, y):
        msg = mono(t, y)
        if msg:
            return msg
        f, v = _unpack(grid, y, 2)
        drift = max(c.drift(f), c.drift(v))
        if drift > REPROJECT_TOL:
            f, v = project_to_fixed(f, c), project_to_fixed(v, c)
            y[:n], y[n:] = f.half, v.half
            drift = max(c.drift(f), c.drift(v))
            if drift > DRIFT_LIMIT:
                raise ConstraintDrift(f"drift {drift:.3e} persists after re-projection at t={t:.6g}")
        traj.constraint_drift = max(traj.constraint_drift, drift)
        return None

    def sample(t, y):
        f, v = _unpack(grid, y, 2)
        traj.append(t, GeodesicState(Diffeo(f, check=False), v, t))

    final, msg = run_rk4(rhs, _pack(phi0.displacement, u0), T, dt, on_sample=sample,
                         check=check, cadence=cadence, adaptive=adaptive)
    traj.final_time = final
    traj.blowup = msg
    return traj
