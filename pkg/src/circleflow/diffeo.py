"""Orientation-preserving circle diffeomorphisms phi(x) = x + f(x).

The displacement f is a periodic field, so phi lifts to the universal cover
with phi(x + 2pi) = phi(x) + 2pi. Composition with fields is done by direct
series evaluation at the warped nodes, followed by analysis on the grid.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ConfigurationError, NotADiffeomorphism
from .multiplier import MultiplierSymbol, apply
from .spectral import GridSpec, PeriodicField, analyze, differentiate, synthesize

REFINE = 4


class Diffeo:
    """phi = id + displacement, validated on a 4x refined grid."""

    __slots__ = ("displacement", "_cache")

    def __init__(self, displacement: PeriodicField, check: bool = True):
        self.displacement = displacement
        self._cache = {}
        if check:
            dmin = self.min_derivative()
            if not dmin > 0.0:
                raise NotADiffeomorphism(f"min phi_x = {dmin:.3e} on the refined grid")

    @classmethod
    def identity(cls, grid: GridSpec) -> "Diffeo":
        return cls(PeriodicField.zeros(grid))

    @classmethod
    def rotation(cls, grid: GridSpec, s: float) -> "Diffeo":
        return cls(PeriodicField.constant(grid, s))

    @property
    def grid(self) -> GridSpec:
        return self.displacement.grid

    def min_derivative(self) -> float:
        fine = self.grid.refined(REFINE)
        fx = differentiate(self.displacement).samples_on(fine)
        return float(1.0 + fx.min())

    def node_images(self) -> np.ndarray:
        """phi(x_j) on the lifted line."""
        if "img" not in self._cache:
            self._cache["img"] = self.grid.nodes + self.displacement.samples()
        return self._cache["img"]

    def derivative_samples(self) -> np.ndarray:
        if "dx" not in self._cache:
            self._cache["dx"] = 1.0 + differentiate(self.displacement).samples()
        return self._cache["dx"]

    def __call__(self, points):
        points = np.asarray(points, dtype=np.float64)
        return points + synthesize(self.displacement, points)

    def inverse_nodes(self, tol: float = 1e-12, guess=None) -> np.ndarray:
        """phi^{-1}(x_j) for every node, by safeguarded Newton."""
        key = ("inv", tol)
        if key not in self._cache:
            self._cache[key] = _solve_inverse(self.displacement, self.grid.nodes, tol, guess)
        return self._cache[key]

    def seed_inverse(self, nodes: np.ndarray, tol: float = 1e-12):
        """Warm start for ``inverse_nodes`` (e.g. from the previous time step)."""
        self._cache[("inv", tol)] = _solve_inverse(self.displacement, self.grid.nodes, tol, nodes)

    def compose(self, other: "Diffeo") -> "Diffeo":
        """self o other, as displacement arithmetic: f_other + f_self o other."""
        return Diffeo(other.displacement + compose_field(self.displacement, other))

    def sup_distance(self, other: "Diffeo") -> float:
        return float(np.max(np.abs(self.displacement.samples() - other.displacement.samples())))

    def __repr__(self):
        return f"Diffeo(N={self.grid.n_points}, band={self.displacement.band()})"


def _solve_inverse(f: PeriodicField, targets: np.ndarray, tol: float, guess=None,
                   max_newton: int = 30, max_bisect: int = 200) -> np.ndarray:
    half = np.ascontiguousarray(f.half)
    amp = float(np.sum(np.abs(half[1:])) * 2.0) + 1e-300
    # phi(y) - y ranges within mean +- amp: bracket every root
    lo = targets - f.mean - amp - 1e-12
    hi = targets - f.mean + amp + 1e-12
    if guess is None:
        y = targets - synthesize(f, targets)
    else:
        y = np.array(guess, dtype=np.float64)
    y = np.clip(y, lo, hi)
    done = np.zeros(targets.shape, dtype=bool)
    for _ in range(max_newton):
        val, der = kernels.eval_series_pair(half, np.ascontiguousarray(y))
        g = y + val - targets
        done = np.abs(g) <= tol
        if done.all():
            return y
        lo = np.where(g < 0, np.maximum(lo, y), lo)
        hi = np.where(g > 0, np.minimum(hi, y), hi)
        step = g / (1.0 + der)
        y_new = y - step
        bad = ~np.isfinite(y_new) | (y_new <= lo) | (y_new >= hi) | (1.0 + der <= 0)
        y = np.where(done, y, np.where(bad, 0.5 * (lo + hi), y_new))
    # pure bisection for the stragglers
    for _ in range(max_bisect):
        val = kernels.eval_series(half, np.ascontiguousarray(y), 0)
        g = y + val - targets
        done = np.abs(g) <= tol
        if done.all():
            break
        lo = np.where(g < 0, y, lo)
        hi = np.where(g > 0, y, hi)
        y = np.where(done, y, 0.5 * (lo + hi))
        if np.all(hi - lo < 1e-15 * (1.0 + np.abs(y))):
            break
    return y


def compose_field(v: PeriodicField, phi: Diffeo) -> PeriodicField:
    """v o phi, sampled at phi(x_j) and analyzed."""
    if v.grid != phi.grid:
        raise ConfigurationError("field and diffeo live on different grids")
    return analyze(synthesize(v, phi.node_images()), v.grid)


def invert_diffeo(phi: Diffeo, tol: float = 1e-12) -> Diffeo:
    """phi^{-1} with node residual |phi(phi^{-1}(x_j)) - x_j| <= tol."""
    if phi.min_derivative() <= 0.0:
        raise NotADiffeomorphism("cannot invert: phi_x is not positive")
    y = phi.inverse_nodes(tol)
    inv = Diffeo(analyze(y - phi.grid.nodes, phi.grid), check=False)
    inv._cache["img"] = y
    return inv


def pull_back(v: PeriodicField, phi: Diffeo, method: str = "invert", tol: float = 1e-12) -> PeriodicField:
    """v o phi^{-1}.

    ``invert`` evaluates v at the numerically inverted nodes (the default);
    ``solve`` finds the band-limited w with w(phi(x_j)) = v(x_j) by least squares.
    """
    if method == "invert":
        return analyze(synthesize(v, phi.inverse_nodes(tol)), v.grid)
    if method == "solve":
        grid = v.grid
        k = np.arange(-grid.kmax, grid.kmax + 1)
        mat = np.exp(1j * np.outer(phi.node_images(), k))
        coef, *_ = np.linalg.lstsq(mat, v.samples().astype(np.complex128), rcond=None)
        half = coef[grid.kmax:].copy()
        half[1:] = 0.5 * (half[1:] + np.conj(coef[grid.kmax - 1::-1]))
        half[0] = half[0].real
        return PeriodicField(grid, half)
    raise ConfigurationError(f"unknown pull-back method {method!r}")


def conjugate_apply(P: MultiplierSymbol, phi: Diffeo, v: PeriodicField,
                    method: str = "invert") -> PeriodicField:
    """A_phi v = (P (v o phi^{-1})) o phi."""
    return compose_field(apply(P, pull_back(v, phi, method)), phi)


def metric_inner(A: MultiplierSymbol, phi: Diffeo, xi: PeriodicField, eta: PeriodicField) -> float:
    """<xi, eta>_phi = (1/2pi) int eta (A_phi xi) phi_x dx, on the grid."""
    a_xi = conjugate_apply(A, phi, xi)
    return float(np.mean(eta.samples() * a_xi.samples() * phi.derivative_samples()))
