"""Periodic fields on the circle of length 2*pi as truncated Fourier series.

Convention: e_k(x) = exp(ikx), u_hat(k) = (1/2pi) int_0^{2pi} u e^{-ikx} dx.
A grid of N points resolves modes |k| <= K = N/2 - 1; the Nyquist mode is
always zero. Only the non-negative half of the spectrum is stored, so
Hermitian symmetry holds by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConfigurationError, ConsistencyError, DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid x_j = 2*pi*j/N on the circle."""

    n_points: int

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 8 or n % 2:
            raise ConfigurationError(f"n_points must be an even integer >= 8, got {n!r}")

    @property
    def period(self) -> float:
        return TWO_PI

    @property
    def kmax(self) -> int:
        return self.n_points // 2 - 1

    @property
    def dealias_cutoff(self) -> int:
        """Largest mode kept by the 2/3 rule."""
        return self.n_points // 3

    @cached_property
    def nodes(self) -> np.ndarray:
        x = TWO_PI * np.arange(self.n_points) / self.n_points
        x.setflags(write=False)
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.arange(self.kmax + 1)
        k.setflags(write=False)
        return k

    def refined(self, factor: int) -> "GridSpec":
        return GridSpec(self.n_points * factor)


class PeriodicField:
    """Real field stored by its coefficients u_hat(k), k = 0..K."""

    __slots__ = ("grid", "_half")

    def __init__(self, grid: GridSpec, half):
        half = np.array(half, dtype=np.complex128)
        if half.shape != (grid.kmax + 1,):
            raise ConfigurationError(
                f"expected {grid.kmax + 1} coefficients for N={grid.n_points}, got {half.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(half))))
        if abs(half[0].imag) > 1e-10 * scale:
            raise ConsistencyError(f"mean coefficient has imaginary part {half[0].imag:.3e}")
        half[0] = half[0].real
        half.setflags(write=False)
        self.grid = grid
        self._half = half

    # construction -----------------------------------------------------

    @classmethod
    def zeros(cls, grid: GridSpec) -> "PeriodicField":
        return cls(grid, np.zeros(grid.kmax + 1, dtype=np.complex128))

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "PeriodicField":
        half = np.zeros(grid.kmax + 1, dtype=np.complex128)
        half[0] = value
        return cls(grid, half)

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: dict) -> "PeriodicField":
        """Build from {k: u_hat(k)} with k >= 0; negative modes follow by symmetry."""
        half = np.zeros(grid.kmax + 1, dtype=np.complex128)
        for k, value in modes.items():
            k = int(k)
            if k < 0:
                k, value = -k, np.conj(value)
            if k > grid.kmax:
                raise ConfigurationError(f"mode {k} outside band |k| <= {grid.kmax}")
            half[k] += value
        return cls(grid, half)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "PeriodicField":
        return analyze(np.asarray(func(grid.nodes), dtype=np.float64), grid)

    @classmethod
    def trig(cls, grid: GridSpec, cos=None, sin=None, mean=0.0) -> "PeriodicField":
        """sum_k a_k cos(kx) + b_k sin(kx) + mean, from {k: a_k} and {k: b_k}."""
        half = np.zeros(grid.kmax + 1, dtype=np.complex128)
        half[0] = mean
        for k, a in (cos or {}).items():
            half[int(k)] += 0.5 * a
        for k, b in (sin or {}).items():
            half[int(k)] += -0.5j * b
        return cls(grid, half)

    # views ------------------------------------------------------------

    @property
    def half(self) -> np.ndarray:
        return self._half

    @property
    def coeffs(self) -> np.ndarray:
        """Full coefficient vector ordered k = -K..K."""
        h = self._half
        return np.concatenate([np.conj(h[:0:-1]), h])

    def coef(self, k: int) -> complex:
        k = int(k)
        if abs(k) > self.grid.kmax:
            return 0j
        return complex(self._half[k]) if k >= 0 else complex(np.conj(self._half[-k]))

    @property
    def mean(self) -> float:
        return float(self._half[0].real)

    def samples(self) -> np.ndarray:
        return _to_samples(self._half, self.grid.n_points)

    def samples_on(self, grid: GridSpec) -> np.ndarray:
        """Grid values on a finer grid by zero padding."""
        if grid.n_points < self.grid.n_points:
            raise ConfigurationError("target grid must not be coarser")
        return _to_samples(self._half, grid.n_points)

    def band(self, rel_tol: float = 1e-14) -> int:
        """Largest k with |u_hat(k)| above rel_tol times the max coefficient."""
        mag = np.abs(self._half)
        top = mag.max()
        if top == 0.0:
            return 0
        idx = np.nonzero(mag > rel_tol * top)[0]
        return int(idx[-1])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self._half)))

    # arithmetic -------------------------------------------------------

    def _check(self, other: "PeriodicField"):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            self._check(other)
            return PeriodicField(self.grid, self._half + other._half)
        if np.isscalar(other):
            half = self._half.copy()
            half[0] += other
            return PeriodicField(self.grid, half)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PeriodicField):
            self._check(other)
            return PeriodicField(self.grid, self._half - other._half)
        if np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return PeriodicField(self.grid, -self._half)

    def __mul__(self, other):
        if isinstance(other, PeriodicField):
            return product(self, other)
        if np.isscalar(other) and np.isreal(other):
            return PeriodicField(self.grid, self._half * float(np.real(other)))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return PeriodicField(self.grid, self._half / float(other))
        return NotImplemented

    def __repr__(self):
        return f"PeriodicField(N={self.grid.n_points}, band={self.band()})"


def _to_samples(half: np.ndarray, n: int) -> np.ndarray:
    spec = np.zeros(n // 2 + 1, dtype=np.complex128)
    spec[: half.shape[0]] = half
    return np.fft.irfft(spec * n, n=n)


def analyze(samples, grid: GridSpec | None = None) -> PeriodicField:
    """Discrete Fourier coefficients of grid samples; Nyquist mode dropped."""
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise ConfigurationError("samples must be one-dimensional")
    if np.iscomplexobj(samples):
        raise ConfigurationError("samples must be real")
    if grid is None:
        grid = GridSpec(int(samples.shape[0]))
    elif samples.shape[0] != grid.n_points:
        raise ConfigurationError(
            f"got {samples.shape[0]} samples for a grid of {grid.n_points} points"
        )
    spec = np.fft.rfft(samples.astype(np.float64)) / grid.n_points
    return PeriodicField(grid, spec[: grid.kmax + 1])


def synthesize(u: PeriodicField, points) -> np.ndarray:
    """Evaluate the truncated series at arbitrary points by direct summation."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    scalar = points.ndim == 0
    pts = np.atleast_1d(points)
    half = u.half
    scale = max(float(np.max(np.abs(half))), 1e-300)
    if abs(half[0].imag) > 1e-10 * scale:
        raise ConsistencyError("imaginary residue above 1e-10 relative")
    out = kernels.eval_series(np.ascontiguousarray(half), pts, 0)
    return float(out[0]) if scalar else out


def synthesize_derivative(u: PeriodicField, points, order: int = 1) -> np.ndarray:
    pts = np.ascontiguousarray(np.atleast_1d(points), dtype=np.float64)
    return kernels.eval_series(np.ascontiguousarray(u.half), pts, order)


def differentiate(u: PeriodicField, order: int = 1) -> PeriodicField:
    return PeriodicField(u.grid, u.half * (1j * u.grid.wavenumbers) ** order)


def sobolev_norm(u: PeriodicField, q: float) -> float:
    """(sum_k (1+k^2)^q |u_hat(k)|^2)^(1/2) over the truncation band."""
    k = u.grid.wavenumbers
    w = (1.0 + k * k) ** q * np.abs(u.half) ** 2
    return float(np.sqrt(w[0] + 2.0 * w[1:].sum()))


def fourier_seminorm(u: PeriodicField, sigma: float) -> float:
    """(sum_{k != 0} |k|^{2 sigma} |u_hat(k)|^2)^(1/2)."""
    k = u.grid.wavenumbers[1:]
    return float(np.sqrt(2.0 * np.sum(k ** (2.0 * sigma) * np.abs(u.half[1:]) ** 2)))


def l2_inner(u: PeriodicField, v: PeriodicField) -> float:
    """Normalized pairing (1/2pi) int u v dx, evaluated on coefficients."""
    a, b = u.half, v.half
    return float((a[0] * np.conj(b[0])).real + 2.0 * np.sum(a[1:] * np.conj(b[1:])).real)


def gagliardo_seminorm(u: PeriodicField, sigma: float, refine: int = 4) -> float:
    """Midpoint tensor quadrature of the W^{sigma,2} Gagliardo double integral.

    |x - y| is the arc distance; diagonal cells are excluded.
    """
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")
    fine = u.grid.refined(refine)
    w = np.ascontiguousarray(u.samples_on(fine))
    h = TWO_PI / fine.n_points
    return float(np.sqrt(kernels.gagliardo_sum(w, float(sigma)) * h * h))


def truncate(u: PeriodicField, kmax: int) -> PeriodicField:
    half = u.half.copy()
    half[kmax + 1 :] = 0.0
    return PeriodicField(u.grid, half)


def dealias(u: PeriodicField) -> PeriodicField:
    return truncate(u, u.grid.dealias_cutoff)


def product(u: PeriodicField, v: PeriodicField, dealiased: bool = False) -> PeriodicField:
    """Pointwise product on the grid, optionally followed by 2/3-rule truncation."""
    if u.grid != v.grid:
        raise ConfigurationError("fields live on different grids")
    w = analyze(u.samples() * v.samples(), u.grid)
    return dealias(w) if dealiased else w


def rotate(u: PeriodicField, s: float) -> PeriodicField:
    """x -> u(x + s); coefficients pick up the phase e^{iks}."""
    return PeriodicField(u.grid, u.half * np.exp(1j * u.grid.wavenumbers * s))


def resample(u: PeriodicField, grid: GridSpec) -> PeriodicField:
    """Move a field to another grid, truncating modes the target cannot hold."""
    half = np.zeros(grid.kmax + 1, dtype=np.complex128)
    n = min(grid.kmax, u.grid.kmax) + 1
    half[:n] = u.half[:n]
    return PeriodicField(grid, half)


def random_field(grid: GridSpec, rng: np.random.Generator, band: int, decay: float = 1.0,
                 amplitude: float = 1.0, mean: bool = True) -> PeriodicField:
    """Random band-limited field with coefficients ~ amplitude / (1+k)^decay."""
    if band > grid.kmax:
        raise ConfigurationError(f"band {band} exceeds K={grid.kmax}")
    k = np.arange(band + 1)
    half = np.zeros(grid.kmax + 1, dtype=np.complex128)
    raw = rng.standard_normal(band + 1) + 1j * rng.standard_normal(band + 1)
    half[: band + 1] = amplitude * raw / (1.0 + k) ** decay
    half[0] = half[0].real if mean else 0.0
    return PeriodicField(grid, half)
