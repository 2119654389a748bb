"""Multi-symbols p_n of the derivatives of phi -> R_phi P R_phi^{-1}.

With the 2*pi-periodic convention the derivative D has symbol ik, so the
recursions carry the factor ``i`` wherever a unit-period treatment would
carry 2*pi*i.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _pykernels, kernels
from .errors import ConfigurationError, ResolutionError
from .multiplier import MultiplierSymbol, apply
from .spectral import PeriodicField, differentiate, product


@dataclass(frozen=True)
class MultiSymbolTable:
    base_symbol: MultiplierSymbol
    factor: complex = 1j

    def p0(self, k):
        return self.base_symbol.eval_int(k)

    def f_n(self, n: int, k):
        k = np.asarray(k, dtype=np.float64)
        return k ** (n - 1) * self.p0(k)


def p_n_recursive(t: MultiSymbolTable, n: int, modes) -> complex:
    """p_{n+1}(m_0..m_{n+1}) = i[(m_0+..+m_n) p_n(m_0..m_n)
    - sum_{k=0}^{n} m_k p_n(.., m_k + m_{n+1}, ..)], p_0 = p."""
    modes = tuple(int(m) for m in modes)
    if n < 0 or len(modes) != n + 1:
        raise ConfigurationError(f"p_{n} needs {n + 1} modes, got {len(modes)}")

    @lru_cache(maxsize=None)
    def rec(ms):
        if len(ms) == 1:
            return complex(t.p0(ms[0]))
        head, last = ms[:-1], ms[-1]
        total = sum(head) * rec(head)
        for k, mk in enumerate(head):
            shifted = head[:k] + (mk + last,) + head[k + 1:]
            total -= mk * rec(shifted)
        return t.factor * total

    return rec(modes)


def _symbol_table(t: MultiSymbolTable, reach: int, dtype):
    k = np.arange(-reach, reach + 1).astype(dtype)
    return np.asarray(t.p0(k), dtype=dtype)


def _table_dtype(t: MultiSymbolTable):
    return np.longdouble if t.base_symbol.is_real else np.clongdouble


def p_n_recursive_array(t: MultiSymbolTable, n: int, modes: list) -> np.ndarray:
    """Vectorized recursion over integer mode arrays.

    p_0 is read from an extended-precision table, so exact cancellations
    deep in the recursion survive at the double-precision level.
    """
    if len(modes) != n + 1:
        raise ConfigurationError(f"p_{n} needs {n + 1} mode arrays")
    cols = np.broadcast_arrays(*[np.asarray(m, dtype=np.int64) for m in modes])
    shape = cols[0].shape
    rows = np.ascontiguousarray(np.stack([c.ravel() for c in cols], axis=1))
    reach = int(np.abs(rows).sum(axis=1).max()) if rows.size else 0
    table = _symbol_table(t, reach, _table_dtype(t))
    if table.dtype == np.longdouble:
        raw = kernels.multisymbol_recursive(table, reach, rows)
    else:
        raw = _pykernels.multisymbol_recursive(table, reach, rows)
    return (t.factor ** n * raw.astype(np.complex128)).reshape(shape)


def _subset_terms(n):
    # (sign, index subset) for every I in {1..n}
    for size in range(n + 1):
        for subset in itertools.combinations(range(1, n + 1), size):
            yield (-1) ** size, subset


def p_n_closed(t: MultiSymbolTable, n: int, modes) -> complex:
    """factor^n m_0 sum_I (-1)^|I| f_n(m_0 + sum_{j in I} m_j), compensated sum."""
    modes = tuple(int(m) for m in modes)
    if n < 1 or len(modes) != n + 1:
        raise ConfigurationError(f"closed form needs n >= 1 and {n + 1} modes")
    re_terms, im_terms = [], []
    for sign, subset in _subset_terms(n):
        val = complex(t.f_n(n, modes[0] + sum(modes[j] for j in subset)))
        re_terms.append(sign * val.real)
        im_terms.append(sign * val.imag)
    inner = complex(math.fsum(re_terms), math.fsum(im_terms))
    return t.factor ** n * modes[0] * inner


def p_n_closed_array(t: MultiSymbolTable, n: int, modes: list,
                     extended: bool = False) -> np.ndarray:
    """Vectorized closed form; ``modes`` is a list of n+1 integer arrays.

    Neumaier-compensated accumulation over the 2^n subset terms. With
    ``extended`` the f_n values come from a long-double table.
    """
    if n == 0:
        return np.asarray(t.p0(np.asarray(modes[0])), dtype=np.complex128)
    modes = [np.asarray(m, dtype=np.int64) for m in modes]
    m0 = modes[0]
    if extended:
        dtype = _table_dtype(t)
        reach = int(sum(np.max(np.abs(m)) for m in modes))
        k = np.arange(-reach, reach + 1).astype(dtype)
        f_table = k ** (n - 1) * _symbol_table(t, reach, dtype)

        def f(arg):
            return f_table[arg + reach]
    else:
        dtype = np.complex128

        def f(arg):
            return np.asarray(t.f_n(n, arg), dtype=np.complex128)

    shape = np.broadcast(*modes).shape
    total = np.zeros(shape, dtype=dtype)
    comp = np.zeros(shape, dtype=dtype)
    for sign, subset in _subset_terms(n):
        arg = m0 + sum(modes[j] for j in subset) if subset else m0
        term = f(np.broadcast_to(arg, shape)) if sign > 0 else -f(np.broadcast_to(arg, shape))
        s = total + term
        big = np.abs(total) >= np.abs(term)
        comp = comp + np.where(big, (total - s) + term, (term - s) + total)
        total = s
    inner = (total + comp) * m0.astype(dtype)
    return t.factor ** n * inner.astype(np.complex128)


def apply_P_n(t: MultiSymbolTable, n: int, fields) -> PeriodicField:
    """Direct (n+1)-fold convolution sum_{m_0+..+m_n=l} p_n(m) u_0(m_0)..u_n(m_n).

    Inputs must be supported on |k| <= K/(n+1) so the output band is exact.
    """
    fields = list(fields)
    if len(fields) != n + 1:
        raise ConfigurationError(f"P_{n} takes {n + 1} fields, got {len(fields)}")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ConfigurationError("fields live on different grids")
    if n == 0:
        return apply(t.base_symbol, fields[0])
    budget = grid.kmax // (n + 1)
    for idx, f in enumerate(fields):
        scale = float(np.max(np.abs(f.half))) or 1.0
        tail = np.abs(f.half[budget + 1:])
        if tail.size and tail.max() > 1e-13 * scale:
            raise ResolutionError(
                f"field {idx} has content beyond |k| <= {budget} (anti-aliasing budget for n={n})"
            )
    return _convolve(t, n, fields, [budget] * (n + 1))


def _convolve(t: MultiSymbolTable, n: int, fields, bands) -> PeriodicField:
    grid = fields[0].grid
    axes = [np.arange(-b, b + 1) for b in bands]
    coeffs = [np.array([f.coef(k) for k in ax]) for f, ax in zip(fields, axes)]
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    amp = p_n_closed_array(t, n, mesh)
    for axis, c in enumerate(coeffs):
        shape = [1] * (n + 1)
        shape[axis] = c.shape[0]
        amp = amp * c.reshape(shape)
    total = np.broadcast_to(sum(mesh), amp.shape)
    out = np.zeros(grid.kmax + 1, dtype=np.complex128)
    keep = total >= 0
    np.add.at(out, total[keep], amp[keep])
    out[0] = out[0].real
    return PeriodicField(grid, out)


def commutator_P1(P: MultiplierSymbol, u0: PeriodicField, u1: PeriodicField) -> PeriodicField:
    """Operator form ([u_1, P] D) u_0 = u_1 P(D u_0) - P(u_1 D u_0)."""
    du0 = differentiate(u0)
    return product(u1, apply(P, du0)) - apply(P, product(u1, du0))


def recursion_step(t: MultiSymbolTable, n: int, fields) -> PeriodicField:
    """P_{n+1} built from P_n:
    [u_{n+1} D, P_n(., u_1..u_n)] u_0 - sum_k P_n(u_0, .., u_{n+1} D u_k, .., u_n)."""
    fields = list(fields)
    u0, rest, last = fields[0], fields[1:-1], fields[-1]
    out = product(last, differentiate(apply_P_n(t, n, [u0] + rest)))
    out = out - apply_P_n(t, n, [product(last, differentiate(u0))] + rest)
    for k in range(len(rest)):
        moved = list(rest)
        moved[k] = product(last, differentiate(rest[k]))
        out = out - apply_P_n(t, n, [u0] + moved)
    return out
