# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror ``circleflow._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, pow, M_PI

cnp.import_array()

# exact phase reseed interval for the e^{iky} recurrence
DEF RESEED = 16


def eval_series(const double complex[::1] c, const double[::1] y, int order=0):
    """Re(c0 + 2 sum_k (ik)^order c_k e^{iky}) at every point of ``y``."""
    cdef Py_ssize_t m = y.shape[0], kmax = c.shape[0] - 1
    cdef Py_ssize_t j, k
    cdef double[::1] out = np.empty(m, dtype=np.float64)
    cdef double complex z, zk, acc, w
    cdef double yj, kk
    for j in range(m):
        yj = y[j]
        z = cos(yj) + 1j * sin(yj)
        zk = 1.0
        acc = 0.0
        for k in range(1, kmax + 1):
            if k % RESEED == 0:
                zk = cos(k * yj) + 1j * sin(k * yj)
            else:
                zk = zk * z
            w = c[k] * zk
            if order == 1:
                w = w * (1j * k)
            elif order == 2:
                w = w * (-(<double>k) * k)
            acc = acc + w
        if order == 0:
            out[j] = c[0].real + 2.0 * acc.real
        else:
            out[j] = 2.0 * acc.real
    return np.asarray(out)


def eval_series_pair(const double complex[::1] c, const double[::1] y):
    """Value and first derivative of the real series in one pass."""
    cdef Py_ssize_t m = y.shape[0], kmax = c.shape[0] - 1
    cdef Py_ssize_t j, k
    cdef double[::1] val = np.empty(m, dtype=np.float64)
    cdef double[::1] der = np.empty(m, dtype=np.float64)
    cdef double complex z, zk, a0, a1, w
    cdef double yj
    for j in range(m):
        yj = y[j]
        z = cos(yj) + 1j * sin(yj)
        zk = 1.0
        a0 = 0.0
        a1 = 0.0
        for k in range(1, kmax + 1):
            if k % RESEED == 0:
                zk = cos(k * yj) + 1j * sin(k * yj)
            else:
                zk = zk * z
            w = c[k] * zk
            a0 = a0 + w
            a1 = a1 + w * (1j * k)
        val[j] = c[0].real + 2.0 * a0.real
        der[j] = 2.0 * a1.real
    return np.asarray(val), np.asarray(der)


def gagliardo_sum(const double[::1] w, double sigma):
    """sum_{i != j} (w_i - w_j)^2 / d_ij^(1 + 2 sigma), d_ij = arc distance."""
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t i, j, s
    cdef double h = 2.0 * M_PI / m
    cdef double total = 0.0, d, diff
    cdef double[::1] kern = np.empty(m, dtype=np.float64)
    for s in range(1, m):
        d = s * h
        if d > M_PI:
            d = 2.0 * M_PI - d
        kern[s] = 1.0 / pow(d, 1.0 + 2.0 * sigma)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            s = j - i
            if s < 0:
                s += m
            diff = w[i] - w[j]
            total += diff * diff * kern[s]
    return total


cdef long double _rec(const long double[::1] table, Py_ssize_t reach,
                      long long* ms, int length) noexcept nogil:
    # factor-free multi-symbol recursion; ms is modified in place and restored
    cdef long double total
    cdef long long s, last, mk
    cdef int k, j
    if length == 1:
        return table[ms[0] + reach]
    last = ms[length - 1]
    s = 0
    for j in range(length - 1):
        s += ms[j]
    total = (<long double>s) * _rec(table, reach, ms, length - 1)
    for k in range(length - 1):
        mk = ms[k]
        if mk == 0:
            continue
        ms[k] = mk + last
        total -= (<long double>mk) * _rec(table, reach, ms, length - 1)
        ms[k] = mk
    return total


def multisymbol_recursive(const long double[::1] table, Py_ssize_t reach,
                          const long long[:, ::1] modes):
    """Recursion R_n over rows of ``modes`` (shape T x (n+1)), p_0 from ``table``.

    ``table[k + reach]`` holds p(k). Returns the factor-free values R_n.
    """
    cdef Py_ssize_t t, rows = modes.shape[0]
    cdef int width = modes.shape[1]
    cdef long long row[16]
    cdef int j
    out_arr = np.empty(rows, dtype=np.longdouble)
    cdef long double[::1] out = out_arr
    if width > 16:
        raise ValueError("at most 15 directions supported")
    with nogil:
        for t in range(rows):
            for j in range(width):
                row[j] = modes[t, j]
            out[t] = _rec(table, reach, row, width)
    return out_arr
