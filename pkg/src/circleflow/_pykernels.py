"""NumPy versions of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def eval_series(c, y, order=0):
    c = np.asarray(c, dtype=np.complex128)
    y = np.asarray(y, dtype=np.float64)
    k = np.arange(1, c.shape[0])
    w = c[1:]
    if order == 1:
        w = w * (1j * k)
    elif order == 2:
        w = w * (-(k * k))
    acc = np.exp(1j * np.outer(y, k)) @ w
    if order == 0:
        return c[0].real + 2.0 * acc.real
    return 2.0 * acc.real


def eval_series_pair(c, y):
    c = np.asarray(c, dtype=np.complex128)
    y = np.asarray(y, dtype=np.float64)
    k = np.arange(1, c.shape[0])
    phase = np.exp(1j * np.outer(y, k))
    val = c[0].real + 2.0 * (phase @ c[1:]).real
    der = 2.0 * (phase @ (1j * k * c[1:])).real
    return val, der


def gagliardo_sum(w, sigma):
    w = np.asarray(w, dtype=np.float64)
    m = w.shape[0]
    h = 2.0 * np.pi / m
    s = np.arange(1, m)
    d = np.minimum(s * h, 2.0 * np.pi - s * h)
    kern = d ** (-(1.0 + 2.0 * sigma))
    total = 0.0
    for shift, kval in zip(s, kern):
        diff = w - np.roll(w, -shift)
        total += kval * np.dot(diff, diff)
    return float(total)


def multisymbol_recursive(table, reach, modes):
    table = np.asarray(table)
    modes = np.asarray(modes, dtype=np.int64)
    cols = [modes[:, j] for j in range(modes.shape[1])]

    def rec(ms):
        if len(ms) == 1:
            return table[ms[0] + reach]
        head, last = ms[:-1], ms[-1]
        total = sum(head).astype(table.dtype) * rec(head)
        for k, mk in enumerate(head):
            shifted = head[:k] + [mk + last] + head[k + 1:]
            total = total - mk.astype(table.dtype) * rec(shifted)
        return total

    return rec(cols)
