import math

import numpy as np
import pytest
import sympy as sp

from circleflow.errors import ConfigurationError, RangeViolation, UnsupportedOrder
from circleflow.multiplier import (apply, builtin, ch, clm, frac, hilbert, hs, invert_on_range,
                                   kernel_in_band, lambda_2s, load_symbol_table, nth_derivative,
                                   order_bound_check, parse_operator, symbol_condition_check, wp)
from circleflow.spectral import PeriodicField, differentiate, l2_inner, random_field, rotate


def test_apply_examples(grid64):
    cos = PeriodicField.trig(grid64, cos={1: 1.0})
    np.testing.assert_allclose(apply(ch(), cos).half, 2 * cos.half)
    assert not np.any(apply(hs(), PeriodicField.constant(grid64, 4.0)).half)
    s3 = PeriodicField.trig(grid64, sin={3: 1.0})
    np.testing.assert_allclose(apply(clm(), s3).half, 3 * s3.half)


def test_invert_examples(grid64):
    cos = PeriodicField.trig(grid64, cos={1: 1.0})
    np.testing.assert_allclose(invert_on_range(ch(), cos * 2.0).half, cos.half)
    np.testing.assert_allclose(invert_on_range(hs(), cos).half, cos.half)
    with pytest.raises(RangeViolation) as info:
        invert_on_range(hs(), PeriodicField.constant(grid64, 1.0))
    assert info.value.mode == 0


def test_builtin_symbols_values():
    k = np.arange(-4, 5)
    np.testing.assert_allclose(wp()(k), np.abs(k) * (k * k - 1))
    np.testing.assert_allclose(frac(1.5)(k), np.abs(k) ** 1.5 + (k == 0))
    np.testing.assert_allclose(lambda_2s(0.75)(k), (1 + k * k) ** 0.75)
    assert wp()(2) == 6
    for P in (ch(), hs(), clm(), wp(), frac(1.0), lambda_2s(0.5)):
        np.testing.assert_allclose(P(k), P(-k))
        assert np.allclose(P.eval_real(k.astype(float)), P(k))


def test_hilbert_convention(grid64, rng):
    u = random_field(grid64, rng, 20)
    lhs = apply(hilbert(), differentiate(u))
    np.testing.assert_allclose(lhs.half, apply(clm(), u).half, atol=1e-14)


def test_kernel_in_band():
    assert kernel_in_band(wp(), 10) == [0, 1]
    assert kernel_in_band(hs(), 10) == [0]
    assert kernel_in_band(ch(), 10) == []


def test_linearity_commutativity_symmetry(grid64, rng):
    u, v = random_field(grid64, rng, 25), random_field(grid64, rng, 25)
    P, Q = lambda_2s(0.75), wp()
    lin = apply(P, u * 2.0 + v * -3.0) - (apply(P, u) * 2.0 + apply(P, v) * -3.0)
    assert np.max(np.abs(lin.half)) < 1e-10
    comm = apply(P, apply(Q, u)) - apply(Q, apply(P, u))
    assert np.max(np.abs(comm.half)) <= 1e-13 * np.max(np.abs(apply(P, apply(Q, u)).half))
    for A in (ch(), clm(), wp(), frac(0.5)):
        assert abs(l2_inner(apply(A, u), v) - l2_inner(u, apply(A, v))) < 1e-11


def test_invert_apply_identity(grid64, rng):
    u = random_field(grid64, rng, 25)
    for A in (ch(), lambda_2s(1.5), frac(2.0)):
        back = invert_on_range(A, apply(A, u))
        assert np.max(np.abs(back.half - u.half)) <= 1e-12 * np.max(np.abs(u.half))
    half = u.half.copy()
    half[:2] = 0
    w = PeriodicField(grid64, half)
    back = invert_on_range(wp(), apply(wp(), w))
    assert np.max(np.abs(back.half - w.half)) <= 1e-12 * np.max(np.abs(w.half))


def test_rotation_equivariance(grid64, rng):
    u = random_field(grid64, rng, 25)
    for A in (ch(), wp(), hilbert()):
        lhs, rhs = rotate(apply(A, u), 0.7).half, apply(A, rotate(u, 0.7)).half
        assert np.max(np.abs(lhs - rhs)) <= 4e-16 * np.max(np.abs(lhs))


def test_order_bound_examples():
    c, ok = order_bound_check(lambda_2s(1.0), 1000)
    assert c == pytest.approx(1.0) and ok
    c, ok = order_bound_check(clm(), 1000)
    assert c <= 1.0 and ok
    _, ok = order_bound_check(hs().with_order(1.0), 1000)
    assert not ok
    with pytest.raises(ConfigurationError):
        order_bound_check(ch(), 0)


def test_nth_derivative_matches_symbolic():
    xi = sp.symbols("xi", real=True)
    for s in (0.5, 1.0, 1.5):
        g = (1 + xi ** 2) ** sp.Rational(str(s))
        for n in range(1, 5):
            f = xi ** (n - 1) * g
            exact = sp.lambdify(xi, sp.diff(f, xi, n), "numpy")
            pts = np.array([-30.0, -2.5, 0.3, 4.0, 70.0])
            num = nth_derivative(sp.lambdify(xi, f, "numpy"), pts, n)
            np.testing.assert_allclose(num, exact(pts), rtol=2e-4, atol=1e-6)


@pytest.mark.parametrize("P", [lambda_2s(0.5), lambda_2s(1.0), lambda_2s(1.5), hs(), clm(), wp()],
                         ids=lambda P: P.name + str(P.params))
def test_symbol_condition_passes(P):
    rep = symbol_condition_check(P, n_max=4)
    assert rep.overall_pass
    assert all(s >= 0 for _, s, _ in rep.per_n)
    assert rep.to_dict()["overall_pass"] is True


def test_symbol_condition_hs_oracle():
    # f_n(xi) = xi^{n+1}, so f_n^{(n)} = (n+1)! xi and the ratio is (n+1)! |xi|/(1+xi^2)^{1/2}
    rep = symbol_condition_check(hs(), n_max=3, xi_max=1e3)
    for n, sup, _ in rep.per_n:
        expected = math.factorial(n + 1) * 1e3 / np.sqrt(1 + 1e6)
        assert sup == pytest.approx(expected, rel=1e-3)


def test_kink_is_noted():
    rep = symbol_condition_check(wp(), n_max=3)
    assert rep.overall_pass
    assert len(rep.notes) == 3 and "xi=0" in rep.notes[0]


def test_symbol_condition_refuses_low_order():
    with pytest.raises(UnsupportedOrder):
        symbol_condition_check(lambda_2s(0.25))
    with pytest.raises(UnsupportedOrder):
        symbol_condition_check(frac(0.5))


def test_parse_operator():
    P = parse_operator("lambda_2s:s=0.75")
    assert P.order_r == 1.5
    assert parse_operator("wp").name == "wp"
    with pytest.raises(ConfigurationError):
        parse_operator("nope")
    with pytest.raises(ConfigurationError):
        parse_operator("lambda_2s:s")
    with pytest.raises(ConfigurationError):
        builtin("ch", s=1.0)


def test_symbol_table(tmp_path, grid32):
    path = tmp_path / "sym.txt"
    lines = ["order 2", "extension cubic", "name tab"] + [f"{k} {1 + k * k}" for k in range(40)]
    path.write_text("\n".join(lines))
    P = load_symbol_table(path)
    u = PeriodicField.trig(grid32, cos={3: 1.0})
    np.testing.assert_allclose(apply(P, u).half, apply(ch(), u).half)
    assert P.eval_real(np.array([2.5]))[0] == pytest.approx(1 + 2.5 ** 2, rel=1e-3)
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 2\n")
    with pytest.raises(ConfigurationError):
        load_symbol_table(bad)
    gap = tmp_path / "gap.txt"
    gap.write_text("order 1\n0 1\n2 3\n")
    with pytest.raises(ConfigurationError):
        load_symbol_table(gap)
