import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circleflow.diffeo import (Diffeo, compose_field, conjugate_apply, invert_diffeo,
                               metric_inner, pull_back)
from circleflow.errors import NotADiffeomorphism
from circleflow.multiplier import apply, ch, clm, hs, lambda_2s, wp
from circleflow.spectral import (GridSpec, PeriodicField, random_field, rotate, sobolev_norm,
                                 synthesize)


def sin_diffeo(grid, a):
    return Diffeo(PeriodicField.trig(grid, sin={1: a}))


def near_id(grid, rng, amp=0.05, band=6):
    return Diffeo(random_field(grid, rng, band, decay=2.0, amplitude=amp))


def test_monotonicity_enforced(grid64):
    with pytest.raises(NotADiffeomorphism):
        sin_diffeo(grid64, 1.2)
    assert sin_diffeo(grid64, 0.9).min_derivative() == pytest.approx(0.1, abs=1e-3)


def test_compose_identity_and_rotation(grid64, rng):
    v = random_field(grid64, rng, 20)
    out = compose_field(v, Diffeo.identity(grid64))
    assert np.max(np.abs(out.half - v.half)) < 1e-13
    rot = compose_field(v, Diffeo.rotation(grid64, 0.3))
    np.testing.assert_allclose(rot.half, rotate(v, 0.3).half, atol=1e-13)


def test_compose_against_fine_evaluation(grid64):
    phi = sin_diffeo(grid64, 0.1)
    cos = PeriodicField.trig(grid64, cos={1: 1.0})
    out = compose_field(cos, phi)
    fine = GridSpec(256).nodes
    exact = np.cos(fine + 0.1 * np.sin(fine))
    assert np.max(np.abs(out.samples_on(GridSpec(256)) - exact)) < 1e-10


def test_invert_examples(grid64):
    ident = invert_diffeo(Diffeo.identity(grid64))
    assert np.max(np.abs(ident.displacement.half)) < 1e-14
    inv = invert_diffeo(Diffeo.rotation(grid64, 0.4))
    assert inv.displacement.mean == pytest.approx(-0.4, abs=1e-12)
    phi = sin_diffeo(grid64, 0.2)
    inv = invert_diffeo(phi)
    y = inv.node_images()
    assert np.max(np.abs(phi(y) - grid64.nodes)) <= 1e-11
    back = invert_diffeo(inv)
    assert phi.sup_distance(back) < 1e-9


def test_group_action(grid64, rng):
    v = random_field(grid64, rng, 6, decay=2.0)
    phi, psi = near_id(grid64, rng), near_id(grid64, rng)
    lhs = compose_field(compose_field(v, phi), psi)
    rhs = compose_field(v, phi.compose(psi))
    assert np.max(np.abs(lhs.samples() - rhs.samples())) < 1e-9


def test_pull_back_methods_agree(rng):
    grid = GridSpec(128)
    v = random_field(grid, rng, 8, decay=2.0)
    phi = near_id(grid, rng)
    a, b = pull_back(v, phi, "invert"), pull_back(v, phi, "solve")
    assert np.max(np.abs(a.samples() - b.samples())) < 1e-9
    assert np.max(np.abs(compose_field(a, phi).samples() - v.samples())) < 1e-9


@pytest.mark.parametrize("A", [ch(), wp(), clm()], ids=lambda A: A.name)
def test_conjugate_apply_identity_and_rotation(A, grid64, rng):
    v = random_field(grid64, rng, 12)
    ref = apply(A, v)
    for phi in (Diffeo.identity(grid64), Diffeo.rotation(grid64, 0.9)):
        out = conjugate_apply(A, phi, v)
        assert np.max(np.abs(out.half - ref.half)) < 1e-12 * np.max(np.abs(ref.half))


def test_metric_examples(grid64, rng):
    cos = PeriodicField.trig(grid64, cos={1: 1.0})
    assert metric_inner(ch(), Diffeo.identity(grid64), cos, cos) == pytest.approx(
        sobolev_norm(cos, 1) ** 2, abs=1e-14)
    A = lambda_2s(0.75)
    v, w = random_field(grid64, rng, 6, decay=2), random_field(grid64, rng, 6, decay=2)
    phi = near_id(grid64, rng)
    ident = metric_inner(A, Diffeo.identity(grid64), v, w)
    moved = metric_inner(A, phi, compose_field(v, phi), compose_field(w, phi))
    assert moved == pytest.approx(ident, abs=1e-8)
    assert metric_inner(A, phi, v, w) == pytest.approx(metric_inner(A, phi, w, v), abs=1e-10)


def test_positive_definite(grid64, rng):
    phi = near_id(grid64, rng)
    for _ in range(5):
        xi = random_field(grid64, rng, 8, decay=2.0)
        assert metric_inner(ch(), phi, xi, xi) > 0


def test_composition_norm_envelope(grid64):
    # ||v o phi||_{H^rho} / ||v||_{H^rho} over random v, fixed phi: recorded envelope
    rng = np.random.default_rng(9)
    phi = sin_diffeo(grid64, 0.3)
    ratios = []
    for _ in range(50):
        v = random_field(grid64, rng, 8, decay=2.0)
        ratios.append(sobolev_norm(compose_field(v, phi), 1.0) / sobolev_norm(v, 1.0))
    assert max(ratios) < 3.0 and min(ratios) > 0.3


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.3, 0.3), st.floats(0.0, 6.0))
def test_inverse_residual_property(a, b, shift):
    grid = GridSpec(32)
    phi = Diffeo(PeriodicField.trig(grid, sin={1: a}, cos={2: b / 2}, mean=shift))
    y = phi.inverse_nodes()
    assert np.max(np.abs(y + synthesize(phi.displacement, y) - grid.nodes)) <= 1e-12
