import numpy as np
import pytest

from circleflow.diffeo import Diffeo, compose_field
from circleflow.geodesic import (GeodesicState, ad_transpose, christoffel_B, covariant_derivative,
                                 diagnostics, energy, euler_rhs, integrate_euler,
                                 integrate_lagrangian, spray_S)
from circleflow.multiplier import apply, ch, frac, identity, lambda_2s
from circleflow.spectral import (GridSpec, PeriodicField, differentiate, product, random_field)
from circleflow.verify import metric_compatibility_error


def maxabs(u):
    return float(np.max(np.abs(u.half)))


def exact(a, b):
    return product(a, b, dealiased=False)


@pytest.fixture
def fields(grid64, rng):
    return [random_field(grid64, rng, 8, decay=1.5) for _ in range(3)]


def test_ad_transpose_trivial_cases(grid64, fields):
    u, v, _ = fields
    assert maxabs(ad_transpose(ch(), PeriodicField.zeros(grid64), v)) == 0.0
    expect = 2.0 * exact(v, differentiate(u)) + exact(differentiate(v), u)
    assert maxabs(ad_transpose(identity(), u, v) - expect) < 1e-13


def test_ad_transpose_ch_oracle(grid64):
    cos = PeriodicField.trig(grid64, cos={1: 1.0})
    av = cos * 2.0  # (1 + k^2) at k = 1
    rhs = 2.0 * exact(av, differentiate(cos)) + exact(differentiate(av), cos)
    k = grid64.wavenumbers
    expect = PeriodicField(grid64, rhs.half / (1.0 + k ** 2))
    assert maxabs(ad_transpose(ch(), cos, cos) - expect) < 1e-14


def test_christoffel_symmetry_and_oracle(grid64, fields):
    u, v, _ = fields
    A = lambda_2s(0.75)
    assert np.array_equal(christoffel_B(A, u, v).half, christoffel_B(A, v, u).half)
    half_sum = 0.5 * (ad_transpose(A, u, v) + ad_transpose(A, v, u))
    assert maxabs(christoffel_B(A, u, v) - half_sum) < 1e-13
    assert maxabs(christoffel_B(A, u, u) - ad_transpose(A, u, u)) < 1e-13
    cos, sin = PeriodicField.trig(grid64, cos={1: 1.0}), PeriodicField.trig(grid64, sin={1: 1.0})
    two = 2.0 * exact(2 * sin, differentiate(cos)) + exact(differentiate(2 * sin), cos) \
        + 2.0 * exact(2 * cos, differentiate(sin)) + exact(differentiate(2 * cos), sin)
    k = grid64.wavenumbers
    oracle = PeriodicField(grid64, 0.5 * two.half / (1.0 + k ** 2))
    assert maxabs(christoffel_B(ch(), cos, sin) - oracle) < 1e-12


@pytest.mark.parametrize("A", [ch(), lambda_2s(0.75), frac(1.0)], ids=lambda A: A.name)
def test_structure_identities(A, fields):
    u = fields[0]
    e = euler_rhs(A, u)
    assert maxabs(e + christoffel_B(A, u, u)) < 1e-12
    assert maxabs(e + ad_transpose(A, u, u)) < 1e-12
    s = spray_S(A, u)
    assert maxabs(s - (exact(u, differentiate(u)) - christoffel_B(A, u, u))) < 1e-11


def test_constants_are_stationary(grid64):
    c = PeriodicField.constant(grid64, 0.7)
    assert maxabs(spray_S(ch(), c)) < 1e-15
    assert maxabs(euler_rhs(ch(), c)) < 1e-15


def test_euler_rhs_against_ch_form(grid64):
    u = PeriodicField.trig(grid64, cos={1: 1.0})
    ux, uxx, uxxx = (differentiate(u, n) for n in (1, 2, 3))
    rhs = -3.0 * exact(u, ux) + 2.0 * exact(ux, uxx) + exact(u, uxxx)
    k = grid64.wavenumbers
    expect = PeriodicField(grid64, rhs.half / (1.0 + k ** 2))
    assert maxabs(euler_rhs(ch(), u) - expect) < 1e-14


def test_spray_matches_eulerian_form_at_identity(grid64):
    # at phi = id: v_t = u_t + u u_x
    u = PeriodicField.trig(grid64, cos={1: 1.0})
    expect = euler_rhs(ch(), u) + exact(u, differentiate(u))
    assert maxabs(spray_S(ch(), u) - expect) < 1e-13


def test_covariant_derivative_cases(grid64, fields):
    u, w, _ = fields
    zero = PeriodicField.zeros(grid64)
    assert maxabs(covariant_derivative(ch(), zero, w, zero)) < 1e-15
    along = covariant_derivative(ch(), u, u, -christoffel_B(ch(), u, u))
    assert maxabs(along) < 1e-13


def test_metric_compatibility(rng):
    grid = GridSpec(64)
    u0 = random_field(grid, rng, 4, decay=2.0, amplitude=0.3)
    assert metric_compatibility_error(ch(), u0, rng) <= 1e-6


def test_stationary_geodesic(grid32):
    phi0 = Diffeo(PeriodicField.trig(grid32, sin={1: 0.2}))
    tr = integrate_lagrangian(ch(), GeodesicState(phi0, PeriodicField.zeros(grid32)), 0.5, 0.05)
    assert tr.completed
    assert tr.last.phi.sup_distance(phi0) == 0.0
    assert maxabs(tr.last.v) == 0.0
    eu = integrate_euler(ch(), PeriodicField.zeros(grid32), 0.5, 0.05)
    assert maxabs(eu.last.u) == 0.0


def test_lagrangian_matches_euler(grid32):
    u0 = PeriodicField.trig(grid32, cos={1: 0.2})
    lag = integrate_lagrangian(ch(), GeodesicState(Diffeo.identity(grid32), u0), 0.5, 0.01,
                               cadence=50)
    eu = integrate_euler(ch(), u0, 0.5, 0.01, cadence=50)
    diff = lag.last.eulerian_velocity() - eu.last.u
    assert maxabs(diff) < 1e-9


def test_time_reversal(grid32):
    phi0 = Diffeo.identity(grid32)
    v0 = PeriodicField.trig(grid32, cos={1: 0.2}, sin={2: 0.05})
    fwd = integrate_lagrangian(ch(), GeodesicState(phi0, v0), 0.5, 0.01, cadence=50).last
    back = integrate_lagrangian(ch(), GeodesicState(fwd.phi, -fwd.v), 0.5, 0.01, cadence=50).last
    assert back.phi.sup_distance(phi0) < 1e-8
    assert maxabs(back.v + v0) < 1e-8


def test_right_invariance_of_spray(grid32):
    s = 0.7
    rot = Diffeo.rotation(grid32, s)
    phi0 = Diffeo(PeriodicField.trig(grid32, sin={1: 0.1}))
    v0 = PeriodicField.trig(grid32, cos={1: 0.2})
    a = integrate_lagrangian(ch(), GeodesicState(phi0, v0), 0.3, 0.01, cadence=30).last
    start = GeodesicState(phi0.compose(rot), compose_field(v0, rot))
    b = integrate_lagrangian(ch(), start, 0.3, 0.01, cadence=30).last
    assert b.phi.sup_distance(a.phi.compose(rot)) < 1e-10
    assert maxabs(b.v - compose_field(a.v, rot)) < 1e-10


def test_mu_conservation(grid64):
    u0 = PeriodicField.trig(grid64, cos={1: 0.3}, mean=0.3)
    A = frac(1.0)
    tr = integrate_euler(A, u0, 0.5, 0.01, cadence=10)
    means = [st.m.mean for st in tr.states]
    assert max(abs(m - means[0]) for m in means) <= 1e-10


def test_linearized_regime(grid64):
    # u = c + eps w: mode k moves with speed c (1 + 2 / (1 + k^2))
    c, eps, T = 0.5, 1e-4, 1.0
    w0 = PeriodicField.trig(grid64, cos={2: 1.0}, sin={3: 0.5})
    tr = integrate_euler(ch(), PeriodicField.constant(grid64, c) + eps * w0, T, 0.01, cadence=100)
    k = grid64.wavenumbers
    lin = w0.half * np.exp(-1j * c * k * (1.0 + 2.0 / (1.0 + k ** 2)) * T)
    got = (tr.last.u.half - np.where(k == 0, c, 0.0)) / eps
    assert np.max(np.abs(got - lin)) < 1e-3


def test_diagnostics_trivial(grid32, rng):
    phi = Diffeo(PeriodicField.trig(grid32, sin={1: 0.2}))
    d = diagnostics(ch(), GeodesicState(phi, PeriodicField.zeros(grid32)))
    assert d.energy == 0.0 and maxabs(d.noether_field) < 1e-15
    u = random_field(grid32, rng, 5, decay=2.0)
    d = diagnostics(ch(), GeodesicState(Diffeo.identity(grid32), u))
    assert maxabs(d.noether_field - apply(ch(), u)) < 1e-13
    assert d.energy == pytest.approx(energy(ch(), u), rel=1e-13)
    assert d.mean_momentum == pytest.approx(apply(ch(), u).mean, abs=1e-15)


def test_energy_and_noether_conserved_short_run(grid32):
    u0 = PeriodicField.trig(grid32, cos={1: 0.2})
    tr = integrate_lagrangian(ch(), GeodesicState(Diffeo.identity(grid32), u0), 0.5, 0.005,
                              cadence=20)
    ref = diagnostics(ch(), tr.states[0])
    for st in tr.states[1:]:
        d = diagnostics(ch(), st, ref.noether_field)
        assert abs(d.energy - ref.energy) <= 1e-6 * ref.energy
        assert d.noether_drift <= 1e-5
