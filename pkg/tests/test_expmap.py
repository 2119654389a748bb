import numpy as np
import pytest

from circleflow.diffeo import Diffeo
from circleflow.errors import ConfigurationError, NoConvergence, OutsideDomain
from circleflow.expmap import PolarCoords, exp_flow, exp_id, log_map, path_length, polar_coords
from circleflow.multiplier import ch, lambda_2s
from circleflow.spectral import GridSpec, PeriodicField, sobolev_norm
from circleflow.verify import geodesic_path, small_field

GRID = GridSpec(32)


def test_exp_of_zero_is_identity():
    phi = exp_id(ch(), PeriodicField.zeros(GRID))
    assert np.array_equal(phi.displacement.half, np.zeros(GRID.kmax + 1))


def test_exp_of_constant_is_rotation():
    phi = exp_id(ch(), PeriodicField.constant(GRID, 0.3))
    assert phi.sup_distance(Diffeo.rotation(GRID, 0.3)) < 1e-14


def test_scaling_identity(rng):
    A = lambda_2s(1.0)
    v = small_field(GRID, rng, 1.0, 0.05)
    for sigma in (0.25, 0.5, 2.0):
        lhs = exp_id(A, v * sigma, 0.05)
        rhs = exp_flow(A, v, sigma, sigma * 0.05).last.phi
        assert lhs.sup_distance(rhs) <= 1e-9


def test_exp_outside_domain():
    v = PeriodicField.trig(GRID, sin={1: 3.0})
    with pytest.raises(OutsideDomain) as info:
        exp_id(lambda_2s(1.0), v)
    assert 0.0 < info.value.attained_time < 1.0


def test_log_identity_and_rotation():
    v = log_map(ch(), Diffeo.identity(GRID), v_init=PeriodicField.zeros(GRID))
    assert np.max(np.abs(v.half)) == 0.0
    v = log_map(ch(), Diffeo.rotation(GRID, 0.1))
    assert np.max(np.abs(v.half - PeriodicField.constant(GRID, 0.1).half)) < 1e-10


@pytest.mark.parametrize("s", [0.5, 1.0])
def test_roundtrip(s, rng):
    A = lambda_2s(s)
    v = small_field(GRID, rng, s, 0.05)
    assert sobolev_norm(log_map(A, exp_id(A, v)) - v, s) <= 1e-8


def test_log_signals_non_convergence():
    far = Diffeo(PeriodicField.trig(GRID, sin={1: 0.95}))
    with pytest.raises(NoConvergence):
        log_map(ch(), far, max_iter=3)


def test_polar_coords():
    A = ch()
    assert polar_coords(A, 1.0, Diffeo.identity(GRID)).rho == 0.0
    cos = PeriodicField.trig(GRID, cos={1: 1.0})
    w0 = cos * (1.0 / sobolev_norm(cos, 1.0))
    pc = polar_coords(A, 1.0, exp_id(A, w0 * 0.03))
    assert pc.rho == pytest.approx(0.03, abs=1e-6)
    assert sobolev_norm(pc.w, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(pc.w.half - w0.half)) < 1e-6
    with pytest.raises(ConfigurationError):
        PolarCoords(-1.0, None)


def test_rho_continuity(rng):
    A = ch()
    v = small_field(GRID, rng, 1.0, 0.04)
    phi = exp_id(A, v)
    rho = polar_coords(A, 1.0, phi).rho
    for eps in (1e-5, 1e-4):
        bump = np.zeros(GRID.kmax + 1, dtype=complex)
        bump[2] = eps
        near = Diffeo(phi.displacement + PeriodicField(GRID, bump))
        assert abs(polar_coords(A, 1.0, near).rho - rho) <= 20.0 * eps


def test_local_injectivity(rng):
    A = lambda_2s(1.0)
    for _ in range(5):
        v = small_field(GRID, rng, 1.0, 0.05)
        w = small_field(GRID, rng, 1.0, 0.05)
        if sobolev_norm(v - w, 1.0) < 1e-3:
            continue
        assert exp_id(A, v).sup_distance(exp_id(A, w)) >= 1e-6


def test_path_length_cases(rng):
    A = lambda_2s(1.0)
    phi = exp_id(A, small_field(GRID, rng, 1.0, 0.05))
    zero = PeriodicField.zeros(GRID)
    assert path_length(A, [phi] * 5, [zero] * 5) == 0.0
    v = small_field(GRID, rng, 1.0, 0.05)
    phis, vels = geodesic_path(A, v)
    assert path_length(A, phis, vels) == pytest.approx(sobolev_norm(v, 1.0), abs=1e-6)


def test_path_length_rejects_inconsistent_paths(rng):
    A = lambda_2s(1.0)
    v = small_field(GRID, rng, 1.0, 0.05)
    phis, vels = geodesic_path(A, v)
    with pytest.raises(ConfigurationError):
        path_length(A, phis, [vv * 3.0 for vv in vels])
    with pytest.raises(ConfigurationError):
        path_length(A, phis[:1], vels[:1])
    with pytest.raises(ConfigurationError):
        path_length(A, phis, vels[:-1])
