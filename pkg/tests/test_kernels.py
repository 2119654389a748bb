import os
import subprocess
import sys

import numpy as np
import pytest

from circleflow import _pykernels, kernels
from circleflow.multiplier import lambda_2s
from circleflow.multisymbol import MultiSymbolTable, _symbol_table

try:
    from circleflow import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


@pytest.fixture
def data(rng):
    c = (rng.standard_normal(40) + 1j * rng.standard_normal(40)) / (1 + np.arange(40)) ** 2
    c[0] = c[0].real
    return c, rng.uniform(-10, 10, 300), rng.standard_normal(128)


@needs_ext
@pytest.mark.parametrize("order", [0, 1, 2])
def test_eval_series_backends_agree(data, order):
    c, y, _ = data
    a = _ckernels.eval_series(c, y, order)
    b = _pykernels.eval_series(c, y, order)
    assert np.max(np.abs(a - b)) < 1e-12


@needs_ext
def test_pair_and_gagliardo_agree(data):
    c, y, w = data
    for x, z in zip(_ckernels.eval_series_pair(c, y), _pykernels.eval_series_pair(c, y)):
        assert np.max(np.abs(x - z)) < 1e-12
    assert _ckernels.gagliardo_sum(w, 0.3) == pytest.approx(_pykernels.gagliardo_sum(w, 0.3),
                                                             rel=1e-12)


@needs_ext
def test_recursion_backends_agree(rng):
    modes = rng.integers(-8, 9, size=(500, 4)).astype(np.int64)
    reach = int(np.abs(modes).sum(axis=1).max())
    table = _symbol_table(MultiSymbolTable(lambda_2s(0.75)), reach, np.longdouble)
    a = _ckernels.multisymbol_recursive(table, reach, modes)
    b = _pykernels.multisymbol_recursive(table, reach, modes)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_eval_series_matches_direct_sum(data):
    c, y, _ = data
    k = np.arange(1, c.size)
    direct = c[0].real + 2 * np.real(np.exp(1j * np.outer(y, k)) @ c[1:])
    assert np.max(np.abs(kernels.eval_series(c, y, 0) - direct)) < 1e-12


def test_pure_backend_selected_by_env():
    env = dict(os.environ, CIRCLEFLOW_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import circleflow.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_pure_backend_runs_a_flow():
    code = ("import numpy as np\n"
            "from circleflow.spectral import GridSpec, PeriodicField\n"
            "from circleflow.multiplier import ch\n"
            "from circleflow.geodesic import GeodesicState, integrate_lagrangian\n"
            "from circleflow.diffeo import Diffeo\n"
            "g = GridSpec(32); u0 = PeriodicField.trig(g, cos={1: 0.2})\n"
            "tr = integrate_lagrangian(ch(), GeodesicState(Diffeo.identity(g), u0), 0.1, 0.01, cadence=10)\n"
            "print(repr(float(tr.last.phi.displacement.half[1].real)))\n")
    env = dict(os.environ, CIRCLEFLOW_PURE="1")
    pure = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          check=True)
    env.pop("CIRCLEFLOW_PURE")
    fast = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          check=True)
    assert float(pure.stdout) == pytest.approx(float(fast.stdout), rel=1e-10)
