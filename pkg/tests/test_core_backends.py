import os
import subprocess
import sys

import numpy as np
import pytest

from vskextrap import _core
from vskextrap._core import _pycore

compiled = _core.BACKENDS.get("compiled")
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled core not built")


def test_backend_selection():
    assert _core.BACKEND in _core.BACKENDS
    assert _core.phs_cross is _core.BACKENDS[_core.BACKEND].phs_cross


def test_environment_forces_python():
    env = dict(os.environ, VSKEXTRAP_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import vskextrap; print(vskextrap.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


def test_python_lu_matches_numpy():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((12, 12))
    b = rng.standard_normal(12)
    lu, piv, bad = _pycore.lu_factor(a, 1e-12)
    assert bad == -1
    np.testing.assert_allclose(_pycore.lu_solve(lu, piv, b), np.linalg.solve(a, b), rtol=1e-10)


@needs_compiled
@pytest.mark.parametrize("power, use_log, dim", [(3, False, 1), (2, True, 2), (1, False, 3), (4, True, 2)])
def test_phs_cross_parity(power, use_log, dim):
    rng = np.random.default_rng(power)
    x = rng.uniform(-1, 1, (17, dim))
    y = np.vstack([x[:5], rng.uniform(-1, 1, (9, dim))])
    ref = _pycore.phs_cross(x, y, power, use_log)
    np.testing.assert_allclose(compiled.phs_cross(x, y, power, use_log), ref, rtol=1e-14, atol=1e-15)


@needs_compiled
def test_lu_parity():
    rng = np.random.default_rng(1)
    for n in (1, 2, 7, 33):
        a = rng.standard_normal((n, n))
        b = rng.standard_normal(n)
        lu_p, piv_p, bad_p = _pycore.lu_factor(a, 1e-12)
        lu_c, piv_c, bad_c = compiled.lu_factor(a, 1e-12)
        assert bad_p == bad_c == -1
        np.testing.assert_array_equal(np.asarray(piv_c), piv_p)
        np.testing.assert_allclose(np.asarray(lu_c), lu_p, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(compiled.lu_solve(lu_c, piv_c, b), _pycore.lu_solve(lu_p, piv_p, b), rtol=1e-10)


@needs_compiled
def test_lu_reports_same_bad_column():
    a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]])
    assert _pycore.lu_factor(a, 1e-12)[2] == compiled.lu_factor(a, 1e-12)[2] == 2


@needs_compiled
def test_read_only_inputs():
    a = np.eye(3)
    a.setflags(write=False)
    lu, piv, _ = compiled.lu_factor(a, 1e-12)
    lu = np.asarray(lu)
    lu.setflags(write=False)
    np.testing.assert_array_equal(compiled.lu_solve(lu, piv, np.ones(3)), np.ones(3))


@needs_compiled
@pytest.mark.parametrize("eps, zeta", [(1e-3, 1.0), (0.1, 10.0), (0.0, 0.1)])
def test_smo_parity(eps, zeta):
    x = np.linspace(0.1, 2, 15)
    kmat = (1.0 + np.outer(x, x)) ** 3
    f = np.sin(3 * x)
    bp, itp, gp = _pycore.smo_solve(kmat, f, eps, zeta, 1e-6, 200_000)
    bc, itc, gc = compiled.smo_solve(kmat, f, eps, zeta, 1e-6, 200_000)
    assert itp == itc
    np.testing.assert_array_equal(np.asarray(bc), bp)
    assert gp < 1e-6 and gc < 1e-6
