import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import sparse

from bogoliubov import _backend, _kernels_py

compiled = pytest.importorskip("bogoliubov._kernels")

CASES = [(1, 12), (2, 7), (3, 5), (4, 3)]


def _dense(coo, n):
    r, c, v = coo
    return sparse.coo_matrix((v, (r, c)), shape=(n, n)).toarray()


@pytest.mark.parametrize("m, cutoff", CASES)
def test_enumeration_agrees(m, cutoff):
    a = compiled.enumerate_states(m, cutoff)
    b = _kernels_py.enumerate_states(m, cutoff)
    assert np.array_equal(np.asarray(a), b)


@pytest.mark.parametrize("m, cutoff", CASES)
def test_ranking_agrees(m, cutoff):
    states = _kernels_py.enumerate_states(m, cutoff)
    expected = np.arange(len(states))
    assert np.array_equal(np.asarray(compiled.rank_states(states, cutoff)), expected)
    assert np.array_equal(_kernels_py.rank_states(states, cutoff), expected)


@pytest.mark.parametrize("m, cutoff", CASES)
@pytest.mark.parametrize("create", [True, False])
def test_ladder_agrees(m, cutoff, create):
    states = _kernels_py.enumerate_states(m, cutoff)
    n = len(states)
    for mode in range(m):
        a = _dense(compiled.ladder_coo(states, cutoff, mode, create), n)
        b = _dense(_kernels_py.ladder_coo(states, cutoff, mode, create), n)
        assert np.allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("m, cutoff", CASES)
def test_quadratic_agrees(m, cutoff):
    rng = np.random.default_rng(m * 100 + cutoff)
    h = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    h = h + h.conj().T
    g = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    g = g + g.T
    states = _kernels_py.enumerate_states(m, cutoff)
    n = len(states)
    a = _dense(compiled.quadratic_coo(states, cutoff, h, g), n)
    b = _dense(_kernels_py.quadratic_coo(states, cutoff, h, g), n)
    assert np.allclose(a, b, atol=1e-13)
    assert np.allclose(a, a.conj().T, atol=1e-13)


def test_compiled_backend_selected_by_default():
    assert _backend.BACKEND == "cython"


def test_environment_forces_fallback():
    env = dict(os.environ, BOGOLIUBOV_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import bogoliubov; print(bogoliubov.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
