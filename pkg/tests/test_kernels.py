"""Backend equivalence: the compiled kernels must match the numpy ones."""

import numpy as np
import pytest

from kssync import kernels
from kssync import _kernels_py as kpy

from conftest import make_hermitian

cy = pytest.importorskip("kssync._kernels_cy", reason="compiled kernels unavailable")


@pytest.mark.parametrize("K", [1, 2, 7, 16, 33, 64])
def test_convolution_backends_agree(K, rng):
    c = make_hermitian(K, rng)
    a = kpy.convolve_hermitian(c)
    b = cy.convolve_hermitian(c)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("K", [4, 32])
def test_rhs_backends_agree(K, rng):
    c = make_hermitian(K, rng)
    lin = rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1)
    a = kpy.master_rhs_kernel(c, lin, 0.37)
    b = cy.master_rhs_kernel(c, np.ascontiguousarray(lin), 0.37)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_euler_run_backends_agree(rng):
    K = 12
    lin = -0.1 * np.arange(K + 1.0) + 0j
    c1 = make_hermitian(K, rng, scale=0.1)
    c2 = c1.copy()
    n1 = kpy.euler_run(c1, lin, 0.2, 0.01, 500, 1e6)
    n2 = cy.euler_run(c2, np.ascontiguousarray(lin), 0.2, 0.01, 500, 1e6)
    assert n1 == n2 == 500
    assert np.allclose(c1, c2, rtol=1e-10, atol=1e-12)


def test_euler_run_reports_early_stop(rng):
    K = 4
    lin = np.full(K + 1, 50.0 + 0j)  # strongly unstable on purpose
    c = make_hermitian(K, rng)
    for impl in (kpy, cy):
        ci = c.copy()
        n = impl.euler_run(ci, np.ascontiguousarray(lin), 1.0, 1.0, 100, 1e6)
        assert n < 100


def test_selected_backend_is_exposed():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()
