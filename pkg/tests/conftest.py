"""Shared fixtures and independent reference implementations (oracles).

The oracles here deliberately avoid the package's own kernels: the
convolution oracle walks the double loop over two-sided indices, and the
power oracle integrates the synthesized field on a fine uniform grid.
"""

import numpy as np
import pytest


def make_hermitian(K, rng, scale=1.0):
    """Random one-sided coefficient vector with a real mean mode."""
    c = scale * (rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1))
    c[0] = c[0].real
    return c


def coeff_two_sided(c, k):
    """a_k with Hermitian extension and zero padding beyond the band."""
    K = len(c) - 1
    if abs(k) > K:
        return 0.0 + 0.0j
    return c[k] if k >= 0 else np.conj(c[-k])


def convolution_oracle(c):
    """Brute-force eta_k = k * sum_{l=-K}^{K} a_l a_{k-l} for k = 0..K."""
    K = len(c) - 1
    out = np.zeros(K + 1, dtype=np.complex128)
    for k in range(K + 1):
        s = 0.0 + 0.0j
        for ell in range(-K, K + 1):
            s += coeff_two_sided(c, ell) * coeff_two_sided(c, k - ell)
        out[k] = k * s
    return out


def power_quadrature_oracle(c, X):
    """Spatial mean of u(x)^2 via a uniform Riemann sum.

    With N = 8K points the sum integrates every mode of u^2 (wavenumbers up
    to 2K) exactly over the period, so this matches the coefficient-space
    power to rounding.
    """
    K = len(c) - 1
    N = max(8 * K, 16)
    xs = np.arange(N) * (X / N)
    w0 = 2.0 * np.pi / X
    u = np.zeros(N)
    for k in range(-K, K + 1):
        u = u + (coeff_two_sided(c, k) * np.exp(1j * w0 * k * xs)).real
    return float(np.mean(u * u))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
