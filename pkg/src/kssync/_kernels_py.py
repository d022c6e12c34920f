"""Numpy implementations of the hot spectral kernels.

Mirrors the compiled backend in ``_kernels_cy``; both expose the same three
functions with identical semantics so either can back ``kssync.kernels``.
"""

import numpy as np


def convolve_hermitian(c):
    """Quadratic interaction term of the one-sided coefficient vector.

    Entry k is k * sum_l c_l c_{k-l} over l = -K..K, with the negative modes
    implied by c_{-k} = conj(c_k) and out-of-band coefficients read as zero.
    """
    c = np.asarray(c, dtype=np.complex128)
    K = c.shape[0] - 1
    full = np.empty(2 * K + 1, dtype=np.complex128)
    full[:K] = np.conj(c[:0:-1])
    full[K:] = c
    conv = np.convolve(full, full)
    out = conv[2 * K : 3 * K + 1].copy()
    out *= np.arange(K + 1)
    return out


def master_rhs_kernel(c, lin, omega0):
    """Time derivative lin*c - (i omega0 / 2) * eta(c)."""
    rhs = lin * c
    rhs -= (0.5j * omega0) * convolve_hermitian(c)
    return rhs


def euler_run(c, lin, omega0, h, n_steps, guard):
    """Advance c in place by n_steps explicit Euler steps.

    The mean mode is forced real after every step.  Returns the number of
    completed steps; a short count means the state magnitude left [0, guard]
    (overflow and nan included) at that step.
    """
    for i in range(n_steps):
        c += h * master_rhs_kernel(c, lin, omega0)
        c[0] = c[0].real
        m = np.max(np.abs(c))
        if not (m <= guard):
            return i + 1
    return n_steps
