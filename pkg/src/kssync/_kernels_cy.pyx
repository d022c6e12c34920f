# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot spectral kernels.

Same interface as ``_kernels_py``: convolve_hermitian, master_rhs_kernel,
euler_run.  The convolution walks a two-sided scratch buffer directly, and
euler_run keeps the whole step loop in C.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef void _fill_twosided(const double complex[::1] c, double complex[::1] full) noexcept nogil:
    cdef Py_ssize_t K = c.shape[0] - 1
    cdef Py_ssize_t k
    for k in range(K):
        full[k] = c[K - k].conjugate()
    for k in range(K + 1):
        full[K + k] = c[k]


cdef void _eta_from_twosided(const double complex[::1] full, Py_ssize_t K,
                             double complex[::1] out) noexcept nogil:
    # out_k = k * sum_l full[l+K] * full[k-l+K]; index i = l+K runs k..2K
    cdef Py_ssize_t k, i
    cdef double complex s
    out[0] = 0
    for k in range(1, K + 1):
        s = 0
        for i in range(k, 2 * K + 1):
            s = s + full[i] * full[k - i + 2 * K]
        out[k] = k * s


def convolve_hermitian(c):
    """Quadratic interaction term; entry k = k * sum_l c_l c_{k-l}."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = np.ascontiguousarray(c, dtype=np.complex128)
    cdef Py_ssize_t K = cc.shape[0] - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(K + 1, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] full = np.empty(2 * K + 1, dtype=np.complex128)
    _fill_twosided(cc, full)
    _eta_from_twosided(full, K, out)
    return out


def master_rhs_kernel(c, lin, omega0):
    """Time derivative lin*c - (i omega0 / 2) * eta(c)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = np.ascontiguousarray(c, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ll = np.ascontiguousarray(lin, dtype=np.complex128)
    cdef Py_ssize_t K = cc.shape[0] - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(K + 1, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] full = np.empty(2 * K + 1, dtype=np.complex128)
    cdef double complex half = 0.5j * omega0
    cdef Py_ssize_t k
    _fill_twosided(cc, full)
    _eta_from_twosided(full, K, out)
    for k in range(K + 1):
        out[k] = ll[k] * cc[k] - half * out[k]
    return out


def euler_run(c, lin, omega0, double h, Py_ssize_t n_steps, double guard):
    """Advance c in place by n_steps explicit Euler steps; see the numpy twin."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cc = c
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ll = np.ascontiguousarray(lin, dtype=np.complex128)
    cdef Py_ssize_t K = cc.shape[0] - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] eta = np.empty(K + 1, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] full = np.empty(2 * K + 1, dtype=np.complex128)
    cdef double complex half = 0.5j * omega0
    cdef double complex v
    cdef double m, a
    cdef Py_ssize_t i, k
    cdef double complex[::1] cv = cc, lv = ll, ev = eta, fv = full
    cdef Py_ssize_t done = n_steps
    with nogil:
        for i in range(n_steps):
            _fill_twosided(cv, fv)
            _eta_from_twosided(fv, K, ev)
            m = 0.0
            for k in range(K + 1):
                v = cv[k] + h * (lv[k] * cv[k] - half * ev[k])
                if k == 0:
                    v = v.real
                cv[k] = v
                a = abs(v)
                if a > m or not (a == a):
                    m = a if a == a else guard * 2
            if not (m <= guard):
                done = i + 1
                break
    return done
