"""Spectral representation of real periodic fields and the model's linear symbol.

A field u(x) on [0, X) is carried by one-sided Fourier coefficients c_0..c_K:

    u(x) = c_0 + sum_{k>=1} 2 Re( c_k exp(i omega0 k x) ),    omega0 = 2 pi / X.

Negative modes are implied by c_{-k} = conj(c_k), so c_0 must stay real.
Coefficient vectors are plain complex128 arrays of length K+1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError

__all__ = [
    "DomainConfig",
    "ModelParams",
    "zero_coeffs",
    "validate_coeffs",
    "coeff_at",
    "linear_diag",
    "nonlinear_term",
    "synthesize_field",
    "parseval_power",
]


@dataclass(frozen=True)
class DomainConfig:
    """Periodic domain and integration grid for one spectral system.

    X is the period, K the truncation order (modes 0..K retained), h the
    explicit Euler step, T the integration horizon.
    """

    X: float
    K: int
    h: float
    T: float

    def __post_init__(self):
        if not (np.isfinite(self.X) and self.X > 0):
            raise ConfigError(f"domain period must be positive, got {self.X}")
        if self.K < 1:
            raise ConfigError(f"truncation order must be >= 1, got {self.K}")
        if not (np.isfinite(self.h) and self.h > 0):
            raise ConfigError(f"step size must be positive, got {self.h}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise ConfigError(f"horizon must be positive, got {self.T}")

    @property
    def omega0(self) -> float:
        return 2.0 * np.pi / self.X

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.h))


@dataclass(frozen=True)
class ModelParams:
    """Coefficients (alpha, beta, gamma) of the second, third, and fourth
    derivative terms."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"model parameter {name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])

    @classmethod
    def from_array(cls, arr) -> "ModelParams":
        a, b, g = (float(v) for v in arr)
        return cls(a, b, g)


def zero_coeffs(K: int) -> np.ndarray:
    return np.zeros(K + 1, dtype=np.complex128)


def validate_coeffs(c) -> np.ndarray:
    c = np.ascontiguousarray(c, dtype=np.complex128)
    if c.ndim != 1 or c.shape[0] < 1:
        raise ValueError("coefficient vector must be 1-D and non-empty")
    if c[0].imag != 0.0:
        raise ValueError("mean mode must be real")
    return c


def coeff_at(c, k: int) -> complex:
    """Coefficient a_k with the Hermitian extension: conj for k < 0, zero
    beyond the truncation."""
    K = len(c) - 1
    if abs(k) > K:
        return 0j
    return complex(c[k]) if k >= 0 else complex(np.conj(c[-k]))


def _theta_triple(theta):
    if isinstance(theta, ModelParams):
        return theta.alpha, theta.beta, theta.gamma
    a, b, g = theta
    return float(a), float(b), float(g)


def linear_diag(theta, omega0: float, K: int) -> np.ndarray:
    """Diagonal of the linear symbol.

    Entry k is alpha omega0^2 k^2 + i beta omega0^3 k^3 - gamma omega0^4 k^4;
    entry 0 vanishes, so the field mean is conserved by the linear part.
    """
    a, b, g = _theta_triple(theta)
    k = np.arange(K + 1, dtype=np.float64)
    k2 = k * k
    return (a * omega0**2) * k2 + (1j * b * omega0**3) * (k2 * k) - (g * omega0**4) * (k2 * k2)


def nonlinear_term(c) -> np.ndarray:
    """Convolution term eta(c); entry k is k * sum_l c_l c_{k-l} with the
    Hermitian extension, entry 0 is zero."""
    return kernels.convolve_hermitian(np.ascontiguousarray(c, dtype=np.complex128))


def synthesize_field(c, xs, X: float) -> np.ndarray:
    """Evaluate the real field at positions xs."""
    c = np.asarray(c, dtype=np.complex128)
    xs = np.asarray(xs, dtype=np.float64)
    w = c * _onesided_weights(c.shape[0])
    basis = np.exp((2j * np.pi / X) * np.outer(xs, np.arange(c.shape[0])))
    return (basis @ w).real


def _onesided_weights(n: int) -> np.ndarray:
    w = np.full(n, 2.0)
    w[0] = 1.0
    return w


def parseval_power(c) -> float:
    """Mean power (1/X) integral of u^2 over one period, from the coefficients."""
    c = np.asarray(c)
    return float(abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2))
