"""Drive-system integration: explicit Euler stepping of the truncated model.

The coefficient dynamics are

    da_k/dt = psi_k a_k - (i omega0 / 2) eta(a)_k

with psi the linear diagonal and eta the quadratic convolution.  States are
validated against a divergence guard; leaving it raises DivergenceError.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DivergenceError
from .spectral import DomainConfig, linear_diag, zero_coeffs

__all__ = [
    "DIVERGENCE_GUARD",
    "MasterTrajectory",
    "master_rhs",
    "euler_step",
    "check_euler_stability",
    "burn_in_init",
    "simulate_master",
]

DIVERGENCE_GUARD = 1e6


@dataclass
class MasterTrajectory:
    """Snapshots of one integration: times (n,) and coeffs (n, K+1)."""

    times: np.ndarray
    coeffs: np.ndarray
    store_stride: int

    @property
    def K(self) -> int:
        return self.coeffs.shape[1] - 1


def master_rhs(c, theta, omega0: float) -> np.ndarray:
    """Time derivative of the coefficient vector."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    lin = linear_diag(theta, omega0, c.shape[0] - 1)
    return kernels.master_rhs_kernel(c, lin, omega0)


def euler_step(c, rhs, h: float) -> np.ndarray:
    """One explicit Euler update; the mean mode is forced real."""
    out = c + h * rhs
    out[0] = out[0].real
    return out


def check_euler_stability(theta, cfg: DomainConfig) -> None:
    """Require h |Re psi_k| < 2 for every retained mode (explicit Euler
    stability of the linear part)."""
    lin = linear_diag(theta, cfg.omega0, cfg.K)
    worst = float(np.max(np.abs(lin.real)) * cfg.h)
    if worst >= 2.0:
        raise ConfigError(
            f"explicit Euler unstable for this configuration: "
            f"h * max|Re psi| = {worst:.4g} >= 2"
        )


def burn_in_init(theta, cfg: DomainConfig, burn_T: float = 100.0) -> np.ndarray:
    """Terminal state of a burn-in run started from the seed state c_1 = 0.5.

    The returned state initializes the drive system on its attractor.
    burn_T = 0 returns the seed state itself.
    """
    if burn_T < 0:
        raise ConfigError(f"burn-in horizon must be >= 0, got {burn_T}")
    check_euler_stability(theta, cfg)
    c = zero_coeffs(cfg.K)
    c[1] = 0.5
    n = int(round(burn_T / cfg.h))
    lin = linear_diag(theta, cfg.omega0, cfg.K)
    done = kernels.euler_run(c, lin, cfg.omega0, cfg.h, n, DIVERGENCE_GUARD)
    if done < n:
        t = done * cfg.h
        raise DivergenceError(f"burn-in diverged at t = {t:.4g}", t=t)
    return c


def simulate_master(c0, theta, cfg: DomainConfig, store_stride: int = 1) -> MasterTrajectory:
    """Integrate round(T/h) steps from c0, storing every store_stride-th
    state; t = 0 and the final step are always stored."""
    if store_stride < 1:
        raise ConfigError(f"store_stride must be >= 1, got {store_stride}")
    c0 = np.ascontiguousarray(c0, dtype=np.complex128)
    if c0.shape[0] != cfg.K + 1:
        raise ConfigError(
            f"initial state has {c0.shape[0] - 1} modes, domain expects {cfg.K}"
        )
    check_euler_stability(theta, cfg)
    n = cfg.n_steps
    idx = list(range(0, n + 1, store_stride))
    if idx[-1] != n:
        idx.append(n)
    lin = linear_diag(theta, cfg.omega0, cfg.K)
    coeffs = np.empty((len(idx), cfg.K + 1), dtype=np.complex128)
    c = c0.copy()
    coeffs[0] = c
    for j in range(1, len(idx)):
        chunk = idx[j] - idx[j - 1]
        done = kernels.euler_run(c, lin, cfg.omega0, cfg.h, chunk, DIVERGENCE_GUARD)
        if done < chunk:
            t = (idx[j - 1] + done) * cfg.h
            raise DivergenceError(f"integration diverged at t = {t:.4g}", t=t)
        coeffs[j] = c
    times = np.asarray(idx, dtype=np.float64) * cfg.h
    return MasterTrajectory(times=times, coeffs=coeffs, store_stride=store_stride)
