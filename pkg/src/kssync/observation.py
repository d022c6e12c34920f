"""Field sampling, additive Gaussian measurement noise, and least-squares
recovery of Fourier coefficients from grid observations.

The fit solves min ||Phi a - u||^2 over the two-sided coefficient vector
a = (a_{-K}, ..., a_K), with design columns Phi[:, K+k] = exp(i omega0 k x_j).
For J >= 2K+1 distinct points the normal matrix is invertible and the
recovery of a band-limited field is exact up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .spectral import synthesize_field

__all__ = [
    "NoiseConfig",
    "ObservationSetup",
    "build_setup",
    "uniform_grid",
    "observe",
    "calibrate_sigma",
    "ls_fit",
    "ls_fit_twosided",
]

NOISE_MODES = ("off", "fixed_sigma", "target_snr")


@dataclass(frozen=True)
class NoiseConfig:
    """Additive per-sample Gaussian observation noise.

    mode "off" is exact sampling; "fixed_sigma" uses sigma directly;
    "target_snr" requests calibration of sigma against a signal power, which
    a driver must resolve (see calibrate_sigma) before observations run.
    """

    mode: str = "off"
    sigma: float = 0.0
    snr_db: float | None = None

    def __post_init__(self):
        if self.mode not in NOISE_MODES:
            raise ConfigError(f"unknown noise mode {self.mode!r}")
        if self.sigma < 0 or not np.isfinite(self.sigma):
            raise ConfigError(f"noise sigma must be finite and >= 0, got {self.sigma}")
        if self.mode == "target_snr" and self.snr_db is None:
            raise ConfigError("target_snr noise needs snr_db")

    def resolved(self, trajectory_power: float) -> "NoiseConfig":
        """Concrete fixed-sigma equivalent of this config."""
        if self.mode == "target_snr":
            return NoiseConfig("fixed_sigma", calibrate_sigma(trajectory_power, self.snr_db))
        return self


@dataclass(frozen=True)
class ObservationSetup:
    """Observation grid plus the precomputed design and LS operator."""

    grid: np.ndarray
    K_fit: int
    X: float
    design: np.ndarray       # (J, 2K+1), column K+k holds mode k
    ls_operator: np.ndarray  # (2K+1, J), pseudoinverse of the design

    @property
    def J(self) -> int:
        return self.grid.shape[0]

    @property
    def omega0(self) -> float:
        return 2.0 * np.pi / self.X


def uniform_grid(J: int, X: float) -> np.ndarray:
    """J equally spaced points on [0, X)."""
    return np.arange(J) * (X / J)


def build_setup(grid, K_fit: int, X: float) -> ObservationSetup:
    """Precompute the design matrix and least-squares operator for a grid."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    J = grid.shape[0]
    if K_fit < 1:
        raise ConfigError(f"fit order must be >= 1, got {K_fit}")
    if J < 2 * K_fit + 1:
        raise ConfigError(
            f"need at least 2K+1 = {2 * K_fit + 1} observation points, got {J}"
        )
    ks = np.arange(-K_fit, K_fit + 1)
    design = np.exp((2j * np.pi / X) * np.outer(grid, ks))
    gram = design.conj().T @ design
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise ConfigError("observation grid makes the normal matrix singular")
    ls_operator = np.linalg.solve(gram, design.conj().T)
    return ObservationSetup(grid=grid, K_fit=K_fit, X=X, design=design, ls_operator=ls_operator)


def observe(c_master, setup: ObservationSetup, noise: NoiseConfig, rng=None) -> np.ndarray:
    """Sample the field on the grid, adding per-sample Gaussian noise."""
    u = synthesize_field(c_master, setup.grid, setup.X)
    if noise.mode == "off":
        return u
    if noise.mode == "target_snr":
        raise ConfigError("target_snr noise must be resolved to a sigma before observing")
    if rng is None:
        raise ConfigError("noisy observation needs an rng")
    return u + noise.sigma * rng.standard_normal(u.shape[0])


def calibrate_sigma(trajectory_power: float, snr_db: float) -> float:
    """Noise level giving the requested SNR against a signal power.

    SNR(dB) = 10 log10(power / sigma^2), so sigma = sqrt(power / 10^(dB/10)).
    """
    if not (trajectory_power > 0):
        raise ConfigError(f"signal power must be positive, got {trajectory_power}")
    return float(np.sqrt(trajectory_power / 10.0 ** (snr_db / 10.0)))


def ls_fit_twosided(setup: ObservationSetup, u) -> np.ndarray:
    """Raw two-sided LS solution (a_{-K}, ..., a_K)."""
    return setup.ls_operator @ np.asarray(u, dtype=np.float64)


def ls_fit(setup: ObservationSetup, u) -> np.ndarray:
    """One-sided coefficient estimate from grid samples.

    The two-sided solution of a real-valued sample vector is conjugate
    symmetric up to rounding; folding (averaging entry k with the conjugate
    of entry -k) projects exactly onto Hermitian vectors.
    """
    two = ls_fit_twosided(setup, u)
    K = setup.K_fit
    out = 0.5 * (two[K:] + np.conj(two[K::-1]))
    out[0] = two[K].real
    return out
