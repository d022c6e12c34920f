"""Cubature Kalman filtering of the extended state [theta; a] in a real
embedding, as a baseline against the synchronization estimator.

State layout: [alpha, beta, gamma, a_0, Re a_1..a_K, Im a_1..a_K], dimension
n_s = 4 + 2K.  Prediction propagates 2 n_s degree-3 cubature points one Euler
step through the coefficient dynamics (parameters are static states); the
measurement u = H s + noise is linear because the observation grid is fixed,
so the update is a standard Kalman correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError
from .master import DIVERGENCE_GUARD
from .metrics import RunTrace, cost_C, error_coeffs, normalized_mse
from .observation import ObservationSetup
from .spectral import DomainConfig, ModelParams

__all__ = [
    "FilterState",
    "state_dim",
    "embed_state",
    "extract_state",
    "cubature_points",
    "measurement_matrix",
    "ubkf_step",
    "run_ubkf",
    "default_filter_state",
]

JITTER = 1e-12


@dataclass
class FilterState:
    """Gaussian belief over the embedded state, with noise levels attached."""

    mean: np.ndarray
    cov: np.ndarray
    process_noise: np.ndarray    # diagonal entries, length n_s
    measurement_var: float
    step_index: int = 0


def state_dim(K: int) -> int:
    return 4 + 2 * K


def embed_state(theta, c) -> np.ndarray:
    """Pack parameters and one-sided coefficients into the real embedding."""
    theta = np.asarray(theta, dtype=np.float64)
    c = np.asarray(c, dtype=np.complex128)
    K = c.shape[0] - 1
    s = np.empty(state_dim(K))
    s[:3] = theta
    s[3] = c[0].real
    s[4 : 4 + K] = c[1:].real
    s[4 + K :] = c[1:].imag
    return s


def extract_state(s) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of embed_state: (theta, coefficients)."""
    s = np.asarray(s, dtype=np.float64)
    K = (s.shape[0] - 4) // 2
    c = np.empty(K + 1, dtype=np.complex128)
    c[0] = s[3]
    c[1:] = s[4 : 4 + K] + 1j * s[4 + K :]
    return s[:3].copy(), c


def default_filter_state(K: int, sigma: float,
                         theta_prior=(0.05, 0.05, 0.05),
                         prior_var: float = 1e-2,
                         q_coeff: float = 1e-6,
                         q_theta: float = 1e-8) -> FilterState:
    """Filter initialization used by the comparison scenario.

    The coefficient prior mean mirrors the slave initialization (a_1 = 0.5).
    """
    n = state_dim(K)
    mean = np.zeros(n)
    mean[:3] = theta_prior
    mean[4] = 0.5
    q = np.full(n, q_coeff)
    q[:3] = q_theta
    return FilterState(
        mean=mean,
        cov=prior_var * np.eye(n),
        process_noise=q,
        measurement_var=float(sigma) ** 2,
    )


def cubature_points(mean, cov) -> tuple[np.ndarray, np.ndarray]:
    """Degree-3 spherical-radial point set.

    Rows are mean +- sqrt(n) times the columns of the covariance Cholesky
    factor; weights are uniform 1/(2n).  A failed factorization is retried
    once with diagonal jitter.
    """
    mean = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    n = mean.shape[0]
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        try:
            L = np.linalg.cholesky(cov + JITTER * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise DivergenceError(
                "filter covariance lost positive definiteness beyond jitter repair"
            ) from exc
    spread = np.sqrt(n) * L.T  # row i is sqrt(n) times column i of L
    pts = np.concatenate([mean + spread, mean - spread])
    w = np.full(2 * n, 1.0 / (2 * n))
    return pts, w


def measurement_matrix(setup: ObservationSetup, K: int) -> np.ndarray:
    """Linear map from the embedded state to field samples on the grid."""
    xs = setup.grid
    w0 = setup.omega0
    J = xs.shape[0]
    H = np.zeros((J, state_dim(K)))
    H[:, 3] = 1.0
    phase = w0 * np.outer(xs, np.arange(1, K + 1))
    H[:, 4 : 4 + K] = 2.0 * np.cos(phase)
    H[:, 4 + K :] = -2.0 * np.sin(phase)
    return H


def _propagate_points(pts, h: float, omega0: float, K: int, nonlinear: bool) -> np.ndarray:
    theta = pts[:, :3]
    c = np.empty((pts.shape[0], K + 1), dtype=np.complex128)
    c[:, 0] = pts[:, 3]
    c[:, 1:] = pts[:, 4 : 4 + K] + 1j * pts[:, 4 + K :]
    k = np.arange(K + 1, dtype=np.float64)
    k2 = k * k
    lin = (
        (theta[:, :1] * omega0**2) * k2
        + (1j * omega0**3) * theta[:, 1:2] * (k2 * k)
        - (omega0**4) * theta[:, 2:3] * (k2 * k2)
    )
    rhs = lin * c
    if nonlinear:
        rhs -= (0.5j * omega0) * _convolve_batch(c)
    c = c + h * rhs
    out = np.empty_like(pts)
    out[:, :3] = theta
    out[:, 3] = c[:, 0].real
    out[:, 4 : 4 + K] = c[:, 1:].real
    out[:, 4 + K :] = c[:, 1:].imag
    return out


def _convolve_batch(c) -> np.ndarray:
    """FFT self-convolution of each row's two-sided extension; matches the
    direct kernel to rounding."""
    K = c.shape[1] - 1
    full = np.concatenate([np.conj(c[:, :0:-1]), c], axis=1)
    F = np.fft.fft(full, n=4 * K + 1, axis=1)
    conv = np.fft.ifft(F * F, axis=1)
    return conv[:, 2 * K : 3 * K + 1] * np.arange(K + 1)


def ubkf_step(state: FilterState, u_obs, setup: ObservationSetup,
              cfg: DomainConfig, *, nonlinear: bool = True, H=None) -> FilterState:
    """One predict(+update) cycle.

    Prediction pushes the cubature points through an Euler step and adds
    h times the process noise to the covariance.  When u_obs is given, the
    linear Kalman correction with measurement variance R = measurement_var
    follows.  Covariance is re-symmetrized on exit.
    """
    n = state.mean.shape[0]
    K = (n - 4) // 2
    pts, w = cubature_points(state.mean, state.cov)
    pts = _propagate_points(pts, cfg.h, cfg.omega0, K, nonlinear)
    m = w @ pts
    dev = pts - m
    P = (dev.T * w) @ dev + cfg.h * np.diag(state.process_noise)
    if u_obs is not None:
        if H is None:
            H = measurement_matrix(setup, K)
        u_obs = np.asarray(u_obs, dtype=np.float64)
        if u_obs.shape[0] != setup.J:
            raise ConfigError(f"observation length {u_obs.shape[0]} != grid size {setup.J}")
        PHt = P @ H.T
        S = H @ PHt + state.measurement_var * np.eye(setup.J)
        gain = np.linalg.solve(S, PHt.T).T
        m = m + gain @ (u_obs - H @ m)
        P = P - gain @ PHt.T
    P = 0.5 * (P + P.T)
    if not (np.max(np.abs(m)) <= DIVERGENCE_GUARD):
        raise DivergenceError(
            f"filter mean diverged at step {state.step_index + 1}",
            t=(state.step_index + 1) * cfg.h,
        )
    return FilterState(
        mean=m,
        cov=P,
        process_noise=state.process_noise,
        measurement_var=state.measurement_var,
        step_index=state.step_index + 1,
    )


def run_ubkf(init: FilterState, observations, setup: ObservationSetup,
             cfg: DomainConfig, *, truth=None, theta_true: ModelParams | None = None,
             store_stride: int = 1, nonlinear: bool = True,
             update_every: int = 1) -> tuple[RunTrace, str]:
    """Filter a stream of observations; observations[i] updates the state at
    time (i+1) h.

    truth, when given, holds drive coefficients aligned with times 0..n h and
    feeds the error columns of the trace; without it they are nan.  With
    update_every > 1 only every that-many-th step performs a measurement
    correction; the rest are predictions.  An empty stream echoes the initial
    state as a single-row trace.  Returns the trace and "ok" or "diverged";
    a divergence truncates the trace instead of raising.
    """
    observations = np.asarray(observations, dtype=np.float64)
    n = observations.shape[0]
    K = (init.mean.shape[0] - 4) // 2
    H = measurement_matrix(setup, K)
    idx = list(range(0, n + 1, store_stride))
    if idx[-1] != n:
        idx.append(n)
    stored = set(idx)
    times = np.asarray(idx, dtype=np.float64) * cfg.h
    e2 = np.full(len(idx), np.nan)
    cost = np.full(len(idx), np.nan)
    theta_hat = np.empty((len(idx), 3))
    err2 = np.full((len(idx), 3), np.nan)
    state = init
    row = 0

    def record(i, state):
        nonlocal row
        th, c = extract_state(state.mean)
        theta_hat[row] = th
        if truth is not None:
            e = error_coeffs(truth[i], c)
            e2[row] = normalized_mse(e, truth[i])
            cost[row] = cost_C(e[: K + 1])
        if theta_true is not None:
            d = th - theta_true.as_array()
            err2[row] = d * d
        row += 1

    record(0, state)
    status = "ok"
    for i in range(n):
        u = observations[i] if (i + 1) % update_every == 0 else None
        try:
            state = ubkf_step(state, u, setup, cfg, nonlinear=nonlinear, H=H)
        except DivergenceError:
            status = "diverged"
            break
        if (i + 1) in stored:
            record(i + 1, state)
    trace = RunTrace(times=times[:row], e2_norm=e2[:row], cost=cost[:row],
                     theta_hat=theta_hat[:row], err2=err2[:row])
    return trace, status
