"""Response system with diffusive coupling and the online parameter update.

The slave integrates

    db/dt = psi(theta_hat) b - (i omega0 / 2) eta(b) + D (a_hat - b)

against the fitted drive coefficients a_hat.  The parameter estimate follows
the descent direction of the one-step prediction cost

    theta_hat_dot = mu h Re{ M_h [ a_hat(t) - b(t-h) - h bdot(t-h) ] },

where M_h is the sensitivity of the linear term built from the lagged state.
Under the Euler discretization the bracket equals the current coefficient
error, so the update is the classic error-times-sensitivity adaptation law;
it equals -(mu/2) times the gradient of the linearized cost in theta_hat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DivergenceError
from .master import DIVERGENCE_GUARD
from .spectral import ModelParams, coeff_at, linear_diag

__all__ = [
    "CouplingMatrix",
    "scalar_coupling",
    "dense_coupling",
    "coupling_apply",
    "SlaveState",
    "init_slave_state",
    "slave_rhs",
    "build_sensitivity",
    "parameter_rhs",
    "adaptive_step",
    "error_jacobian",
]


@dataclass(frozen=True)
class CouplingMatrix:
    """Coupling operator D; scalar multiple of the identity or a dense matrix."""

    kind: str
    d_scalar: float = 0.0
    dense: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "scalar_identity":
            if self.d_scalar < 0 or not np.isfinite(self.d_scalar):
                raise ConfigError(f"coupling strength must be finite and >= 0, got {self.d_scalar}")
        elif self.kind == "dense":
            m = self.dense
            if m is None or m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ConfigError("dense coupling needs a square matrix")
        else:
            raise ConfigError(f"unknown coupling kind {self.kind!r}")


def scalar_coupling(d: float) -> CouplingMatrix:
    return CouplingMatrix("scalar_identity", d_scalar=float(d))


def dense_coupling(matrix) -> CouplingMatrix:
    return CouplingMatrix("dense", dense=np.asarray(matrix, dtype=np.complex128))


def coupling_apply(coupling: CouplingMatrix, v: np.ndarray) -> np.ndarray:
    if coupling.kind == "scalar_identity":
        return coupling.d_scalar * v
    return coupling.dense @ v


def coupling_dense(coupling: CouplingMatrix, K: int) -> np.ndarray:
    if coupling.kind == "scalar_identity":
        return coupling.d_scalar * np.eye(K + 1, dtype=np.complex128)
    return coupling.dense


@dataclass
class SlaveState:
    """Response-system state plus the one-step lag cache for adaptation.

    b_prev and bdot_prev hold the coefficients and their derivative from the
    previous step; at initialization they are the initial state and zero.
    """

    b: np.ndarray
    theta_hat: ModelParams
    b_prev: np.ndarray
    bdot_prev: np.ndarray
    coupling: CouplingMatrix
    mu: float
    omega0: float
    step_index: int = 0


def init_slave_state(b0, theta0: ModelParams, coupling: CouplingMatrix,
                     mu: float, omega0: float) -> SlaveState:
    if mu < 0 or not np.isfinite(mu):
        raise ConfigError(f"adaptation rate must be finite and >= 0, got {mu}")
    b0 = np.ascontiguousarray(b0, dtype=np.complex128)
    return SlaveState(
        b=b0.copy(),
        theta_hat=theta0,
        b_prev=b0.copy(),
        bdot_prev=np.zeros_like(b0),
        coupling=coupling,
        mu=mu,
        omega0=omega0,
    )


def slave_rhs(b, a_hat, theta_hat, coupling: CouplingMatrix, omega0: float) -> np.ndarray:
    """Time derivative of the slave coefficients under diffusive coupling."""
    b = np.ascontiguousarray(b, dtype=np.complex128)
    lin = linear_diag(theta_hat, omega0, b.shape[0] - 1)
    rhs = kernels.master_rhs_kernel(b, lin, omega0)
    rhs += coupling_apply(coupling, a_hat - b)
    return rhs


def build_sensitivity(b_prev, omega0: float) -> np.ndarray:
    """Sensitivity M_h of the linear term, shape (3, K+1).

    Column k is conj(b_k(t-h)) * (omega0^2 k^2, -i omega0^3 k^3, -omega0^4 k^4),
    so that M_h^H theta equals psi(theta) b(t-h).  Column 0 vanishes: the mean
    mode carries no parameter information.
    """
    b_prev = np.asarray(b_prev, dtype=np.complex128)
    k = np.arange(b_prev.shape[0], dtype=np.float64)
    k2 = k * k
    rows = np.stack([
        (omega0**2) * k2 + 0j,
        (-1j * omega0**3) * (k2 * k),
        -(omega0**4) * (k2 * k2) + 0j,
    ])
    return np.conj(b_prev)[None, :] * rows


def parameter_rhs(state: SlaveState, a_hat, h: float) -> np.ndarray:
    """Adaptation-law derivative of theta_hat (zero when mu is zero)."""
    if state.mu == 0.0:
        return np.zeros(3)
    M = build_sensitivity(state.b_prev, state.omega0)
    r = a_hat - state.b_prev - h * state.bdot_prev
    return state.mu * h * (M @ r).real


def adaptive_step(state: SlaveState, a_hat, h: float) -> SlaveState:
    """Advance slave coefficients and parameter estimate one Euler step.

    The coefficient derivative uses the current theta_hat; the parameter
    derivative uses the lagged cache; both states then advance together and
    the cache shifts forward.
    """
    bdot = slave_rhs(state.b, a_hat, state.theta_hat, state.coupling, state.omega0)
    theta_dot = parameter_rhs(state, a_hat, h)
    b_new = state.b + h * bdot
    b_new[0] = b_new[0].real
    m = np.max(np.abs(b_new))
    th = state.theta_hat.as_array() + h * theta_dot
    if not (m <= DIVERGENCE_GUARD) or not np.all(np.isfinite(th)):
        raise DivergenceError(
            f"slave diverged at step {state.step_index + 1}",
            t=(state.step_index + 1) * h,
        )
    return SlaveState(
        b=b_new,
        theta_hat=ModelParams.from_array(th),
        b_prev=state.b,
        bdot_prev=bdot,
        coupling=state.coupling,
        mu=state.mu,
        omega0=state.omega0,
        step_index=state.step_index + 1,
    )


def error_jacobian(a_bar, theta, coupling: CouplingMatrix, omega0: float) -> np.ndarray:
    """Linearization of the synchronization-error dynamics at zero error.

    Returns psi(theta) - i omega0 Q - D, where row k of Q holds the drive
    coefficients a_{k-j} (row 0 zero, Hermitian extension for negative
    indices, zero beyond the truncation).  Synchronization is locally stable
    when every eigenvalue has negative real part.
    """
    a_bar = np.asarray(a_bar, dtype=np.complex128)
    K = a_bar.shape[0] - 1
    J = np.diag(linear_diag(theta, omega0, K))
    Q = np.zeros((K + 1, K + 1), dtype=np.complex128)
    for k in range(1, K + 1):
        for j in range(K + 1):
            Q[k, j] = coeff_at(a_bar, k - j)
    return J - 1j * omega0 * Q - coupling_dense(coupling, K)
