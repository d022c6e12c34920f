"""Adaptive response system: sensitivity, gradient fidelity, stability
diagnostics."""

import numpy as np
import pytest

from kssync.errors import ConfigError, DivergenceError
from kssync.master import burn_in_init
from kssync.metrics import cost_C
from kssync.slave import (
    SlaveState,
    adaptive_step,
    build_sensitivity,
    dense_coupling,
    error_jacobian,
    init_slave_state,
    parameter_rhs,
    scalar_coupling,
    slave_rhs,
)
from kssync.spectral import DomainConfig, ModelParams, linear_diag

from conftest import make_hermitian

THETA = ModelParams(1.15, -0.05, 0.98)


class TestSensitivity:
    def test_hand_case(self):
        # omega0 = 1, b = (1, i): column 1 is conj(i) * (1, -i, -1) = (-i, -1, i)
        M = build_sensitivity(np.array([1.0 + 0j, 1j]), 1.0)
        assert M.shape == (3, 2)
        assert np.allclose(M[:, 0], 0.0)
        assert np.allclose(M[:, 1], [-1j, -1.0, 1j], atol=1e-15)

    def test_reconstructs_linear_term(self, rng):
        # M_h^H theta must equal psi(theta) b for any theta
        b = make_hermitian(6, rng)
        w0 = 0.31
        M = build_sensitivity(b, w0)
        th = np.array([0.7, -0.2, 1.3])
        lhs = M.conj().T @ th
        rhs = linear_diag(ModelParams(*th), w0, 6) * b
        assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-15)


def _manual_state(b_prev, bdot_prev, theta, mu, coupling, w0, b=None):
    return SlaveState(
        b=b_prev.copy() if b is None else b,
        theta_hat=theta,
        b_prev=b_prev.copy(),
        bdot_prev=bdot_prev.copy(),
        coupling=coupling,
        mu=mu,
        omega0=w0,
    )


class TestParameterRhs:
    def test_matches_loop_oracle(self, rng):
        K, w0, h, mu = 5, 0.21, 0.01, 37.0
        b_prev = make_hermitian(K, rng)
        bdot_prev = make_hermitian(K, rng)
        a_hat = make_hermitian(K, rng)
        state = _manual_state(b_prev, bdot_prev, THETA, mu, scalar_coupling(0.5), w0)
        got = parameter_rhs(state, a_hat, h)
        r = a_hat - b_prev - h * bdot_prev
        expect = np.zeros(3)
        for k in range(K + 1):
            w = np.array([w0**2 * k**2, -1j * w0**3 * k**3, -(w0**4) * k**4])
            expect += mu * h * (np.conj(b_prev[k]) * w * r[k]).real
        assert np.allclose(got, expect, rtol=1e-12, atol=1e-14)

    def test_zero_mu_freezes(self, rng):
        b = make_hermitian(4, rng)
        state = init_slave_state(b, THETA, scalar_coupling(1.0), 0.0, 0.3)
        assert np.all(parameter_rhs(state, make_hermitian(4, rng), 0.01) == 0.0)

    def test_consistent_fit_gives_zero_update(self, rng):
        # right after initialization the cache holds b itself, so a fit equal
        # to the current state produces no parameter motion
        b = make_hermitian(4, rng)
        state = init_slave_state(b, THETA, scalar_coupling(1.0), 100.0, 0.3)
        assert np.allclose(parameter_rhs(state, b, 0.01), 0.0, atol=1e-15)


class TestGradientFidelity:
    """The update direction must equal -(mu/2) times the gradient of the
    one-step prediction cost

        J(theta) = C( a_hat - b_prev - h * bdot(theta) ),

    with bdot evaluated at the lagged state.  The cost is quadratic in theta,
    so central differences are exact up to rounding."""

    @pytest.mark.parametrize("K", [1, 3, 8])
    def test_matches_central_differences(self, K, rng):
        w0, h, mu, d = 2.0 * np.pi / 30.0, 0.005, 200.0, 0.7
        coupling = scalar_coupling(d)
        b_prev = make_hermitian(K, rng)
        a_prev = make_hermitian(K, rng)
        a_hat = make_hermitian(K, rng)
        th0 = np.array([1.1, -0.07, 0.9])

        def cost(th_arr):
            bdot = slave_rhs(b_prev, a_prev, ModelParams(*th_arr), coupling, w0)
            return cost_C(a_hat - b_prev - h * bdot)

        bdot0 = slave_rhs(b_prev, a_prev, ModelParams(*th0), coupling, w0)
        state = _manual_state(b_prev, bdot0, ModelParams(*th0), mu, coupling, w0)
        update = parameter_rhs(state, a_hat, h)

        grad = np.zeros(3)
        eps = 1e-5
        for i in range(3):
            e = np.zeros(3)
            e[i] = eps
            grad[i] = (cost(th0 + e) - cost(th0 - e)) / (2 * eps)
        expected = -(mu / 2.0) * grad
        denom = max(np.linalg.norm(expected), 1e-12)
        assert np.linalg.norm(update - expected) / denom < 1e-6


class TestAdaptiveStep:
    def test_mu_zero_keeps_parameters(self, rng):
        b = make_hermitian(6, rng, scale=0.1)
        state = init_slave_state(b, THETA, scalar_coupling(1.0), 0.0, 0.2)
        for _ in range(5):
            state = adaptive_step(state, b, 0.005)
        assert state.theta_hat == THETA
        assert state.step_index == 5

    def test_cache_shifts(self, rng):
        b = make_hermitian(4, rng, scale=0.1)
        a = make_hermitian(4, rng, scale=0.1)
        state = init_slave_state(b, THETA, scalar_coupling(1.0), 10.0, 0.2)
        nxt = adaptive_step(state, a, 0.005)
        assert np.array_equal(nxt.b_prev, state.b)
        bdot = slave_rhs(state.b, a, state.theta_hat, state.coupling, state.omega0)
        assert np.allclose(nxt.bdot_prev, bdot)
        assert np.allclose(nxt.b, state.b + 0.005 * bdot)

    def test_mean_mode_stays_real(self, rng):
        b = make_hermitian(4, rng, scale=0.1)
        state = init_slave_state(b, THETA, scalar_coupling(1.0), 10.0, 0.2)
        a = make_hermitian(4, rng, scale=0.1)
        for _ in range(3):
            state = adaptive_step(state, a, 0.005)
            assert state.b[0].imag == 0.0

    def test_divergence_guard(self):
        b = np.array([0.0 + 0j, 1e5 + 0j])
        theta = ModelParams(500.0, 0.0, 0.0)  # strongly unstable
        state = init_slave_state(b, theta, scalar_coupling(0.0), 0.0, 1.0)
        with pytest.raises(DivergenceError):
            for _ in range(200):
                state = adaptive_step(state, b, 1.0)

    def test_negative_mu_rejected(self, rng):
        with pytest.raises(ConfigError):
            init_slave_state(make_hermitian(2, rng), THETA, scalar_coupling(1.0), -1.0, 0.2)


class TestErrorJacobian:
    def test_trivial_mean_only(self):
        J = error_jacobian(np.array([2.0 + 0j]), THETA, scalar_coupling(0.8), 1.0)
        assert J.shape == (1, 1)
        assert J[0, 0] == pytest.approx(-0.8)

    def test_dense_coupling_supported(self, rng):
        a = make_hermitian(3, rng)
        Dm = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
        J_dense = error_jacobian(a, THETA, dense_coupling(Dm), 0.3)
        J_scalar = error_jacobian(a, THETA, scalar_coupling(0.0), 0.3)
        assert np.allclose(J_dense, J_scalar - Dm)

    def test_burned_in_stability_split(self):
        # coupled: all eigenvalues strictly in the left half plane;
        # uncoupled: the attractor's instability shows up as a nonnegative part
        cfg = DomainConfig(X=30.0, K=8, h=0.005, T=1.0)
        a = burn_in_init(THETA, cfg, 100.0)
        ev_coupled = np.linalg.eigvals(error_jacobian(a, THETA, scalar_coupling(1.0), cfg.omega0))
        ev_free = np.linalg.eigvals(error_jacobian(a, THETA, scalar_coupling(0.0), cfg.omega0))
        assert ev_coupled.real.max() < 0.0
        assert ev_free.real.max() >= 0.0


def test_estimation_moves_toward_truth():
    """Short end-to-end adaptation: driving the slave with exact master
    coefficients must shrink the parameter error by orders of magnitude."""
    from kssync.master import simulate_master

    cfg = DomainConfig(X=30.0, K=8, h=0.005, T=40.0)
    c0 = burn_in_init(THETA, cfg, 100.0)
    traj = simulate_master(c0, THETA, cfg)
    b0 = np.zeros(9, dtype=np.complex128)
    b0[1] = 0.5
    state = init_slave_state(b0, ModelParams(0.0, 0.0, 0.0), scalar_coupling(1.0), 500.0, cfg.omega0)
    err0 = np.linalg.norm(state.theta_hat.as_array() - THETA.as_array())
    for i in range(cfg.n_steps):
        state = adaptive_step(state, traj.coeffs[i], cfg.h)
    err1 = np.linalg.norm(state.theta_hat.as_array() - THETA.as_array())
    assert err1 < 1e-3 * err0
