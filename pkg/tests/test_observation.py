"""Grid sampling, noise calibration, and the trigonometric LS fit."""

import numpy as np
import pytest

from kssync.errors import ConfigError
from kssync.observation import (
    NoiseConfig,
    build_setup,
    calibrate_sigma,
    ls_fit,
    ls_fit_twosided,
    observe,
    uniform_grid,
)
from kssync.spectral import synthesize_field

from conftest import make_hermitian

# 50-digit decimal evaluation of sqrt(2.69 / 10^1.2)
SIGMA_269_12DB = 0.41198000639008197396074474830496914422785151352590


class TestGrid:
    def test_uniform_grid_spacing(self):
        xs = uniform_grid(120, 120.0)
        assert xs[0] == 0.0
        assert xs[1] == pytest.approx(1.0)
        assert len(xs) == 120
        assert xs[-1] < 120.0

    def test_underdetermined_rejected(self):
        with pytest.raises(ConfigError):
            build_setup(uniform_grid(8, 60.0), 4, 60.0)  # needs J >= 9

    def test_degenerate_grid_rejected(self):
        xs = np.zeros(16)
        with pytest.raises(ConfigError):
            build_setup(xs, 4, 60.0)


class TestFit:
    def test_hand_case_single_cosine(self):
        # u = 2 cos(pi x / 2) sampled at 0,1,2,3 on X=4: a_0 = 0, a_1 = 1
        setup = build_setup(np.array([0.0, 1.0, 2.0, 3.0]), 1, 4.0)
        a = ls_fit(setup, np.array([2.0, 0.0, -2.0, 0.0]))
        assert a[0] == pytest.approx(0.0, abs=1e-14)
        assert a[1] == pytest.approx(1.0 + 0j, abs=1e-14)

    def test_exact_recovery(self, rng):
        xs = uniform_grid(16, 60.0)
        setup = build_setup(xs, 5, 60.0)
        c = make_hermitian(5, rng)
        u = synthesize_field(c, xs, 60.0)
        a = ls_fit(setup, u)
        assert np.linalg.norm(a - c) / np.linalg.norm(c) < 1e-10

    def test_matches_lstsq_oracle(self, rng):
        xs = uniform_grid(23, 45.0)
        setup = build_setup(xs, 7, 45.0)
        u = rng.standard_normal(23)
        two = ls_fit_twosided(setup, u)
        ref, *_ = np.linalg.lstsq(setup.design, u, rcond=None)
        assert np.allclose(two, ref, atol=1e-9)

    def test_fold_output_is_hermitian_ready(self, rng):
        xs = uniform_grid(19, 30.0)
        setup = build_setup(xs, 6, 30.0)
        u = rng.standard_normal(19)
        a = ls_fit(setup, u)
        assert a[0].imag == 0.0
        # two-sided solution of real data is conjugate-symmetric to rounding
        two = ls_fit_twosided(setup, u)
        assert np.allclose(two[::-1], np.conj(two), atol=1e-9)

    def test_fit_then_synthesize_reproduces_samples(self, rng):
        # J = 2K+1 makes the design square: interpolation, zero residual
        xs = uniform_grid(13, 30.0)
        setup = build_setup(xs, 6, 30.0)
        u = rng.standard_normal(13)
        a = ls_fit(setup, u)
        assert np.allclose(synthesize_field(a, xs, 30.0), u, atol=1e-9)


class TestNoise:
    def test_calibrate_frozen_value(self):
        assert calibrate_sigma(2.69, 12.0) == pytest.approx(SIGMA_269_12DB, rel=1e-14)

    def test_resolved_snr(self):
        nc = NoiseConfig("target_snr", snr_db=12.0).resolved(2.69)
        assert nc.mode == "fixed_sigma"
        assert nc.sigma == pytest.approx(SIGMA_269_12DB, rel=1e-14)

    def test_observe_off_is_exact(self, rng):
        xs = uniform_grid(16, 60.0)
        setup = build_setup(xs, 5, 60.0)
        c = make_hermitian(5, rng)
        u = observe(c, setup, NoiseConfig("off"))
        assert np.allclose(u, synthesize_field(c, xs, 60.0), atol=0)

    def test_observe_noise_statistics(self, rng):
        xs = uniform_grid(64, 60.0)
        setup = build_setup(xs, 5, 60.0)
        c = make_hermitian(5, rng)
        clean = synthesize_field(c, xs, 60.0)
        nc = NoiseConfig("fixed_sigma", sigma=0.3)
        draws = np.stack([observe(c, setup, nc, rng) - clean for _ in range(3000)])
        var = float(np.var(draws))
        assert var == pytest.approx(0.09, rel=0.05)

    def test_noisy_observe_requires_rng(self, rng):
        xs = uniform_grid(16, 60.0)
        setup = build_setup(xs, 5, 60.0)
        c = make_hermitian(5, rng)
        with pytest.raises(ConfigError):
            observe(c, setup, NoiseConfig("fixed_sigma", sigma=0.1))

    def test_unresolved_snr_rejected(self, rng):
        xs = uniform_grid(16, 60.0)
        setup = build_setup(xs, 5, 60.0)
        c = make_hermitian(5, rng)
        with pytest.raises(ConfigError):
            observe(c, setup, NoiseConfig("target_snr", snr_db=12.0), rng)
