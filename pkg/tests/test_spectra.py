import json

import numpy as np
import pytest

from rkhslab import (
    DivergentEmbedding,
    SpectralKernel,
    Spectrum,
    effective_dimension,
    embedding_norm,
    estimate_alpha_star,
    make_power_law_spectrum,
    theoretical_exponent,
    v2_envelope,
)
from rkhslab.kernels import DotProductSpectrum


class TestMakePowerLawSpectrum:
    def test_beta2_first_values(self):
        s = make_power_law_spectrum(2.0, 0.0, 3)
        assert np.allclose(s.mu, [1.0, 0.25, 1.0 / 9.0])

    def test_mu1_dominates(self):
        s = make_power_law_spectrum(2.0, 0.0, 2)
        assert s.mu[0] == 1.0 and s.mu[0] >= s.mu[1]

    def test_negative_zeta_running_minimum(self):
        # raw profile is non-monotone at small i: phi(2) > phi(3) for zeta=-1
        phi = lambda i: i * np.log(i) ** -1.0
        assert phi(2) > phi(3)
        s = make_power_law_spectrum(2.0, -1.0, 4)
        assert np.all(np.diff(s.mu) <= 0)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            make_power_law_spectrum(1.0, 0.0, 10)
        with pytest.raises(ValueError):
            make_power_law_spectrum(2.0, 0.0, 1)

    def test_envelope_recorded_and_tail_positive(self):
        s = make_power_law_spectrum(1.5, 0.5, 100)
        c1, c2 = s.envelope
        assert 0 < c1 <= c2
        assert s.tail_mass > 0
        i = np.arange(2, 101, dtype=float)
        raw = (i * np.log(i) ** 0.5) ** -1.5
        assert np.all(s.mu[1:] >= c1 * raw - 1e-15)
        assert np.all(s.mu[1:] <= c2 * raw + 1e-15)

    def test_finite_trace(self):
        s = make_power_law_spectrum(2.0, 0.0, 1000)
        assert np.isfinite(s.trace())


class TestEffectiveDimension:
    def test_direct_sum(self):
        s = Spectrum(np.array([1.0, 0.25, 1.0 / 9.0]), beta=2.0, zeta=0.0)
        assert effective_dimension(s, 1.0) == pytest.approx(0.5 + 0.2 + 0.1)

    def test_large_lambda_limit(self):
        s = Spectrum(np.array([1.0]), beta=2.0, zeta=0.0)
        assert effective_dimension(s, 1e12) == pytest.approx(0.0, abs=1e-11)

    def test_symmetry_point(self):
        c = 0.37
        s = Spectrum(np.array([c]), beta=2.0, zeta=0.0)
        assert effective_dimension(s, c) == pytest.approx(0.5)

    def test_rejects_nonpositive_lambda(self):
        s = Spectrum(np.array([1.0]), beta=2.0, zeta=0.0)
        with pytest.raises(ValueError):
            effective_dimension(s, 0.0)

    def test_monotone_in_lambda(self):
        s = make_power_law_spectrum(2.0, 0.0, 200)
        grid = np.geomspace(1e-4, 10, 30)
        vals = [effective_dimension(s, l) for l in grid]
        assert np.all(np.diff(vals) < 0)


class TestEmbeddingNorm:
    def test_single_constant_mode(self):
        k = SpectralKernel(Spectrum(np.array([1.0]), beta=2.0, zeta=0.0))
        assert embedding_norm(k, 1.0).m_alpha == pytest.approx(1.0)

    def test_two_mode_closed_form(self):
        k = SpectralKernel(Spectrum(np.array([1.0, 0.25]), beta=2.0, zeta=0.0))
        rep = embedding_norm(k, 1.0)
        assert rep.m_alpha**2 == pytest.approx(1.5)
        assert rep.method == "closed_form_cosine"

    def test_dot_product_closed_form(self):
        dp = DotProductSpectrum(2, np.array([1.0, 1.0 / 8.0]))
        rep = embedding_norm(dp, 1.0)
        assert rep.m_alpha**2 == pytest.approx(1.0 + 3.0 / 8.0)
        assert rep.method == "closed_form_sphere"

    def test_divergent_below_index(self):
        k = SpectralKernel(make_power_law_spectrum(2.0, 0.0, 10_000))
        with pytest.raises(DivergentEmbedding):
            embedding_norm(k, 0.4)

    def test_alpha_one_always_finite(self):
        for beta in (1.5, 2.0, 3.0):
            k = SpectralKernel(make_power_law_spectrum(beta, 0.0, 5000))
            assert np.isfinite(embedding_norm(k, 1.0).m_alpha)

    def test_m_alpha_non_increasing_in_alpha(self):
        k = SpectralKernel(make_power_law_spectrum(2.0, 0.0, 5000))
        alphas = [0.6, 0.7, 0.8, 0.9, 1.0]
        vals = [embedding_norm(k, a).m_alpha for a in alphas]
        assert np.all(np.diff(vals) <= 0)

    def test_json_roundtrip(self):
        k = SpectralKernel(make_power_law_spectrum(2.0, 0.0, 100))
        payload = json.loads(embedding_norm(k, 1.0).to_json())
        assert payload["method"] == "closed_form_cosine"
        assert payload["m_alpha"] > 0


class TestAlphaStar:
    @pytest.mark.parametrize("beta", [1.5, 2.0, 3.0])
    def test_at_least_inverse_beta(self, beta):
        k = SpectralKernel(make_power_law_spectrum(beta, 0.0, 10_000))
        a = estimate_alpha_star(k)
        assert a >= 1.0 / beta - 1e-12

    def test_close_to_inverse_beta_for_bounded_basis(self):
        k = SpectralKernel(make_power_law_spectrum(2.0, 0.0, 50_000))
        assert estimate_alpha_star(k) == pytest.approx(0.5, abs=0.02)


class TestTheoreticalExponent:
    def test_boundary_case(self):
        rep = theoretical_exponent(0.0, 2.0, 0.0, 0.5)
        assert rep.exponent == pytest.approx(0.0)
        assert rep.classification == "generalizes_poorly"

    def test_inconsistent_case(self):
        rep = theoretical_exponent(0.5, 2.0, 0.0, 0.5)
        assert rep.exponent == pytest.approx(1.0)
        assert rep.classification == "inconsistent"

    def test_vanishing_numerator(self):
        beta, alpha_star = 2.5, 0.6
        gamma = 3.0 * (alpha_star - 1.0 / beta)
        rep = theoretical_exponent(gamma, beta, 0.0, alpha_star)
        assert rep.exponent == pytest.approx(0.0, abs=1e-14)

    def test_rejects_bad_gamma(self):
        with pytest.raises(ValueError):
            theoretical_exponent(1.0, 2.0, 0.0, 0.5)


class TestV2Envelope:
    def test_one_term(self):
        s = Spectrum(np.array([1.0]), beta=2.0, zeta=0.0)
        curve = v2_envelope(s, 0.0, [0.25])
        assert curve.values[0] == pytest.approx(0.64)

    def test_two_term_gamma_half(self):
        s = Spectrum(np.array([1.0, 0.25]), beta=2.0, zeta=0.0)
        curve = v2_envelope(s, 0.5, [0.25])
        assert curve.values[0] == pytest.approx(0.64 + 0.5)

    def test_rejects_out_of_range_grid(self):
        s = Spectrum(np.array([1.0]), beta=2.0, zeta=0.0)
        with pytest.raises(ValueError):
            v2_envelope(s, 0.0, [0.6])
        with pytest.raises(ValueError):
            v2_envelope(s, 0.0, [])

    def test_csv_export(self, tmp_path):
        s = make_power_law_spectrum(2.0, 0.0, 100)
        curve = v2_envelope(s, 0.0, np.geomspace(1e-3, 0.1, 5))
        path = tmp_path / "curve.csv"
        curve.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "lambda,value"
        assert len(lines) == 6


class TestAppendixBounds:
    def test_f_gamma_bound_sampled(self):
        # t^gamma / (t + lam) <= lam^(gamma - 1) over random triples
        rng = np.random.default_rng(7)
        t = rng.exponential(1.0, 1000)
        lam = rng.exponential(0.5, 1000) + 1e-6
        gamma = rng.random(1000)
        lhs = t**gamma / (t + lam)
        assert np.all(lhs <= lam ** (gamma - 1.0) + 1e-12)

    @pytest.mark.parametrize("beta", [1.5, 2.0, 3.0])
    def test_effective_dimension_decay_rate(self, beta):
        from rkhslab import fit_loglog_slope

        s = make_power_law_spectrum(beta, 0.0, 100_000)
        alpha = 1.0 / beta + 0.05
        grid = np.geomspace(1e-6, 1e-1, 20)
        vals = np.array([effective_dimension(s, l) for l in grid])
        slope, _ = fit_loglog_slope(1.0 / grid, vals)
        assert slope <= alpha + 0.05
