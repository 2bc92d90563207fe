"""Tests for the low-efficiency SNR closed forms and the bi-AWGN information."""

import itertools
import math

import numpy as np
import pytest

from weak_measurement_info.analytic_snr import (
    bi_awgn_mi,
    gamma,
    gamma_inf,
    gamma_model1,
    gamma_model2,
    mi_plateau,
    snr_quadrature,
)
from weak_measurement_info.errors import ValidationError
from weak_measurement_info.models import DampingRegime, ModelKind, SnrParams

TIMES = np.linspace(0.0, 5.0, 20)


class TestGammaClosedForms:
    """γ(t) against numerical integration of the Lindblad separation."""

    def test_model1_matches_quadrature(self) -> None:
        """(η/2)(1 − e^{−8t/τ}) at 20 times."""
        params = SnrParams(model=ModelKind.MODEL_I, tau=1.3, eta=0.7)
        for t in TIMES * params.tau:
            assert gamma(params, t) == pytest.approx(snr_quadrature(params, t), abs=1e-7)

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 2.0, 10.0])
    def test_model2_matches_quadrature(self, alpha: float) -> None:
        """Every damping regime agrees with the quadrature over [0, 5τ]."""
        params = SnrParams(model=ModelKind.MODEL_II, tau=1.3, eta=0.7, alpha=alpha)
        for t in TIMES * params.tau:
            assert gamma(params, t) == pytest.approx(snr_quadrature(params, t), abs=1e-7)

    def test_regimes(self) -> None:
        """α against ½ selects the regime."""
        assert SnrParams(model=ModelKind.MODEL_II, alpha=0.1).regime == DampingRegime.OVERDAMPED
        assert SnrParams(model=ModelKind.MODEL_II, alpha=0.5).regime == DampingRegime.CRITICAL
        assert SnrParams(model=ModelKind.MODEL_II, alpha=2.0).regime == DampingRegime.UNDERDAMPED
        assert SnrParams(model=ModelKind.MODEL_I).regime is None

    @pytest.mark.parametrize("s", [0.1, 0.7, 6.0])
    def test_continuous_at_critical_damping(self, s: float) -> None:
        """The mean of α = ½ ± 10⁻⁴ reproduces the critical formula within 10⁻⁶."""
        below = gamma_model2(s, 1.0, 0.5 - 1e-4, 1.0)
        above = gamma_model2(s, 1.0, 0.5 + 1e-4, 1.0)
        critical = gamma_model2(s, 1.0, 0.5, 1.0)
        assert 0.5 * (below + above) == pytest.approx(critical, abs=1e-6)
        assert abs(above - below) < 1e-2

    def test_limits(self) -> None:
        """Long times reach η/2, 5η and η(1 + α²)/α²."""
        assert gamma_model1(0.0, 1.0, 0.4) == 0.0
        assert gamma_model1(100.0, 1.0, 0.4) == pytest.approx(0.2)
        assert gamma_model2(100.0, 1.0, 0.5, 0.3) == pytest.approx(1.5)
        assert gamma_model2(100.0, 1.0, 2.0, 0.3) == pytest.approx(0.3 * 5.0 / 4.0)
        assert gamma_model2(100.0, 1.0, 0.2, 0.3) == pytest.approx(0.3 * 1.04 / 0.04)

    def test_no_field_grows_linearly(self) -> None:
        """α = 0 gives 4ηt/τ without a plateau."""
        assert gamma_model2(3.0, 2.0, 0.0, 0.5) == pytest.approx(3.0)

    @pytest.mark.parametrize("alpha", [0.0, 0.1, 0.5, 2.0, 10.0])
    def test_nondecreasing_in_time(self, alpha: float) -> None:
        """An accumulated squared separation never decreases."""
        values = [gamma_model2(t, 1.0, alpha, 1.0) for t in np.linspace(0.0, 5.0, 40)]
        assert all(b >= a - 1e-12 for a, b in itertools.pairwise(values))

    def test_rejects_invalid(self) -> None:
        """Time and α are nonnegative."""
        with pytest.raises(ValidationError):
            gamma_model1(-1.0, 1.0, 0.5)
        with pytest.raises(ValidationError):
            gamma_model2(1.0, 1.0, -0.5, 0.5)


class TestBiAwgn:
    """Binary-input Gaussian channel information."""

    def test_endpoints(self) -> None:
        """No SNR carries nothing; a huge SNR carries one bit."""
        assert bi_awgn_mi(0.0) == 0.0
        assert bi_awgn_mi(1e4) == pytest.approx(1.0, abs=1e-6)
        assert bi_awgn_mi(math.inf) == 1.0

    def test_increasing_and_concave(self) -> None:
        """Finite differences are positive, and second differences negative."""
        increasing = [bi_awgn_mi(g) for g in np.linspace(0.0, 20.0, 41)]
        assert all(b > a for a, b in itertools.pairwise(increasing))
        concave = np.array([bi_awgn_mi(g) for g in np.linspace(0.0, 12.0, 25)])
        assert (np.diff(concave, 2) < 0.0).all()

    def test_asymptotic_switch_is_continuous(self) -> None:
        """The quadrature and the large-SNR expansion meet at γ = 50."""
        assert bi_awgn_mi(50.0) == pytest.approx(bi_awgn_mi(50.0 + 1e-6), abs=1e-9)
        assert bi_awgn_mi(60.0) < 1.0

    def test_low_snr_slope(self) -> None:
        """I ≈ γ/(2 ln 2) for small γ."""
        assert bi_awgn_mi(1e-4) == pytest.approx(1e-4 / (2.0 * math.log(2.0)), rel=1e-3)

    def test_rejects_negative_snr(self) -> None:
        """γ ≥ 0."""
        with pytest.raises(ValidationError):
            bi_awgn_mi(-0.1)

    @pytest.mark.slow
    def test_matches_monte_carlo(self) -> None:
        """γ = 1 agrees with a 10⁷-sample simulation of the channel."""
        rng = np.random.default_rng(2024)
        samples = [
            math.log(2.0) - np.logaddexp(0.0, -2.0 - 2.0 * rng.standard_normal(1_000_000))
            for _ in range(10)
        ]
        values = np.concatenate(samples) / math.log(2.0)
        stderr = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(bi_awgn_mi(1.0) - values.mean()) <= 4 * stderr


class TestPlateau:
    """Long-time predictions."""

    def test_model1(self) -> None:
        """γ(∞) = η/2."""
        prediction = mi_plateau(SnrParams(model=ModelKind.MODEL_I, eta=0.1))
        assert prediction.gamma_inf == pytest.approx(0.05)
        assert prediction.mi_bits == pytest.approx(bi_awgn_mi(0.05))
        assert not prediction.divergent

    def test_model2_strong_field(self) -> None:
        """α → ∞ leaves γ(∞) = η."""
        params = SnrParams(model=ModelKind.MODEL_II, eta=0.2, alpha=math.inf)
        assert gamma_inf(params) == pytest.approx(0.2)
        assert mi_plateau(params).mi_bits == pytest.approx(bi_awgn_mi(0.2))
        large = SnrParams(model=ModelKind.MODEL_II, eta=0.2, alpha=1e4)
        assert gamma_inf(large) == pytest.approx(0.2, rel=1e-6)

    def test_model2_without_field_diverges(self) -> None:
        """α = 0 has no plateau; the prediction saturates at one bit."""
        prediction = mi_plateau(SnrParams(model=ModelKind.MODEL_II, eta=0.05, alpha=0.0))
        assert prediction.divergent
        assert math.isinf(prediction.gamma_inf)
        assert prediction.mi_bits == 1.0

    def test_plateau_matches_long_time_gamma(self) -> None:
        """γ(∞) is the long-time limit of γ(t)."""
        params = SnrParams(model=ModelKind.MODEL_II, eta=0.3, alpha=0.8)
        assert gamma(params, 60.0) == pytest.approx(gamma_inf(params), rel=1e-9)
