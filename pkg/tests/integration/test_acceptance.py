"""Desk-scale reproductions of the headline results; each takes seconds to minutes."""

import itertools
import math

import numpy as np
import pytest

from weak_measurement_info.analytic_snr import mi_plateau
from weak_measurement_info.info_metrics import (
    estimate_mi,
    estimate_mi_curve,
    exact_mi,
    hoeffding_epsilon,
)
from weak_measurement_info.measurement_models import build_kraus_set
from weak_measurement_info.models import ModelIIParams, ModelKind, SnrParams
from weak_measurement_info.readout import overfit_experiment
from weak_measurement_info.trajectory import Prior

pytestmark = [pytest.mark.slow, pytest.mark.integration]

SAMPLES = 6623


class TestEstimatorContract:
    """The Monte-Carlo estimator honours its (ε, δ) guarantee."""

    def test_hoeffding_coverage(self) -> None:
        """Over 200 seeds at most 5% of estimates miss the exact value by more than ε."""
        kraus_set = build_kraus_set("II", 0.5, 0.2)
        prior = Prior.default()
        exact = exact_mi(kraus_set, prior, 6)
        epsilon = hoeffding_epsilon(SAMPLES, 0.01)
        misses = sum(
            abs(estimate_mi(kraus_set, prior, 6, samples=SAMPLES, seed=seed).value - exact)
            > epsilon
            for seed in range(200)
        )
        assert misses <= 10

    def test_monotone_in_record_length(self) -> None:
        """Exact MI never decreases with T over random models, strengths and efficiencies."""
        rng = np.random.default_rng(7)
        prior = Prior.default()
        for _ in range(50):
            if rng.random() < 0.5:
                kraus_set = build_kraus_set("I", rng.uniform(0.05, 3.0))
                lengths = range(8)
            else:
                kraus_set = build_kraus_set("II", rng.uniform(0.05, 3.0), rng.uniform(0.0, math.pi))
                lengths = range(11)
            eta = rng.uniform(0.3, 1.0)
            values = [exact_mi(kraus_set, prior, T, eta) for T in lengths]
            assert all(b >= a - 1e-12 for a, b in itertools.pairwise(values))


class TestScaling:
    """Weak-measurement scaling and its breakdown."""

    def test_collapse_at_fixed_scaled_field(self) -> None:
        """At a = φ/x² = 1, (0.2, 400) and (0.1, 1600) carry the same information."""
        estimates = []
        for x, T in ((0.2, 400), (0.1, 1600)):
            phi = ModelIIParams.from_scaled_field(x, 1.0).phi
            kraus_set = build_kraus_set("II", x, phi)
            estimates.append(estimate_mi(kraus_set, Prior.default(), T, samples=SAMPLES).value)
        assert estimates[0] == pytest.approx(estimates[1], abs=0.04)

    def test_strength_is_not_monotone(self) -> None:
        """At φ = π/8 and T = 50 an intermediate strength beats the strongest one."""
        prior = Prior.axis("y")
        values = []
        for x in np.linspace(0.1, 3.0, 12):
            kraus_set = build_kraus_set(ModelKind.MODEL_II, float(x), math.pi / 8)
            values.append(estimate_mi(kraus_set, prior, 50, samples=SAMPLES).value)
        epsilon = hoeffding_epsilon(SAMPLES, 0.01)
        assert max(values[1:-1]) >= values[-1] + 2 * epsilon


class TestLowEfficiencyPlateau:
    """Noisy discrete records against the continuum bi-AWGN prediction."""

    @pytest.mark.parametrize(
        ("model", "alpha"), [(ModelKind.MODEL_I, 0.0), (ModelKind.MODEL_II, 10.0)]
    )
    def test_ratio_close_to_one(self, model: ModelKind, alpha: float) -> None:
        """η = 0.1, x = 0.1, x²T = 10: numeric over theory lies in [0.8, 1.2]."""
        x, T, eta = 0.1, 1000, 0.1
        phi = ModelIIParams.from_alpha(x, alpha).phi if model == ModelKind.MODEL_II else 0.0
        kraus_set = build_kraus_set(model, x, phi)
        numeric = estimate_mi_curve(
            kraus_set, Prior.default(), [T], eta, samples=SAMPLES
        ).points[0].estimate.value
        theory = mi_plateau(SnrParams(model=model, eta=eta, alpha=alpha)).mi_bits
        assert 0.8 <= numeric / theory <= 1.2


class TestReadout:
    """A linear learner overfits long records."""

    def test_overfit_long_records(self) -> None:
        """At T = 200 the learner beats Bayes on training data and loses on test data."""
        rows = overfit_experiment(
            build_kraus_set("I", 0.4), [1, 200], n_train=10_000, n_test=10_000, seed=11
        )
        short, long = rows
        assert short.train_acc == pytest.approx(short.bayes_acc, abs=0.03)
        assert short.test_acc == pytest.approx(short.bayes_acc, abs=0.03)
        assert long.train_acc >= long.bayes_acc + 0.01
        assert long.test_acc <= long.bayes_acc - 0.01
