"""Tests for mutual information estimators."""

import itertools
import math

import numpy as np
import pytest
from scipy.special import expit

from weak_measurement_info.errors import CapacityError, ValidationError
from weak_measurement_info.executors import NumpyExecutor
from weak_measurement_info.info_metrics import (
    binary_entropy,
    binomial_mi,
    entropy_from_log,
    estimate_mi,
    estimate_mi_curve,
    exact_mi,
    fano_accuracy_upper_bound,
    hoeffding_epsilon,
    hoeffding_samples,
    last_measurement_mi,
    record_conditional_entropy,
)
from weak_measurement_info.measurement_models import KrausSet, build_kraus_set
from weak_measurement_info.trajectory import Prior, record_likelihood
from weak_measurement_info.transfer_matrix import correlation_length, mean_channel


def exact_bayes_accuracy(kraus_set: KrausSet, prior: Prior, T: int) -> float:
    """Σ_r max_j P0(j)·Pr[r | j] over every record of length ``T``."""
    total = 0.0
    for record in itertools.product(range(kraus_set.size), repeat=T):
        total += max(
            p * record_likelihood(kraus_set, state, record)
            for p, state in zip(prior.probabilities, prior.states, strict=True)
        )
    return total


class TestHoeffding:
    """Sample counts and half-widths."""

    def test_sample_counts(self) -> None:
        """ε = 0.02 and 0.01 at δ = 0.01."""
        assert hoeffding_samples(0.02, 0.01) == 6623
        assert hoeffding_samples(0.01, 0.01) == 26492

    def test_value_range_scales_quadratically(self) -> None:
        """Doubling the range quadruples the sample count (up to rounding)."""
        assert hoeffding_samples(0.02, 0.01, 2.0) == math.ceil(4 * math.log(200) / (2 * 0.02**2))

    def test_epsilon_inverts_samples(self) -> None:
        """The achieved half-width is no larger than the target."""
        assert hoeffding_epsilon(6623, 0.01) <= 0.02
        assert hoeffding_epsilon(6622, 0.01) > 0.02

    @pytest.mark.parametrize(("epsilon", "delta"), [(0.0, 0.01), (0.02, 0.0), (0.02, 1.0)])
    def test_rejects_invalid(self, epsilon: float, delta: float) -> None:
        """ε > 0 and δ ∈ (0, 1)."""
        with pytest.raises(ValidationError):
            hoeffding_samples(epsilon, delta)


class TestEntropies:
    """Entropy helpers."""

    def test_binary_entropy(self) -> None:
        """H₂ at ½, 0 and 1."""
        assert binary_entropy(0.5) == pytest.approx(1.0)
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_entropy_from_log_handles_zero_probabilities(self) -> None:
        """−inf log-probabilities contribute nothing."""
        rows = np.log(np.array([[0.5, 0.5], [1.0, 0.0]]))
        np.testing.assert_allclose(entropy_from_log(rows), [1.0, 0.0], atol=1e-15)

    def test_record_conditional_entropy(self) -> None:
        """Posterior entropy after one outcome at x = 1 is H₂(expit(2))."""
        value = record_conditional_entropy(build_kraus_set("II", 1.0), Prior.default(), [1])
        assert value == pytest.approx(binary_entropy(float(expit(2.0))), abs=1e-12)


class TestExactMi:
    """Exhaustive enumeration."""

    def test_single_outcome(self) -> None:
        """One Model II outcome at x = 1 carries 1 − H₂(expit(2)) bits."""
        expected = 1.0 - binary_entropy(float(expit(2.0)))
        assert exact_mi(build_kraus_set("II", 1.0), Prior.default(), 1) == pytest.approx(
            expected, abs=1e-12
        )
        assert expected == pytest.approx(0.47293, abs=1e-5)

    def test_projective_model1_gives_one_third(self) -> None:
        """Only the Z third of projective Model I outcomes reveals ↑/↓."""
        value = exact_mi(build_kraus_set("I", 20.0), Prior.default(), 1)
        assert value == pytest.approx(1.0 / 3.0, abs=1e-6)

    @pytest.mark.parametrize("T", [0, 1, 4])
    def test_zero_strength(self, T: int) -> None:
        """x = 0 reveals nothing."""
        assert exact_mi(build_kraus_set("II", 0.0, 0.4), Prior.default(), T) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_zero_efficiency(self, model1: KrausSet, prior: Prior) -> None:
        """η = 0 reveals nothing."""
        assert exact_mi(model1, prior, 4, eta=0.0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.5])
    def test_commuting_case_matches_binomial(self, x: float) -> None:
        """Without a field, Model II reduces to counting + outcomes."""
        kraus_set = build_kraus_set("II", x)
        for T in (1, 2, 5, 12):
            assert exact_mi(kraus_set, Prior.default(), T) == pytest.approx(
                binomial_mi(x, T), abs=1e-10
            )

    def test_binomial_saturates(self) -> None:
        """200 outcomes at x = 1 identify the state almost surely."""
        assert binomial_mi(1.0, 200) >= 1.0 - 1e-6
        assert binomial_mi(1.0, 0) == 0.0

    def test_bounded_by_prior_entropy(self, model2: KrausSet) -> None:
        """0 ≤ I ≤ H(P0)."""
        for prior in (Prior.axis("x"), Prior.axis("y"), Prior.default()):
            value = exact_mi(model2, prior, 6)
            assert 0.0 <= value <= prior.entropy + 1e-12

    def test_block_enumeration_matches_direct_sum(self, model1: KrausSet, prior: Prior) -> None:
        """The blocked expansion agrees with summing record by record."""
        T = 3
        total = 0.0
        for record in itertools.product(range(6), repeat=T):
            joint = [
                p * record_likelihood(model1, state, record)
                for p, state in zip(prior.probabilities, prior.states, strict=True)
            ]
            marginal = sum(joint)
            for j, p in zip(joint, prior.probabilities, strict=True):
                if j > 0.0:
                    total += j * math.log2(j / (marginal * p))
        assert exact_mi(model1, prior, T) == pytest.approx(total, abs=1e-12)

    def test_capacity_guard(self, model1: KrausSet, prior: Prior) -> None:
        """6^10 records exceed the enumeration limit."""
        exact_mi(model1, prior, 9)
        with pytest.raises(CapacityError):
            exact_mi(model1, prior, 10)


class TestEstimateMi:
    """Monte-Carlo estimation."""

    def test_within_epsilon_of_exact(self, model2: KrausSet, prior: Prior) -> None:
        """The default ε = 0.02 estimate lands within ε of the exact value."""
        exact = exact_mi(model2, prior, 6)
        estimate = estimate_mi(model2, prior, 6, epsilon=0.02, delta=0.01, seed=3)
        assert estimate.samples == 6623
        assert estimate.epsilon <= 0.02
        assert abs(estimate.value - exact) <= 0.02

    def test_reproducible(self, model1: KrausSet, prior: Prior) -> None:
        """Same seed, same estimate; another seed, another estimate."""
        first = estimate_mi(model1, prior, 5, samples=600, seed=1)
        second = estimate_mi(model1, prior, 5, samples=600, seed=1)
        other = estimate_mi(model1, prior, 5, samples=600, seed=2)
        assert first.value == second.value
        assert first.value != other.value

    def test_independent_of_worker_count(self, model1: KrausSet, prior: Prior) -> None:
        """Chunked fan-out gives bit-identical results on any thread count."""
        serial = estimate_mi(model1, prior, 5, samples=1500, seed=8)
        parallel = estimate_mi(
            model1, prior, 5, samples=1500, seed=8, executor=NumpyExecutor(max_workers=3)
        )
        assert serial.value == parallel.value

    def test_curve_uses_record_prefixes(self, model2: KrausSet, prior: Prior) -> None:
        """Each point of a curve equals the single-length estimate with the same seed."""
        curve = estimate_mi_curve(model2, prior, [2, 5, 9], samples=800, seed=4)
        assert [p.T for p in curve.points] == [2, 5, 9]
        single = estimate_mi(model2, prior, 5, samples=800, seed=4)
        assert curve.points[1].estimate.value == pytest.approx(single.value, abs=1e-12)
        assert curve.scaling_abscissa == pytest.approx([0.5, 1.25, 2.25])

    def test_rejects_unsorted_lengths(self, model2: KrausSet, prior: Prior) -> None:
        """Lengths must increase strictly."""
        with pytest.raises(ValidationError):
            estimate_mi_curve(model2, prior, [5, 2], samples=10)

    def test_requires_samples_or_epsilon(self, model2: KrausSet, prior: Prior) -> None:
        """Either M or ε determines the sample count."""
        with pytest.raises(ValidationError):
            estimate_mi(model2, prior, 3)


class TestLastMeasurement:
    """Information in the T-th outcome alone."""

    def test_commuting_case_is_constant(self) -> None:
        """Without a field the mean channel keeps pz, so every outcome is equally informative."""
        kraus_set = build_kraus_set("II", 0.7)
        values = [last_measurement_mi(kraus_set, Prior.default(), T) for T in (1, 5, 50, 400)]
        assert max(values) - min(values) <= 1e-12
        assert values[0] == pytest.approx(exact_mi(kraus_set, Prior.default(), 1), abs=1e-12)

    def test_decays_at_twice_the_inverse_correlation_length(self) -> None:
        """ln I(A_T) falls with slope −2/ξ for Model I."""
        kraus_set = build_kraus_set("I", 1.0)
        xi = correlation_length(mean_channel(kraus_set)).xi
        lengths = np.arange(5, 41)
        values = [last_measurement_mi(kraus_set, Prior.default(), int(T)) for T in lengths]
        slope = np.polyfit(lengths, np.log(values), 1)[0]
        assert slope == pytest.approx(-2.0 / xi, rel=0.02)

    def test_rejects_zero_length(self, model1: KrausSet, prior: Prior) -> None:
        """The first outcome is T = 1."""
        with pytest.raises(ValidationError):
            last_measurement_mi(model1, prior, 0)


class TestFano:
    """Fano's accuracy bound."""

    def test_limits(self) -> None:
        """No information allows only guessing; full information allows certainty."""
        assert fano_accuracy_upper_bound(0.0, 1.0, 2) == pytest.approx(0.5)
        assert fano_accuracy_upper_bound(1.0, 1.0, 2) == 1.0

    def test_monotone_in_information(self) -> None:
        """More information never lowers the bound."""
        bounds = [fano_accuracy_upper_bound(mi, 1.0, 2) for mi in np.linspace(0.0, 1.0, 11)]
        assert all(b <= c + 1e-12 for b, c in itertools.pairwise(bounds))

    def test_tight_for_one_outcome(self) -> None:
        """A single binary-symmetric outcome meets the bound with equality."""
        kraus_set, prior = build_kraus_set("II", 1.0), Prior.default()
        accuracy = exact_bayes_accuracy(kraus_set, prior, 1)
        assert accuracy == pytest.approx(0.8808, abs=1e-4)
        bound = fano_accuracy_upper_bound(exact_mi(kraus_set, prior, 1), 1.0, 2)
        assert bound == pytest.approx(accuracy, abs=1e-8)

    @pytest.mark.parametrize(("kind", "x", "phi", "T"), [("I", 0.8, 0.0, 4), ("II", 0.6, 0.5, 8)])
    def test_bayes_accuracy_respects_bound(self, kind: str, x: float, phi: float, T: int) -> None:
        """Exact Bayes accuracy never exceeds the Fano bound of the exact MI."""
        kraus_set, prior = build_kraus_set(kind, x, phi), Prior.default()
        bound = fano_accuracy_upper_bound(exact_mi(kraus_set, prior, T), 1.0, 2)
        assert exact_bayes_accuracy(kraus_set, prior, T) <= bound + 1e-9

    def test_rejects_excess_information(self) -> None:
        """I cannot exceed H(P0)."""
        with pytest.raises(ValidationError):
            fano_accuracy_upper_bound(1.5, 1.0, 2)
