"""Tests for Kraus sets, readout noise kernels and their superoperators."""

import math

import numpy as np
import pydantic
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from qiskit.quantum_info import PTM, Kraus

from weak_measurement_info.errors import ValidationError
from weak_measurement_info.measurement_models import (
    MODEL_I_LABELS,
    MODEL_II_LABELS,
    ErrorKernel,
    build_kraus_set,
    check_completeness,
    error_kernel,
    kraus_universal,
    noisy_superops,
    sqrt_form_kraus,
    x_rotation,
)
from weak_measurement_info.models import ModelKind
from weak_measurement_info.state_algebra import PauliAxis, axis_state
from weak_measurement_info.transfer_matrix import mean_channel

strengths = st.floats(min_value=0.0, max_value=4.0)
angles = st.floats(min_value=-math.pi, max_value=math.pi)


class TestUniversalKraus:
    """The single-axis weak measurement operator."""

    @given(strengths, st.sampled_from(list(PauliAxis)), st.sampled_from([1, -1]))
    def test_matches_square_root_form(self, x: float, axis: PauliAxis, y: int) -> None:
        """Logistic weights equal √(½(I + y·tanh x·σ)) within 1e-12."""
        np.testing.assert_allclose(
            kraus_universal(axis, y, x), sqrt_form_kraus(axis, y, x), atol=1e-12
        )

    def test_zero_strength_is_uninformative(self) -> None:
        """At x = 0 both outcomes apply I/√2."""
        for y in (1, -1):
            np.testing.assert_allclose(kraus_universal("X", y, 0.0), np.eye(2) / math.sqrt(2))

    def test_large_strength_is_projective(self) -> None:
        """Large x tends to the projector and stays finite."""
        operator = kraus_universal("Z", 1, 40.0)
        assert np.isfinite(operator).all()
        np.testing.assert_allclose(operator, np.diag([1.0, 0.0]), atol=1e-15)

    def test_rejects_bad_sign(self) -> None:
        """Outcome signs are ±1."""
        with pytest.raises(ValidationError):
            kraus_universal("Z", 2, 0.3)

    def test_rotation_is_unitary(self) -> None:
        """exp(−iφX/2) is unitary."""
        rotation = x_rotation(0.7)
        np.testing.assert_allclose(rotation.conj().T @ rotation, np.eye(2), atol=1e-15)


class TestKrausSets:
    """Model I and Model II outcome sets."""

    @settings(max_examples=50)
    @given(strengths, angles)
    def test_completeness(self, x: float, phi: float) -> None:
        """Σ K†K = I within 1e-12 for both models."""
        assert build_kraus_set("I", x).completeness_error() < 1e-12
        assert build_kraus_set("II", x, phi).completeness_error() < 1e-12
        check_completeness(build_kraus_set("II", x, phi))

    def test_labels(self) -> None:
        """Outcome order is fixed."""
        assert build_kraus_set("I", 0.3).labels == MODEL_I_LABELS
        assert build_kraus_set("II", 0.3).labels == MODEL_II_LABELS
        assert build_kraus_set(ModelKind.MODEL_II, 0.3, 0.1).kind == ModelKind.MODEL_II

    def test_model1_rejects_field(self) -> None:
        """Model I has no precession."""
        with pytest.raises(ValidationError):
            build_kraus_set("I", 0.3, 0.1)

    def test_probabilities_sum_to_one(self) -> None:
        """Outcome probabilities of a state sum to one."""
        kraus_set = build_kraus_set("I", 0.8)
        probabilities = kraus_set.probabilities(axis_state("Y", 1))
        assert probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        assert probabilities[2] == pytest.approx((1.0 + math.tanh(0.8)) / 6.0)

    @pytest.mark.parametrize(("x", "phi"), [(0.3, 0.0), (1.0, 0.4), (2.5, -2.0)])
    def test_model2_superop_closed_form(self, x: float, phi: float) -> None:
        """E_y = ½[[1,0,yt·sinφ,yt·cosφ],[0,s,0,0],[0,0,s·cosφ,−s·sinφ],[yt,0,sinφ,cosφ]]."""
        t, s = math.tanh(x), 1.0 / math.cosh(x)
        c, sn = math.cos(phi), math.sin(phi)
        superops = build_kraus_set("II", x, phi).superops
        for index, y in enumerate((1, -1)):
            expected = 0.5 * np.array(
                [
                    [1.0, 0.0, y * t * sn, y * t * c],
                    [0.0, s, 0.0, 0.0],
                    [0.0, 0.0, s * c, -s * sn],
                    [y * t, 0.0, sn, c],
                ]
            )
            np.testing.assert_allclose(superops[index], expected, atol=1e-12)

    @pytest.mark.parametrize("x", [0.2, 1.0, 3.0])
    def test_model1_superop_closed_form(self, x: float) -> None:
        """Outcome (σ, y) maps p0 ↦ (p0 + yt·p_σ)/6, p_σ ↦ (yt·p0 + p_σ)/6, others ↦ s·p/6."""
        t, s = math.tanh(x), 1.0 / math.cosh(x)
        superops = build_kraus_set("I", x).superops
        for index, label in enumerate(MODEL_I_LABELS):
            axis = "XYZ".index(label[0]) + 1
            y = 1 if label[1] == "+" else -1
            expected = np.diag([1.0, s, s, s])
            expected[axis, axis] = 1.0
            expected[0, axis] = expected[axis, 0] = y * t
            np.testing.assert_allclose(superops[index], expected / 6.0, atol=1e-12)

    @pytest.mark.parametrize(("kind", "x", "phi"), [("I", 0.7, 0.0), ("II", 1.3, 0.9)])
    def test_superops_match_qiskit_ptm(self, kind: str, x: float, phi: float) -> None:
        """Per-outcome superoperators agree with Qiskit's Pauli transfer matrices."""
        kraus_set = build_kraus_set(kind, x, phi)
        for operator, superop in zip(kraus_set.operators, kraus_set.superops, strict=True):
            np.testing.assert_allclose(PTM(Kraus([operator])).data, superop, atol=1e-12)


class TestErrorKernel:
    """Readout noise kernel."""

    @pytest.mark.parametrize("eta", [0.0, 0.3, 1.0])
    def test_column_stochastic(self, eta: float) -> None:
        """Columns of β sum to one."""
        kernel = error_kernel(6, eta)
        np.testing.assert_allclose(kernel.matrix.sum(axis=0), np.ones(6), atol=1e-15)
        assert kernel.matrix.min() >= 0.0

    def test_limits(self) -> None:
        """η = 1 shows the truth and η = 0 shows a uniform outcome."""
        np.testing.assert_allclose(error_kernel(2, 1.0).matrix, np.eye(2))
        np.testing.assert_allclose(error_kernel(2, 0.0).matrix, np.full((2, 2), 0.5))

    def test_success_probability(self) -> None:
        """Pr[shown = true] = (1 + (n−1)√η)/n."""
        kernel = error_kernel(6, 0.25)
        assert kernel.success_probability == pytest.approx(np.diag(kernel.matrix)[0])
        assert kernel.success_probability == pytest.approx((1.0 + 5 * 0.5) / 6)

    @pytest.mark.parametrize(("n", "eta"), [(0, 0.5), (2, -0.1), (2, 1.5)])
    def test_rejects_invalid(self, n: int, eta: float) -> None:
        """n ≥ 1 and η ∈ [0, 1]."""
        with pytest.raises(ValidationError):
            error_kernel(n, eta)

    @pytest.mark.parametrize(("n", "eta"), [(0, 0.5), (2, -0.1), (2, 1.5), (2, float("nan"))])
    def test_direct_construction_is_checked(self, n: int, eta: float) -> None:
        """The model itself refuses the values the factory refuses."""
        with pytest.raises(pydantic.ValidationError):
            ErrorKernel(n=n, eta=eta)

    def test_zero_efficiency_superops_are_uninformative(self) -> None:
        """At η = 0 every shown outcome applies the mean channel divided by |O|."""
        kraus_set = build_kraus_set("II", 0.9, 0.3)
        expected = mean_channel(kraus_set) / kraus_set.size
        for superop in noisy_superops(kraus_set, 0.0):
            np.testing.assert_allclose(superop, expected, atol=1e-14)

    def test_noisy_superops_preserve_the_mean_channel(self) -> None:
        """Summing shown outcomes gives the same mean channel for any η."""
        kraus_set = build_kraus_set("I", 0.5)
        np.testing.assert_allclose(
            noisy_superops(kraus_set, 0.4).sum(axis=0), mean_channel(kraus_set), atol=1e-14
        )
