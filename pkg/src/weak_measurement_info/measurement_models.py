"""Kraus operators of the universal weak measurement, Model I and Model II."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from .errors import ValidationError
from .models import ModelIIParams, ModelIParams, ModelKind
from .state_algebra import (
    IDENTITY,
    PAULI_X,
    ComplexMatrix2,
    PauliAxis,
    projector,
    validate_density_matrix,
)
from .tolerances import STRUCTURAL_ATOL

MODEL_I_LABELS = ("X+", "X-", "Y+", "Y-", "Z+", "Z-")
MODEL_II_LABELS = ("+", "-")


@dataclass(frozen=True, eq=False)
class KrausSet:
    """
    Ordered Kraus operators of one measurement step.

    Outcome ``a`` is the position in ``operators``; ``labels[a]`` names it.
    Instances are immutable and safe to share between threads.
    """

    labels: tuple[str, ...]
    operators: NDArray[np.complex128]
    kind: ModelKind | None = None
    x: float = 0.0
    phi: float = 0.0

    @property
    def size(self) -> int:
        """Outcome alphabet size |O|."""
        return len(self.labels)

    def completeness_error(self) -> float:
        """Largest entry of ``|Σ K†K − I|``."""
        total = np.einsum("aji,ajk->ik", self.operators.conj(), self.operators)
        return float(np.abs(total - IDENTITY).max())

    @cached_property
    def superops(self) -> NDArray[np.float64]:
        """Pauli-basis superoperators, shape ``(|O|, 4, 4)``."""
        from .transfer_matrix import outcome_superop

        return np.stack([outcome_superop(k) for k in self.operators])

    def probabilities(self, rho: NDArray[np.complex128]) -> NDArray[np.float64]:
        """Outcome probabilities ``Tr[K_a ρ K_a†]`` for a density matrix."""
        matrix = validate_density_matrix(rho)
        branches = np.einsum("aij,jk,alk->ail", self.operators, matrix, self.operators.conj())
        probabilities: NDArray[np.float64] = np.einsum("aii->a", branches).real
        return probabilities


class ErrorKernel(BaseModel):
    """Column-stochastic readout noise ``β[y, b] = Pr[shown y | true b]``."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    eta: float = Field(ge=0.0, le=1.0, allow_inf_nan=False)

    @property
    def matrix(self) -> NDArray[np.float64]:
        """β = (1/n)(1 − √η) + √η·δ."""
        root = math.sqrt(self.eta)
        kernel: NDArray[np.float64] = np.full((self.n, self.n), (1.0 - root) / self.n)
        kernel += root * np.eye(self.n)
        return kernel

    @property
    def success_probability(self) -> float:
        """Probability that the shown outcome equals the true one."""
        return (1.0 + (self.n - 1) * math.sqrt(self.eta)) / self.n


def kraus_universal(axis: PauliAxis | str, y: int, x: float) -> ComplexMatrix2:
    """
    Universal weak measurement operator.

    ``K = √(e^{yx}/(e^x+e^{−x}))·P₊ + √(e^{−yx}/(e^x+e^{−x}))·P₋``. The weights are
    evaluated as logistic functions so that large ``|x|`` stays finite.

    Args:
        axis: Measured Pauli axis.
        y: Outcome sign, +1 or -1.
        x: Measurement strength.

    Returns:
        2×2 Kraus operator.

    Examples:
        >>> np.allclose(kraus_universal("Z", 1, 0.0), np.eye(2) / np.sqrt(2))
        True
    """
    _check_sign(y)
    weight_plus = math.sqrt(float(expit(2.0 * y * x)))
    weight_minus = math.sqrt(float(expit(-2.0 * y * x)))
    operator: ComplexMatrix2 = weight_plus * projector(axis, 1) + weight_minus * projector(axis, -1)
    return operator


def sqrt_form_kraus(axis: PauliAxis | str, y: int, x: float) -> ComplexMatrix2:
    """
    ``√(½(I + y·tanh(x)·σ))`` via its eigen-projectors.

    Equal to :func:`kraus_universal`; kept as an independent evaluation.
    """
    _check_sign(y)
    t = math.tanh(x)
    upper = math.sqrt(max(0.5 * (1.0 + y * t), 0.0))
    lower = math.sqrt(max(0.5 * (1.0 - y * t), 0.0))
    operator: ComplexMatrix2 = upper * projector(axis, 1) + lower * projector(axis, -1)
    return operator


def x_rotation(phi: float) -> ComplexMatrix2:
    """exp(−i(φ/2)X) = cos(φ/2)·I − i·sin(φ/2)·X."""
    rotation: ComplexMatrix2 = math.cos(phi / 2.0) * IDENTITY - 1j * math.sin(phi / 2.0) * PAULI_X
    return rotation


def kraus_set_model1(params: ModelIParams) -> KrausSet:
    """
    Six-outcome Model I set ``(1/√3)·K^σ_y(x)``.

    Outcomes are ordered (X,+), (X,−), (Y,+), (Y,−), (Z,+), (Z,−).
    """
    scale = 1.0 / math.sqrt(3.0)
    operators = [
        scale * kraus_universal(axis, sign, params.x)
        for axis in (PauliAxis.X, PauliAxis.Y, PauliAxis.Z)
        for sign in (1, -1)
    ]
    return KrausSet(
        kind=ModelKind.MODEL_I,
        x=params.x,
        labels=MODEL_I_LABELS,
        operators=np.stack(operators),
    )


def kraus_set_model2(params: ModelIIParams) -> KrausSet:
    """Two-outcome Model II set ``K^Z_y(x)·exp(−i(φ/2)X)``, outcomes (+, −)."""
    rotation = x_rotation(params.phi)
    operators = [kraus_universal(PauliAxis.Z, sign, params.x) @ rotation for sign in (1, -1)]
    return KrausSet(
        kind=ModelKind.MODEL_II,
        x=params.x,
        phi=params.phi,
        labels=MODEL_II_LABELS,
        operators=np.stack(operators),
    )


def build_kraus_set(kind: ModelKind | str, x: float, phi: float = 0.0) -> KrausSet:
    """Dispatch on the model selector."""
    model = ModelKind.parse(kind) if isinstance(kind, str) else kind
    if model == ModelKind.MODEL_I:
        if phi != 0.0:
            raise ValidationError("Model I takes no precession angle")
        return kraus_set_model1(ModelIParams(x=x))
    return kraus_set_model2(ModelIIParams(x=x, phi=phi))


def error_kernel(n: int, eta: float) -> ErrorKernel:
    """
    Readout noise kernel for ``n`` outcomes at efficiency ``eta``.

    Raises:
        ValidationError: If ``n < 1`` or ``eta`` is outside [0, 1].

    Examples:
        >>> error_kernel(2, 0.25).matrix
        array([[0.75, 0.25],
               [0.25, 0.75]])
    """
    if n < 1:
        raise ValidationError(f"outcome count must be positive, got {n}")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"efficiency must lie in [0, 1], got {eta}")
    return ErrorKernel(n=n, eta=eta)


def noisy_superops(kraus_set: KrausSet, eta: float) -> NDArray[np.float64]:
    """Shown-outcome superoperators ``Σ_b β[y, b]·E_b``, shape ``(|O|, 4, 4)``."""
    if eta == 1.0:
        return kraus_set.superops
    kernel = error_kernel(kraus_set.size, eta).matrix
    mixed: NDArray[np.float64] = np.einsum("yb,bij->yij", kernel, kraus_set.superops)
    return mixed


def check_completeness(kraus_set: KrausSet, atol: float = STRUCTURAL_ATOL) -> None:
    """Raise :class:`ValidationError` if ``Σ K†K ≠ I``."""
    error = kraus_set.completeness_error()
    if error > atol:
        raise ValidationError(f"Kraus operators are not complete (deviation {error:.3e})")


def _check_sign(y: int) -> None:
    if y not in (1, -1):
        raise ValidationError(f"outcome sign must be +1 or -1, got {y}")
