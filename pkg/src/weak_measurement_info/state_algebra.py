"""Qubit linear algebra in the computational and Pauli bases.

States travel through the package as Pauli vectors ``(p0, px, py, pz)`` with
``ρ = ½(p0·I + px·X + py·Y + pz·Z)``; 2×2 complex matrices appear only where a
Kraus operator is applied directly.
"""

from enum import StrEnum
from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray

from .errors import ImpossibleOutcomeError, ValidationError
from .tolerances import HERMITIAN_ATOL, PHYSICAL_ATOL, STRUCTURAL_ATOL

ComplexMatrix2: TypeAlias = NDArray[np.complex128]
DensityMatrix: TypeAlias = NDArray[np.complex128]
PauliVector: TypeAlias = NDArray[np.float64]


class PauliAxis(StrEnum):
    """Measurement axis of a ±1-valued Pauli observable."""

    X = "X"
    Y = "Y"
    Z = "Z"


IDENTITY: ComplexMatrix2 = np.eye(2, dtype=np.complex128)
PAULI_X: ComplexMatrix2 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y: ComplexMatrix2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z: ComplexMatrix2 = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# Basis order (I, X, Y, Z) matches the Pauli-vector layout.
PAULI_BASIS: NDArray[np.complex128] = np.stack([IDENTITY, PAULI_X, PAULI_Y, PAULI_Z])

_AXIS_INDEX = {PauliAxis.X: 1, PauliAxis.Y: 2, PauliAxis.Z: 3}


def pauli_matrix(axis: PauliAxis | str) -> ComplexMatrix2:
    """Return the Pauli matrix for ``axis``."""
    return PAULI_BASIS[axis_index(axis)]


def axis_index(axis: PauliAxis | str) -> int:
    """Return the Pauli-vector component (1, 2 or 3) belonging to ``axis``."""
    return _AXIS_INDEX[PauliAxis(axis)]


def projector(axis: PauliAxis | str, sign: int) -> ComplexMatrix2:
    """
    Spectral projector P^axis_± = ½(I ± σ).

    Args:
        axis: Pauli axis.
        sign: +1 or -1.

    Returns:
        2×2 projector onto the ``sign`` eigenspace.
    """
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}")
    result: ComplexMatrix2 = 0.5 * (IDENTITY + sign * pauli_matrix(axis))
    return result


def axis_state(axis: PauliAxis | str, sign: int) -> DensityMatrix:
    """Pure eigenstate of ``axis`` with eigenvalue ``sign`` as a density matrix."""
    return projector(axis, sign)


def is_hermitian(matrix: NDArray[np.complex128], atol: float = HERMITIAN_ATOL) -> bool:
    """Check ``matrix == matrix†`` entrywise within ``atol``."""
    return bool(np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=atol))


def is_psd(matrix: NDArray[np.complex128], atol: float = STRUCTURAL_ATOL) -> bool:
    """Check that a Hermitian matrix has no eigenvalue below ``-atol``."""
    eigenvalues = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
    return bool(eigenvalues.min() >= -atol)


def validate_density_matrix(rho: NDArray[np.complex128]) -> DensityMatrix:
    """
    Validate and return ``rho`` as a complex 2×2 density matrix.

    Raises:
        ValidationError: If the shape is wrong or ``rho`` is not Hermitian, trace
            one and positive semidefinite within tolerance.
    """
    matrix = np.asarray(rho, dtype=np.complex128)
    if matrix.shape != (2, 2):
        raise ValidationError(f"density matrix must be 2x2, got shape {matrix.shape}")
    if not is_hermitian(matrix):
        raise ValidationError("density matrix is not Hermitian")
    trace = np.trace(matrix).real
    if abs(trace - 1.0) > STRUCTURAL_ATOL:
        raise ValidationError(f"density matrix trace is {trace}, expected 1")
    if not is_psd(matrix):
        raise ValidationError("density matrix has a negative eigenvalue")
    return matrix


def pauli_decompose(rho: NDArray[np.complex128]) -> PauliVector:
    """
    Decompose a Hermitian 2×2 matrix in the Pauli basis.

    Args:
        rho: Hermitian matrix (not necessarily normalized).

    Returns:
        Real vector ``(p0, px, py, pz)`` with ``p_k = Tr[σ_k ρ]``.

    Raises:
        ValidationError: If ``rho`` is not Hermitian within 1e-10.

    Examples:
        >>> pauli_decompose(np.eye(2) / 2)
        array([1., 0., 0., 0.])
    """
    matrix = np.asarray(rho, dtype=np.complex128)
    if matrix.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got shape {matrix.shape}")
    if not is_hermitian(matrix):
        raise ValidationError("cannot Pauli-decompose a non-Hermitian matrix")
    components: PauliVector = np.einsum("kij,ji->k", PAULI_BASIS, matrix).real
    return components


def pauli_compose(p: NDArray[np.float64], validate: bool = False) -> DensityMatrix:
    """
    Rebuild ``ρ = ½(p0·I + px·X + py·Y + pz·Z)``.

    Args:
        p: Pauli vector; unnormalized vectors are accepted.
        validate: Reject vectors whose Bloch norm exceeds ``p0`` by more than 1e-10.

    Returns:
        2×2 complex matrix.
    """
    vector = np.asarray(p, dtype=np.float64)
    if validate and bloch_norm(vector) > abs(vector[0]) + PHYSICAL_ATOL:
        raise ValidationError(f"Bloch norm {bloch_norm(vector)} exceeds p0 = {vector[0]}")
    matrix: DensityMatrix = 0.5 * np.einsum("k,kij->ij", vector.astype(np.complex128), PAULI_BASIS)
    return matrix


def bloch_norm(p: NDArray[np.float64]) -> float:
    """Euclidean norm of the ``(px, py, pz)`` part."""
    return float(np.linalg.norm(np.asarray(p, dtype=np.float64)[1:]))


def purity(p: NDArray[np.float64]) -> float:
    """Tr[ρ²] of a normalized Pauli vector, ``(p0² + |r|²) / 2``."""
    vector = np.asarray(p, dtype=np.float64)
    return float(0.5 * (vector[0] ** 2 + vector[1:] @ vector[1:]))


def is_pure(p: NDArray[np.float64], atol: float = PHYSICAL_ATOL) -> bool:
    """Check ``|r| = 1`` within ``atol``."""
    return abs(bloch_norm(p) - 1.0) <= atol


def pure_state_vector(rho: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """
    Return a unit vector ψ with ``ρ = |ψ⟩⟨ψ|``.

    Raises:
        ValidationError: If ``rho`` is mixed.
    """
    matrix = validate_density_matrix(rho)
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    if abs(eigenvalues[-1] - 1.0) > PHYSICAL_ATOL:
        raise ValidationError("state is not pure")
    vector: NDArray[np.complex128] = eigenvectors[:, -1]
    return vector


def apply_kraus(
    kraus: NDArray[np.complex128], rho: NDArray[np.complex128]
) -> tuple[DensityMatrix, float]:
    """
    Apply one Kraus branch and renormalize.

    Args:
        kraus: Kraus operator K.
        rho: Normalized density matrix.

    Returns:
        ``(KρK† / Tr[KρK†], Tr[KρK†])``.

    Raises:
        ImpossibleOutcomeError: If the branch probability is zero.
    """
    unnormalized = kraus @ rho @ kraus.conj().T
    probability = float(np.trace(unnormalized).real)
    if probability <= 0.0:
        raise ImpossibleOutcomeError("Kraus branch has zero probability for this state")
    probability = min(probability, 1.0)
    updated: DensityMatrix = unnormalized / np.trace(unnormalized).real
    # Symmetrize to remove rounding asymmetry.
    updated = 0.5 * (updated + updated.conj().T)
    return updated, probability
