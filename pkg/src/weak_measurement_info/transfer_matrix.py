"""Pauli transfer matrices of measurement outcomes and their spectra."""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError
from .measurement_models import KrausSet
from .state_algebra import PAULI_BASIS
from .tolerances import PHYSICAL_ATOL, UNIT_EIGENVALUE_ATOL

logger = logging.getLogger(__name__)

SuperopMatrix = NDArray[np.float64]

# Off-diagonal couplings below this magnitude do not join eigenvalue blocks.
_BLOCK_COUPLING_ATOL = 1e-14


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Eigenvalues of a mean channel sorted by descending modulus, and ξ."""

    eigenvalues: NDArray[np.complex128]
    xi: float
    unit_multiplicity: int
    lambda2: complex

    @property
    def second_modulus(self) -> float:
        """Largest modulus after removing the stationary eigenvalue."""
        return abs(self.lambda2)


def outcome_superop(kraus: NDArray[np.complex128]) -> SuperopMatrix:
    """
    Matrix of ``ρ ↦ KρK†`` acting on Pauli vectors.

    Column ``j`` is the Pauli vector of ``K σ_j K†``, so ``E[i, j] = ½Tr[σ_i K σ_j K†]``.

    Args:
        kraus: 2×2 operator.

    Returns:
        Real 4×4 matrix.
    """
    k = np.asarray(kraus, dtype=np.complex128)
    mapped = np.einsum("ab,jbc,dc->jad", k, PAULI_BASIS, k.conj())
    matrix: SuperopMatrix = 0.5 * np.einsum("iab,jba->ij", PAULI_BASIS, mapped).real
    return matrix


def mean_channel(kraus_set: KrausSet) -> SuperopMatrix:
    """
    Outcome-averaged channel ``E = Σ_a E_a``.

    Raises:
        ValidationError: If the set is not trace preserving.
    """
    channel: SuperopMatrix = kraus_set.superops.sum(axis=0)
    top_row_error = np.abs(channel[0] - np.array([1.0, 0.0, 0.0, 0.0])).max()
    if top_row_error > 1e-10:
        raise ValidationError(
            f"mean channel is not trace preserving (top row off by {top_row_error:.3e})"
        )
    return channel


def apply_power(
    matrix: SuperopMatrix, vector: NDArray[np.float64], power: int
) -> NDArray[np.float64]:
    """``matrix^power @ vector`` by repeated matrix-vector products."""
    if power < 0:
        raise ValidationError(f"power must be nonnegative, got {power}")
    result = np.asarray(vector, dtype=np.float64)
    for _ in range(power):
        result = matrix @ result
    return result


def channel_eigenvalues(matrix: SuperopMatrix) -> NDArray[np.complex128]:
    """
    Eigenvalues of a 4×4 real matrix, descending modulus.

    The matrix is split into blocks that are not coupled by nonzero entries;
    1×1 and 2×2 blocks are solved in closed form and larger ones by LAPACK.
    """
    size = matrix.shape[0]
    coupled = (np.abs(matrix) > _BLOCK_COUPLING_ATOL) | (np.abs(matrix.T) > _BLOCK_COUPLING_ATOL)
    unassigned = set(range(size))
    values: list[complex] = []
    while unassigned:
        seed = min(unassigned)
        block = {seed}
        frontier = [seed]
        while frontier:
            node = frontier.pop()
            for other in np.flatnonzero(coupled[node]):
                if int(other) not in block:
                    block.add(int(other))
                    frontier.append(int(other))
        unassigned -= block
        indices = sorted(block)
        sub = matrix[np.ix_(indices, indices)]
        if len(indices) == 1:
            values.append(complex(sub[0, 0]))
        elif len(indices) == 2:
            half_trace = 0.5 * (sub[0, 0] + sub[1, 1])
            determinant = sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
            root = cmath.sqrt(half_trace**2 - determinant)
            values.extend([half_trace + root, half_trace - root])
        else:
            values.extend(complex(v) for v in np.linalg.eigvals(sub))
    ordered = sorted(values, key=lambda v: (-abs(v), -v.real, -v.imag))
    return np.array(ordered, dtype=np.complex128)


def correlation_length(matrix: SuperopMatrix) -> SpectralReport:
    """
    Correlation length ``ξ`` with ``e^{−1/ξ} = max_{λ ≠ 1} |λ|``.

    ``ξ = ∞`` when more than one eigenvalue has unit modulus (within 1e-9).

    Raises:
        ValidationError: If no eigenvalue equals 1 within 1e-10.

    Examples:
        >>> from weak_measurement_info.measurement_models import build_kraus_set
        >>> round(correlation_length(mean_channel(build_kraus_set("I", 1.0))).xi, 4)
        3.7398
    """
    eigenvalues = channel_eigenvalues(matrix)
    distances = np.abs(eigenvalues - 1.0)
    stationary = int(np.argmin(distances))
    if distances[stationary] > PHYSICAL_ATOL:
        raise ValidationError("matrix has no unit eigenvalue; not a mean channel")
    remaining = np.delete(eigenvalues, stationary)
    moduli = np.abs(remaining)
    unit_multiplicity = 1 + int(np.count_nonzero(np.abs(moduli - 1.0) <= UNIT_EIGENVALUE_ATOL))
    lambda2 = complex(remaining[int(np.argmax(moduli))]) if remaining.size else 0j
    if unit_multiplicity >= 2:
        xi = math.inf
    elif abs(lambda2) == 0.0:
        xi = 0.0
    else:
        xi = -1.0 / math.log(abs(lambda2))
    logger.debug("Spectrum %s -> xi=%s (unit multiplicity %d)", eigenvalues, xi, unit_multiplicity)
    return SpectralReport(
        eigenvalues=eigenvalues,
        xi=xi,
        unit_multiplicity=unit_multiplicity,
        lambda2=lambda2,
    )


def model2_complex_eigs(x: float, phi: float) -> tuple[complex, complex]:
    """
    The (py, pz)-block eigenvalues of the Model II mean channel.

    ``λ± = ½((1+sech x)cos φ ± √(cos²φ·(1+sech x)² − 4·sech x))``; the block
    determinant is ``sech x``.
    """
    sech = 1.0 / math.cosh(x)
    cos_phi = math.cos(phi)
    root = cmath.sqrt(cos_phi**2 * (1.0 + sech) ** 2 - 4.0 * sech)
    half_trace = 0.5 * (1.0 + sech) * cos_phi
    return half_trace + 0.5 * root, half_trace - 0.5 * root


def model1_correlation_length(x: float) -> float:
    """Closed form ``ξ = 1/ln(3/(1 + 2·sech x))`` for Model I."""
    if x == 0.0:
        return math.inf
    return 1.0 / math.log(3.0 / (1.0 + 2.0 / math.cosh(x)))


def model2_correlation_length(x: float, phi: float) -> float:
    """Closed-form ``ξ`` for Model II from ``sech x`` and ``λ±``."""
    sech = 1.0 / math.cosh(x)
    lam_plus, lam_minus = model2_complex_eigs(x, phi)
    moduli = sorted([sech, abs(lam_plus), abs(lam_minus)], reverse=True)
    if abs(moduli[0] - 1.0) <= UNIT_EIGENVALUE_ATOL:
        return math.inf
    if moduli[0] == 0.0:
        return 0.0
    return -1.0 / math.log(moduli[0])
