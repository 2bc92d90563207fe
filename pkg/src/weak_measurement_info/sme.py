"""Stochastic master equations of the continuum limits and their Lindblad averages.

Both models are integrated on Pauli vectors ``(p0, px, py, pz)``. Channel ``i``
monitors ``σ_i`` with rate ``1/τ`` and efficiency ``η``; its output increment is
``dy_i = 2(√η/τ)·p_i·dt + dW_i/√τ``. Model II adds the precession
``−i(ω/2)[X, ρ]``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import IntegratorBlowupError, ValidationError
from .models import DampingRegime, ModelKind, SmeConfig, SmeScheme, damping_regime
from .state_algebra import (
    PAULI_BASIS,
    DensityMatrix,
    PauliVector,
    pauli_decompose,
    validate_density_matrix,
)
from .streams import TrajectoryStream, map_chunks, ordered_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SmePath:
    """One integrated path: states at ``times`` and the outputs of each step."""

    times: NDArray[np.float64]
    states: NDArray[np.float64]
    dy: NDArray[np.float64]
    overshoots: int = 0

    @property
    def bloch_norms(self) -> NDArray[np.float64]:
        """|r| at every stored time."""
        norms: NDArray[np.float64] = np.linalg.norm(self.states[:, 1:], axis=1)
        return norms


@dataclass(frozen=True, eq=False)
class SmeEnsemble:
    """Per-time mean and standard error of the Bloch vector over many paths."""

    times: NDArray[np.float64]
    mean: NDArray[np.float64]
    stderr: NDArray[np.float64]
    paths: int
    overshoots: int = 0


def _unit(axis: int) -> NDArray[np.float64]:
    vector = np.zeros(3)
    vector[axis - 1] = 1.0
    return vector


def _project(config: SmeConfig, states: NDArray[np.float64]) -> int:
    """Reset p0 to 1 and pull Bloch vectors back onto the unit ball in place."""
    states[:, 0] = 1.0
    norms = np.linalg.norm(states[:, 1:], axis=1)
    worst = float(norms.max()) if norms.size else 0.0
    if worst > 1.0 + config.blowup_tolerance:
        raise IntegratorBlowupError(
            f"Bloch norm reached {worst:.6f}; reduce dt (currently {config.step})"
        )
    outside = norms > 1.0
    states[outside, 1:] /= norms[outside, None]
    return int(np.count_nonzero(norms > 1.0 + config.clip_tolerance))


def _euler_update(
    config: SmeConfig, states: NDArray[np.float64], dW: NDArray[np.float64]
) -> NDArray[np.float64]:
    dt, tau, eta = config.step, config.tau, config.eta
    r = states[:, 1:]
    dr = np.zeros_like(r)
    for column, axis in enumerate(config.channel_axes):
        e = _unit(axis)
        component = r[:, axis - 1 : axis]
        dr += -(2.0 / tau) * (r - component * e) * dt
        dr += math.sqrt(eta / tau) * 2.0 * (e - component * r) * dW[:, column : column + 1]
    if config.omega != 0.0:
        dr += config.omega * np.cross(_unit(1), r) * dt
    updated = states.copy()
    updated[:, 1:] = r + dr
    return updated


def _kraus_update(
    config: SmeConfig, states: NDArray[np.float64], dy: NDArray[np.float64]
) -> NDArray[np.float64]:
    """
    ``ρ ↦ MρM† + (1 − η)(dt/τ)·Σ σ_i ρ σ_i`` followed by normalization.

    ``M = (1 − C·dt/2τ)·I − i(ω/2)·dt·X + √η·Σ σ_i·dy_i`` for ``C`` channels.
    """
    dt, tau, eta = config.step, config.tau, config.eta
    axes = config.channel_axes
    coefficients = np.zeros((states.shape[0], 4), dtype=np.complex128)
    coefficients[:, 0] = 1.0 - len(axes) * dt / (2.0 * tau)
    coefficients[:, 1] = -0.5j * config.omega * dt
    for column, axis in enumerate(axes):
        coefficients[:, axis] += math.sqrt(eta) * dy[:, column]
    kraus = np.einsum("bk,kij->bij", coefficients, PAULI_BASIS)
    rho = 0.5 * np.einsum("bk,kij->bij", states.astype(np.complex128), PAULI_BASIS)
    mapped = kraus @ rho @ np.conj(np.swapaxes(kraus, 1, 2))
    updated: NDArray[np.float64] = np.einsum("kij,bji->bk", PAULI_BASIS, mapped).real
    if eta < 1.0:
        for axis in axes:
            # σ_i ρ σ_i keeps p0 and p_i and flips the other two components.
            flipped = -states.copy()
            flipped[:, 0] = states[:, 0]
            flipped[:, axis] = states[:, axis]
            updated += (1.0 - eta) * (dt / tau) * flipped
    normalized: NDArray[np.float64] = updated / updated[:, :1]
    return normalized


def _advance(
    config: SmeConfig, states: NDArray[np.float64], dW: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Advance a batch of states by one step; returns ``(states, dy, overshoots)``."""
    dt, tau, eta = config.step, config.tau, config.eta
    signal = states[:, list(config.channel_axes)]
    dy = 2.0 * (math.sqrt(eta) / tau) * signal * dt + dW / math.sqrt(tau)
    if config.scheme == SmeScheme.EULER:
        updated = _euler_update(config, states, dW)
    else:
        updated = _kraus_update(config, states, dy)
    overshoots = _project(config, updated)
    return updated, dy, overshoots


def sme_step(
    config: SmeConfig, state: PauliVector, dW: NDArray[np.float64]
) -> tuple[PauliVector, NDArray[np.float64]]:
    """
    Advance one state by ``config.step``.

    Args:
        config: Integration settings.
        state: Pauli vector with ``p0 = 1``.
        dW: Wiener increments, one per channel, each of variance ``dt``.

    Returns:
        ``(next_state, dy)``.

    Raises:
        IntegratorBlowupError: If the Bloch norm leaves the ball by more than
            ``config.blowup_tolerance``.
    """
    increments = np.asarray(dW, dtype=np.float64).reshape(1, -1)
    if increments.shape[1] != len(config.channel_axes):
        raise ValidationError(
            f"expected {len(config.channel_axes)} Wiener increments, got {increments.shape[1]}"
        )
    states = np.asarray(state, dtype=np.float64).reshape(1, 4)
    updated, dy, overshoots = _advance(config, states, increments)
    if overshoots:
        logger.debug("Projected a state %d time(s) back onto the Bloch ball", overshoots)
    return updated[0], dy[0]


def _wiener_increments(config: SmeConfig, indices: range) -> NDArray[np.float64]:
    stream = TrajectoryStream(seed=config.seed, name="sme")
    normals = stream.normals(indices.start, len(indices), (config.steps, len(config.channel_axes)))
    increments: NDArray[np.float64] = normals * math.sqrt(config.step)
    return increments


def time_grid(config: SmeConfig) -> NDArray[np.float64]:
    """Times ``0, dt, …, steps·dt``."""
    grid: NDArray[np.float64] = np.arange(config.steps + 1) * config.step
    return grid


def integrate_sme(config: SmeConfig, rho0: DensityMatrix, path_index: int = 0) -> SmePath:
    """
    Integrate one path with Wiener increments from the ``sme`` stream.

    Path ``path_index`` of a seed is bit-identical on every call.
    """
    initial = pauli_decompose(validate_density_matrix(rho0))
    increments = _wiener_increments(config, range(path_index, path_index + 1))[0]
    states = np.empty((config.steps + 1, 4))
    outputs = np.empty((config.steps, len(config.channel_axes)))
    states[0] = initial
    current = initial.reshape(1, 4)
    overshoots = 0
    for step in range(config.steps):
        current, dy, clipped = _advance(config, current, increments[step : step + 1])
        states[step + 1] = current[0]
        outputs[step] = dy[0]
        overshoots += clipped
    if overshoots:
        logger.debug("Path %d projected %d time(s) onto the Bloch ball", path_index, overshoots)
    return SmePath(times=time_grid(config), states=states, dy=outputs, overshoots=overshoots)


def integrate_ensemble(
    config: SmeConfig,
    rho0: DensityMatrix,
    paths: int,
    workers: int = 1,
) -> SmeEnsemble:
    """
    Mean and standard error of the Bloch vector over ``paths`` independent paths.

    Paths are processed in fixed chunks with per-chunk sums reduced in order, so
    the result does not depend on ``workers``. The standard error is NaN for a
    single path.
    """
    if paths < 1:
        raise ValidationError(f"path count must be positive, got {paths}")
    initial = pauli_decompose(validate_density_matrix(rho0))

    def chunk_moments(indices: range) -> NDArray[np.float64]:
        increments = _wiener_increments(config, indices)
        current = np.tile(initial, (len(indices), 1))
        moments = np.zeros((3, config.steps + 1, 3))
        moments[0, 0] = len(indices) * initial[1:]
        moments[1, 0] = len(indices) * initial[1:] ** 2
        for step in range(config.steps):
            current, _, clipped = _advance(config, current, increments[:, step])
            moments[0, step + 1] = current[:, 1:].sum(axis=0)
            moments[1, step + 1] = (current[:, 1:] ** 2).sum(axis=0)
            moments[2, 0, 0] += clipped
        return moments

    logger.info(
        "Integrating %d SME paths of %d steps (model %s)", paths, config.steps, config.model
    )
    totals = ordered_sum(map_chunks(chunk_moments, paths, workers=workers))
    mean = totals[0] / paths
    if paths > 1:
        variance = np.clip(totals[1] / paths - mean**2, 0.0, None) * paths / (paths - 1)
        stderr = np.sqrt(variance / paths)
    else:
        stderr = np.full_like(mean, np.nan)
    return SmeEnsemble(
        times=time_grid(config),
        mean=mean,
        stderr=stderr,
        paths=paths,
        overshoots=int(totals[2, 0, 0]),
    )


# Lindblad (noise-averaged) dynamics


def lindblad_generator(config: SmeConfig) -> NDArray[np.float64]:
    """4×4 generator ``G`` of ``dp/dt = G·p`` for the averaged dynamics."""
    tau = config.tau
    if config.model == ModelKind.MODEL_I:
        return np.diag([0.0, -4.0, -4.0, -4.0]) / tau
    generator = np.zeros((4, 4))
    generator[1, 1] = -2.0 / tau
    generator[2, 2] = -2.0 / tau
    generator[2, 3] = -config.omega
    generator[3, 2] = config.omega
    return generator


def lindblad_solution_model1(
    p0: PauliVector, t: float | NDArray[np.float64], tau: float
) -> NDArray[np.float64]:
    """
    ``p_i(t) = p_i(0)·e^{−4t/τ}`` for the Bloch components.

    ``t`` may be an array; the result then has shape ``t.shape + (4,)``.
    """
    times = np.asarray(t, dtype=np.float64)
    if (times < 0.0).any():
        raise ValidationError("time must be nonnegative")
    initial = np.asarray(p0, dtype=np.float64)
    decay = np.exp(-4.0 * times / tau)[..., None]
    factors = np.concatenate([np.ones_like(decay), np.repeat(decay, 3, axis=-1)], axis=-1)
    result: NDArray[np.float64] = initial * factors
    return result


def _oscillator_factors(
    scaled: NDArray[np.float64], alpha: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    ``(e^{−s}·C(s), e^{−s}·S(s))``.

    C is cos or cosh and S is sin/μ or sinh/μ′ depending on the regime.
    """
    regime = damping_regime(abs(alpha))
    if regime == DampingRegime.CRITICAL:
        envelope = np.exp(-scaled)
        return envelope, envelope * scaled
    if regime == DampingRegime.UNDERDAMPED:
        mu = math.sqrt(4.0 * alpha**2 - 1.0)
        envelope = np.exp(-scaled)
        return envelope * np.cos(mu * scaled), envelope * np.sin(mu * scaled) / mu
    mu_prime = math.sqrt(1.0 - 4.0 * alpha**2)
    slow = np.exp(-(1.0 - mu_prime) * scaled)
    fast = np.exp(-(1.0 + mu_prime) * scaled)
    return 0.5 * (slow + fast), 0.5 * (slow - fast) / mu_prime


def lindblad_solution_model2(
    p0: PauliVector,
    t: float | NDArray[np.float64],
    tau: float,
    alpha: float,
) -> NDArray[np.float64]:
    """
    Averaged Model II dynamics in closed form.

    ``px`` decays as ``e^{−2t/τ}``; ``(py, pz)`` is a damped oscillator with
    ``μ = √(4α² − 1)`` (underdamped, α > ½), ``μ′ = √(1 − 4α²)`` (overdamped) or
    polynomial-times-exponential behaviour at α = ½.

    Examples:
        >>> import numpy as np
        >>> p = lindblad_solution_model2(np.array([1.0, 0.0, 0.0, 1.0]), 1.0, 1.0, 0.5)
        >>> round(float(p[3]), 12) == round(2 * np.exp(-1.0), 12)
        True
    """
    times = np.asarray(t, dtype=np.float64)
    if (times < 0.0).any():
        raise ValidationError("time must be nonnegative")
    initial = np.asarray(p0, dtype=np.float64)
    scaled = times / tau
    even, odd = _oscillator_factors(scaled, alpha)
    py0, pz0 = initial[2], initial[3]
    result = np.empty(times.shape + (4,))
    result[..., 0] = initial[0]
    result[..., 1] = initial[1] * np.exp(-2.0 * scaled)
    result[..., 2] = py0 * even + (-py0 - 2.0 * alpha * pz0) * odd
    result[..., 3] = pz0 * even + (pz0 + 2.0 * alpha * py0) * odd
    return result


def lindblad_solution(
    config: SmeConfig, p0: PauliVector, t: float | NDArray[np.float64]
) -> NDArray[np.float64]:
    """Dispatch to the closed form of ``config.model``."""
    if config.model == ModelKind.MODEL_I:
        return lindblad_solution_model1(p0, t, config.tau)
    return lindblad_solution_model2(p0, t, config.tau, config.alpha)
