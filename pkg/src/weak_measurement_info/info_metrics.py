"""Mutual information between the initial state and the measurement record.

All entropies are in bits. Monte-Carlo estimates carry a Hoeffding guarantee:
with probability at least ``1 − δ`` the estimate is within ``ε`` of the truth.
"""

import logging
import math
from collections.abc import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect
from scipy.special import expit, xlogy
from scipy.stats import binom

from .errors import CapacityError, ValidationError
from .executors.base import BaseExecutor
from .executors.numpy_executor import NumpyExecutor
from .measurement_models import KrausSet, noisy_superops
from .models import EstimateWithBound, MiCurve, MiPoint
from .streams import TrajectoryStream, map_chunks, ordered_sum
from .trajectory import Prior, condition_records, log_posteriors, posterior
from .transfer_matrix import apply_power, mean_channel

logger = logging.getLogger(__name__)

# Largest |O|^T summed by exact_mi.
ENUMERATION_LIMIT = 1 << 24
# Leaves held in memory per enumeration block.
_BLOCK_LEAVES = 1 << 16

_LN2 = math.log(2.0)


def hoeffding_samples(epsilon: float, delta: float, value_range: float = 1.0) -> int:
    """
    Samples needed for an ``(ε, δ)`` guarantee on a mean of values in a range.

    ``M = ceil(R²·ln(2/δ)/(2ε²))`` with ``R = value_range``.

    Raises:
        ValidationError: If ``ε ≤ 0`` or ``δ`` is outside (0, 1).

    Examples:
        >>> hoeffding_samples(0.02, 0.01)
        6623
    """
    if not epsilon > 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    return max(1, math.ceil(value_range**2 * math.log(2.0 / delta) / (2.0 * epsilon**2)))


def hoeffding_epsilon(samples: int, delta: float, value_range: float = 1.0) -> float:
    """Half-width ``ε = R·√(ln(2/δ)/(2M))`` achieved by ``M`` samples."""
    if samples < 1:
        raise ValidationError(f"sample count must be positive, got {samples}")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    return value_range * math.sqrt(math.log(2.0 / delta) / (2.0 * samples))


def binary_entropy(p: float) -> float:
    """H₂(p) in bits."""
    return float(-(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)) / _LN2)


def entropy_from_log(log_probabilities: NDArray[np.float64]) -> NDArray[np.float64]:
    """Row-wise entropy in bits of distributions given by their logarithms."""
    finite = np.isfinite(log_probabilities)
    safe = np.where(finite, log_probabilities, 0.0)
    terms = np.where(finite, np.exp(safe) * safe, 0.0)
    result: NDArray[np.float64] = np.clip(-terms.sum(axis=-1) / _LN2, 0.0, None)
    return result


def record_conditional_entropy(
    kraus_set: KrausSet,
    prior: Prior,
    record: Iterable[int],
    eta: float = 1.0,
) -> float:
    """
    Entropy of the posterior over the prior's support given one record.

    Raises:
        DegenerateRecordError: If the record is impossible under every prior state.
    """
    probabilities = posterior(kraus_set, prior, record, eta)
    bits = -xlogy(probabilities, probabilities).sum() / _LN2
    return float(np.clip(bits, 0.0, math.log2(prior.size)))


def _entropy_range(prior: Prior) -> float:
    return max(math.log2(prior.size), 1.0)


def _resolve_samples(
    samples: int | None, epsilon: float | None, delta: float, value_range: float
) -> int:
    if samples is not None:
        if samples < 1:
            raise ValidationError(f"sample count must be positive, got {samples}")
        return samples
    if epsilon is None:
        raise ValidationError("either a sample count or epsilon is required")
    return hoeffding_samples(epsilon, delta, value_range)


def estimate_mi_curve(
    kraus_set: KrausSet,
    prior: Prior,
    lengths: Sequence[int],
    eta: float = 1.0,
    samples: int | None = None,
    seed: int = 0,
    *,
    epsilon: float | None = None,
    delta: float = 0.01,
    executor: BaseExecutor | None = None,
) -> MiCurve:
    """
    Monte-Carlo MI at several record lengths from one set of trajectories.

    Trajectories are sampled once at the largest length; shorter records are
    their prefixes. ``I = H(P0) − mean of H(posterior)``.

    Args:
        kraus_set: Measurement model.
        prior: Initial-state ensemble.
        lengths: Strictly increasing record lengths.
        eta: Readout efficiency.
        samples: Trajectory count M; derived from ``epsilon`` when omitted.
        seed: Base seed of the ``mi`` stream.
        epsilon: Target half-width, used when ``samples`` is omitted.
        delta: Failure probability.
        executor: Sampling backend, NumPy by default.

    Returns:
        MiCurve: One bounded estimate per length.
    """
    lengths = [int(T) for T in lengths]
    if not lengths:
        raise ValidationError("at least one record length is required")
    increasing = all(a < b for a, b in zip(lengths, lengths[1:], strict=False))
    if lengths[0] < 0 or not increasing:
        raise ValidationError(f"record lengths must be nonnegative and increasing, got {lengths}")
    value_range = _entropy_range(prior)
    count = _resolve_samples(samples, epsilon, delta, value_range)
    executor = executor or NumpyExecutor()
    executor.check_supported(kraus_set, prior)
    stream = TrajectoryStream(seed=seed, name="mi")
    longest = lengths[-1]

    def entropy_sums(indices: range) -> NDArray[np.float64]:
        batch = executor.sample_records(kraus_set, prior, longest, eta, stream, indices)
        log_likelihood = condition_records(kraus_set, prior, batch.shown, eta, checkpoints=lengths)
        return np.array(
            [entropy_from_log(log_posteriors(prior, log_likelihood[T])).sum() for T in lengths]
        )

    logger.info(
        "Estimating MI for T=%s with M=%d on %s (eta=%s)", lengths, count, executor.name, eta
    )
    totals = ordered_sum(map_chunks(entropy_sums, count, workers=executor.max_workers))
    eps = hoeffding_epsilon(count, delta, value_range)
    points = [
        MiPoint(
            T=T,
            estimate=EstimateWithBound(
                value=max(prior.entropy - total / count, 0.0),
                epsilon=eps,
                delta=delta,
                samples=count,
                seed=seed,
            ),
        )
        for T, total in zip(lengths, totals, strict=True)
    ]
    return MiCurve(x=kraus_set.x, phi=kraus_set.phi, eta=eta, points=points)


def estimate_mi(
    kraus_set: KrausSet,
    prior: Prior,
    T: int,
    eta: float = 1.0,
    samples: int | None = None,
    seed: int = 0,
    *,
    epsilon: float | None = None,
    delta: float = 0.01,
    executor: BaseExecutor | None = None,
) -> EstimateWithBound:
    """
    Hoeffding-bounded Monte-Carlo estimate of ``I(P0; A_{1:T})``.

    Examples:
        >>> from weak_measurement_info.measurement_models import build_kraus_set
        >>> est = estimate_mi(build_kraus_set("II", 0.0), Prior.default(), 5, samples=100)
        >>> round(est.value, 12)
        0.0
    """
    curve = estimate_mi_curve(
        kraus_set,
        prior,
        [T],
        eta,
        samples,
        seed,
        epsilon=epsilon,
        delta=delta,
        executor=executor,
    )
    return curve.points[0].estimate


def _expand(
    operators: NDArray[np.float64], vectors: NDArray[np.float64], steps: int
) -> NDArray[np.float64]:
    """All ``|O|^steps`` continuations of each leaf, shape ``(R·|O|^steps, |D|, 4)``."""
    for _ in range(steps):
        vectors = np.einsum("aij,rdj->radi", operators, vectors).reshape(-1, *vectors.shape[1:])
    return vectors


def _mi_terms(leaves: NDArray[np.float64], weights: NDArray[np.float64]) -> float:
    joint = np.clip(leaves[:, :, 0], 0.0, None) * weights
    marginal = joint.sum(axis=1, keepdims=True) * weights
    ratio = np.divide(joint, marginal, out=np.ones_like(joint), where=marginal > 0.0)
    return float(xlogy(joint, ratio).sum())


def exact_mi(kraus_set: KrausSet, prior: Prior, T: int, eta: float = 1.0) -> float:
    """
    ``I(P0; A_{1:T})`` by enumerating every record.

    Records are expanded in blocks: all prefixes first, then the remaining
    suffix tree of each prefix, so at most ``2^16`` leaves are held at once.

    Raises:
        CapacityError: If ``|O|^T`` exceeds ``2^24``.

    Examples:
        >>> from weak_measurement_info.measurement_models import build_kraus_set
        >>> round(exact_mi(build_kraus_set("II", 1.0), Prior.default(), 1), 5)
        0.47293
    """
    if T < 0:
        raise ValidationError(f"record length must be nonnegative, got {T}")
    n = kraus_set.size
    if n**T > ENUMERATION_LIMIT:
        raise CapacityError(f"{n}^{T} records exceed the enumeration limit of 2^24")
    if T == 0:
        return 0.0
    operators = noisy_superops(kraus_set, eta)
    suffix = 0
    while suffix < T and n ** (suffix + 1) <= _BLOCK_LEAVES:
        suffix += 1
    prefixes = _expand(operators, prior.pauli_vectors[None, :, :], T - suffix)
    weights = prior.probabilities[None, :]
    total = 0.0
    for prefix in prefixes:
        total += _mi_terms(_expand(operators, prefix[None], suffix), weights)
    return max(total / _LN2, 0.0)


def binomial_mi(x: float, T: int) -> float:
    """
    MI between ↑/↓ and the count of ``+`` outcomes in ``T`` commuting Z measurements.

    ``N₊ | ↑ ~ B(T, p)`` and ``N₊ | ↓ ~ B(T, 1 − p)`` with ``p = (1 + tanh x)/2``,
    evaluated in log space.
    """
    if T < 0:
        raise ValidationError(f"record length must be nonnegative, got {T}")
    if T == 0:
        return 0.0
    p = float(expit(2.0 * x))
    counts = np.arange(T + 1)
    log_up = binom.logpmf(counts, T, p)
    log_down = binom.logpmf(counts, T, 1.0 - p)
    log_mixture = np.logaddexp(log_up, log_down) - _LN2
    total = 0.0
    for log_conditional in (log_up, log_down):
        finite = np.isfinite(log_conditional)
        terms = np.exp(log_conditional[finite]) * (log_conditional[finite] - log_mixture[finite])
        total += 0.5 * terms.sum()
    return float(np.clip(total / _LN2, 0.0, 1.0))


def last_measurement_mi(kraus_set: KrausSet, prior: Prior, T: int, eta: float = 1.0) -> float:
    """
    ``I(P0; A_T)``, the information carried by the T-th outcome alone.

    The first ``T − 1`` steps act as the mean channel. Contributions are
    written as deviations from the prior-averaged state so that exponentially
    small informations keep their relative precision.
    """
    if T < 1:
        raise ValidationError(f"record length must be at least 1, got {T}")
    channel = mean_channel(kraus_set)
    operators = noisy_superops(kraus_set, eta)
    evolved = np.stack([apply_power(channel, vector, T - 1) for vector in prior.pauli_vectors])
    average = prior.probabilities @ evolved
    trace_rows = operators[:, 0, :]
    marginal = trace_rows @ average
    deviation = np.einsum("aj,sj->sa", trace_rows, evolved - average)
    conditional = marginal[None, :] + deviation
    valid = (marginal[None, :] > 0.0) & (conditional > 0.0)
    safe_marginal = np.where(valid, marginal[None, :], 1.0)
    relative = np.where(valid, deviation, 0.0) / safe_marginal
    terms = np.where(valid, conditional * np.log1p(relative), 0.0)
    return max(float(prior.probabilities @ terms.sum(axis=1)) / _LN2, 0.0)


def fano_accuracy_upper_bound(
    mi: float,
    prior_entropy: float,
    cardinality: int,
    max_prior: float | None = None,
) -> float:
    """
    Largest accuracy compatible with Fano's inequality.

    Solves ``H₂(1 − A) + (1 − A)·log₂(K − 1) ≥ H(P0) − I`` for the largest
    ``A`` in ``[max_prior, 1]`` by bisection.

    Args:
        mi: Mutual information in bits.
        prior_entropy: H(P0) in bits.
        cardinality: Support size K ≥ 2.
        max_prior: Accuracy of always guessing the likeliest state (1/K by default).

    Raises:
        ValidationError: If ``mi`` exceeds ``prior_entropy``.

    Examples:
        >>> fano_accuracy_upper_bound(0.0, 1.0, 2)
        0.5
    """
    if cardinality < 2:
        raise ValidationError(f"cardinality must be at least 2, got {cardinality}")
    if mi < -1e-12 or mi > prior_entropy + 1e-12:
        raise ValidationError(f"mutual information {mi} outside [0, {prior_entropy}]")
    floor = 1.0 / cardinality if max_prior is None else max_prior
    target = prior_entropy - mi
    if target <= 0.0:
        return 1.0

    def slack(accuracy: float) -> float:
        error = 1.0 - accuracy
        return binary_entropy(error) + error * math.log2(cardinality - 1) - target

    if slack(floor) <= 0.0:
        return floor
    return float(bisect(slack, floor, 1.0, xtol=1e-10))
