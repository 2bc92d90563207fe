"""Initial-state readout: Bayes-optimal prediction and a linear learner.

The linear learner sees records as one-hot matrices ``X`` (``|O| × T``) and
predicts ``sgn(Tr(WᵀX) − θ)``; with enough features relative to the training
set it memorizes noise, which the Bayes predictor never does.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError
from .executors.base import BaseExecutor
from .executors.numpy_executor import NumpyExecutor
from .info_metrics import hoeffding_epsilon, hoeffding_samples
from .measurement_models import KrausSet
from .models import EstimateWithBound
from .streams import TrajectoryStream, map_chunks, ordered_sum
from .trajectory import Prior, RecordBatch, concat_batches, condition_records, log_posteriors

logger = logging.getLogger(__name__)

# Posteriors this close to the maximum count as tied.
TIE_ATOL = 1e-12


def _first_maximum(probabilities: NDArray[np.float64]) -> NDArray[np.int64]:
    """Row-wise argmax with ties broken towards the lowest index."""
    best = probabilities.max(axis=1, keepdims=True)
    near_best = probabilities >= best - TIE_ATOL
    indices: NDArray[np.int64] = np.argmax(near_best, axis=1).astype(np.int64)
    return indices


def bayes_predictions(
    kraus_set: KrausSet,
    prior: Prior,
    records: NDArray[np.int64],
    eta: float = 1.0,
) -> NDArray[np.int64]:
    """Posterior argmax for every row of ``records``."""
    records = np.asarray(records, dtype=np.int64)
    log_likelihood = condition_records(kraus_set, prior, records, eta)[records.shape[1]]
    return _first_maximum(np.exp(log_posteriors(prior, log_likelihood)))


def bayes_predict(
    kraus_set: KrausSet,
    prior: Prior,
    record: Iterable[int],
    eta: float = 1.0,
) -> int:
    """
    Index of the most probable prior state given ``record``.

    Ties go to the earliest prior element.

    Raises:
        DegenerateRecordError: If the record is impossible under every prior state.
    """
    records = np.asarray([list(record)], dtype=np.int64).reshape(1, -1)
    return int(bayes_predictions(kraus_set, prior, records, eta)[0])


def estimate_accuracy(
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
    Monte-Carlo accuracy of the Bayes predictor with a Hoeffding bound.

    Each of ``M`` trajectories from the ``acc`` stream draws its initial state
    from ``prior``; the estimate is the fraction predicted correctly.
    """
    if samples is None:
        if epsilon is None:
            raise ValidationError("either a sample count or epsilon is required")
        samples = hoeffding_samples(epsilon, delta)
    if samples < 1:
        raise ValidationError(f"sample count must be positive, got {samples}")
    executor = executor or NumpyExecutor()
    executor.check_supported(kraus_set, prior)
    stream = TrajectoryStream(seed=seed, name="acc")

    def correct_count(indices: range) -> NDArray[np.float64]:
        batch = executor.sample_records(kraus_set, prior, T, eta, stream, indices)
        predictions = bayes_predictions(kraus_set, prior, batch.shown, eta)
        return np.array([np.count_nonzero(predictions == batch.initial_index)], dtype=np.float64)

    logger.info("Estimating Bayes accuracy at T=%d with M=%d on %s", T, samples, executor.name)
    total = ordered_sum(map_chunks(correct_count, samples, workers=executor.max_workers))[0]
    return EstimateWithBound(
        value=total / samples,
        epsilon=hoeffding_epsilon(samples, delta),
        delta=delta,
        samples=samples,
        seed=seed,
    )


def one_hot_encode(
    record: Sequence[int] | NDArray[np.int64], alphabet_size: int
) -> NDArray[np.float64]:
    """
    ``|O| × T`` matrix whose column ``t`` is the indicator of outcome ``a_t``.

    Examples:
        >>> one_hot_encode([1, 0], 2)
        array([[0., 1.],
               [1., 0.]])
    """
    outcomes = np.asarray(record, dtype=np.int64)
    if outcomes.size and (outcomes.min() < 0 or outcomes.max() >= alphabet_size):
        raise ValidationError(f"record contains an outcome outside 0..{alphabet_size - 1}")
    encoded = np.zeros((alphabet_size, outcomes.size))
    encoded[outcomes, np.arange(outcomes.size)] = 1.0
    return encoded


def _flat_features(records: NDArray[np.int64], alphabet_size: int) -> NDArray[np.float64]:
    """One-hot features flattened row-major over ``(a, t)``, shape ``(N, |O|·T)``."""
    count, length = records.shape
    features = np.zeros((count, alphabet_size * length))
    features[np.arange(count)[:, None], records * length + np.arange(length)] = 1.0
    return features


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Records of equal length with labels +1 (↑) or −1 (↓)."""

    records: NDArray[np.int64]
    labels: NDArray[np.int64]
    alphabet_size: int
    metadata: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.records.ndim != 2 or self.records.shape[0] == 0:
            raise ValidationError("dataset needs at least one record of fixed length")
        if self.labels.shape != (self.records.shape[0],):
            raise ValidationError("one label per record is required")
        if not np.isin(self.labels, (1, -1)).all():
            raise ValidationError("labels must be +1 or -1")

    @property
    def size(self) -> int:
        """Number of examples."""
        return int(self.records.shape[0])

    @property
    def length(self) -> int:
        """Record length T."""
        return int(self.records.shape[1])

    def prefix(self, T: int) -> "LabeledDataset":
        """Same examples truncated to their first ``T`` outcomes."""
        return LabeledDataset(
            records=self.records[:, :T],
            labels=self.labels,
            alphabet_size=self.alphabet_size,
            metadata={**self.metadata, "T": T},
        )


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """``y = sgn(Σ_t W[a_t, t] − θ)`` with sgn(0) = +1."""

    weights: NDArray[np.float64]
    threshold: float
    training_loss: tuple[float, ...] = ()

    def decision_function(self, records: NDArray[np.int64]) -> NDArray[np.float64]:
        """``Tr(WᵀX) − θ`` for each record."""
        records = np.asarray(records, dtype=np.int64)
        if records.shape[1] != self.weights.shape[1]:
            raise ValidationError(
                f"records of length {records.shape[1]} do not match "
                f"weights for T={self.weights.shape[1]}"
            )
        scores: NDArray[np.float64] = self.weights[records, np.arange(records.shape[1])].sum(axis=1)
        return scores - self.threshold

    def predict(self, records: NDArray[np.int64]) -> NDArray[np.int64]:
        """Labels in {+1, −1}."""
        return np.where(self.decision_function(records) >= 0.0, 1, -1).astype(np.int64)

    def accuracy(self, dataset: LabeledDataset) -> float:
        """Fraction of ``dataset`` labelled correctly."""
        return float(np.mean(self.predict(dataset.records) == dataset.labels))


def _logistic_loss(
    features: NDArray[np.float64],
    labels: NDArray[np.float64],
    mean: NDArray[np.float64],
    scale: NDArray[np.float64],
    weights: NDArray[np.float64],
    bias: float,
    l2: float,
) -> float:
    scores = features @ (weights / scale) - mean @ (weights / scale) + bias
    return float(np.mean(np.logaddexp(0.0, -labels * scores)) + 0.5 * l2 * weights @ weights)


def logistic_fit(
    train: LabeledDataset,
    l2: float = 0.0,
    iterations: int = 500,
    learning_rate: float = 0.1,
) -> LinearClassifier:
    """
    Full-batch gradient descent on the ℓ2-regularized logistic loss.

    Features are standardized with the training mean and standard deviation
    (constant features keep scale 1); the fitted weights are folded back so the
    classifier acts on raw one-hot records. A step that would raise the loss is
    retried with half the step size, so the recorded loss never increases.

    Args:
        train: Training examples.
        l2: Ridge penalty on the standardized weights.
        iterations: Gradient steps.
        learning_rate: Initial step size.

    Returns:
        LinearClassifier: Fitted weights, threshold and per-iteration loss.
    """
    if l2 < 0.0:
        raise ValidationError(f"l2 must be nonnegative, got {l2}")
    if iterations < 0 or learning_rate <= 0.0:
        raise ValidationError("iterations must be nonnegative and the learning rate positive")
    features = _flat_features(train.records, train.alphabet_size)
    labels = train.labels.astype(np.float64)
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    scale = np.where(std > 0.0, std, 1.0)
    weights = np.zeros(features.shape[1])
    bias = 0.0
    step = learning_rate
    loss = _logistic_loss(features, labels, mean, scale, weights, bias, l2)
    history = [loss]

    for _ in range(iterations):
        scores = features @ (weights / scale) - mean @ (weights / scale) + bias
        # d/ds softplus(−y·s) = −y·σ(−y·s)
        residual = -labels / (1.0 + np.exp(np.clip(labels * scores, -700.0, 700.0)))
        grad_weights = ((features.T @ residual) - mean * residual.sum()) / scale / train.size
        grad_weights += l2 * weights
        grad_bias = float(residual.mean())
        while step > 1e-12:
            trial_weights = weights - step * grad_weights
            trial_bias = bias - step * grad_bias
            trial_loss = _logistic_loss(
                features, labels, mean, scale, trial_weights, trial_bias, l2
            )
            if trial_loss <= loss:
                break
            step *= 0.5
        else:
            logger.debug("Step size underflow; stopping descent early")
            break
        weights, bias, loss = trial_weights, trial_bias, trial_loss
        history.append(loss)

    raw = weights / scale
    return LinearClassifier(
        weights=raw.reshape(train.alphabet_size, train.length),
        threshold=float(mean @ raw - bias),
        training_loss=tuple(history),
    )


def sample_range(
    executor: BaseExecutor,
    kraus_set: KrausSet,
    prior: Prior,
    T: int,
    eta: float,
    stream: TrajectoryStream,
    indices: range,
) -> RecordBatch:
    """Sample trajectories ``indices`` in chunks and join them."""
    batches = map_chunks(
        lambda chunk: executor.sample_records(kraus_set, prior, T, eta, stream, chunk),
        len(indices),
        workers=executor.max_workers,
        offset=indices.start,
    )
    return concat_batches(batches)


def labeled_dataset(batch: RecordBatch, alphabet_size: int, **metadata: object) -> LabeledDataset:
    """Label records +1 when they started in the first prior state (↑), else −1."""
    return LabeledDataset(
        records=batch.shown,
        labels=np.where(batch.initial_index == 0, 1, -1).astype(np.int64),
        alphabet_size=alphabet_size,
        metadata={"start": batch.start, **metadata},
    )


class OverfitRow(NamedTuple):
    """Train, test and Bayes accuracy at one record length."""

    T: int
    train_acc: float
    test_acc: float
    bayes_acc: float
    bayes_eps: float


def overfit_experiment(
    kraus_set: KrausSet,
    lengths: Sequence[int],
    n_train: int,
    n_test: int,
    eta: float = 1.0,
    l2: float = 0.0,
    iterations: int = 500,
    learning_rate: float = 0.1,
    seed: int = 0,
    delta: float = 0.01,
    executor: BaseExecutor | None = None,
) -> list[OverfitRow]:
    """
    Compare the logistic learner with the Bayes predictor across record lengths.

    Trajectories ``[0, n_train)`` of the ``ml`` stream form the training set and
    ``[n_train, n_train + n_test)`` the test set; both are sampled once at the
    largest length and truncated for shorter ones. The Bayes accuracy is measured
    on the same test records.
    """
    if n_train < 1 or n_test < 1:
        raise ValidationError("training and test sets must be nonempty")
    lengths = sorted({int(T) for T in lengths})
    if not lengths or lengths[0] < 1:
        raise ValidationError(f"record lengths must be positive, got {lengths}")
    executor = executor or NumpyExecutor()
    prior = Prior.default()
    executor.check_supported(kraus_set, prior)
    stream = TrajectoryStream(seed=seed, name="ml")
    longest = lengths[-1]
    train_batch = sample_range(executor, kraus_set, prior, longest, eta, stream, range(0, n_train))
    test_batch = sample_range(
        executor, kraus_set, prior, longest, eta, stream, range(n_train, n_train + n_test)
    )
    train = labeled_dataset(train_batch, kraus_set.size, seed=seed)
    test = labeled_dataset(test_batch, kraus_set.size, seed=seed)
    bayes_eps = hoeffding_epsilon(n_test, delta)

    rows = []
    for T in lengths:
        classifier = logistic_fit(
            train.prefix(T), l2=l2, iterations=iterations, learning_rate=learning_rate
        )
        bayes = bayes_predictions(kraus_set, prior, test.records[:, :T], eta)
        row = OverfitRow(
            T=T,
            train_acc=classifier.accuracy(train.prefix(T)),
            test_acc=classifier.accuracy(test.prefix(T)),
            bayes_acc=float(np.mean(bayes == test_batch.initial_index)),
            bayes_eps=bayes_eps,
        )
        logger.info("Overfit T=%d: train=%.4f test=%.4f bayes=%.4f", T, *row[1:4])
        rows.append(row)
    return rows
