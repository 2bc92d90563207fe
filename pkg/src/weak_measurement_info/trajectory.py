"""Record sampling, record likelihoods and posteriors over a discrete prior.

Trajectories are simulated on Pauli vectors with the per-outcome superoperators
of a :class:`~weak_measurement_info.measurement_models.KrausSet`. Each trajectory
consumes ``1 + 2T`` uniforms: ``u[0]`` selects the initial prior element, and step
``t`` uses ``u[1 + 2t]`` for the true outcome and ``u[2 + 2t]`` for the readout
noise. A record of length ``T`` is therefore a prefix of the record of length
``T + 1`` drawn from the same uniforms.
"""

import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp
from scipy.stats import entropy

from .errors import DegenerateRecordError, ValidationError
from .measurement_models import KrausSet, noisy_superops
from .state_algebra import (
    DensityMatrix,
    PauliAxis,
    PauliVector,
    axis_state,
    pauli_decompose,
    validate_density_matrix,
)
from .streams import TrajectoryStream
from .tolerances import PHYSICAL_ATOL, STRUCTURAL_ATOL

logger = logging.getLogger(__name__)

Record = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Prior:
    """
    Finite ensemble of initial states with their probabilities.

    Examples:
        >>> Prior.default().probabilities
        array([0.5, 0.5])
    """

    states: tuple[DensityMatrix, ...]
    probabilities: NDArray[np.float64]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.states:
            raise ValidationError("prior needs at least one state")
        probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if probabilities.shape != (len(self.states),):
            raise ValidationError("one probability per prior state is required")
        if (probabilities < 0.0).any():
            raise ValidationError("prior probabilities must be nonnegative")
        if abs(probabilities.sum() - 1.0) > STRUCTURAL_ATOL:
            raise ValidationError(f"prior probabilities sum to {probabilities.sum()}, expected 1")
        states = tuple(validate_density_matrix(state) for state in self.states)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probabilities", probabilities)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(states))))
        elif len(self.labels) != len(states):
            raise ValidationError("one label per prior state is required")

    @classmethod
    def default(cls) -> "Prior":
        """Equal mixture of |↑⟩ and |↓⟩."""
        return cls.axis(PauliAxis.Z)

    @classmethod
    def axis(cls, axis: PauliAxis | str) -> "Prior":
        """Equal mixture of the +1 and -1 eigenstates of ``axis``."""
        name = PauliAxis(str(axis).upper())
        labels = ("up", "down") if name == PauliAxis.Z else (f"{name.lower()}+", f"{name.lower()}-")
        return cls(
            states=(axis_state(name, 1), axis_state(name, -1)),
            probabilities=np.array([0.5, 0.5]),
            labels=labels,
        )

    @classmethod
    def point(cls, rho: DensityMatrix) -> "Prior":
        """Single known initial state."""
        return cls(states=(rho,), probabilities=np.array([1.0]), labels=("rho0",))

    @property
    def size(self) -> int:
        """Support size |D|."""
        return len(self.states)

    @property
    def pauli_vectors(self) -> NDArray[np.float64]:
        """Prior states as Pauli vectors, shape ``(|D|, 4)``."""
        return np.stack([pauli_decompose(state) for state in self.states])

    @property
    def entropy(self) -> float:
        """Shannon entropy H(P0) in bits."""
        return float(entropy(self.probabilities, base=2))


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    """One simulated trajectory."""

    record: Record
    final_state: PauliVector
    initial_index: int
    true_record: Record = field(default=())


@dataclass(frozen=True, eq=False)
class RecordBatch:
    """
    Records of consecutive trajectory indices.

    ``shown`` and ``true`` have shape ``(B, T)``; for η = 1 they are equal.
    """

    start: int
    shown: NDArray[np.int64]
    true: NDArray[np.int64]
    initial_index: NDArray[np.int64]
    final_states: NDArray[np.float64]

    @property
    def count(self) -> int:
        """Number of trajectories in the batch."""
        return int(self.shown.shape[0])

    @property
    def length(self) -> int:
        """Record length T."""
        return int(self.shown.shape[1])

    def sample(self, row: int) -> TrajectorySample:
        """Unpack one row as a :class:`TrajectorySample`."""
        return TrajectorySample(
            record=tuple(int(a) for a in self.shown[row]),
            final_state=self.final_states[row].copy(),
            initial_index=int(self.initial_index[row]),
            true_record=tuple(int(a) for a in self.true[row]),
        )


def uniform_width(T: int) -> int:
    """Uniforms consumed by one trajectory of length ``T``."""
    return 1 + 2 * T


def draw_initial(prior: Prior, u: NDArray[np.float64]) -> NDArray[np.int64]:
    """Map uniforms to prior indices by inverse CDF."""
    cumulative = np.cumsum(prior.probabilities)
    indices = np.searchsorted(cumulative, u * cumulative[-1], side="right")
    return np.minimum(indices, prior.size - 1).astype(np.int64)


def kernel_noise(
    true: NDArray[np.int64], v: NDArray[np.float64], n: int, eta: float
) -> NDArray[np.int64]:
    """
    Apply the readout noise kernel to true outcomes.

    With probability √η the true outcome is shown; otherwise a uniformly random
    outcome is shown, so ``Pr[y | b] = (1 − √η)/n + √η·δ_yb``.
    """
    if eta == 1.0:
        return true
    root = math.sqrt(eta)
    replacement = np.floor((v - root) / (1.0 - root) * n).astype(np.int64)
    replacement = np.clip(replacement, 0, n - 1)
    return np.where(v < root, true, replacement)


def sample_batch(
    kraus_set: KrausSet,
    prior: Prior,
    T: int,
    eta: float,
    uniforms: NDArray[np.float64],
    start: int = 0,
) -> RecordBatch:
    """
    Sample one trajectory per row of ``uniforms``.

    Args:
        kraus_set: Measurement model.
        prior: Initial-state ensemble.
        T: Record length.
        eta: Readout efficiency in [0, 1].
        uniforms: Array of shape ``(B, 1 + 2T)``.
        start: Trajectory index of the first row.

    Returns:
        The sampled batch.
    """
    if T < 0:
        raise ValidationError(f"record length must be nonnegative, got {T}")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"efficiency must lie in [0, 1], got {eta}")
    if uniforms.ndim != 2 or uniforms.shape[1] != uniform_width(T):
        raise ValidationError(
            f"expected uniforms of width {uniform_width(T)}, got {uniforms.shape}"
        )

    batch = uniforms.shape[0]
    n = kraus_set.size
    superops = kraus_set.superops
    rows = np.arange(batch)

    initial = draw_initial(prior, uniforms[:, 0])
    state = prior.pauli_vectors[initial]
    true = np.empty((batch, T), dtype=np.int64)
    shown = np.empty((batch, T), dtype=np.int64)

    for t in range(T):
        branches = np.einsum("nij,bj->bni", superops, state)
        cumulative = np.cumsum(np.clip(branches[:, :, 0], 0.0, None), axis=1)
        threshold = uniforms[:, 1 + 2 * t] * cumulative[:, -1]
        outcome = np.minimum((cumulative <= threshold[:, None]).sum(axis=1), n - 1)
        selected = branches[rows, outcome]
        state = selected / selected[:, :1]
        state[:, 0] = 1.0
        true[:, t] = outcome
        shown[:, t] = kernel_noise(outcome, uniforms[:, 2 + 2 * t], n, eta)

    return RecordBatch(
        start=start,
        shown=shown,
        true=true,
        initial_index=initial,
        final_states=state,
    )


def sample_record(
    kraus_set: KrausSet,
    rho0: DensityMatrix,
    T: int,
    eta: float,
    seed: int,
) -> TrajectorySample:
    """
    Sample a single measurement record from a known initial state.

    Uses trajectory index 0 of the ``rec`` stream, so identical arguments give a
    bit-identical sample.
    """
    stream = TrajectoryStream(seed=seed, name="rec")
    uniforms = stream.uniforms(0, 1, uniform_width(T))
    batch = sample_batch(kraus_set, Prior.point(rho0), T, eta, uniforms)
    return batch.sample(0)


def _check_records(kraus_set: KrausSet, records: NDArray[np.int64]) -> None:
    if records.size and (records.min() < 0 or records.max() >= kraus_set.size):
        raise ValidationError(f"record contains an outcome outside 0..{kraus_set.size - 1}")


def record_likelihood(
    kraus_set: KrausSet,
    rho0: DensityMatrix,
    record: Iterable[int],
    eta: float = 1.0,
) -> float:
    """
    Probability of observing ``record`` from ``rho0``.

    For η = 1 the Kraus operators are applied left to right to the unnormalized
    2×2 state. For η < 1 the shown-outcome superoperators ``Σ_b β[y, b]·E_b``
    are chained on the Pauli vector. Impossible records give 0.

    Examples:
        >>> from weak_measurement_info.measurement_models import build_kraus_set
        >>> from weak_measurement_info.state_algebra import axis_state
        >>> round(record_likelihood(build_kraus_set("II", 1.0), axis_state("Z", 1), [0]), 5)
        0.8808
    """
    outcomes = np.asarray(list(record), dtype=np.int64)
    _check_records(kraus_set, outcomes)
    matrix = validate_density_matrix(rho0)
    if eta == 1.0:
        for a in outcomes:
            kraus = kraus_set.operators[a]
            matrix = kraus @ matrix @ kraus.conj().T
        return max(float(np.trace(matrix).real), 0.0)
    operators = noisy_superops(kraus_set, eta)
    vector = pauli_decompose(matrix)
    for y in outcomes:
        vector = operators[y] @ vector
    return max(float(vector[0]), 0.0)


def condition_records(
    kraus_set: KrausSet,
    prior: Prior,
    records: NDArray[np.int64],
    eta: float,
    checkpoints: Iterable[int] | None = None,
) -> dict[int, NDArray[np.float64]]:
    """
    Log-likelihoods ``ln Pr[a_{1:T} | ρ]`` of shown records under every prior state.

    Each (record, prior state) pair carries a normalized Pauli vector and its
    accumulated log-normalization; a pair whose branch probability hits zero is
    frozen at ``-inf``.

    Args:
        kraus_set: Measurement model.
        prior: Candidate initial states.
        records: Shown records, shape ``(B, T)``.
        eta: Readout efficiency.
        checkpoints: Prefix lengths to report; defaults to ``T`` only.

    Returns:
        Mapping from prefix length to a ``(B, |D|)`` array.
    """
    records = np.asarray(records, dtype=np.int64)
    if records.ndim != 2:
        raise ValidationError(f"records must be a 2-D array, got shape {records.shape}")
    _check_records(kraus_set, records)
    batch, length = records.shape
    wanted = {length} if checkpoints is None else set(checkpoints)
    if any(not 0 <= T <= length for T in wanted):
        raise ValidationError(f"checkpoints must lie in [0, {length}]")

    operators = noisy_superops(kraus_set, eta)
    chains = np.broadcast_to(prior.pauli_vectors, (batch, prior.size, 4)).copy()
    log_likelihood = np.zeros((batch, prior.size))
    reported: dict[int, NDArray[np.float64]] = {}
    if 0 in wanted:
        reported[0] = log_likelihood.copy()

    for t in range(length):
        chains = np.einsum("bij,bdj->bdi", operators[records[:, t]], chains)
        norm = chains[:, :, 0]
        alive = norm > 0.0
        safe = np.where(alive, norm, 1.0)
        log_likelihood = np.where(alive, log_likelihood + np.log(safe), -np.inf)
        chains = np.where(alive[:, :, None], chains / safe[:, :, None], 0.0)
        if t + 1 in wanted:
            reported[t + 1] = log_likelihood.copy()
    return reported


def log_posteriors(prior: Prior, log_likelihood: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Row-wise ``ln Pr[ρ | record]`` from log-likelihoods.

    Raises:
        DegenerateRecordError: If some record has zero likelihood under every
            state in the prior's support.
    """
    with np.errstate(divide="ignore"):
        log_prior = np.log(prior.probabilities)
    joint = log_likelihood + log_prior
    evidence = logsumexp(joint, axis=1, keepdims=True)
    if not np.isfinite(evidence).all():
        raise DegenerateRecordError("record has zero probability under every prior state")
    result: NDArray[np.float64] = joint - evidence
    return result


def posterior(
    kraus_set: KrausSet,
    prior: Prior,
    record: Iterable[int],
    eta: float = 1.0,
) -> NDArray[np.float64]:
    """
    Bayes posterior over the prior's support given one shown record.

    Raises:
        DegenerateRecordError: If every likelihood is zero.
    """
    records = np.asarray([list(record)], dtype=np.int64).reshape(1, -1)
    log_likelihood = condition_records(kraus_set, prior, records, eta)[records.shape[1]]
    probabilities: NDArray[np.float64] = np.exp(log_posteriors(prior, log_likelihood)[0])
    return probabilities


def final_state_is_physical(state: PauliVector) -> bool:
    """Bloch norm within the unit ball up to rounding."""
    return float(np.linalg.norm(state[1:])) <= 1.0 + PHYSICAL_ATOL


# Record dumps


def format_record_header(metadata: Mapping[str, object]) -> str:
    """``# model=<name> x=<v> phi=<v> eta=<v> T=<n> seed=<s>``."""
    keys = ("model", "x", "phi", "eta", "T", "seed")
    missing = [key for key in keys if key not in metadata]
    if missing:
        raise ValidationError(f"record header is missing {missing}")
    return "# " + " ".join(f"{key}={metadata[key]}" for key in keys)


def write_records(
    target: Path | TextIO,
    records: NDArray[np.int64],
    metadata: Mapping[str, object],
) -> None:
    """Write one record per line, outcome indices separated by commas."""
    lines = [format_record_header(metadata)]
    lines.extend(",".join(str(int(a)) for a in row) for row in np.asarray(records))
    text = "\n".join(lines) + "\n"
    if isinstance(target, Path):
        target.write_text(text, encoding="utf-8")
    else:
        target.write(text)


def read_records(source: Path | TextIO) -> tuple[dict[str, str], NDArray[np.int64]]:
    """
    Parse a record dump written by :func:`write_records`.

    Returns:
        ``(header, records)`` with records of shape ``(B, T)``.
    """
    text = source.read_text(encoding="utf-8") if isinstance(source, Path) else source.read()
    lines = text.split("\n")
    if not lines or not lines[0].startswith("#"):
        raise ValidationError("record dump must start with a '#' header line")
    header: dict[str, str] = {}
    for item in lines[0].lstrip("#").split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"malformed header item {item!r}")
        header[key] = value
    length = int(header.get("T", "0"))
    body = lines[1:-1] if lines[-1] == "" else lines[1:]
    rows = [[int(a) for a in line.split(",")] if line else [] for line in body]
    if any(len(row) != length for row in rows):
        raise ValidationError(f"every record must have length {length}")
    return header, np.asarray(rows, dtype=np.int64).reshape(len(rows), length)


def concat_batches(batches: list[RecordBatch]) -> RecordBatch:
    """Join batches of consecutive index ranges."""
    if not batches:
        raise ValidationError("nothing to concatenate")
    return RecordBatch(
        start=batches[0].start,
        shown=np.concatenate([batch.shown for batch in batches]),
        true=np.concatenate([batch.true for batch in batches]),
        initial_index=np.concatenate([batch.initial_index for batch in batches]),
        final_states=np.concatenate([batch.final_states for batch in batches]),
    )
