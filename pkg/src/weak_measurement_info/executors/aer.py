"""Aer-based executor sampling Model II records through an ancilla dilation."""

import logging
import math
from typing import TYPE_CHECKING, Any

import numpy as np

from ..errors import UnsupportedModelError, ValidationError
from ..models import ModelKind
from ..state_algebra import pure_state_vector
from ..streams import STREAM_TAGS
from ..trajectory import RecordBatch, draw_initial, kernel_noise, uniform_width
from .base import BaseExecutor

if TYPE_CHECKING:
    from ..measurement_models import KrausSet
    from ..streams import TrajectoryStream
    from ..trajectory import Prior

logger = logging.getLogger(__name__)


class AerExecutor(BaseExecutor):
    """
    CPU executor using the Qiskit Aer simulator.

    Each step of a Model II record is a circuit block on a system qubit and one
    ancilla: ``rx(φ)`` on the system, ``ry(θ)`` on the ancilla with
    ``θ = arccos(tanh x)``, ``cry(π − 2θ)`` controlled by the system, then an
    ancilla measurement and reset. Ancilla result 0 is outcome ``+``.

    Design notes:
    - Only Model II with pure prior states is supported
    - Initial prior indices and readout noise use the same stream uniforms as
      the NumPy executor; the true outcomes come from the simulator
    - One circuit per prior state per chunk, seeded from (seed, stream, chunk start)
    """

    def __init__(
        self,
        max_parallel_threads: int = 0,
        method: str = "statevector",
        max_workers: int = 1,
    ):
        """
        Initialize AerExecutor.

        Args:
            max_parallel_threads: Maximum number of simulator threads (0 = auto).
            method: Aer simulation method.
            max_workers: Threads used to process chunks concurrently.
        """
        self.max_parallel_threads = max_parallel_threads
        self.method = method
        self._max_workers = max_workers

    @property
    def name(self) -> str:
        """Return executor name."""
        return "aer"

    @property
    def max_workers(self) -> int:
        """Thread count for chunk fan-out."""
        return self._max_workers

    def _create_simulator(self) -> Any:
        """
        Create AerSimulator instance.

        Returns:
            AerSimulator: Configured simulator instance.
        """
        from qiskit_aer import AerSimulator

        options: dict[str, Any] = {"method": self.method}
        if self.max_parallel_threads > 0:
            options["max_parallel_threads"] = self.max_parallel_threads
        return AerSimulator(**options)

    def check_supported(self, kraus_set: "KrausSet", prior: "Prior") -> None:
        """Reject Model I and mixed prior states."""
        if kraus_set.kind != ModelKind.MODEL_II:
            raise UnsupportedModelError("the aer executor only samples Model II")
        for state in prior.states:
            try:
                pure_state_vector(state)
            except ValidationError as e:
                raise UnsupportedModelError("the aer executor needs pure prior states") from e

    def build_circuit(self, kraus_set: "KrausSet", psi: np.ndarray, T: int) -> Any:
        """
        Circuit measuring ``T`` Model II steps from the pure state ``psi``.

        Clbit ``t`` holds the ancilla result of step ``t``.
        """
        from qiskit import QuantumCircuit

        theta = math.acos(math.tanh(kraus_set.x))
        circuit = QuantumCircuit(2, T)
        circuit.initialize(list(psi), [0])
        for t in range(T):
            circuit.rx(kraus_set.phi, 0)
            circuit.ry(theta, 1)
            circuit.cry(math.pi - 2.0 * theta, 0, 1)
            circuit.measure(1, t)
            circuit.reset(1)
        return circuit

    def _seed(self, stream: "TrajectoryStream", start: int, prior_index: int) -> int:
        tag = STREAM_TAGS[stream.name]
        sequence = np.random.SeedSequence([stream.seed, tag, start, prior_index])
        return int(sequence.generate_state(1, dtype=np.uint32)[0])

    def sample_records(
        self,
        kraus_set: "KrausSet",
        prior: "Prior",
        T: int,
        eta: float,
        stream: "TrajectoryStream",
        indices: range,
    ) -> RecordBatch:
        """
        Sample ``indices`` on AerSimulator.

        Raises:
            UnsupportedModelError: For Model I or mixed prior states.
        """
        from qiskit import transpile

        self.check_supported(kraus_set, prior)
        count = len(indices)
        uniforms = stream.uniforms(indices.start, count, uniform_width(T))
        initial = draw_initial(prior, uniforms[:, 0])
        true = np.zeros((count, T), dtype=np.int64)

        if T > 0:
            simulator = self._create_simulator()
            for prior_index in np.unique(initial):
                rows = np.flatnonzero(initial == prior_index)
                psi = pure_state_vector(prior.states[int(prior_index)])
                circuit = transpile(self.build_circuit(kraus_set, psi, T), simulator)
                result = simulator.run(
                    circuit,
                    shots=len(rows),
                    memory=True,
                    seed_simulator=self._seed(stream, indices.start, int(prior_index)),
                ).result()
                memory = result.get_memory(0)
                # Clbit 0 is the rightmost character.
                true[rows] = np.array([[int(bits[-1 - t]) for t in range(T)] for bits in memory])
            logger.debug("Aer sampled %d trajectories of length %d", count, T)

        shown = np.empty_like(true)
        for t in range(T):
            shown[:, t] = kernel_noise(true[:, t], uniforms[:, 2 + 2 * t], kraus_set.size, eta)

        states = prior.pauli_vectors[initial]
        superops = kraus_set.superops
        for t in range(T):
            states = np.einsum("bij,bj->bi", superops[true[:, t]], states)
            states = states / states[:, :1]

        return RecordBatch(
            start=indices.start,
            shown=shown,
            true=true,
            initial_index=initial,
            final_states=states,
        )
