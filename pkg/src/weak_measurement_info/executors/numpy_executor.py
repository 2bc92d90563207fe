"""Vectorized NumPy executor working on Pauli vectors."""

import logging
from typing import TYPE_CHECKING

from ..trajectory import RecordBatch, sample_batch, uniform_width
from .base import BaseExecutor

if TYPE_CHECKING:
    from ..measurement_models import KrausSet
    from ..streams import TrajectoryStream
    from ..trajectory import Prior

logger = logging.getLogger(__name__)


class NumpyExecutor(BaseExecutor):
    """
    CPU executor sampling whole chunks of trajectories at once.

    Supports every model and every prior, including mixed initial states and
    η < 1.
    """

    def __init__(self, max_workers: int = 1):
        """
        Initialize NumpyExecutor.

        Args:
            max_workers: Threads used to process chunks concurrently.
        """
        if max_workers < 1:
            raise ValueError(f"max_workers must be at least 1, got {max_workers}")
        self._max_workers = max_workers

    @property
    def name(self) -> str:
        """Return executor name."""
        return "numpy"

    @property
    def max_workers(self) -> int:
        """Thread count for chunk fan-out."""
        return self._max_workers

    def sample_records(
        self,
        kraus_set: "KrausSet",
        prior: "Prior",
        T: int,
        eta: float,
        stream: "TrajectoryStream",
        indices: range,
    ) -> RecordBatch:
        """Sample ``indices`` from ``stream`` with the Pauli-vector kernel."""
        uniforms = stream.uniforms(indices.start, len(indices), uniform_width(T))
        logger.debug(
            "Sampling %d trajectories of length %d from index %d", len(indices), T, indices.start
        )
        return sample_batch(kraus_set, prior, T, eta, uniforms, start=indices.start)
