"""Base executor interface for trajectory sampling backends."""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ..measurement_models import KrausSet
    from ..streams import TrajectoryStream
    from ..trajectory import Prior, RecordBatch


class BaseExecutor(ABC):
    """
    Abstract base class for executor implementations.

    Executors turn a measurement model, a prior and a block of trajectory indices
    into sampled records. Every executor must draw the randomness of trajectory
    ``i`` from ``stream`` alone so that results do not depend on chunking.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """
        Return the executor name.

        Returns:
            str: Executor identifier (e.g., "numpy", "aer")
        """

    @property
    def max_workers(self) -> int:
        """Thread count used when fanning chunks of trajectories out."""
        return 1

    @abstractmethod
    def sample_records(
        self,
        kraus_set: "KrausSet",
        prior: "Prior",
        T: int,
        eta: float,
        stream: "TrajectoryStream",
        indices: range,
    ) -> "RecordBatch":
        """
        Sample the trajectories with the given indices.

        Args:
            kraus_set: Measurement model.
            prior: Initial-state ensemble; each trajectory draws its own element.
            T: Record length.
            eta: Readout efficiency in [0, 1].
            stream: Named counter-based stream.
            indices: Consecutive trajectory indices.

        Returns:
            RecordBatch: Shown and true records with final states.

        Raises:
            UnsupportedModelError: If the backend cannot sample this model or prior.
        """

    def check_supported(self, kraus_set: "KrausSet", prior: "Prior") -> None:  # noqa: B027
        """Raise :class:`UnsupportedModelError` for inputs the backend cannot run."""
