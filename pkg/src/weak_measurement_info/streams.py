"""Counter-based random streams and order-stable fan-out over trajectory indices.

Every trajectory (or SME path) ``i`` of a named stream owns an independent Philox
generator keyed by ``(seed, stream)`` whose counter starts at ``i << 192``. The
draws of trajectory ``i`` therefore depend only on ``(seed, stream, i)``, never on
how indices are grouped into chunks or spread over workers.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError

logger = logging.getLogger(__name__)

T = TypeVar("T")

STREAM_TAGS: dict[str, int] = {
    "mi": 1,  # mutual information estimation
    "acc": 2,  # accuracy estimation
    "sme": 3,  # SME Wiener increments
    "ml": 4,  # labeled datasets for the readout learner
    "rec": 5,  # single records and record dumps
}

# Fixed fan-out granularity; results must not depend on the worker count.
CHUNK_SIZE = 512

_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class TrajectoryStream:
    """Named sub-stream of a 64-bit base seed."""

    seed: int
    name: str

    def __post_init__(self) -> None:
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.name not in STREAM_TAGS:
            raise ValidationError(
                f"unknown stream {self.name!r}; expected one of {sorted(STREAM_TAGS)}"
            )

    @property
    def key(self) -> int:
        """128-bit Philox key: seed in the low word, stream tag in the high word."""
        return self.seed | (STREAM_TAGS[self.name] << 64)

    def generator(self, index: int) -> np.random.Generator:
        """Generator dedicated to trajectory ``index``."""
        if index < 0:
            raise ValidationError(f"trajectory index must be nonnegative, got {index}")
        return np.random.Generator(np.random.Philox(key=self.key, counter=index << 192))

    def uniforms(self, start: int, count: int, width: int) -> NDArray[np.float64]:
        """Rows ``start .. start+count-1`` of ``width`` uniforms in [0, 1)."""
        draws = np.empty((count, width), dtype=np.float64)
        for row in range(count):
            draws[row] = self.generator(start + row).random(width)
        return draws

    def normals(self, start: int, count: int, shape: tuple[int, ...]) -> NDArray[np.float64]:
        """Standard normal draws of ``shape`` for each of ``count`` consecutive indices."""
        draws = np.empty((count, *shape), dtype=np.float64)
        for row in range(count):
            draws[row] = self.generator(start + row).standard_normal(shape)
        return draws


def chunk_ranges(total: int, chunk_size: int = CHUNK_SIZE, offset: int = 0) -> list[range]:
    """Split ``range(offset, offset + total)`` into consecutive chunks of at most ``chunk_size``."""
    end = offset + total
    return [range(start, min(start + chunk_size, end)) for start in range(offset, end, chunk_size)]


def map_chunks(
    task: Callable[[range], T],
    total: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
    offset: int = 0,
) -> list[T]:
    """
    Run ``task`` on every chunk of ``range(offset, offset + total)``.

    Args:
        task: Callable receiving one chunk of indices.
        total: Number of indices.
        workers: Thread count; 1 runs inline.
        chunk_size: Chunk length.
        offset: First index.

    Returns:
        Task results in chunk order, independent of ``workers``.
    """
    chunks = chunk_ranges(total, chunk_size, offset)
    logger.debug("Dispatching %d indices in %d chunks on %d workers", total, len(chunks), workers)
    if workers <= 1 or len(chunks) <= 1:
        return [task(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="chunk") as pool:
        return list(pool.map(task, chunks))


def ordered_sum(parts: Sequence[NDArray[np.float64]]) -> NDArray[np.float64]:
    """Sum partial results strictly left to right."""
    if not parts:
        raise ValidationError("nothing to sum")
    total = np.array(parts[0], dtype=np.float64, copy=True)
    for part in parts[1:]:
        total = total + part
    return total
