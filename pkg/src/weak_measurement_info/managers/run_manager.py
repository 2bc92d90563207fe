"""Run manager with a FIFO queue and a single worker thread."""

import logging
import queue
import threading
import time
from datetime import UTC, datetime
from typing import Any
from uuid import uuid4

from ..config import RunConfig
from ..executors.base import BaseExecutor
from ..experiments import get_program, run_program
from ..models import RunInfo, RunStatus

logger = logging.getLogger(__name__)

_FINISHED = (RunStatus.COMPLETED, RunStatus.FAILED, RunStatus.CANCELLED)


class RunManager:
    """
    Manage program runs submitted over HTTP.

    Features:
    - Runs are queued (FIFO)
    - Single worker thread executes runs sequentially
    - Executor selected by backend name
    - Thread-safe run state
    """

    def __init__(self, executors: dict[str, BaseExecutor]):
        """
        Initialize run manager with executors.

        Args:
            executors: Mapping of backend name to executor instance
                      Example: {"numpy": NumpyExecutor(), "aer": AerExecutor()}
        """
        self.executors = executors
        self.runs: dict[str, RunInfo] = {}
        self._lock = threading.Lock()

        self._queue: queue.Queue[str] = queue.Queue()

        self._worker_thread: threading.Thread | None = None
        self._shutdown_flag = threading.Event()

        self._start_worker()

    def _start_worker(self) -> None:
        """Start background worker thread."""
        if self._worker_thread is not None and self._worker_thread.is_alive():
            logger.warning("Worker thread already running")
            return

        self._shutdown_flag.clear()
        self._worker_thread = threading.Thread(
            target=self._worker_loop, name="RunWorker", daemon=True
        )
        self._worker_thread.start()
        logger.info("Run worker thread started")

    def _worker_loop(self) -> None:
        """Poll the queue and execute runs one at a time."""
        logger.info("Worker loop started")

        while not self._shutdown_flag.is_set():
            try:
                # Timeout so the shutdown flag is checked
                try:
                    run_id = self._queue.get(timeout=0.2)
                except queue.Empty:
                    continue

                logger.info("Worker picked up run: %s", run_id)
                self._execute_run(run_id)
                self._queue.task_done()

            except Exception as e:
                logger.error("Worker loop error: %s", e, exc_info=True)

        logger.info("Worker loop stopped")

    def create_run(self, program: str, backend: str, params: dict[str, Any]) -> str:
        """
        Validate a run and add it to the queue.

        Args:
            program: Registered program name
            backend: Executor name
            params: key=value parameters; values are converted to strings

        Returns:
            Run ID

        Raises:
            ValueError: If the program, backend or parameters are invalid
        """
        if backend not in self.executors:
            raise ValueError(f"Unknown backend: {backend}")
        values = {key: str(value) for key, value in params.items()}
        config = RunConfig.resolve(get_program(program).spec, values)

        run_id = f"run-{uuid4()}"
        run_info = RunInfo(
            run_id=run_id,
            program=program,
            backend=backend,
            params=config.values,
            status=RunStatus.QUEUED,
            created_at=datetime.now(UTC),
        )

        with self._lock:
            self.runs[run_id] = run_info

        self._queue.put(run_id)

        logger.info("Run created and queued: %s (%s on %s)", run_id, program, backend)
        return run_id

    def _execute_run(self, run_id: str) -> None:
        """Execute a run on the worker thread."""
        with self._lock:
            run_info = self.runs.get(run_id)
            if run_info is None:
                logger.error("Run not found: %s", run_id)
                return
            if run_info.status == RunStatus.CANCELLED:
                logger.info("Run %s was cancelled, skipping execution", run_id)
                return
        try:
            with self._lock:
                run_info.status = RunStatus.RUNNING
                run_info.started_at = datetime.now(UTC)

            logger.info("Executing run %s: %s on %s", run_id, run_info.program, run_info.backend)

            executor = self.executors[run_info.backend]
            config = RunConfig(program=run_info.program, values=run_info.params)
            result = run_program(config, executor)

            with self._lock:
                run_info.status = RunStatus.COMPLETED
                run_info.completed_at = datetime.now(UTC)
                run_info.result_csv = result

            logger.info("Run completed: %s", run_id)

        except Exception as e:
            logger.error("Run failed: %s: %s", run_id, e, exc_info=True)
            with self._lock:
                run_info.status = RunStatus.FAILED
                run_info.completed_at = datetime.now(UTC)
                run_info.error_message = str(e)

    def get_run(self, run_id: str) -> RunInfo | None:
        """
        Get run information.

        Args:
            run_id: Run ID

        Returns:
            RunInfo or None if not found
        """
        with self._lock:
            return self.runs.get(run_id)

    def list_runs(self) -> dict[str, RunInfo]:
        """Mapping of run ID to RunInfo."""
        with self._lock:
            return dict(self.runs)

    def cancel_run(self, run_id: str) -> bool:
        """
        Cancel a run.

        Only QUEUED runs can be cancelled; the worker skips them when dequeued.

        Returns:
            True if cancelled, False otherwise
        """
        with self._lock:
            run_info = self.runs.get(run_id)
            if run_info is None:
                return False

            if run_info.status == RunStatus.QUEUED:
                run_info.status = RunStatus.CANCELLED
                run_info.completed_at = datetime.now(UTC)
                run_info.error_message = "Cancelled by user"
                return True

            return False

    def wait(self, run_id: str, timeout: float = 60.0, poll: float = 0.05) -> RunInfo | None:
        """Block until the run finishes or ``timeout`` seconds pass; returns the last state."""
        deadline = time.monotonic() + timeout
        while True:
            run_info = self.get_run(run_id)
            if run_info is None or run_info.status in _FINISHED or time.monotonic() > deadline:
                return run_info
            time.sleep(poll)

    def get_queue_length(self) -> int:
        """Number of QUEUED or RUNNING runs."""
        with self._lock:
            return sum(
                1
                for run in self.runs.values()
                if run.status in (RunStatus.QUEUED, RunStatus.RUNNING)
            )

    def shutdown(self) -> None:
        """Shutdown worker thread gracefully."""
        logger.info("Shutting down run manager...")
        self._shutdown_flag.set()

        if self._worker_thread is not None:
            self._worker_thread.join(timeout=5.0)
            if self._worker_thread.is_alive():
                logger.warning("Worker thread did not stop in time")
            else:
                logger.info("Worker thread stopped")
