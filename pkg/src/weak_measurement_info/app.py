"""FastAPI application factory."""

import logging
from collections.abc import AsyncIterator
from contextlib import asynccontextmanager
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .executors.base import BaseExecutor
from .experiments import PROGRAMS
from .managers.run_manager import RunManager
from .models import (
    ProgramDescription,
    RunCreateRequest,
    RunCreateResponse,
    RunState,
    RunStatus,
    RunStatusResponse,
)

logger = logging.getLogger(__name__)

API_VERSION = "2026-10-01"


def create_app(executors: dict[str, BaseExecutor] | None = None) -> FastAPI:
    """
    Create FastAPI application with executor injection.

    Args:
        executors: Mapping of backend name to instance.
                  Defaults to {"numpy": NumpyExecutor()}

    Returns:
        FastAPI application instance
    """
    if executors is None:
        from .executors import NumpyExecutor

        executors = {"numpy": NumpyExecutor()}

    run_manager = RunManager(executors=executors)

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        """Handle startup and shutdown events."""
        logger.info("=" * 60)
        logger.info("Weak measurement information server starting...")
        logger.info("Available executors: %s", ", ".join(executors.keys()))
        logger.info("Programs: %s", ", ".join(sorted(PROGRAMS)))
        logger.info("=" * 60)

        yield

        logger.info("Shutting down...")
        run_manager.shutdown()
        logger.info("Shutdown complete")

    app = FastAPI(
        title="Weak Measurement Information API",
        version=API_VERSION,
        lifespan=lifespan,
    )

    app.state.run_manager = run_manager

    # ===== ENDPOINTS =====

    @app.get("/")
    async def root() -> dict[str, Any]:
        """Root endpoint."""
        return {
            "message": "Weak Measurement Information API",
            "version": API_VERSION,
            "executors": list(executors.keys()),
        }

    @app.get("/v1/programs")
    async def list_programs() -> list[ProgramDescription]:
        """Registered programs with their output columns and accepted keys."""
        return [
            ProgramDescription(
                name=entry.spec.name,
                summary=entry.spec.summary,
                columns=list(entry.spec.columns),
                defaults=entry.spec.defaults,
            )
            for _, entry in sorted(PROGRAMS.items())
        ]

    @app.post("/v1/runs", status_code=202)
    async def create_run(request: RunCreateRequest) -> RunCreateResponse:
        """
        Queue a run and return its ID.

        The client polls the run status endpoint until it finishes.

        Raises:
            HTTPException: 404 for an unknown program or backend, 400 for invalid parameters
        """
        if request.program not in PROGRAMS:
            raise HTTPException(status_code=404, detail=f"Program {request.program} not found")
        if request.backend not in executors:
            raise HTTPException(status_code=404, detail=f"Backend {request.backend} not found")
        try:
            run_id = run_manager.create_run(
                program=request.program,
                backend=request.backend,
                params=request.params,
            )
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e)) from e
        return RunCreateResponse(id=run_id, program=request.program, backend=request.backend)

    @app.get("/v1/runs/{run_id}")
    async def get_run_status(run_id: str) -> RunStatusResponse:
        """
        Get run status.

        Raises:
            HTTPException: If run not found
        """
        run_info = run_manager.get_run(run_id)
        if run_info is None:
            raise HTTPException(status_code=404, detail="Run not found")

        return RunStatusResponse(
            id=run_info.run_id,
            program=run_info.program,
            state=RunState(status=run_info.status, reason=run_info.error_message),
            created_at=run_info.created_at,
            started_at=run_info.started_at,
            completed_at=run_info.completed_at,
        )

    @app.get("/v1/runs/{run_id}/results", response_class=PlainTextResponse)
    async def get_run_results(run_id: str) -> PlainTextResponse:
        """
        CSV output of a completed run.

        Raises:
            HTTPException: If run not found or not completed
        """
        run_info = run_manager.get_run(run_id)
        if run_info is None:
            raise HTTPException(status_code=404, detail="Run not found")

        if run_info.status != RunStatus.COMPLETED:
            raise HTTPException(
                status_code=400, detail=f"Run is not completed (status: {run_info.status})"
            )

        if run_info.result_csv is None:
            raise HTTPException(status_code=404, detail="No results available")
        return PlainTextResponse(run_info.result_csv, media_type="text/csv")

    @app.delete("/v1/runs/{run_id}")
    async def cancel_run(run_id: str) -> dict[str, Any]:
        """
        Cancel a run.

        Note: Only QUEUED runs can be cancelled. RUNNING runs cannot be interrupted.

        Raises:
            HTTPException: If run not found or no longer queued
        """
        success = run_manager.cancel_run(run_id)
        if not success:
            run_info = run_manager.get_run(run_id)
            if run_info is None:
                raise HTTPException(status_code=404, detail="Run not found")
            raise HTTPException(
                status_code=400,
                detail=f"Cannot cancel run in {run_info.status} status",
            )

        return {"message": "Run cancelled"}

    return app
