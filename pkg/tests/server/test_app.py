"""Tests for FastAPI application factory."""

import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

from weak_measurement_info import create_app
from weak_measurement_info.config import RunConfig
from weak_measurement_info.csv_output import parse_csv
from weak_measurement_info.executors import BaseExecutor, NumpyExecutor
from weak_measurement_info.experiments import PROGRAMS, get_program, run_program
from weak_measurement_info.models import RunStatus


def wait_for_run(app: FastAPI, client: TestClient, run_id: str) -> str:
    """Wait on the manager, then return the status the API reports."""
    app.state.run_manager.wait(run_id, timeout=60.0)
    response = client.get(f"/v1/runs/{run_id}")
    assert response.status_code == 200
    status: str = response.json()["state"]["status"]
    return status


class TestCreateApp:
    """Test create_app factory."""

    def test_create_app_default(self) -> None:
        """Test creating app with default executors."""
        app = create_app()
        assert app.title == "Weak Measurement Information API"

    def test_create_app_with_executors(self, executors: dict[str, BaseExecutor]) -> None:
        """Test creating app with custom executors."""
        app = create_app(executors=executors)
        assert app.state.run_manager.executors is executors


class TestRootEndpoint:
    """Test root endpoint."""

    def test_root(self) -> None:
        """Test GET /."""
        client = TestClient(create_app())

        response = client.get("/")
        assert response.status_code == 200

        data = response.json()
        assert data["message"] == "Weak Measurement Information API"
        assert "version" in data
        assert data["executors"] == ["numpy"]


class TestProgramsEndpoint:
    """Test programs endpoint."""

    def test_list_programs(self) -> None:
        """Every registered program is listed with its columns and keys."""
        client = TestClient(create_app())

        response = client.get("/v1/programs")
        assert response.status_code == 200

        programs = {entry["name"]: entry for entry in response.json()}
        assert set(programs) == set(PROGRAMS)
        xi = programs["xi"]
        assert xi["columns"] == ["x", "phi", "xi", "lambda2_re", "lambda2_im"]
        assert xi["defaults"]["model"] is None
        assert xi["defaults"]["phi"] == "0"


class TestRunsEndpoint:
    """Run submission, polling, results and cancellation."""

    def test_run_lifecycle(self, executors: dict[str, BaseExecutor]) -> None:
        """A queued run completes and serves its CSV."""
        app = create_app(executors=executors)
        with TestClient(app) as client:
            response = client.post(
                "/v1/runs", json={"program": "xi", "params": {"model": "I", "x": 1}}
            )
            assert response.status_code == 202
            created = response.json()
            assert created["program"] == "xi"
            assert created["backend"] == "numpy"

            assert wait_for_run(app, client, created["id"]) == RunStatus.COMPLETED

            results = client.get(f"/v1/runs/{created['id']}/results")
            assert results.status_code == 200
            assert results.headers["content-type"].startswith("text/csv")
            parsed = parse_csv(results.text)
            assert parsed.program == "xi"
            assert float(parsed.column("xi")[0]) == pytest.approx(3.7397, abs=1e-3)

    def test_results_match_cli_text(self, executors: dict[str, BaseExecutor]) -> None:
        """The server and the CLI share one program registry."""
        params = {"model": "II", "x": "0.5", "phi": "0.2", "T": "3", "M": "300", "seed": "4"}
        app = create_app(executors=executors)
        with TestClient(app) as client:
            run_id = client.post(
                "/v1/runs", json={"program": "mi-sweep", "params": params}
            ).json()["id"]
            assert wait_for_run(app, client, run_id) == RunStatus.COMPLETED
            served = client.get(f"/v1/runs/{run_id}/results").text

        config = RunConfig.resolve(get_program("mi-sweep").spec, params)
        assert served == run_program(config, NumpyExecutor())

    def test_failed_run(self, executors: dict[str, BaseExecutor]) -> None:
        """Errors raised while running are reported as the failure reason."""
        app = create_app(executors=executors)
        with TestClient(app) as client:
            run_id = client.post(
                "/v1/runs", json={"program": "xi", "params": {"model": "III", "x": 1}}
            ).json()["id"]
            assert wait_for_run(app, client, run_id) == RunStatus.FAILED

            state = client.get(f"/v1/runs/{run_id}").json()["state"]
            assert "model" in state["reason"]

            results = client.get(f"/v1/runs/{run_id}/results")
            assert results.status_code == 400

    def test_unknown_program(self) -> None:
        """Unknown programs are not found."""
        client = TestClient(create_app())
        response = client.post("/v1/runs", json={"program": "teleport"})
        assert response.status_code == 404

    def test_unknown_backend(self) -> None:
        """Backends must be configured on the server."""
        client = TestClient(create_app())
        response = client.post(
            "/v1/runs",
            json={"program": "xi", "backend": "aer", "params": {"model": "II", "x": 1}},
        )
        assert response.status_code == 404

    @pytest.mark.parametrize(
        "params",
        [{"x": 1}, {"model": "I", "x": 1, "colour": "red"}],
    )
    def test_invalid_params(self, params: dict[str, object]) -> None:
        """Missing and unknown keys are rejected before queueing."""
        client = TestClient(create_app())
        response = client.post("/v1/runs", json={"program": "xi", "params": params})
        assert response.status_code == 400

    def test_unknown_run(self) -> None:
        """Status, results and cancel all 404 for unknown IDs."""
        client = TestClient(create_app())
        assert client.get("/v1/runs/run-missing").status_code == 404
        assert client.get("/v1/runs/run-missing/results").status_code == 404
        assert client.delete("/v1/runs/run-missing").status_code == 404

    def test_cancel_finished_run(self, executors: dict[str, BaseExecutor]) -> None:
        """Only queued runs can be cancelled."""
        app = create_app(executors=executors)
        with TestClient(app) as client:
            run_id = client.post(
                "/v1/runs", json={"program": "xi", "params": {"model": "I", "x": 1}}
            ).json()["id"]
            assert wait_for_run(app, client, run_id) == RunStatus.COMPLETED

            response = client.delete(f"/v1/runs/{run_id}")
            assert response.status_code == 400
