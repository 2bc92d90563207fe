"""Pydantic models for parameters, estimates, runs and API payloads."""

import math
from datetime import datetime
from enum import StrEnum
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .tolerances import CRITICAL_ALPHA_ATOL


class ModelKind(StrEnum):
    """Measurement model selector."""

    MODEL_I = "I"  # Weak measurements along X, Y, Z chosen uniformly at random
    MODEL_II = "II"  # Weak Z measurement preceded by an X rotation

    @classmethod
    def parse(cls, value: str) -> "ModelKind":
        """Accept ``I``/``II`` (any case) and ``1``/``2``."""
        normalized = value.strip().upper()
        aliases = {"1": "I", "2": "II"}
        return cls(aliases.get(normalized, normalized))


class ModelIParams(BaseModel):
    """Parameters of the six-outcome informationally complete model."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(allow_inf_nan=False)

    @property
    def dt_over_tau(self) -> float:
        """Continuum time step Δt/τ = x²/12."""
        return self.x**2 / 12.0


class ModelIIParams(BaseModel):
    """Parameters of the Z measurement with X precession."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(allow_inf_nan=False)
    phi: float = Field(default=0.0, allow_inf_nan=False)

    @classmethod
    def from_scaled_field(cls, x: float, a: float) -> Self:
        """Build from the scaled field a = φ/x²."""
        return cls(x=x, phi=a * x**2)

    @classmethod
    def from_alpha(cls, x: float, alpha: float) -> Self:
        """Build from the continuum quality factor α = ωτ/2 (φ = α·x²/2)."""
        return cls(x=x, phi=0.5 * alpha * x**2)

    @property
    def scaled_field(self) -> float | None:
        """a = φ/x², undefined at x = 0."""
        if self.x == 0.0:
            return None
        return self.phi / self.x**2

    @property
    def alpha(self) -> float | None:
        """Continuum quality factor α = 2a."""
        a = self.scaled_field
        return None if a is None else 2.0 * a

    @property
    def dt_over_tau(self) -> float:
        """Continuum time step Δt/τ = x²/4."""
        return self.x**2 / 4.0


class EstimateWithBound(BaseModel):
    """Monte-Carlo mean carrying its Hoeffding (ε, δ) guarantee."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0)
    epsilon: float = Field(gt=0.0)
    delta: float = Field(gt=0.0, lt=1.0)
    samples: int = Field(ge=1)
    seed: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_sample_count(self) -> Self:
        required = math.log(2.0 / self.delta) / (2.0 * self.epsilon**2)
        # ε is usually derived from M, so allow rounding at the boundary.
        if self.samples < math.ceil(required - 1e-9):
            raise ValueError(
                f"{self.samples} samples do not give epsilon={self.epsilon} at delta={self.delta}"
            )
        return self


class MiPoint(BaseModel):
    """One point of an MI curve."""

    model_config = ConfigDict(frozen=True)

    T: int = Field(ge=0)
    estimate: EstimateWithBound


class MiCurve(BaseModel):
    """MI estimates along increasing record length for fixed model parameters."""

    model_config = ConfigDict(frozen=True)

    x: float
    phi: float = 0.0
    eta: float = Field(default=1.0, ge=0.0, le=1.0)
    points: list[MiPoint]

    @field_validator("points")
    @classmethod
    def _strictly_increasing(cls, points: list[MiPoint]) -> list[MiPoint]:
        lengths = [point.T for point in points]
        if any(b <= a for a, b in zip(lengths, lengths[1:], strict=False)):
            raise ValueError("record lengths must be strictly increasing")
        return points

    @property
    def scaling_abscissa(self) -> list[float]:
        """x²T for every point."""
        return [self.x**2 * point.T for point in self.points]


class SmeScheme(StrEnum):
    """Integration scheme of the stochastic master equation."""

    KRAUS = "kraus"  # First-order step written as a completely positive map
    EULER = "euler"  # Plain Euler-Maruyama on the Bloch vector


class SmeConfig(BaseModel):
    """Configuration of a stochastic master equation integration."""

    model_config = ConfigDict(frozen=True)

    model: ModelKind
    tau: float = Field(default=1.0, gt=0.0)
    omega: float = Field(default=0.0, allow_inf_nan=False)
    eta: float = Field(default=1.0, ge=0.0, le=1.0)
    dt: float | None = Field(default=None, gt=0.0)
    t_final: float = Field(default=1.0, ge=0.0)
    seed: int = Field(default=0, ge=0)
    clip_tolerance: float = Field(default=1e-6, gt=0.0)
    blowup_tolerance: float = Field(default=1e-3, gt=0.0)
    scheme: SmeScheme = SmeScheme.KRAUS

    @model_validator(mode="after")
    def _check_step(self) -> Self:
        if self.step > self.tau / 50.0 * (1.0 + 1e-12):
            raise ValueError(f"dt={self.step} exceeds the stability guard tau/50={self.tau / 50}")
        if self.model == ModelKind.MODEL_I and self.omega != 0.0:
            raise ValueError("Model I has no precession field; omega must be 0")
        return self

    @property
    def step(self) -> float:
        """Integrator step, τ/1000 unless set explicitly."""
        return self.dt if self.dt is not None else self.tau / 1000.0

    @property
    def steps(self) -> int:
        """Number of steps needed to reach ``t_final``."""
        return round(self.t_final / self.step)

    @property
    def alpha(self) -> float:
        """Quality factor α = ωτ/2."""
        return 0.5 * self.omega * self.tau

    @property
    def channel_axes(self) -> tuple[int, ...]:
        """Pauli components monitored by the Wiener channels."""
        return (1, 2, 3) if self.model == ModelKind.MODEL_I else (3,)


class DampingRegime(StrEnum):
    """Model II Lindblad regime."""

    UNDERDAMPED = "underdamped"  # α > 1/2
    CRITICAL = "critical"  # α = 1/2
    OVERDAMPED = "overdamped"  # α < 1/2


def damping_regime(alpha: float) -> DampingRegime:
    """Classify α against the critical value 1/2."""
    if abs(alpha - 0.5) <= CRITICAL_ALPHA_ATOL:
        return DampingRegime.CRITICAL
    return DampingRegime.UNDERDAMPED if alpha > 0.5 else DampingRegime.OVERDAMPED


class SnrParams(BaseModel):
    """Parameters of the low-efficiency signal-to-noise analysis."""

    model_config = ConfigDict(frozen=True)

    model: ModelKind
    tau: float = Field(default=1.0, gt=0.0)
    eta: float = Field(default=1.0, ge=0.0, le=1.0)
    alpha: float = Field(default=0.0, ge=0.0, allow_inf_nan=True)

    @property
    def regime(self) -> DampingRegime | None:
        """Damping regime for Model II, ``None`` for Model I."""
        if self.model == ModelKind.MODEL_I:
            return None
        return damping_regime(self.alpha)


# Run lifecycle and API payloads


class RunStatus(StrEnum):
    """Run status."""

    QUEUED = "QUEUED"  # Run is queued and waiting to execute
    RUNNING = "RUNNING"  # Run is currently executing
    COMPLETED = "COMPLETED"  # Run completed successfully
    FAILED = "FAILED"  # Run failed with an error
    CANCELLED = "CANCELLED"  # Run was cancelled by user


class RunInfo(BaseModel):
    """Internal run information."""

    run_id: str
    program: str
    backend: str
    params: dict[str, str]

    status: RunStatus
    created_at: datetime
    started_at: datetime | None = None
    completed_at: datetime | None = None

    result_csv: str | None = None
    error_message: str | None = None


class RunCreateRequest(BaseModel):
    """Request model for submitting a run."""

    program: str
    backend: str = "numpy"
    params: dict[str, Any] = Field(default_factory=dict)


class RunCreateResponse(BaseModel):
    """Response model for run submission."""

    id: str
    program: str
    backend: str


class RunState(BaseModel):
    """Nested run state."""

    status: RunStatus
    reason: str | None = None


class RunStatusResponse(BaseModel):
    """Response model for run status."""

    id: str
    program: str
    state: RunState
    created_at: datetime
    started_at: datetime | None = None
    completed_at: datetime | None = None


class ProgramDescription(BaseModel):
    """A runnable program and its accepted keys."""

    name: str
    summary: str
    columns: list[str]
    defaults: dict[str, str | None]
