"""
Registered programs: each turns a resolved :class:`RunConfig` into a CSV table.

Programs are shared by the command-line interface and the HTTP run manager.
Keys common to sampling programs are ``seed``, ``backend`` (``numpy`` or
``aer``), ``workers`` and ``output``.
"""

import io
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, NamedTuple, Protocol, TypeVar

import numpy as np

from .analytic_snr import bi_awgn_mi, gamma, mi_plateau
from .config import ProgramSpec, RunConfig
from .csv_output import CsvTable
from .errors import ValidationError
from .executors import AerExecutor, BaseExecutor, NumpyExecutor
from .info_metrics import (
    ENUMERATION_LIMIT,
    estimate_mi_curve,
    exact_mi,
    fano_accuracy_upper_bound,
)
from .measurement_models import KrausSet, build_kraus_set
from .models import ModelIIParams, ModelKind, SmeConfig, SmeScheme, SnrParams
from .readout import estimate_accuracy, overfit_experiment, sample_range
from .sme import integrate_ensemble, integrate_sme, lindblad_solution
from .state_algebra import DensityMatrix, PauliAxis, axis_state, pauli_decompose
from .streams import TrajectoryStream
from .transfer_matrix import correlation_length, mean_channel
from .trajectory import Prior, write_records

logger = logging.getLogger(__name__)


class ProgramOutput(Protocol):
    """Anything a program can emit."""

    def to_text(self) -> str:
        """Rendered output."""
        ...


Runner = Callable[[RunConfig, BaseExecutor], ProgramOutput]
R = TypeVar("R", bound=Runner)


@dataclass(frozen=True)
class Program:
    """A program's accepted keys and the function that runs it."""

    spec: ProgramSpec
    runner: Runner


PROGRAMS: dict[str, Program] = {}

_COMMON = {"seed": "0", "workers": "1", "output": ""}
_SAMPLING = {**_COMMON, "backend": "numpy", "eta": "1", "delta": "0.01", "eps": "0.02", "M": ""}
_FIELD = {"phi": "", "a": "", "alpha": ""}


def program(
    name: str,
    summary: str,
    columns: tuple[str, ...],
    defaults: dict[str, str | None],
) -> Callable[[R], R]:
    """Register ``runner`` under ``name``."""

    def register(runner: R) -> R:
        spec = ProgramSpec(name=name, summary=summary, columns=columns, defaults=defaults)
        PROGRAMS[name] = Program(spec=spec, runner=runner)
        return runner

    return register


def get_program(name: str) -> Program:
    """Look up a registered program."""
    if name not in PROGRAMS:
        raise ValidationError(f"unknown program {name!r}; available: {', '.join(sorted(PROGRAMS))}")
    return PROGRAMS[name]


def make_executor(config: RunConfig) -> BaseExecutor:
    """Executor named by the ``backend`` key, with ``workers`` threads."""
    backend = config.values.get("backend") or "numpy"
    workers = config.get_int("workers") if config.has("workers") else 1
    if workers < 1:
        raise ValidationError(f"workers must be at least 1, got {workers}")
    if backend == "numpy":
        return NumpyExecutor(max_workers=workers)
    if backend == "aer":
        return AerExecutor(max_workers=workers)
    raise ValidationError(f"unknown backend {backend!r}; choose numpy or aer")


def run_program(config: RunConfig, executor: BaseExecutor | None = None) -> str:
    """Run ``config`` and return the rendered output."""
    entry = get_program(config.program)
    executor = executor or make_executor(config)
    logger.info("Running %s on %s", config.program, executor.name)
    output = entry.runner(config, executor)
    logger.info("Finished %s", config.program)
    return output.to_text()


# Shared parameter parsing


def _table(config: RunConfig, columns: tuple[str, ...] | None = None) -> CsvTable:
    spec = get_program(config.program).spec
    return CsvTable(columns=columns or spec.columns, header=config.header_lines())


def _model(config: RunConfig) -> ModelKind:
    try:
        return ModelKind.parse(config.get_str("model"))
    except ValueError as e:
        raise ValidationError(f"model must be I or II, got {config.get_str('model')!r}") from e


def _phi(config: RunConfig, model: ModelKind, x: float) -> float:
    """Precession angle from ``phi``, ``a = φ/x²`` or ``alpha = 2a``."""
    given = [key for key in ("phi", "a", "alpha") if config.has(key)]
    if len(given) > 1:
        raise ValidationError(f"give at most one of phi, a, alpha (got {', '.join(given)})")
    if model == ModelKind.MODEL_I:
        if given and config.get_float(given[0]) != 0.0:
            raise ValidationError("Model I takes no precession field")
        return 0.0
    if not given:
        return 0.0
    if given[0] == "phi":
        return config.get_float("phi")
    if given[0] == "a":
        return ModelIIParams.from_scaled_field(x, config.get_float("a")).phi
    return ModelIIParams.from_alpha(x, config.get_float("alpha")).phi


def _kraus_set(config: RunConfig, x: float) -> KrausSet:
    model = _model(config)
    return build_kraus_set(model, x, _phi(config, model, x))


def _prior(config: RunConfig) -> Prior:
    name = config.values.get("prior") or "z"
    try:
        return Prior.axis(name)
    except ValueError as e:
        raise ValidationError(f"prior must be x, y or z, got {name!r}") from e


def _eta(config: RunConfig) -> float:
    eta = config.get_float("eta")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"eta must lie in [0, 1], got {eta}")
    return eta


class Sampling(NamedTuple):
    """Sample count or target half-width, and the failure probability."""

    samples: int | None
    epsilon: float | None
    delta: float


def _sampling(config: RunConfig) -> dict[str, Any]:
    """Estimator keywords ``samples``, ``epsilon`` and ``delta``; ``M`` wins over ``eps``."""
    delta = config.get_float("delta")
    if config.has("M"):
        return Sampling(config.get_int("M"), None, delta)._asdict()
    return Sampling(None, config.get_float("eps"), delta)._asdict()


def _positive_lengths(lengths: list[int]) -> list[int]:
    if not lengths:
        raise ValidationError("at least one record length is required")
    if min(lengths) < 0:
        raise ValidationError(f"record lengths must be nonnegative, got {lengths}")
    return sorted(set(lengths))


def _state(name: str) -> DensityMatrix:
    """``x+``, ``z-`` and the like."""
    text = name.strip().lower()
    if len(text) != 2 or text[1] not in "+-":
        raise ValidationError(f"state must look like z+ or x-, got {name!r}")
    try:
        axis = PauliAxis(text[0].upper())
    except ValueError as e:
        raise ValidationError(f"unknown axis in state {name!r}") from e
    return axis_state(axis, 1 if text[1] == "+" else -1)


def _scaled_lengths(config: RunConfig, xs: list[float]) -> dict[float, list[int]]:
    """
    Record lengths per strength.

    Either the explicit ``T`` list, or ``Tmax`` with ``points`` giving the grid
    ``x²T = k·x_min²·Tmax/points`` shared by every strength.
    """
    if config.has("T"):
        lengths = _positive_lengths(config.get_int_list("T"))
        return {x: lengths for x in xs}
    if not config.has("Tmax"):
        raise ValidationError("give either T or Tmax")
    t_max, points = config.get_int("Tmax"), config.get_int("points")
    if t_max < 1 or points < 1:
        raise ValidationError("Tmax and points must be positive")
    x_min = min(abs(x) for x in xs)
    grid: dict[float, list[int]] = {}
    for x in xs:
        ratio = (x_min / x) ** 2 if x != 0.0 else 1.0
        lengths = {max(1, round(k * t_max * ratio / points)) for k in range(1, points + 1)}
        grid[x] = sorted(lengths)
    return grid


# Information sweeps


@program(
    "mi-sweep",
    "Monte-Carlo mutual information against record length for several strengths.",
    ("x", "T", "x2T", "mi", "epsilon", "delta", "M"),
    {
        **_SAMPLING,
        **_FIELD,
        "model": None,
        "x": None,
        "T": "",
        "Tmax": "",
        "points": "10",
        "prior": "z",
    },
)
def cmd_mi_sweep(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """One MI curve per strength ``x``."""
    xs = config.get_float_list("x")
    if not xs:
        raise ValidationError("x grid is empty")
    grid = _scaled_lengths(config, xs)
    prior, eta, seed = _prior(config), _eta(config), config.get_seed()
    table = _table(config)
    for x in xs:
        curve = estimate_mi_curve(
            _kraus_set(config, x), prior, grid[x], eta, seed=seed, executor=executor,
            **_sampling(config),
        )
        for point, x2t in zip(curve.points, curve.scaling_abscissa, strict=True):
            est = point.estimate
            table.add_row(x, point.T, x2t, est.value, est.epsilon, est.delta, est.samples)
    return table


@program(
    "plateau-compare",
    "Numerical MI of the noisy discrete model against the low-efficiency plateau.",
    ("model", "eta", "alpha", "x", "x2T", "mi_numeric", "mi_theory", "ratio", "divergent"),
    {**_SAMPLING, "model": None, "eta": None, "x": "0.1", "x2T": "10", "alpha": "10"},
)
def cmd_plateau_compare(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """Ratio of estimated MI over ``bi_awgn_mi(γ(∞))`` for each efficiency."""
    model = _model(config)
    x, x2t = config.get_float("x"), config.get_float("x2T")
    if x <= 0.0:
        raise ValidationError("x must be positive")
    T = max(1, round(x2t / x**2))
    alpha = config.get_float("alpha") if model == ModelKind.MODEL_II else math.nan
    phi = 0.0 if model == ModelKind.MODEL_I else ModelIIParams.from_alpha(x, alpha).phi
    kraus_set = build_kraus_set(model, x, phi)
    prior, seed = Prior.default(), config.get_seed()
    table = _table(config)
    for eta in config.get_float_list("eta"):
        if not 0.0 <= eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {eta}")
        theory = mi_plateau(
            SnrParams(model=model, eta=eta, alpha=0.0 if math.isnan(alpha) else alpha)
        )
        if eta == 0.0:
            # Shown records are independent of the initial state.
            numeric = 0.0
        else:
            numeric = estimate_mi_curve(
                kraus_set, prior, [T], eta, seed=seed, executor=executor,
                **_sampling(config),
            ).points[0].estimate.value
        ratio = numeric / theory.mi_bits if theory.mi_bits > 0.0 else math.nan
        table.add_row(
            model.value, eta, alpha, x, x**2 * T, numeric, theory.mi_bits, ratio, theory.divergent
        )
    return table


@program(
    "nonmonotone-scan",
    "Model II MI against strength at fixed record length for several fields.",
    ("phi", "x", "T", "x_sqrtT", "mi", "epsilon", "delta", "M"),
    {**_SAMPLING, "phi": None, "x": "0.1:3:12", "T": "50", "prior": "y"},
)
def cmd_nonmonotone_scan(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """MI on an ``(φ, x)`` grid; ``x·√T`` is the natural abscissa."""
    phis, xs = config.get_float_list("phi"), config.get_float_list("x")
    if not phis:
        raise ValidationError("phi grid is empty")
    if not xs:
        raise ValidationError("x grid is empty")
    T = config.get_int("T")
    prior, eta, seed = _prior(config), _eta(config), config.get_seed()
    table = _table(config)
    for phi in phis:
        for x in xs:
            est = estimate_mi_curve(
                build_kraus_set(ModelKind.MODEL_II, x, phi), prior, [T], eta, seed=seed,
                executor=executor, **_sampling(config),
            ).points[0].estimate
            table.add_row(
                phi, x, T, x * math.sqrt(T), est.value, est.epsilon, est.delta, est.samples
            )
    return table


@program(
    "accuracy",
    "Bayes-optimal readout accuracy with its Fano upper bound.",
    ("T", "accuracy", "epsilon", "delta", "M", "mi", "fano_bound"),
    {**_SAMPLING, **_FIELD, "model": None, "x": None, "T": None, "prior": "z"},
)
def cmd_accuracy(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """
    Estimated accuracy at each ``T``.

    The MI used for the Fano bound is exact when the records can be enumerated
    and estimated from the ``mi`` stream otherwise.
    """
    x = config.get_float("x")
    kraus_set, prior = _kraus_set(config, x), _prior(config)
    eta, seed = _eta(config), config.get_seed()
    lengths = _positive_lengths(config.get_int_list("T"))
    sampling = _sampling(config)
    large = [T for T in lengths if kraus_set.size**T > ENUMERATION_LIMIT]
    estimated: dict[int, float] = {}
    if large:
        curve = estimate_mi_curve(
            kraus_set, prior, large, eta, seed=seed, executor=executor,
            **sampling,
        )
        estimated = {point.T: point.estimate.value for point in curve.points}
    table = _table(config)
    for T in lengths:
        est = estimate_accuracy(
            kraus_set, prior, T, eta, seed=seed, executor=executor,
            **sampling,
        )
        mi = estimated[T] if T in estimated else exact_mi(kraus_set, prior, T, eta)
        mi = min(max(mi, 0.0), prior.entropy)
        bound = fano_accuracy_upper_bound(mi, prior.entropy, prior.size)
        table.add_row(T, est.value, est.epsilon, est.delta, est.samples, mi, bound)
    return table


# Transfer matrices


@program(
    "xi",
    "Correlation length of the mean channel.",
    ("x", "phi", "xi", "lambda2_re", "lambda2_im"),
    {"model": None, "x": None, "phi": "0", "output": ""},
)
def cmd_xi(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """ξ and the second eigenvalue on an ``(x, φ)`` grid."""
    model = _model(config)
    phis = config.get_float_list("phi") or [0.0]
    if model == ModelKind.MODEL_I and any(phi != 0.0 for phi in phis):
        raise ValidationError("Model I takes no precession field")
    table = _table(config)
    for x in config.get_float_list("x"):
        for phi in phis:
            report = correlation_length(mean_channel(build_kraus_set(model, x, phi)))
            table.add_row(x, phi, report.xi, report.lambda2.real, report.lambda2.imag)
    return table


# Continuous monitoring


_SME_DEFAULTS: dict[str, str | None] = {
    **_COMMON,
    "model": None,
    "tau": "1",
    "alpha": "0",
    "eta": "1",
    "dt": "",
    "t": "1",
    "state": "x+",
    "scheme": "kraus",
    "stride": "1",
}


def _sme_config(config: RunConfig) -> SmeConfig:
    model = _model(config)
    tau = config.get_float("tau")
    alpha = config.get_float("alpha")
    if model == ModelKind.MODEL_I and alpha != 0.0:
        raise ValidationError("Model I takes no precession field")
    try:
        return SmeConfig(
            model=model,
            tau=tau,
            omega=2.0 * alpha / tau,
            eta=_eta(config),
            dt=config.get_float("dt") if config.has("dt") else None,
            t_final=config.get_float("t"),
            seed=config.get_seed(),
            scheme=SmeScheme(config.get_str("scheme")),
        )
    except ValueError as e:
        raise ValidationError(str(e)) from e


def _stride(config: RunConfig) -> int:
    stride = config.get_int("stride")
    if stride < 1:
        raise ValidationError(f"stride must be at least 1, got {stride}")
    return stride


@program(
    "sme-ensemble",
    "Ensemble mean of SME paths next to the Lindblad solution.",
    (
        "t",
        "mean_px", "mean_py", "mean_pz",
        "stderr_px", "stderr_py", "stderr_pz",
        "lindblad_px", "lindblad_py", "lindblad_pz",
    ),
    {**_SME_DEFAULTS, "paths": "1000"},
)
def cmd_sme_ensemble(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """Per-time ensemble statistics, every ``stride``-th step."""
    sme_config = _sme_config(config)
    rho0 = _state(config.get_str("state"))
    workers = config.get_int("workers")
    ensemble = integrate_ensemble(sme_config, rho0, config.get_int("paths"), workers=workers)
    lindblad = lindblad_solution(sme_config, pauli_decompose(rho0), ensemble.times)
    if ensemble.overshoots:
        logger.warning("%d SME states were projected back onto the Bloch ball", ensemble.overshoots)
    table = _table(config)
    for i in range(0, len(ensemble.times), _stride(config)):
        table.add_row(
            float(ensemble.times[i]),
            *map(float, ensemble.mean[i]),
            *map(float, ensemble.stderr[i]),
            *map(float, lindblad[i, 1:]),
        )
    return table


@program(
    "sme-path",
    "A single SME path with its measurement outputs.",
    ("t", "p0", "px", "py", "pz", "dy1", "dy2", "dy3"),
    {**_SME_DEFAULTS, "path": "0"},
)
def cmd_sme_path(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """States of one path; ``dy`` columns hold the output of the step ending at ``t``."""
    sme_config = _sme_config(config)
    path = integrate_sme(sme_config, _state(config.get_str("state")), config.get_int("path"))
    channels = len(sme_config.channel_axes)
    columns = ("t", "p0", "px", "py", "pz", *(f"dy{i + 1}" for i in range(channels)))
    table = _table(config, columns)
    for i in range(0, len(path.times), _stride(config)):
        outputs = path.dy[i - 1] if i > 0 else np.full(channels, math.nan)
        table.add_row(float(path.times[i]), *map(float, path.states[i]), *map(float, outputs))
    return table


# Low-efficiency analysis


@program(
    "snr-curve",
    "Signal-to-noise ratio γ(t) and the corresponding bi-AWGN information.",
    ("t", "gamma", "mi_bits"),
    {"model": None, "tau": "1", "eta": "1", "alpha": "0", "t": "0:5:51", "output": ""},
)
def cmd_snr_curve(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """γ(t) on the ``t`` grid."""
    model = _model(config)
    params = SnrParams(
        model=model,
        tau=config.get_float("tau"),
        eta=_eta(config),
        alpha=config.get_float("alpha") if model == ModelKind.MODEL_II else 0.0,
    )
    table = _table(config)
    for t in config.get_float_list("t"):
        value = gamma(params, t)
        table.add_row(t, value, bi_awgn_mi(value))
    return table


@program(
    "plateau-table",
    "Long-time SNR and MI plateau for each model, efficiency and field.",
    ("model", "eta", "alpha", "gamma_inf", "mi_plateau_bits", "divergent"),
    {"model": "I,II", "eta": "0.1,0.5,1", "alpha": "0,0.5,2,10", "output": ""},
)
def cmd_plateau_table(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """Model I rows carry ``alpha = nan``."""
    table = _table(config)
    models = [ModelKind.parse(name) for name in config.get_str("model").split(",")]
    for model in models:
        alphas = config.get_float_list("alpha") if model == ModelKind.MODEL_II else [math.nan]
        for eta in config.get_float_list("eta"):
            for alpha in alphas:
                params = SnrParams(model=model, eta=eta, alpha=0.0 if math.isnan(alpha) else alpha)
                plateau = mi_plateau(params)
                table.add_row(
                    model.value, eta, alpha, plateau.gamma_inf, plateau.mi_bits, plateau.divergent
                )
    return table


# Readout


@program(
    "overfit",
    "Logistic readout against the Bayes-optimal predictor.",
    ("T", "train_acc", "test_acc", "bayes_acc", "bayes_eps"),
    {
        **_COMMON,
        **_FIELD,
        "backend": "numpy",
        "model": "I",
        "x": "0.4",
        "eta": "1",
        "n": "10000",
        "n_test": "",
        "T": "1,10,50,200",
        "l2": "0",
        "iterations": "500",
        "learning_rate": "0.1",
        "delta": "0.01",
    },
)
def cmd_overfit(config: RunConfig, executor: BaseExecutor) -> CsvTable:
    """Training and test accuracy per record length, ``n`` trajectories each."""
    x = config.get_float("x")
    n_train = config.get_int("n")
    n_test = config.get_int("n_test") if config.has("n_test") else n_train
    rows = overfit_experiment(
        _kraus_set(config, x),
        config.get_int_list("T"),
        n_train,
        n_test,
        eta=_eta(config),
        l2=config.get_float("l2"),
        iterations=config.get_int("iterations"),
        learning_rate=config.get_float("learning_rate"),
        seed=config.get_seed(),
        delta=config.get_float("delta"),
        executor=executor,
    )
    table = _table(config)
    table.extend(rows)
    return table


# Raw records


@dataclass(frozen=True)
class RecordDump:
    """Sampled records in the plain record dump format."""

    records: np.ndarray[Any, np.dtype[np.int64]]
    metadata: dict[str, object]

    def to_text(self) -> str:
        buffer = io.StringIO()
        write_records(buffer, self.records, self.metadata)
        return buffer.getvalue()


@program(
    "records",
    "Dump shown measurement records sampled from the prior.",
    ("record",),
    {
        **_COMMON,
        **_FIELD,
        "backend": "numpy",
        "model": None,
        "x": None,
        "eta": "1",
        "T": None,
        "count": "10",
        "prior": "z",
    },
)
def cmd_records(config: RunConfig, executor: BaseExecutor) -> RecordDump:
    """``count`` records from the ``rec`` stream."""
    x, T, count = config.get_float("x"), config.get_int("T"), config.get_int("count")
    if T < 0 or count < 1:
        raise ValidationError("T must be nonnegative and count positive")
    kraus_set, prior = _kraus_set(config, x), _prior(config)
    eta, seed = _eta(config), config.get_seed()
    executor.check_supported(kraus_set, prior)
    stream = TrajectoryStream(seed=seed, name="rec")
    batch = sample_range(executor, kraus_set, prior, T, eta, stream, range(count))
    metadata: dict[str, object] = {
        "model": kraus_set.kind.value,
        "x": x,
        "phi": kraus_set.phi,
        "eta": eta,
        "T": T,
        "seed": seed,
    }
    return RecordDump(records=batch.shown, metadata=metadata)
