"""Low-efficiency signal-to-noise ratio γ(t) and the bi-AWGN information plateau.

To first order in √η the outputs recorded from ↑ and ↓ are Gaussian with means
following the Lindblad trajectories of the two initial states. Their separation
relative to the noise, integrated over time, is γ(t); the information about the
initial state is then that of a binary-input AWGN channel at SNR γ.
"""

import logging
import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import quad

from .errors import ValidationError
from .models import DampingRegime, ModelKind, SnrParams, damping_regime
from .sme import lindblad_solution_model1, lindblad_solution_model2

logger = logging.getLogger(__name__)

HERMITE_NODES = 128
# Above this SNR the quadrature is replaced by the large-γ expansion.
ASYMPTOTIC_GAMMA = 50.0

_LN2 = math.log(2.0)
_UP_MINUS_DOWN = np.array([0.0, 0.0, 0.0, 2.0])


class PlateauPrediction(NamedTuple):
    """Long-time SNR and the corresponding mutual information."""

    gamma_inf: float
    mi_bits: float
    divergent: bool


def _check_time(t: float) -> None:
    if t < 0.0:
        raise ValidationError(f"time must be nonnegative, got {t}")


def gamma_model1(t: float, tau: float, eta: float) -> float:
    """
    ``γ(t) = (η/2)·(1 − e^{−8t/τ})``.

    Examples:
        >>> gamma_model1(0.0, 1.0, 0.3)
        0.0
    """
    _check_time(t)
    return -0.5 * eta * math.expm1(-8.0 * t / tau)


def gamma_model2(t: float, tau: float, alpha: float, eta: float) -> float:
    """
    Closed-form Model II SNR in the regime selected by ``α``.

    With ``s = t/τ``:

    - α = 0: ``4ηs`` (no field, no plateau)
    - α = ½: ``η(5 − e^{−2s}(2s² + 6s + 5))``
    - α > ½: ``η((1+α²)/α² + e^{−2s}/(α²μ²)·B(s))`` with
      ``B = −4α⁴ + (1 − 3α²)cos 2μs + (α² − 1)μ sin 2μs``
    - α < ½: the same with ``cosh``, ``sinh``, ``μ′`` and the signs of the
      first two bracket terms reversed

    Args:
        t: Time.
        tau: Measurement time scale.
        alpha: Quality factor ωτ/2.
        eta: Efficiency.

    Returns:
        γ(t).
    """
    _check_time(t)
    if alpha < 0.0 or not math.isfinite(alpha):
        raise ValidationError(f"alpha must be finite and nonnegative, got {alpha}")
    s = t / tau
    if alpha == 0.0:
        return 4.0 * eta * s
    plateau = (1.0 + alpha**2) / alpha**2
    regime = damping_regime(alpha)
    if regime == DampingRegime.CRITICAL:
        return eta * (5.0 - math.exp(-2.0 * s) * (2.0 * s**2 + 6.0 * s + 5.0))
    if regime == DampingRegime.UNDERDAMPED:
        mu = math.sqrt(4.0 * alpha**2 - 1.0)
        bracket = (
            -4.0 * alpha**4
            + (1.0 - 3.0 * alpha**2) * math.cos(2.0 * mu * s)
            + (alpha**2 - 1.0) * mu * math.sin(2.0 * mu * s)
        )
        return eta * (plateau + math.exp(-2.0 * s) / (alpha**2 * mu**2) * bracket)
    mu_prime = math.sqrt(1.0 - 4.0 * alpha**2)
    # e^{−2s}·cosh(2μ′s) and e^{−2s}·sinh(2μ′s) without overflow.
    slow = math.exp(-2.0 * (1.0 - mu_prime) * s)
    fast = math.exp(-2.0 * (1.0 + mu_prime) * s)
    damped_cosh = 0.5 * (slow + fast)
    damped_sinh = 0.5 * (slow - fast)
    bracket = (
        4.0 * alpha**4 * math.exp(-2.0 * s)
        + (3.0 * alpha**2 - 1.0) * damped_cosh
        + (alpha**2 - 1.0) * mu_prime * damped_sinh
    )
    return eta * (plateau + bracket / (alpha**2 * mu_prime**2))


def gamma(params: SnrParams, t: float) -> float:
    """γ(t) for either model."""
    if params.model == ModelKind.MODEL_I:
        return gamma_model1(t, params.tau, params.eta)
    return gamma_model2(t, params.tau, params.alpha, params.eta)


def snr_quadrature(params: SnrParams, t: float) -> float:
    """
    γ(t) by numerical integration of ``(η/4τ)·∫₀ᵗ (Tr[2Z·(ρ↑ − ρ↓)(s)])² ds``.

    The difference trajectory comes from the closed-form Lindblad solutions;
    used to check the printed closed forms.
    """
    _check_time(t)
    if params.model == ModelKind.MODEL_I:

        def separation(s: float) -> float:
            return float(lindblad_solution_model1(_UP_MINUS_DOWN, s, params.tau)[3])

    else:

        def separation(s: float) -> float:
            return float(lindblad_solution_model2(_UP_MINUS_DOWN, s, params.tau, params.alpha)[3])

    def integrand(s: float) -> float:
        return (2.0 * separation(s)) ** 2

    value, _ = quad(integrand, 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)
    return params.eta / (4.0 * params.tau) * float(value)


@lru_cache(maxsize=1)
def _tail_constant() -> float:
    """``∫₀^∞ [e^{w/2}·ln(1+e^{−w}) + e^{−w/2}·(w + ln(1+e^{−w}))] dw``."""

    def integrand(w: float) -> float:
        softplus = math.log1p(math.exp(-w))
        return math.exp(w / 2.0) * softplus + math.exp(-w / 2.0) * (w + softplus)

    value, _ = quad(integrand, 0.0, math.inf, epsabs=1e-14, limit=200)
    return float(value)


def bi_awgn_mi(gamma_value: float) -> float:
    """
    Mutual information in bits of ``Y = √γ·X + Z`` with equiprobable ``X = ±1``.

    ``I = (1/ln 2)·E_Z[ln 2 − ln(1 + e^{−2γ − 2√γ·Z})]`` by Gauss–Hermite
    quadrature; above ``γ = 50`` the deficit from 1 bit is taken from its
    large-γ expansion ``e^{−γ/2}/√(8πγ)·C/ln 2``.

    Raises:
        ValidationError: If ``γ < 0``.

    Examples:
        >>> bi_awgn_mi(0.0)
        0.0
    """
    if gamma_value < 0.0 or math.isnan(gamma_value):
        raise ValidationError(f"SNR must be nonnegative, got {gamma_value}")
    if gamma_value == 0.0:
        return 0.0
    if math.isinf(gamma_value):
        return 1.0
    if gamma_value > ASYMPTOTIC_GAMMA:
        deficit = math.exp(-gamma_value / 2.0) / math.sqrt(8.0 * math.pi * gamma_value)
        return 1.0 - deficit * _tail_constant() / _LN2
    nodes, weights = hermgauss(HERMITE_NODES)
    z = math.sqrt(2.0) * nodes
    penalty = np.logaddexp(0.0, -2.0 * gamma_value - 2.0 * math.sqrt(gamma_value) * z)
    nats = float(np.sum(weights / math.sqrt(math.pi) * (_LN2 - penalty)))
    return min(max(nats / _LN2, 0.0), 1.0)


def gamma_inf(params: SnrParams) -> float:
    """Long-time SNR: η/2 (Model I), η(1+α²)/α² (Model II), ∞ for α = 0."""
    if params.model == ModelKind.MODEL_I:
        return 0.5 * params.eta
    if params.alpha == 0.0:
        return math.inf
    if math.isinf(params.alpha):
        return params.eta
    return params.eta * (1.0 + params.alpha**2) / params.alpha**2


def mi_plateau(params: SnrParams) -> PlateauPrediction:
    """
    Predicted long-time MI plateau ``bi_awgn_mi(γ(∞))``.

    Model II without a field has no plateau: γ grows without bound and the
    prediction is 1 bit with ``divergent`` set.
    """
    limit = gamma_inf(params)
    if math.isinf(limit):
        logger.debug("No plateau for %s at alpha=0; SNR diverges", params.model)
        return PlateauPrediction(gamma_inf=math.inf, mi_bits=1.0, divergent=True)
    return PlateauPrediction(gamma_inf=limit, mi_bits=bi_awgn_mi(limit), divergent=False)
