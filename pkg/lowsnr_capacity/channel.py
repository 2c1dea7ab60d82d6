"""Normalised Rayleigh channel model and the on-off mutual information.

Amplitudes are normalised as x = |s| * sigma_h / sigma_w and outputs as
y = |r|^2 / sigma_w^2, so that y given x is exponential with mean 1 + x^2.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .specfun import QuadResult, gauss_2f1_1b

logger = logging.getLogger(__name__)

# Linear-scale SNR a = P * sigma_h^2 / sigma_w^2
Snr = float

QUAD_ERROR_TARGET = 1e-9
# Integration stops at TAIL_FACTOR * (1 + x1^2)
TAIL_FACTOR = 50.0
# Below this relative gap x1^2 - a the closed form cancels catastrophically
CANCELLATION_BAND = 1e-8
# Slack on p1 <= 1 for rounding in a / x1^2
P1_SLACK = 4.0 * 2.220446049250313e-16


def db_to_snr(snr_db: float) -> Snr:
    """Convert a_dB = 10 log10(a) to linear scale."""
    return 10.0 ** (snr_db / 10.0)


def snr_to_db(a: Snr) -> float:
    if not a > 0.0:
        raise DomainError("snr_to_db", f"SNR must be positive, got {a!r}")
    return 10.0 * math.log10(a)


@dataclass(frozen=True)
class ChannelParams:
    """Physical channel r = h s + w with h ~ CN(0, sigma_h_sq), w ~ CN(0, sigma_w_sq)."""

    sigma_h_sq: float
    sigma_w_sq: float
    power: float

    def __post_init__(self) -> None:
        if not self.sigma_h_sq > 0.0:
            raise DomainError(
                "ChannelParams", f"sigma_h_sq must be positive, got {self.sigma_h_sq!r}"
            )
        if not self.sigma_w_sq > 0.0:
            raise DomainError(
                "ChannelParams", f"sigma_w_sq must be positive, got {self.sigma_w_sq!r}"
            )
        if not self.power >= 0.0:
            raise DomainError("ChannelParams", f"power must be non-negative, got {self.power!r}")

    def snr(self) -> Snr:
        return self.power * self.sigma_h_sq / self.sigma_w_sq

    def normalise_amplitude(self, s_abs: float) -> float:
        """Map a transmitted amplitude |s| to the normalised x."""
        return s_abs * math.sqrt(self.sigma_h_sq / self.sigma_w_sq)

    def physical_amplitude(self, x: float) -> float:
        """Map a normalised amplitude x back to |s|."""
        return x * math.sqrt(self.sigma_w_sq / self.sigma_h_sq)


@dataclass(frozen=True)
class OnOffInput:
    """Two-point input law: amplitude x1 with probability p1, zero otherwise.

    p1 = 0 is accepted as the degenerate all-off law.
    """

    x1: float
    p1: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x1) and self.x1 > 0.0):
            raise DomainError("OnOffInput", f"x1 must be positive, got {self.x1!r}")
        if not 0.0 <= self.p1 <= 1.0:
            raise DomainError("OnOffInput", f"p1 must lie in [0, 1], got {self.p1!r}")

    @classmethod
    def for_snr(cls, x1: float, a: Snr) -> "OnOffInput":
        """Build the input meeting the power constraint p1 * x1^2 = a."""
        if not a > 0.0:
            raise DomainError("OnOffInput.for_snr", f"SNR must be positive, got {a!r}")
        p1 = a / (x1 * x1)
        if p1 > 1.0 + P1_SLACK:
            raise DomainError("OnOffInput.for_snr", f"x1={x1!r} is below sqrt(a) for a={a!r}")
        return cls(x1=x1, p1=min(p1, 1.0))

    @property
    def p0(self) -> float:
        return 1.0 - self.p1

    @property
    def average_power(self) -> float:
        return self.p1 * self.x1 * self.x1

    def alpha_beta(self) -> "AlphaBeta":
        return AlphaBeta.from_input(self)


@dataclass(frozen=True)
class AlphaBeta:
    """alpha = 1 + x1^2 and beta = p1 / (p0 * alpha)."""

    alpha: float
    beta: float

    @classmethod
    def from_input(cls, inp: OnOffInput) -> "AlphaBeta":
        if inp.p1 >= 1.0:
            raise DomainError("AlphaBeta", "beta is undefined for p1 = 1")
        if inp.p1 <= 0.0:
            raise DomainError("AlphaBeta", "beta vanishes for p1 = 0")
        alpha = 1.0 + inp.x1 * inp.x1
        return cls(alpha=alpha, beta=inp.p1 / (inp.p0 * alpha))


@dataclass(frozen=True)
class MiComponents:
    """The four partial integrals with I = i1 - i2 + i3 - i4.

    i1 and i2 are the zero-symbol self and cross parts, i3 and i4 their
    one-symbol counterparts.
    """

    i1: float
    i2: float
    i3: float
    i4: float

    @property
    def total(self) -> float:
        return self.i1 - self.i2 + self.i3 - self.i4


# =============================================================================
# Densities
# =============================================================================


def cond_density(y, x):
    """Density of y given x: exp(-y / (1 + x^2)) / (1 + x^2). Accepts arrays."""
    alpha = 1.0 + np.square(x)
    return np.exp(-np.asarray(y) / alpha) / alpha


def output_density(y, inp: OnOffInput):
    """Mixture density p0 * exp(-y) + p1 * cond_density(y, x1)."""
    return inp.p0 * np.exp(-np.asarray(y)) + inp.p1 * cond_density(y, inp.x1)


def density_ratio(y, inp: OnOffInput):
    """Ratio f(y) / f(y | x1) = p1 + p0 (1 + x1^2) exp(y (1/(1 + x1^2) - 1)).

    Strictly decreasing in y for p0 > 0.
    """
    alpha = 1.0 + inp.x1 * inp.x1
    return inp.p1 + inp.p0 * alpha * np.exp(np.asarray(y) * (1.0 / alpha - 1.0))


def _logaddexp(u: float, v: float) -> float:
    if u == -math.inf:
        return v
    if v == -math.inf:
        return u
    m = max(u, v)
    return m + math.log1p(math.exp(-abs(u - v)))


class _LogRatios:
    """Log density ratios ln(f0/f) and ln(f1/f) without underflow of either term."""

    def __init__(self, inp: OnOffInput):
        self.p0 = inp.p0
        self.p1 = inp.p1
        self.alpha = 1.0 + inp.x1 * inp.x1
        self.log_p0 = math.log(self.p0) if self.p0 > 0.0 else -math.inf
        self.log_p1 = math.log(self.p1) if self.p1 > 0.0 else -math.inf
        self.log_alpha = math.log(self.alpha)
        self.slope = 1.0 - 1.0 / self.alpha

    def zero(self, y: float) -> float:
        return -_logaddexp(self.log_p0, self.log_p1 - self.log_alpha + self.slope * y)

    def one(self, y: float) -> float:
        return -_logaddexp(self.log_p0 + self.log_alpha - self.slope * y, self.log_p1)

    def crossover(self) -> float | None:
        """Output level where both mixture terms are equal, if any."""
        if self.slope <= 0.0 or self.p0 == 0.0 or self.p1 == 0.0:
            return None
        return (self.log_p0 + self.log_alpha - self.log_p1) / self.slope


def _integrate(integrand, ratios: _LogRatios) -> tuple[float, float, int]:
    y_max = TAIL_FACTOR * ratios.alpha
    candidates = (ratios.crossover(), ratios.alpha, 5.0 * ratios.alpha)
    points = sorted({p for p in candidates if p is not None and 0.0 < p < y_max})
    value, error, info = integrate.quad(
        integrand,
        0.0,
        y_max,
        points=points or None,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=200,
        full_output=1,
    )[:3]
    return value, error, int(info["neval"])


def _tail_bound(ratios: _LogRatios, weight: float) -> float:
    """Bound on the integrand mass beyond TAIL_FACTOR * alpha.

    Both log ratios are bounded by |ln p_i| + ln(alpha) + slope * y, and the
    densities decay at least like exp(-y / alpha).
    """
    y_max = TAIL_FACTOR * ratios.alpha
    log_bound = max(-ratios.log_p0, 0.0) + max(-ratios.log_p1, 0.0) + ratios.log_alpha
    return weight * math.exp(-TAIL_FACTOR) * (y_max + ratios.alpha) * (log_bound + y_max + 1.0)


# =============================================================================
# Mutual information
# =============================================================================


def mi_quadrature(inp: OnOffInput) -> QuadResult:
    """Mutual information of the on-off input by adaptive quadrature.

    Integrates sum_i p_i f(y|x_i) ln(f(y|x_i) / f(y)) over [0, 50 (1 + x1^2)]
    and adds a bound for the truncated tail to the error estimate.

    Raises:
        ConvergenceError: If the error estimate exceeds 1e-9.
    """
    if inp.p1 in (0.0, 1.0):
        return QuadResult(0.0, 0.0, 1)
    ratios = _LogRatios(inp)
    alpha = ratios.alpha

    def integrand(y: float) -> float:
        zero = inp.p0 * math.exp(-y) * ratios.zero(y)
        return zero + inp.p1 * math.exp(-y / alpha) / alpha * ratios.one(y)

    value, error, evaluations = _integrate(integrand, ratios)
    error += _tail_bound(ratios, 1.0)
    if error > QUAD_ERROR_TARGET:
        raise ConvergenceError(f"mi_quadrature({inp!r}) missed the error target", value, error)
    return QuadResult(value, error, evaluations)


def mi_derivative_x1(inp: OnOffInput) -> QuadResult:
    """Derivative of the mutual information in x1 at fixed p1.

    Returns (2 p1 x1 / alpha^2) * int (y - alpha) f(y|x1) ln(f(y|x1) / f(y)) dy,
    which is positive whenever 0 < p1 < 1.
    """
    if inp.p1 in (0.0, 1.0):
        return QuadResult(0.0, 0.0, 1)
    ratios = _LogRatios(inp)
    alpha = ratios.alpha

    def integrand(y: float) -> float:
        return (y - alpha) * math.exp(-y / alpha) / alpha * ratios.one(y)

    value, error, evaluations = _integrate(integrand, ratios)
    prefactor = 2.0 * inp.p1 * inp.x1 / (alpha * alpha)
    error = prefactor * (error + _tail_bound(ratios, TAIL_FACTOR))
    value *= prefactor
    if error > QUAD_ERROR_TARGET:
        raise ConvergenceError(f"mi_derivative_x1({inp!r}) missed the error target", value, error)
    return QuadResult(value, error, evaluations)


def mi_closed(x1: float, a: Snr) -> float:
    """Closed-form on-off mutual information at SNR ``a`` (power constraint active).

    Args:
        x1: Non-zero mass point, at least sqrt(a).
        a: Linear SNR.

    Returns:
        The mutual information in nats; exactly 0 at x1 = sqrt(a).

    Raises:
        DomainError: If a <= 0 or x1 < sqrt(a).
    """
    if not a > 0.0:
        raise DomainError("mi_closed", f"SNR must be positive, got {a!r}")
    x_sq = x1 * x1
    if a / x_sq > 1.0 + P1_SLACK:
        raise DomainError("mi_closed", f"x1={x1!r} is below sqrt(a) for a={a!r}")
    if x_sq <= a:
        return 0.0
    if x_sq - a < CANCELLATION_BAND * x_sq:
        logger.debug("mi_closed: x1^2 - a below cancellation band, using quadrature")
        return mi_quadrature(OnOffInput.for_snr(x1, a)).value

    alpha = 1.0 + x_sq
    try:
        hyp = gauss_2f1_1b(1.0 / x_sq, -alpha * (x_sq - a) / a).value
    except ConvergenceError as e:
        logger.debug("mi_closed: %s, using quadrature", e)
        return mi_quadrature(OnOffInput.for_snr(x1, a)).value
    bracket = math.log1p(x_sq) / x_sq + 1.0 / alpha + x_sq / alpha * hyp
    return a - a * bracket - math.log1p(-a / x_sq) - math.log1p(a / (alpha * (x_sq - a)))


def mi_components(inp: OnOffInput) -> MiComponents:
    """Closed forms of the four partial integrals of the mutual information.

    Requires 0 < p1 < 1.
    """
    ab = AlphaBeta.from_input(inp)
    alpha, beta = ab.alpha, ab.beta
    p0, p1 = inp.p0, inp.p1
    b = 1.0 / (alpha - 1.0)
    log_p0 = math.log(p0)
    log_shift = math.log1p(beta)

    hyp_next = gauss_2f1_1b(b + 1.0, -1.0 / beta).value
    hyp = gauss_2f1_1b(b, -1.0 / beta).value

    i1 = -p0
    i2 = p0 * (log_p0 - 1.0) + p0 * (log_shift + (alpha - 1.0) / alpha * hyp_next)
    i3 = -p1 * (1.0 + math.log(alpha))
    i4 = p1 * log_p0 - p1 * alpha + p1 * (log_shift + (alpha - 1.0) * hyp)
    return MiComponents(i1=i1, i2=i2, i3=i3, i4=i4)


def _check_series_domain(operation: str, x1: float, a: Snr) -> float:
    if not x1 > 1.0:
        raise DomainError(operation, f"x1 must exceed 1, got {x1!r}")
    x_sq = x1 * x1
    if not 0.0 < a < x_sq:
        raise DomainError(operation, f"need 0 < a < x1^2, got a={a!r}, x1^2={x_sq!r}")
    return x_sq


def _sublinear_coefficient(x_sq: float) -> float:
    """pi * (x^2 (1 + x^2))^(-(1 + x^2)/x^2) / sin(pi / x^2)."""
    return math.pi * (x_sq * (1.0 + x_sq)) ** (-(1.0 + x_sq) / x_sq) / math.sin(math.pi / x_sq)


def mi_series(x1: float, a: Snr) -> float:
    """First-order low-SNR expansion of the on-off mutual information."""
    x_sq = _check_series_domain("mi_series", x1, a)
    linear = (1.0 - math.log1p(x_sq) / x_sq) * a
    return linear - x_sq * _sublinear_coefficient(x_sq) * a ** (1.0 + 1.0 / x_sq)


def mi_series_second_order(x1: float, a: Snr) -> float:
    """Low-SNR expansion carried to the a^2 and a^(2 + 1/x1^2) terms."""
    x_sq = _check_series_domain("mi_series_second_order", x1, a)
    alpha = 1.0 + x_sq
    quadratic = 1.0 / (2.0 * alpha * alpha) + 1.0 / (alpha * alpha * x_sq * (x_sq - 1.0))
    return (
        mi_series(x1, a)
        + quadratic * a * a
        - _sublinear_coefficient(x_sq) / x_sq * a ** (2.0 + 1.0 / x_sq)
    )
