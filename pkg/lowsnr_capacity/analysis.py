"""Capacity, non-coherence penalty, energy efficiency and mass-point bounds."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

from scipy import optimize

from .channel import Snr
from .errors import BracketError, DomainError
from .solver import (
    DEFAULT_A_MAX,
    ORDER_LIMIT,
    ROOT_RTOL,
    ROOT_XTOL,
    branch_for,
    low_snr_constants,
    maximize_mi,
    phi,
    solve_x1,
)
from .specfun import INV_E, BranchK, lambert_w

logger = logging.getLogger(__name__)


class Method(Enum):
    """How the mass point of a CapacityPoint was obtained."""

    FIXED_POINT = "FixedPoint"
    NUMERIC_MAX = "NumericMax"
    BOUND_UB = "BoundUB"
    BOUND_LB = "BoundLB"


@dataclass(frozen=True)
class CapacityPoint:
    """Capacity record at one SNR.

    ``delta`` is the sub-linear gap a - C and ``penalty`` the non-coherence
    penalty per SNR at the same mass point.
    """

    a: Snr
    x1: float
    p1: float
    capacity: float
    delta: float
    delta_over_a: float
    penalty: float
    energy_per_nat: float
    branch: BranchK
    method: Method
    valid: bool = True

    @property
    def x1_sq(self) -> float:
        return self.x1 * self.x1

    @property
    def energy_per_nat_approx(self) -> float:
        """First-order approximation 1 + delta/a of the energy per nat."""
        return 1.0 + self.delta_over_a

    def to_dict(self) -> dict[str, Any]:
        """Convert to a flat dictionary for reports."""
        return {
            "a": self.a,
            "x1": self.x1,
            "x1_sq": self.x1_sq,
            "p1": self.p1,
            "capacity": self.capacity,
            "delta": self.delta,
            "delta_over_a": self.delta_over_a,
            "penalty": self.penalty,
            "energy_per_nat": self.energy_per_nat,
            "energy_per_nat_approx": self.energy_per_nat_approx,
            "branch": self.branch.label,
            "method": self.method.value,
            "valid": self.valid,
        }


@dataclass(frozen=True)
class BoundsPoint:
    """Analytic bounds on the mass point and the capacity at one SNR.

    ``c_at_x1_lower`` is the capacity expression evaluated at the lower mass
    point bound; it never exceeds the capacity.
    """

    a: Snr
    x1_lower_first: float
    x1_lower: float
    x1_upper: float
    c_lower: float
    c_upper: float
    c_at_x1_lower: float


def _csc(t: float) -> float:
    return 1.0 / math.sin(t)


def _check_capacity_domain(operation: str, a: Snr, x1: float) -> float:
    if not (math.isfinite(x1) and x1 > 1.0):
        raise DomainError(operation, f"x1 must exceed 1, got {x1!r}")
    x_sq = x1 * x1
    if not 0.0 < a < x_sq:
        raise DomainError(operation, f"need 0 < a < x1^2, got a={a!r}, x1^2={x_sq!r}")
    return x_sq


def _sublinear_term(a: Snr, x_sq: float) -> float:
    """a^(1/x^2) pi csc(pi/x^2) (1/(x^2 + x^4))^(1/x^2) / (1 + x^2)."""
    inv = 1.0 / x_sq
    scale = (1.0 / (x_sq + x_sq * x_sq)) ** inv / (1.0 + x_sq)
    return a**inv * math.pi * _csc(math.pi * inv) * scale


def capacity_at(a: Snr, x1: float) -> float:
    """Low-SNR capacity expression evaluated at mass point ``x1``.

    Raises:
        DomainError: If x1 <= 1 or a is outside (0, x1^2).
    """
    x_sq = _check_capacity_domain("capacity_at", a, x1)
    return a - a * math.log1p(x_sq) / x_sq - a * _sublinear_term(a, x_sq)


def penalty_per_snr(a: Snr, x1: float) -> float:
    """Non-coherence penalty per SNR, (a - capacity_at(a, x1)) / a."""
    x_sq = _check_capacity_domain("penalty_per_snr", a, x1)
    return math.log1p(x_sq) / x_sq + _sublinear_term(a, x_sq)


def capacity_point(
    a: Snr,
    x1: float,
    method: Method,
    branch: BranchK | None = None,
    capacity: float | None = None,
    valid: bool = True,
) -> CapacityPoint:
    """Assemble a CapacityPoint for mass point ``x1``.

    ``capacity`` defaults to :func:`capacity_at`; pass the attained maximum for
    numerically maximised points.
    """
    if capacity is None:
        capacity = capacity_at(a, x1)
    delta = a - capacity
    return CapacityPoint(
        a=a,
        x1=x1,
        p1=a / (x1 * x1),
        capacity=capacity,
        delta=delta,
        delta_over_a=delta / a,
        penalty=penalty_per_snr(a, x1),
        energy_per_nat=a / capacity,
        branch=branch if branch is not None else branch_for(a),
        method=method,
        valid=valid,
    )


def capacity_low_snr(
    a: Snr, a_max: float = DEFAULT_A_MAX, order_limit: float = ORDER_LIMIT
) -> CapacityPoint:
    """Capacity at SNR ``a`` from the optimal mass point of the fixed-point relation."""
    solved = solve_x1(a, a_max=a_max, order_limit=order_limit)
    return capacity_point(
        a, solved.value, Method.FIXED_POINT, branch=solved.branch, valid=solved.valid
    )


def capacity_numeric_max(a: Snr, order_limit: float = ORDER_LIMIT) -> CapacityPoint:
    """Capacity at SNR ``a`` from direct maximisation of the closed-form information."""
    best = maximize_mi(a, order_limit=order_limit)
    assert best.objective is not None
    return capacity_point(
        a,
        best.value,
        Method.NUMERIC_MAX,
        branch=best.branch,
        capacity=best.objective,
        valid=best.valid,
    )


def energy_per_bit_db(point: CapacityPoint) -> float:
    """Energy per information bit in dB; tends to 10 log10(ln 2) = -1.59 dB as a -> 0."""
    return 10.0 * math.log10(math.log(2.0) * point.energy_per_nat)


# =============================================================================
# Bounds
# =============================================================================


def _log_radius(a: Snr) -> float:
    """rho = sqrt(1 + ln(1/a))."""
    return math.sqrt(1.0 - math.log(a))


def _check_below_junction(operation: str, a: Snr, inclusive: bool) -> None:
    a0 = low_snr_constants().a0
    inside = 0.0 < a <= a0 if inclusive else 0.0 < a < a0
    if not inside:
        bracket = "]" if inclusive else ")"
        raise DomainError(operation, f"SNR must lie in (0, a0={a0:.6g}{bracket}, got {a!r}")


def _lower_envelope_point(operation: str, x: float) -> float:
    """-W(-1, phi(x)), the divisor of the ladder bounds."""
    try:
        value = phi(x)
    except DomainError as e:
        raise DomainError(operation, f"inner point {x!r} is not above 1") from e
    if not -INV_E < value < 0.0:
        raise DomainError(operation, f"phi({x!r}) = {value!r} is outside (-1/e, 0)")
    return -lambert_w(BranchK.MINUS_ONE, value)


def x1_upper_bound(a: Snr) -> float:
    """Upper bound sqrt(xi0 - ln a) on the optimal mass point, valid for a <= a0."""
    _check_below_junction("x1_upper_bound", a, inclusive=True)
    return math.sqrt(low_snr_constants().xi0 - math.log(a))


def x1_lower_bound_first(a: Snr) -> float:
    """One-step lower bound rho / sqrt(-W(-1, phi(rho)))."""
    _check_below_junction("x1_lower_bound_first", a, inclusive=False)
    rho = _log_radius(a)
    return rho / math.sqrt(_lower_envelope_point("x1_lower_bound_first", rho))


def x1_lower_bound(a: Snr) -> float:
    """Two-step lower bound on the optimal mass point.

    With rho = sqrt(1 + ln(1/a)) and t = rho / sqrt(-ln(-phi(rho))), returns
    rho / sqrt(-W(-1, phi(t))). Never below :func:`x1_lower_bound_first`.

    Raises:
        DomainError: If a >= a0 or an intermediate phi leaves (-1/e, 0), which
            happens for a slightly below a0.
    """
    _check_below_junction("x1_lower_bound", a, inclusive=False)
    rho = _log_radius(a)
    phi_rho = phi(rho)
    if not -INV_E < phi_rho < 0.0:
        raise DomainError("x1_lower_bound", f"phi(rho) = {phi_rho!r} is outside (-1/e, 0)")
    inner = rho / math.sqrt(-math.log(-phi_rho))
    return rho / math.sqrt(_lower_envelope_point("x1_lower_bound", inner))


def x1_envelope_root(a: Snr) -> float:
    """Mass point where the lower SNR envelope exp[x^2 W(-1, phi(x)) + 1] equals ``a``.

    Sits between :func:`x1_lower_bound` and the optimal mass point.

    Raises:
        DomainError: If a is not below the envelope's value at x0.
    """
    constants = low_snr_constants()
    x0 = constants.x0
    ceiling = math.exp(1.0 - constants.x0_sq)
    if not 0.0 < a < ceiling:
        raise DomainError("x1_envelope_root", f"SNR must lie in (0, {ceiling:.6g}), got {a!r}")
    log_a = math.log(a)
    rho = _log_radius(a)
    try:
        return optimize.brentq(
            lambda x: x * x * lambert_w(BranchK.MINUS_ONE, phi(x)) + 1.0 - log_a,
            x0,
            rho,
            xtol=ROOT_XTOL,
            rtol=ROOT_RTOL,
            maxiter=200,
        )
    except ValueError as e:
        raise BracketError(f"x1_envelope_root({a!r}): {e}", (x0, rho)) from e


def capacity_bounds(a: Snr) -> BoundsPoint:
    """Mass-point bounds and the capacity bounds they induce.

    The capacity is sandwiched as c_lower <= C <= c_upper <= a with
    c_lower = C(a, x1_upper) and c_upper = a (1 - ln(1 + x1_upper^2) / x1_upper^2).
    """
    lower_first = x1_lower_bound_first(a)
    lower = x1_lower_bound(a)
    upper = x1_upper_bound(a)
    upper_sq = upper * upper
    return BoundsPoint(
        a=a,
        x1_lower_first=lower_first,
        x1_lower=lower,
        x1_upper=upper,
        c_lower=capacity_at(a, upper),
        c_upper=a * (1.0 - math.log1p(upper_sq) / upper_sq),
        c_at_x1_lower=capacity_at(a, lower),
    )
