"""Real Lambert W branches and the hypergeometric family 2F1(1, b; b+1; z)."""

import logging
import math
from dataclasses import dataclass
from enum import Enum

from scipy import integrate

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

INV_E = math.exp(-1.0)
EPS = 2.220446049250313e-16

# Arguments this close to -1/e are the branch point itself
BRANCH_POINT_TOL = 1e-14
# Below this distance from -1/e the series in sqrt(1 + e*z) is used directly
BRANCH_SERIES_BAND = 1e-9

HYP_ERROR_TARGET = 1e-10
MAX_HALLEY_STEPS = 64
MAX_SERIES_TERMS = 400

# W(z) = -1 + p - p^2/3 + 11/72 p^3 - ... with p = +-sqrt(2(1 + e*z))
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
)


class BranchK(Enum):
    """Real branch of the Lambert W function."""

    PRINCIPAL = 0
    MINUS_ONE = -1

    @property
    def k(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        """Name used in reports and CSV cells."""
        return "Principal" if self is BranchK.PRINCIPAL else "MinusOne"


@dataclass(frozen=True)
class QuadResult:
    """A numeric value together with its error estimate and cost."""

    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self) -> None:
        if not self.abs_error_estimate >= 0.0:
            raise ValueError(f"abs_error_estimate must be >= 0, got {self.abs_error_estimate!r}")
        if self.evaluations < 1:
            raise ValueError(f"evaluations must be >= 1, got {self.evaluations!r}")


# =============================================================================
# Lambert W
# =============================================================================


def _branch_point_offset(z: float, operation: str) -> float:
    """Return z + 1/e, rejecting arguments below the branch point."""
    if not math.isfinite(z):
        raise DomainError(operation, f"argument must be finite, got {z!r}")
    offset = z + INV_E
    if offset < -BRANCH_POINT_TOL:
        raise DomainError(operation, f"argument {z!r} is below -1/e")
    return offset


def _branch_series(offset: float, branch: BranchK, terms: int = len(_BRANCH_SERIES)) -> float:
    p = math.sqrt(2.0 * math.e * max(offset, 0.0))
    if branch is BranchK.MINUS_ONE:
        p = -p
    return sum(c * p**n for n, c in enumerate(_BRANCH_SERIES[:terms]))


def _principal_seed(z: float, offset: float) -> float:
    if z < -0.25:
        return _branch_series(offset, BranchK.PRINCIPAL, terms=4)
    if z < 3.0:
        # Pade approximant around the origin
        return z * (1.0 + 4.0 / 3.0 * z) / (1.0 + 7.0 / 3.0 * z + 5.0 / 6.0 * z * z)
    l1 = math.log(z)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def _minus_one_seed(z: float, offset: float) -> float:
    if z < -0.25:
        return _branch_series(offset, BranchK.MINUS_ONE, terms=4)
    return lambert_ladder_upper(z)


def _halley(z: float, w: float) -> float:
    for _ in range(MAX_HALLEY_STEPS):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0:
            return w
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        # Near -1/e the derivative vanishes and steps stall at the rounding floor of f
        if abs(step) <= 4.0 * EPS * (1.0 + abs(w)) or abs(f) <= 4.0 * EPS * abs(z):
            return w
    raise ConvergenceError(
        "lambert_w: Halley iteration did not settle", w, abs(w * math.exp(w) - z)
    )


def lambert_w(k: BranchK, z: float) -> float:
    """Evaluate the real Lambert W function on branch ``k``.

    Args:
        k: Branch selector. MINUS_ONE is defined on [-1/e, 0).
        z: Argument, at least -1/e.

    Returns:
        w with w * exp(w) == z; w >= -1 on PRINCIPAL and w <= -1 on MINUS_ONE.

    Raises:
        DomainError: If z is below -1/e or MINUS_ONE is asked for z >= 0.
    """
    offset = _branch_point_offset(z, "lambert_w")
    if k is BranchK.MINUS_ONE and z >= 0.0:
        raise DomainError("lambert_w", f"branch MinusOne needs a negative argument, got {z!r}")
    if abs(offset) <= BRANCH_POINT_TOL:
        return -1.0
    if offset <= BRANCH_SERIES_BAND:
        return _branch_series(offset, k)
    if z == 0.0:
        return 0.0

    seed = _minus_one_seed(z, offset) if k is BranchK.MINUS_ONE else _principal_seed(z, offset)
    w = _halley(z, seed)
    # Halley can overshoot the branch point by an ulp
    if k is BranchK.MINUS_ONE:
        return min(w, -1.0)
    return max(w, -1.0)


def lambert_ladder_upper(z: float) -> float:
    """One-step ladder bound ln(-z) - ln(-ln(-z)), never below W(-1, z).

    Raises:
        DomainError: Outside (-1/e, 0).
    """
    offset = _branch_point_offset(z, "lambert_ladder_upper")
    if z >= 0.0:
        raise DomainError("lambert_ladder_upper", f"argument must be negative, got {z!r}")
    if offset <= BRANCH_POINT_TOL:
        return -1.0
    log_neg = math.log(-z)
    return log_neg - math.log(-log_neg)


def lambert_ladder(z: float, depth: int) -> float:
    """Iterate w <- ln(-z) - ln(-w) from w = ln(-z), ``depth`` times.

    Every iterate bounds W(-1, z) from above and the sequence decreases to it.
    Depth 1 equals :func:`lambert_ladder_upper`.
    """
    if depth < 0:
        raise DomainError("lambert_ladder", f"depth must be >= 0, got {depth!r}")
    offset = _branch_point_offset(z, "lambert_ladder")
    if z >= 0.0:
        raise DomainError("lambert_ladder", f"argument must be negative, got {z!r}")
    if offset <= BRANCH_POINT_TOL:
        return -1.0
    log_neg = math.log(-z)
    w = log_neg
    for _ in range(depth):
        w = log_neg - math.log(-w)
    return w


# =============================================================================
# 2F1(1, b; b+1; z)
# =============================================================================


def _hyp_power_series(b: float, z: float) -> QuadResult:
    total = 1.0
    power = 1.0
    for n in range(1, MAX_SERIES_TERMS):
        power *= z
        term = b / (b + n) * power
        total += term
        if abs(term) <= 0.5 * EPS * abs(total):
            # Alternating for z < 0: the first omitted term bounds the error
            return QuadResult(total, abs(term * z), n + 1)
    raise ConvergenceError("gauss_2f1_1b: power series did not converge", total, abs(power))


def _hyp_pfaff_series(b: float, z: float) -> QuadResult:
    """Series after the Pfaff transformation, for z < -0.5.

    2F1(1, b; b+1; z) = (1-z)^-1 * sum_n n! / (b+1)_n * w^n with w = z/(z-1).
    Terms fall like n^-b once w is close to 1, so large b converges even for huge |z|.
    """
    w = z / (z - 1.0)
    term = 1.0
    total = 1.0
    for n in range(1, MAX_SERIES_TERMS):
        term *= w * n / (b + n)
        total += term
        tail = term * w / (1.0 - w)
        if tail <= 0.5 * EPS * total:
            return QuadResult(total / (1.0 - z), tail / (1.0 - z), n + 1)
    raise ConvergenceError("gauss_2f1_1b: Pfaff series did not converge", total / (1.0 - z), term)


def _hyp_quadrature(b: float, z: float) -> QuadResult:
    """Euler integral b int_0^1 t^(b-1) / (1 + s t) dt with s = -z.

    For b < 1 the substitution u = t^b removes the endpoint singularity; for b >= 1
    the integrand is already smooth in t.
    """
    s = -z
    if b < 1.0:
        inv_b = 1.0 / b
        knee = s ** (-b)

        def integrand(u: float) -> float:
            return 1.0 / (1.0 + s * u**inv_b)

    else:
        knee = 1.0 / s

        def integrand(t: float) -> float:
            return b * t ** (b - 1.0) / (1.0 + s * t)

    points = [knee] if 0.0 < knee < 1.0 else None
    value, error, info = integrate.quad(
        integrand,
        0.0,
        1.0,
        points=points,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
        full_output=1,
    )[:3]
    if error > HYP_ERROR_TARGET:
        raise ConvergenceError(
            f"gauss_2f1_1b(b={b!r}, z={z!r}): quadrature missed target", value, error
        )
    logger.debug("2F1 quadrature b=%g z=%g: %d evaluations, error %.3g", b, z, info["neval"], error)
    return QuadResult(value, error, int(info["neval"]))


def gauss_2f1_1b(b: float, z: float) -> QuadResult:
    """Evaluate 2F1(1, b; b+1; z) = b * int_0^1 t^(b-1) / (1 - z t) dt for z <= 0.

    Args:
        b: Positive parameter.
        z: Non-positive argument.

    Returns:
        QuadResult with abs_error_estimate at most 1e-10.

    Raises:
        DomainError: If b <= 0 or z > 0.
        ConvergenceError: If no method met the error target.
    """
    if not (math.isfinite(b) and b > 0.0):
        raise DomainError("gauss_2f1_1b", f"b must be positive, got {b!r}")
    if not (math.isfinite(z) and z <= 0.0):
        raise DomainError("gauss_2f1_1b", f"z must be finite and <= 0, got {z!r}")
    if z == 0.0:
        return QuadResult(1.0, 0.0, 1)
    if z >= -0.5:
        return _hyp_power_series(b, z)
    try:
        return _hyp_pfaff_series(b, z)
    except ConvergenceError:
        if z >= -1.0:
            raise
        logger.debug("2F1 Pfaff series slow at b=%g z=%g, using quadrature", b, z)
    return _hyp_quadrature(b, z)
