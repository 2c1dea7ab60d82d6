"""SNR to mass-point relation of the optimal on-off input, and its inverse.

For a given mass point x1 the SNR at which it is optimal is

    a(x1) = exp[x1^2 W(k, phi(x1)) + offset(x1)]

with k = -1 below the junction SNR a0 and k = 0 above it. Solving this
relation for x1 gives the optimal input; maximising the closed-form mutual
information directly gives an independent answer.
"""

import functools
import logging
import math
from dataclasses import dataclass

from scipy import optimize

from .channel import OnOffInput, Snr, mi_closed, mi_quadrature
from .errors import BoundaryMaximumError, BracketError, DomainError
from .specfun import EPS, INV_E, BranchK, lambert_w

logger = logging.getLogger(__name__)

DEFAULT_A_MAX = 0.1
# Above this SNR the two-point low-SNR expansion is no longer accurate
ORDER_LIMIT = 2e-2

ROOT_XTOL = 1e-15
ROOT_RTOL = 4.0 * EPS
MAX_BRACKET_EXPANSIONS = 60
X0_BRACKET = (1.5, 3.0)


@dataclass(frozen=True)
class LowSnrConstants:
    """Junction of the two Lambert branches: phi(x0) = -1/e and a0 = a(x0)."""

    x0_sq: float
    a0: float
    xi0: float

    @property
    def x0(self) -> float:
        return math.sqrt(self.x0_sq)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a root solve or a maximisation.

    ``objective`` holds the attained maximum for maximisations.
    """

    value: float
    residual: float
    iterations: int
    branch: BranchK
    objective: float | None = None
    valid: bool = True


def _require_above_one(operation: str, x: float) -> float:
    if not (math.isfinite(x) and x > 1.0):
        raise DomainError(operation, f"x must exceed 1, got {x!r}")
    return x * x


def phi(x: float) -> float:
    """Auxiliary function whose Lambert image encodes the SNR of mass point x.

    Lies in (-1/e, 0) for x above x0 and is strictly increasing there.

    Raises:
        DomainError: If x <= 1.
    """
    x_sq = _require_above_one("phi", x)
    t = math.pi / x_sq
    log_term = math.log1p(x_sq)
    core = -x_sq + log_term + x_sq * log_term
    exponent = -math.pi / (math.tan(t) * x_sq) + 1.0 + 1.0 / x_sq
    return -(math.sin(t) * core / (math.pi * x_sq)) * math.exp(exponent)


def log_snr_offset(x1: float) -> float:
    """Additive term -x1^2 + pi cot(pi/x1^2) + ln x1^2 + ln(1 + x1^2) - 1 of the log-SNR."""
    x_sq = _require_above_one("log_snr_offset", x1)
    return -x_sq + math.pi / math.tan(math.pi / x_sq) + math.log(x_sq) + math.log1p(x_sq) - 1.0


def log_snr_of_x1(x1: float, branch: BranchK) -> float:
    """Natural log of :func:`snr_of_x1`, finite even where the SNR underflows."""
    x_sq = _require_above_one("snr_of_x1", x1)
    try:
        w = lambert_w(branch, phi(x1))
    except DomainError as e:
        raise DomainError("snr_of_x1", f"phi({x1!r}) is outside branch {branch.label}: {e}") from e
    return x_sq * w + log_snr_offset(x1)


def snr_of_x1(x1: float, branch: BranchK) -> Snr:
    """SNR at which x1 is the optimal non-zero mass point.

    Decreasing in x1 on MINUS_ONE, increasing on PRINCIPAL; both branches
    meet at x0.

    Raises:
        DomainError: If phi(x1) is outside the branch's domain.
    """
    return math.exp(log_snr_of_x1(x1, branch))


def snr_lower_envelope(x1: float) -> Snr:
    """exp[x1^2 W(-1, phi(x1)) + 1], strictly below the MINUS_ONE SNR for x1 > x0."""
    x_sq = _require_above_one("snr_lower_envelope", x1)
    return math.exp(x_sq * lambert_w(BranchK.MINUS_ONE, phi(x1)) + 1.0)


def stationarity_residual(x1: float, a: Snr) -> float:
    """Stationarity condition of the capacity in x1; zero at the optimal x1.

    Raises:
        DomainError: If x1 <= 1 or a is outside (0, x1^2).
    """
    x_sq = _require_above_one("stationarity_residual", x1)
    if not 0.0 < a < x_sq:
        raise DomainError("stationarity_residual", f"need 0 < a < x1^2, got a={a!r}")
    t = math.pi / x_sq
    q = a / (x_sq + x_sq * x_sq)
    return x_sq - (1.0 + x_sq) * math.log1p(x_sq) - math.pi * q ** (1.0 / x_sq) / math.sin(t) * (
        1.0 + x_sq - math.pi / math.tan(t) + math.log(q)
    )


@functools.lru_cache(maxsize=1)
def low_snr_constants() -> LowSnrConstants:
    """Compute x0, a0 and xi0 once per process."""
    x0, info = optimize.brentq(
        lambda x: phi(x) + INV_E,
        *X0_BRACKET,
        xtol=ROOT_XTOL,
        rtol=ROOT_RTOL,
        maxiter=200,
        full_output=True,
    )
    x0_sq = x0 * x0
    log_a0 = log_snr_of_x1(math.sqrt(x0_sq), BranchK.MINUS_ONE)
    constants = LowSnrConstants(x0_sq=x0_sq, a0=math.exp(log_a0), xi0=log_a0 + x0_sq)
    logger.debug("low-SNR constants after %d iterations: %s", info.iterations, constants)
    return constants


def branch_for(a: Snr) -> BranchK:
    return BranchK.MINUS_ONE if a <= low_snr_constants().a0 else BranchK.PRINCIPAL


def solve_x1(a: Snr, a_max: float = DEFAULT_A_MAX, order_limit: float = ORDER_LIMIT) -> SolveResult:
    """Find the optimal non-zero mass point for SNR ``a``.

    Args:
        a: Linear SNR in (0, a_max].
        a_max: Largest SNR accepted.
        order_limit: Results above this SNR are returned with ``valid=False``.

    Returns:
        SolveResult whose residual is |a(x1) - a| / a.

    Raises:
        DomainError: If a is outside (0, a_max].
        BracketError: If no sign change was found while expanding the bracket.
    """
    if not (math.isfinite(a) and a > 0.0):
        raise DomainError("solve_x1", f"SNR must be positive, got {a!r}")
    if a > a_max:
        raise DomainError("solve_x1", f"SNR {a!r} exceeds a_max={a_max!r}")

    constants = low_snr_constants()
    branch = branch_for(a)
    valid = a <= order_limit
    if not valid:
        logger.warning(
            "SNR %g is above the order limit %g; result is outside the expansion's range",
            a,
            order_limit,
        )
    if a == constants.a0:
        return SolveResult(constants.x0, 0.0, 0, branch, valid=valid)

    log_a = math.log(a)

    def gap(x: float) -> float:
        return log_snr_of_x1(x, branch) - log_a

    # gap decreases in x on MINUS_ONE and increases on PRINCIPAL
    lo = constants.x0
    if branch is BranchK.MINUS_ONE:
        hi = math.sqrt(max(constants.xi0 - log_a, constants.x0_sq))
        direction = -1.0
    else:
        hi = 4.0 * constants.x0
        direction = 1.0

    expansions = 0
    while direction * gap(hi) < 0.0:
        if expansions == MAX_BRACKET_EXPANSIONS:
            raise BracketError(
                f"solve_x1({a!r}): no sign change on branch {branch.label}", (lo, hi)
            )
        hi *= 2.0
        expansions += 1
    logger.debug("solve_x1(%g): bracket [%g, %g] after %d expansions", a, lo, hi, expansions)

    try:
        root, info = optimize.brentq(
            gap, lo, hi, xtol=ROOT_XTOL, rtol=ROOT_RTOL, maxiter=200, full_output=True
        )
    except ValueError as e:
        raise BracketError(f"solve_x1({a!r}): {e}", (lo, hi)) from e
    residual = abs(math.expm1(gap(root)))
    return SolveResult(
        value=root, residual=residual, iterations=info.iterations, branch=branch, valid=valid
    )


def mi_search_interval(a: Snr) -> tuple[float, float]:
    """Default search interval for the numeric maximiser."""
    constants = low_snr_constants()
    lo = max(math.sqrt(a), 1.0 + 1e-6)
    hi = max(10.0, 2.0 * math.sqrt(max(constants.xi0 - math.log(a), 0.0)))
    return lo, hi


def maximize_mi(
    a: Snr,
    use_closed_form: bool = True,
    bracket: tuple[float, float] | None = None,
    order_limit: float = ORDER_LIMIT,
) -> SolveResult:
    """Maximise the on-off mutual information over x1 at SNR ``a``.

    Args:
        a: Linear SNR.
        use_closed_form: Maximise the closed form; otherwise the quadrature oracle.
        bracket: Search interval, defaults to :func:`mi_search_interval`.
        order_limit: Results above this SNR are returned with ``valid=False``.

    Returns:
        SolveResult with the argmax as ``value``, the attained maximum as
        ``objective`` and the normalised slope |dI/dx1| * x1 / I as ``residual``.

    Raises:
        BoundaryMaximumError: If the maximiser reaches the upper end of the interval.
    """
    if not (math.isfinite(a) and a > 0.0):
        raise DomainError("maximize_mi", f"SNR must be positive, got {a!r}")
    lo, hi = bracket or mi_search_interval(a)

    def mutual_information(x: float) -> float:
        if use_closed_form:
            return mi_closed(x, a)
        return mi_quadrature(OnOffInput.for_snr(x, a)).value

    result = optimize.minimize_scalar(
        lambda x: -mutual_information(x),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10 * lo, "maxiter": 500},
    )
    argmax = float(result.x)
    if argmax >= hi * (1.0 - 1e-6):
        raise BoundaryMaximumError(
            f"maximize_mi({a!r}): maximum on the search limit", (lo, hi), argmax
        )

    maximum = -float(result.fun)
    h = 1e-4 * argmax
    slope = (mutual_information(argmax + h) - mutual_information(max(argmax - h, lo))) / (
        argmax + h - max(argmax - h, lo)
    )
    residual = abs(slope) * argmax / maximum if maximum > 0.0 else abs(slope)
    return SolveResult(
        value=argmax,
        residual=residual,
        iterations=int(result.nfev),
        branch=branch_for(a),
        objective=maximum,
        valid=a <= order_limit,
    )
