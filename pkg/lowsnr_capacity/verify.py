"""Cross-module invariant battery behind ``lowsnr verify``."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from itertools import pairwise

import numpy as np

from . import analysis, channel, simulate, solver, specfun
from .errors import CapacityError
from .specfun import INV_E, BranchK

logger = logging.getLogger(__name__)


class Level(Enum):
    FAST = "fast"
    FULL = "full"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class _Check:
    name: str
    level: Level
    run: Callable[["VerifyOptions"], str]


@dataclass(frozen=True)
class VerifyOptions:
    seed: int = 20240601
    samples: int = 1_000_000
    battery_size: int = 20
    workers: int = 1


class CheckFailed(Exception):
    """Raised inside a check when an invariant does not hold."""

    pass


_CHECKS: list[_Check] = []

ORACLE_GRID_X_SQ = (4.0, 5.0, 8.0, 16.0)
ORACLE_GRID_A = (1e-4, 1e-3, 1e-2, 5e-2)


def check(name: str, level: Level = Level.FAST):
    """Register an invariant check; the function returns a one-line detail."""

    def register(func: Callable[[VerifyOptions], str]) -> Callable[[VerifyOptions], str]:
        _CHECKS.append(_Check(name, level, func))
        return func

    return register


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise CheckFailed(message)


# =============================================================================
# Fast checks
# =============================================================================


@check("constants")
def _constants(options: VerifyOptions) -> str:
    c = solver.low_snr_constants()
    _expect(abs(c.x0_sq - 3.93388) <= 5e-4, f"x0^2 = {c.x0_sq:.6f}")
    _expect(abs(c.a0 - 0.0582) <= 5e-4, f"a0 = {c.a0:.6f}")
    _expect(abs(solver.phi(c.x0) + INV_E) <= 1e-9, "phi(x0) != -1/e")
    return f"x0^2={c.x0_sq:.6f} a0={c.a0:.6f} xi0={c.xi0:.6f}"


@check("headline-point")
def _headline(options: VerifyOptions) -> str:
    solved = solver.solve_x1(1e-3)
    _expect(solved.residual <= 1e-10, f"solver residual {solved.residual:.3g}")
    point = analysis.capacity_low_snr(1e-3)
    _expect(abs(point.x1_sq / 4.96815 - 1.0) <= 1e-2, f"x1^2 = {point.x1_sq:.6f}")
    _expect(abs(point.delta_over_a - 0.49) <= 0.025, f"delta/a = {point.delta_over_a:.4f}")
    return f"x1^2={point.x1_sq:.5f} delta/a={point.delta_over_a:.4f}"


@check("lambert-residual")
def _lambert_residual(options: VerifyOptions) -> str:
    worst = 0.0
    negative = -np.geomspace(INV_E - 1e-9, 1e-12, 60)
    cases = [(k, float(z)) for z in negative for k in BranchK]
    positive = np.concatenate(([0.0], np.geomspace(1e-12, 1e6, 60)))
    cases += [(BranchK.PRINCIPAL, float(z)) for z in positive]
    for k, z in cases:
        w = specfun.lambert_w(k, z)
        worst = max(worst, abs(w * math.exp(w) - z) / max(1.0, abs(z)))
    _expect(worst <= 1e-12, f"worst scaled residual {worst:.3g}")
    return f"worst scaled residual {worst:.2g} over {len(cases)} points"


@check("contiguous-identity")
def _contiguous_identity(options: VerifyOptions) -> str:
    worst = 0.0
    for x_sq in ORACLE_GRID_X_SQ:
        for a in ORACLE_GRID_A:
            alpha = 1.0 + x_sq
            p1 = a / x_sq
            beta = p1 / ((1.0 - p1) * alpha)
            b = 1.0 / (alpha - 1.0)
            z = -1.0 / beta
            shifted = specfun.gauss_2f1_1b(b + 1.0, z).value
            total = specfun.gauss_2f1_1b(b, z).value + (1.0 - p1) / p1 * shifted
            worst = max(worst, abs(total - 1.0))
    _expect(worst <= 1e-8, f"worst deviation {worst:.3g}")
    return f"worst deviation {worst:.2g}"


@check("oracle-equivalence")
def _oracle_equivalence(options: VerifyOptions) -> str:
    worst = 0.0
    for x_sq in ORACLE_GRID_X_SQ:
        for a in ORACLE_GRID_A:
            x1 = math.sqrt(x_sq)
            closed = channel.mi_closed(x1, a)
            oracle = channel.mi_quadrature(channel.OnOffInput.for_snr(x1, a)).value
            worst = max(worst, abs(closed - oracle))
    _expect(worst <= 1e-7, f"worst gap {worst:.3g}")
    return f"worst gap {worst:.2g} on 16 points"


@check("branch-continuity")
def _branch_continuity(options: VerifyOptions) -> str:
    x0 = solver.low_snr_constants().x0
    gap = abs(solver.snr_of_x1(x0, BranchK.PRINCIPAL) - solver.snr_of_x1(x0, BranchK.MINUS_ONE))
    _expect(gap <= 1e-10, f"branch gap {gap:.3g}")
    return f"branch gap {gap:.2g}"


@check("mi-increasing-in-x1")
def _mi_increasing(options: VerifyOptions) -> str:
    smallest = math.inf
    for x_sq in ORACLE_GRID_X_SQ:
        for a in ORACLE_GRID_A:
            inp = channel.OnOffInput.for_snr(math.sqrt(x_sq), a)
            derivative = channel.mi_derivative_x1(inp).value
            smallest = min(smallest, derivative)
    _expect(smallest > 0.0, f"non-positive derivative {smallest:.3g}")
    return f"smallest derivative {smallest:.3g}"


@check("capacity-series-identity")
def _capacity_series_identity(options: VerifyOptions) -> str:
    worst = 0.0
    for x_sq in ORACLE_GRID_X_SQ:
        for a in ORACLE_GRID_A:
            x1 = math.sqrt(x_sq)
            series = channel.mi_series(x1, a)
            worst = max(worst, abs(series - analysis.capacity_at(a, x1)) / abs(series))
    _expect(worst <= 1e-12, f"worst relative gap {worst:.3g}")
    return f"worst relative gap {worst:.2g}"


@check("penalty-identity")
def _penalty_identity(options: VerifyOptions) -> str:
    worst = 0.0
    for x_sq in ORACLE_GRID_X_SQ:
        for a in ORACLE_GRID_A:
            x1 = math.sqrt(x_sq)
            recombined = analysis.penalty_per_snr(a, x1) * a + analysis.capacity_at(a, x1)
            worst = max(worst, abs(recombined - a) / a)
    _expect(worst <= 1e-12, f"worst relative gap {worst:.3g}")
    return f"worst relative gap {worst:.2g}"


@check("bound-sandwich")
def _bound_sandwich(options: VerifyOptions) -> str:
    for a in np.geomspace(1e-6, 0.05, 8):
        a = float(a)
        b = analysis.capacity_bounds(a)
        x1 = solver.solve_x1(a).value
        c = analysis.capacity_at(a, x1)
        _expect(
            b.x1_lower_first <= b.x1_lower <= x1 <= b.x1_upper,
            f"mass-point sandwich broken at a={a:.3g}",
        )
        _expect(b.c_lower <= c <= b.c_upper <= a, f"capacity sandwich broken at a={a:.3g}")
        _expect(b.c_at_x1_lower <= c, f"capacity at lower bound exceeds capacity at a={a:.3g}")
    return "8 points in [1e-6, 0.05]"


@check("scaled-divergence")
def _scaled_divergence(options: VerifyOptions) -> str:
    snrs = [10.0**-k for k in range(2, 9)]
    squares = [solver.solve_x1(a).value ** 2 for a in snrs]
    for power in (0.5, 1.0):
        scaled = [a**power * x_sq for a, x_sq in zip(snrs, squares, strict=True)]
        decreasing = all(later < earlier for earlier, later in pairwise(scaled))
        _expect(decreasing, f"a^{power} x1^2 not decreasing")
    ratios = [analysis.capacity_low_snr(a).delta / a**1.5 for a in (1e-2, 1e-4, 1e-6, 1e-8)]
    growing = all(later > 2.0 * earlier for earlier, later in pairwise(ratios))
    _expect(growing, "delta / a^1.5 not growing")
    return f"delta/a^1.5 from {ratios[0]:.3g} to {ratios[-1]:.3g}"


@check("fixed-point-vs-maximizer")
def _fixed_point_vs_maximizer(options: VerifyOptions) -> str:
    worst_x1 = worst_c = 0.0
    for a in np.geomspace(1e-6, 1e-2, 30):
        a = float(a)
        fixed = solver.solve_x1(a).value
        best = solver.maximize_mi(a)
        worst_x1 = max(worst_x1, abs(best.value - fixed) / fixed)
        peak = channel.mi_closed(best.value, a)
        worst_c = max(worst_c, (peak - channel.mi_closed(fixed, a)) / peak)
    _expect(worst_x1 <= 1e-2, f"worst relative x1 gap {worst_x1:.3g}")
    _expect(worst_c <= 5e-3, f"worst relative capacity gap {worst_c:.3g}")
    return f"worst relative gaps x1 {worst_x1:.2g}, capacity {worst_c:.2g}"


@check("discrepancy-regime")
def _discrepancy_regime(options: VerifyOptions) -> str:
    snrs = (1e-2, 3e-2, 5e-2, 7e-2, 1e-1)
    gaps = []
    for a in snrs:
        fixed = solver.solve_x1(a).value
        gaps.append(abs(solver.maximize_mi(a).value - fixed) / fixed)
    _expect(all(later > earlier for earlier, later in pairwise(gaps)), "x1 gap not growing with a")
    _expect(min(gaps[-2:]) > 1e-2, f"x1 gap at a=0.07 is only {gaps[-2]:.3g}")
    return f"x1 gap from {gaps[0]:.2g} at a=0.01 to {gaps[-1]:.2g} at a=0.1"


@check("penalty-band")
def _penalty_band(options: VerifyOptions) -> str:
    penalty = analysis.capacity_low_snr(0.1).penalty
    _expect(0.55 <= penalty <= 0.75, f"penalty at a=0.1 is {penalty:.4f}")
    return f"penalty at a=0.1 is {penalty:.4f}"


# =============================================================================
# Full checks
# =============================================================================


@check("monte-carlo", level=Level.FULL)
def _monte_carlo(options: VerifyOptions) -> str:
    seeds = [options.seed + i for i in range(options.battery_size)]
    outcomes = simulate.monte_carlo_battery(
        math.sqrt(5.0), 1e-2, options.samples, seeds, workers=options.workers
    )
    within = sum(abs(o.z_score) <= 4.0 for o in outcomes)
    _expect(
        within >= 0.95 * len(outcomes),
        f"only {within}/{len(outcomes)} estimates within 4 standard errors",
    )
    return f"{within}/{len(outcomes)} estimates within 4 standard errors"


def checks_for(level: Level) -> list[str]:
    return [c.name for c in _CHECKS if c.level is Level.FAST or level is Level.FULL]


def run_checks(level: Level, options: VerifyOptions | None = None) -> list[CheckResult]:
    """Run every check of ``level`` (FULL includes FAST) and collect the results."""
    options = options or VerifyOptions()
    results = []
    for entry in _CHECKS:
        if entry.level is Level.FULL and level is not Level.FULL:
            continue
        try:
            detail = entry.run(options)
            results.append(CheckResult(entry.name, True, detail))
        except (CheckFailed, CapacityError) as e:
            results.append(CheckResult(entry.name, False, str(e)))
        logger.debug("check %s: %s", entry.name, results[-1])
    return results
