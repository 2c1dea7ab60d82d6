"""SNR sweeps that tabulate the capacity figures, and their CSV encoding."""

import csv
import logging
import math
import re
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import TextIO

import numpy as np

from .analysis import (
    capacity_at,
    capacity_bounds,
    capacity_low_snr,
    capacity_numeric_max,
    x1_envelope_root,
)
from .channel import mi_closed
from .errors import CapacityError, DomainError
from .solver import DEFAULT_A_MAX, ORDER_LIMIT, maximize_mi, solve_x1

logger = logging.getLogger(__name__)

Cell = float | str | None

SIGNIFICANT_DIGITS = 12
SUCCESS_THRESHOLD = 0.9
MAX_PROFILE_SNRS = 5

_GRID_PATTERN = re.compile(r"^\s*([^:]+):([^:]+):(\d+)(?::(log|lin))?\s*$")


class Spacing(Enum):
    LOG = "log"
    LINEAR = "lin"


class Figure(Enum):
    """Tables reproducing the capacity figures."""

    MASS_POINT = "mass-point"
    CAPACITY = "capacity"
    PENALTY = "penalty"
    BOUNDS = "bounds"
    MI_PROFILE = "mi-profile"


FIGURE_COLUMNS: dict[Figure, list[str]] = {
    Figure.MASS_POINT: ["a", "x1_fixedpoint", "x1_numericmax"],
    Figure.CAPACITY: ["a", "C_fixedpoint", "C_numericmax", "C_linear"],
    Figure.PENALTY: ["a", "penalty"],
    Figure.BOUNDS: [
        "a",
        "x1_lower",
        "x1_exact",
        "x1_upper",
        "x1_lower_first",
        "x1_envelope",
        "c_lower",
        "C_fixedpoint",
        "c_upper",
        "c_at_x1_lower",
    ],
}


@dataclass(frozen=True)
class SweepGrid:
    """Evenly spaced grid on a linear or logarithmic scale."""

    start: float
    stop: float
    points: int
    spacing: Spacing = Spacing.LOG

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise DomainError("SweepGrid", "start and stop must be finite")
        if not self.start < self.stop:
            raise DomainError(
                "SweepGrid", f"start must be below stop, got {self.start!r}:{self.stop!r}"
            )
        if self.points < 2:
            raise DomainError("SweepGrid", f"points must be at least 2, got {self.points!r}")
        if self.spacing is Spacing.LOG and not self.start > 0.0:
            raise DomainError(
                "SweepGrid", f"log spacing needs a positive start, got {self.start!r}"
            )

    def values(self) -> list[float]:
        if self.spacing is Spacing.LOG:
            grid = np.geomspace(self.start, self.stop, self.points)
        else:
            grid = np.linspace(self.start, self.stop, self.points)
        return [float(v) for v in grid]


def parse_grid(text: str) -> SweepGrid:
    """Parse ``start:stop:points[:log|lin]``; spacing defaults to log.

    Raises:
        DomainError: If the text is malformed or describes an invalid grid.
    """
    match = _GRID_PATTERN.match(text)
    if not match:
        raise DomainError("parse_grid", f"expected start:stop:points[:log|lin], got {text!r}")
    try:
        start = float(match.group(1))
        stop = float(match.group(2))
    except ValueError:
        raise DomainError("parse_grid", f"start and stop must be numbers, got {text!r}") from None
    spacing = Spacing(match.group(4)) if match.group(4) else Spacing.LOG
    return SweepGrid(start=start, stop=stop, points=int(match.group(3)), spacing=spacing)


@dataclass
class SweepTable:
    """Rows in grid order; ``None`` cells mark failed evaluations."""

    columns: list[str]
    rows: list[list[Cell]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    failed_rows: int = 0

    @property
    def success_ratio(self) -> float:
        if not self.rows:
            return 1.0
        return 1.0 - self.failed_rows / len(self.rows)

    @property
    def succeeded(self) -> bool:
        return self.success_ratio >= SUCCESS_THRESHOLD


# =============================================================================
# Row evaluation
# =============================================================================


@dataclass
class _Row:
    cells: list[Cell]
    warnings: list[str] = field(default_factory=list)
    failed: bool = False

    def attempt(self, label: str, compute) -> Cell:
        try:
            value = compute()
        except CapacityError as e:
            self.warnings.append(f"{label}: {e}")
            self.failed = True
            return None
        return value


def _mass_point_row(a: float, a_max: float, order_limit: float) -> _Row:
    row = _Row([a])
    row.cells.append(
        row.attempt(f"a={a:.6g} fixed point", lambda: solve_x1(a, a_max, order_limit).value)
    )
    row.cells.append(row.attempt(f"a={a:.6g} numeric max", lambda: maximize_mi(a).value))
    return row


def _capacity_row(a: float, a_max: float, order_limit: float) -> _Row:
    row = _Row([a])
    row.cells.append(
        row.attempt(
            f"a={a:.6g} fixed point", lambda: capacity_low_snr(a, a_max, order_limit).capacity
        )
    )
    row.cells.append(
        row.attempt(f"a={a:.6g} numeric max", lambda: capacity_numeric_max(a, order_limit).capacity)
    )
    row.cells.append(a)
    return row


def _penalty_row(a: float, a_max: float, order_limit: float) -> _Row:
    row = _Row([a])
    row.cells.append(
        row.attempt(f"a={a:.6g} penalty", lambda: capacity_low_snr(a, a_max, order_limit).penalty)
    )
    return row


def _bounds_row(a: float, a_max: float, order_limit: float) -> _Row:
    row = _Row([a])
    bounds = row.attempt(f"a={a:.6g} bounds", lambda: capacity_bounds(a))
    exact = row.attempt(f"a={a:.6g} fixed point", lambda: solve_x1(a, a_max, order_limit).value)
    envelope = row.attempt(f"a={a:.6g} envelope root", lambda: x1_envelope_root(a))
    capacity = None
    if exact is not None:
        capacity = row.attempt(f"a={a:.6g} capacity", lambda: capacity_at(a, exact))
    if bounds is None:
        row.cells.extend([None, exact, None, None, envelope, None, capacity, None, None])
        return row
    row.cells.extend(
        [
            bounds.x1_lower,
            exact,
            bounds.x1_upper,
            bounds.x1_lower_first,
            envelope,
            bounds.c_lower,
            capacity,
            bounds.c_upper,
            bounds.c_at_x1_lower,
        ]
    )
    return row


def _profile_row(x1: float, snrs: Sequence[float]) -> _Row:
    row = _Row([x1])
    for a in snrs:
        if x1 * x1 < a:
            # Below sqrt(a) the power constraint cannot be met
            row.cells.append(None)
            continue
        row.cells.append(row.attempt(f"x1={x1:.6g} a={a:.6g}", lambda a=a: mi_closed(x1, a)))
    return row


_ROW_BUILDERS = {
    Figure.MASS_POINT: _mass_point_row,
    Figure.CAPACITY: _capacity_row,
    Figure.PENALTY: _penalty_row,
    Figure.BOUNDS: _bounds_row,
}


def profile_columns(snrs: Sequence[float]) -> list[str]:
    return ["x1"] + [f"I_LB(a={format_cell(a)})" for a in snrs]


def run_sweep(
    figure: Figure,
    grid: SweepGrid,
    jobs: int = 1,
    profile_snrs: Sequence[float] = (),
    a_max: float = DEFAULT_A_MAX,
    order_limit: float = ORDER_LIMIT,
) -> SweepTable:
    """Evaluate ``figure`` at every grid point.

    For ``Figure.MI_PROFILE`` the grid runs over x1 and ``profile_snrs`` lists
    the 1 to 5 SNRs to profile; every other figure sweeps the SNR.
    Rows come back in grid order whatever ``jobs`` is.
    """
    if figure is Figure.MI_PROFILE:
        if not 1 <= len(profile_snrs) <= MAX_PROFILE_SNRS:
            raise DomainError(
                "run_sweep",
                f"mi-profile needs 1 to {MAX_PROFILE_SNRS} SNRs, got {len(profile_snrs)}",
            )
        columns = profile_columns(profile_snrs)
        evaluate = partial(_profile_row, snrs=tuple(profile_snrs))
    else:
        columns = FIGURE_COLUMNS[figure]
        evaluate = partial(_ROW_BUILDERS[figure], a_max=a_max, order_limit=order_limit)

    values = grid.values()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate, values))
    else:
        rows = [evaluate(v) for v in values]

    table = SweepTable(columns=columns)
    for row in rows:
        table.rows.append(row.cells)
        table.warnings.extend(row.warnings)
        table.failed_rows += int(row.failed)
    logger.info("%s sweep: %d rows, %d failed", figure.value, len(table.rows), table.failed_rows)
    return table


# =============================================================================
# CSV and gnuplot encoding
# =============================================================================


def format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(value, f".{SIGNIFICANT_DIGITS}g")


def parse_cell(text: str) -> Cell:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(columns: Sequence[str], rows: Sequence[Sequence[Cell]], stream: TextIO) -> None:
    """Write a header and rows with 12 significant digits and LF line endings."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])


def read_csv(stream: TextIO) -> tuple[list[str], list[list[Cell]]]:
    """Inverse of :func:`write_csv`."""
    reader = csv.reader(stream)
    columns = next(reader)
    return columns, [[parse_cell(cell) for cell in row] for row in reader]


def write_gnuplot(columns: Sequence[str], rows: Sequence[Sequence[Cell]], stream: TextIO) -> None:
    """Whitespace-separated columns with a commented header; failures become NaN."""
    stream.write("# " + " ".join(columns) + "\n")
    for row in rows:
        stream.write(" ".join("NaN" if v is None else format_cell(v) for v in row) + "\n")
