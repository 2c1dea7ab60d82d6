"""Tests for SNR sweeps and their table encodings."""

import io
import math

import pytest

from lowsnr_capacity.channel import OnOffInput, mi_quadrature
from lowsnr_capacity.errors import DomainError
from lowsnr_capacity.solver import solve_x1
from lowsnr_capacity.sweep import (
    FIGURE_COLUMNS,
    Figure,
    Spacing,
    SweepGrid,
    SweepTable,
    format_cell,
    parse_cell,
    parse_grid,
    profile_columns,
    read_csv,
    run_sweep,
    write_csv,
    write_gnuplot,
)

# ============================================================================
# Grids
# ============================================================================


class TestParseGrid:
    """Tests for grid parsing and spacing."""

    def test_log_is_default(self):
        grid = parse_grid("1e-6:1e-2:5")
        assert grid == SweepGrid(1e-6, 1e-2, 5, Spacing.LOG)
        assert grid.values() == pytest.approx([1e-6, 1e-5, 1e-4, 1e-3, 1e-2], rel=1e-12)

    def test_linear_spacing(self):
        grid = parse_grid(" 1.1:2.1:3:lin ")
        assert grid.spacing is Spacing.LINEAR
        assert grid.values() == pytest.approx([1.1, 1.6, 2.1])

    @pytest.mark.parametrize(
        "text",
        ["", "1e-3:1e-2", "a:b:3", "1e-3:1e-2:3:cubic", "1e-2:1e-3:3", "1e-3:1e-2:1", "0:1:3:log"],
    )
    def test_invalid(self, text):
        with pytest.raises(DomainError):
            parse_grid(text)

    def test_linear_grid_may_start_at_zero(self):
        assert parse_grid("0:1:3:lin").values() == [0.0, 0.5, 1.0]


# ============================================================================
# Sweeps
# ============================================================================


class TestRunSweep:
    """Tests for run_sweep."""

    def test_penalty_sweep(self):
        table = run_sweep(Figure.PENALTY, parse_grid("1e-4:1e-2:3"))
        assert table.columns == ["a", "penalty"]
        assert [row[0] for row in table.rows] == pytest.approx([1e-4, 1e-3, 1e-2])
        assert table.failed_rows == 0
        assert table.succeeded
        penalties = [row[1] for row in table.rows]
        assert penalties == sorted(penalties)

    def test_mass_point_sweep(self):
        table = run_sweep(Figure.MASS_POINT, parse_grid("1e-6:1e-2:3"))
        assert table.columns == FIGURE_COLUMNS[Figure.MASS_POINT]
        for a, fixed, numeric in table.rows:
            assert fixed == pytest.approx(solve_x1(a).value)
            # First-order fixed point: 1.4e-3 from the argmax at a = 1e-2
            assert numeric == pytest.approx(fixed, rel=2e-3)

    def test_capacity_sweep_includes_linear_reference(self):
        table = run_sweep(Figure.CAPACITY, parse_grid("1e-5:1e-3:2"))
        for a, fixed, numeric, linear in table.rows:
            assert linear == a
            assert 0.0 < fixed < a
            assert 0.0 < numeric < a

    def test_capacity_columns_agree_at_low_snr(self):
        table = run_sweep(Figure.CAPACITY, parse_grid("1e-6:1e-2:9"))
        assert table.failed_rows == 0
        for _, fixed, numeric, _ in table.rows:
            assert fixed == pytest.approx(numeric, rel=5e-3)

    def test_bounds_sweep_failures_are_recorded(self):
        """Rows above a0 fail the bounds but keep the exact mass point."""
        table = run_sweep(Figure.BOUNDS, parse_grid("0.01:0.08:2:lin"))
        assert len(table.columns) == len(FIGURE_COLUMNS[Figure.BOUNDS])
        good, bad = table.rows
        assert all(cell is not None for cell in good)
        assert bad[1] is None
        assert bad[2] == pytest.approx(solve_x1(0.08).value)
        assert table.failed_rows == 1
        assert table.success_ratio == 0.5
        assert not table.succeeded
        assert any("a=0.08" in w for w in table.warnings)

    def test_mi_profile(self):
        snrs = [1e-3, 1e-2]
        table = run_sweep(Figure.MI_PROFILE, parse_grid("0.02:3:4:lin"), profile_snrs=snrs)
        assert table.columns == profile_columns(snrs)
        first = table.rows[0]
        # x1 = 0.02 is below sqrt(a) for both SNRs
        assert first[1:] == [None, None]
        assert table.failed_rows == 0
        last = table.rows[-1]
        assert 0.0 < last[1] < 1e-3
        assert 0.0 < last[2] < 1e-2

    def test_mi_profile_below_unit_mass_point(self):
        """Mass points below one drive the hypergeometric term to large b."""
        snrs = [1e-2, 1e-3, 1e-4]
        table = run_sweep(Figure.MI_PROFILE, parse_grid("0.1:1:91:lin"), profile_snrs=snrs)
        assert table.failed_rows == 0
        assert table.warnings == []
        for row in table.rows:
            for a, cell in zip(snrs, row[1:], strict=True):
                assert cell is not None
                assert -1e-12 < cell < a
        for row in (table.rows[30], table.rows[60]):
            x1 = row[0]
            for a, cell in zip(snrs, row[1:], strict=True):
                oracle = mi_quadrature(OnOffInput.for_snr(x1, a)).value
                assert cell == pytest.approx(oracle, abs=1e-9)

    def test_mi_profile_needs_snrs(self):
        with pytest.raises(DomainError, match="mi-profile"):
            run_sweep(Figure.MI_PROFILE, parse_grid("1.1:3:4:lin"))

    def test_parallel_rows_keep_grid_order(self):
        grid = parse_grid("1e-5:1e-2:4")
        serial = run_sweep(Figure.PENALTY, grid, jobs=1)
        parallel = run_sweep(Figure.PENALTY, grid, jobs=2)
        assert parallel.rows == serial.rows

    def test_empty_table_counts_as_success(self):
        assert SweepTable(columns=["a"]).succeeded


# ============================================================================
# Encodings
# ============================================================================


class TestEncoding:
    """Tests for the CSV and gnuplot writers."""

    def test_cells(self):
        assert format_cell(None) == ""
        assert format_cell("MinusOne") == "MinusOne"
        assert format_cell(1.0 / 3.0) == "0.333333333333"
        assert parse_cell("") is None
        assert parse_cell("0.5") == 0.5
        assert parse_cell("yes") == "yes"

    def test_csv_round_trip_with_gaps(self):
        columns = ["a", "x1", "branch"]
        rows = [[1e-3, 2.218476, "MinusOne"], [0.08, None, "Principal"]]
        buffer = io.StringIO()
        write_csv(columns, rows, buffer)
        text = buffer.getvalue()
        assert text.splitlines()[0] == "a,x1,branch"
        assert "\r" not in text
        assert text.endswith("\n")
        buffer.seek(0)
        assert read_csv(buffer) == (columns, rows)
        again = io.StringIO()
        write_csv(*read_csv(io.StringIO(text)), again)
        assert again.getvalue() == text

    def test_twelve_significant_digits(self):
        buffer = io.StringIO()
        write_csv(["x"], [[math.pi]], buffer)
        assert buffer.getvalue().splitlines()[1] == "3.14159265359"

    def test_gnuplot_marks_failures_as_nan(self):
        buffer = io.StringIO()
        write_gnuplot(["a", "x1"], [[1e-3, None], [1e-2, 2.05]], buffer)
        assert buffer.getvalue().splitlines() == ["# a x1", "0.001 NaN", "0.01 2.05"]
