"""CLI entry point for lowsnr-capacity."""

import io
import logging
import sys
from dataclasses import asdict
from typing import Any, NoReturn

import click

from . import __version__, config
from .analysis import capacity_at, capacity_bounds, capacity_low_snr, energy_per_bit_db
from .channel import db_to_snr, snr_to_db
from .errors import CapacityError, DomainError
from .simulate import MAX_SEED, MIN_SAMPLES
from .solver import low_snr_constants, solve_x1
from .sweep import (
    Figure,
    SweepTable,
    format_cell,
    parse_grid,
    run_sweep,
    write_csv,
    write_gnuplot,
)
from .verify import Level, VerifyOptions, run_checks

EXIT_VERIFY_FAILED = 1
EXIT_NUMERIC_FAILURE = 2
EXIT_USAGE = 64

# Relative distance to a0 reported as the branch junction
JUNCTION_TOLERANCE = 5e-3
MAX_LISTED_WARNINGS = 10


class LowSnrGroup(click.Group):
    """Click group that reports usage errors with exit code 64."""

    def main(
        self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra: Any
    ):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


def configure_logging(verbosity: int) -> None:
    """Send library log records to stderr: WARNING, then INFO with -v, DEBUG with -vv."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def snr_options(func):
    """Attach the mutually exclusive --snr / --snr-db pair."""
    func = click.option("--snr-db", type=float, help="SNR in dB, a_dB = 10 log10(a)")(func)
    func = click.option("--snr", type=float, help="Linear SNR a = P sigma_h^2 / sigma_w^2")(func)
    return func


def resolve_snr(snr: float | None, snr_db: float | None, required: bool = True) -> float | None:
    """Turn the --snr / --snr-db pair into one linear SNR."""
    if snr is not None and snr_db is not None:
        raise click.UsageError("--snr and --snr-db are mutually exclusive.")
    if snr is None and snr_db is None:
        if required:
            raise click.UsageError("Provide --snr or --snr-db.")
        return None
    a = snr if snr is not None else db_to_snr(snr_db)  # type: ignore[arg-type]
    if not a > 0.0:
        raise click.BadParameter(f"SNR must be positive, got {a!r}", param_hint="--snr")
    return a


def echo_record(record: dict[str, Any]) -> None:
    for key, value in record.items():
        if isinstance(value, bool):
            value = "yes" if value else "no"
        elif isinstance(value, float):
            value = format_cell(value)
        click.echo(f"{key}={value}")


def numeric_failure(message: str, error: Exception) -> NoReturn:
    click.echo(f"✗ {message}: {error}", err=True)
    raise SystemExit(EXIT_NUMERIC_FAILURE) from None


def emit_table(table: SweepTable, out: str, fmt: str) -> None:
    """Write a sweep table and exit 2 when too many points failed."""
    writer = write_gnuplot if fmt == "gnuplot" else write_csv
    if out == "-":
        buffer = io.StringIO()
        writer(table.columns, table.rows, buffer)
        click.echo(buffer.getvalue(), nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            writer(table.columns, table.rows, f)
        click.echo(f"✓ Wrote {len(table.rows)} rows to {out}", err=True)

    if table.warnings:
        click.echo(f"⚠ {table.failed_rows} of {len(table.rows)} point(s) had failures:", err=True)
        for warning in table.warnings[:MAX_LISTED_WARNINGS]:
            click.echo(f"  {warning}", err=True)
        if len(table.warnings) > MAX_LISTED_WARNINGS:
            click.echo(f"  ... and {len(table.warnings) - MAX_LISTED_WARNINGS} more", err=True)
    if not table.succeeded:
        click.echo(f"✗ Only {table.success_ratio:.0%} of points succeeded", err=True)
        raise SystemExit(EXIT_NUMERIC_FAILURE)


def grid_option(required: bool):
    return click.option(
        "--grid",
        "grid_text",
        required=required,
        help="Grid as start:stop:points[:log|lin] (log spacing by default)",
    )


def out_options(func):
    func = click.option(
        "--format", "fmt", type=click.Choice(["csv", "gnuplot"]), default="csv", show_default=True
    )(func)
    func = click.option("--out", default="-", help="Output file (default: stdout)")(func)
    return func


def parse_grid_option(text: str):
    try:
        return parse_grid(text)
    except DomainError as e:
        raise click.BadParameter(str(e), param_hint="--grid") from None


# ============================================================================
# Main CLI Group
# ============================================================================


@click.group(cls=LowSnrGroup)
@click.version_option(version=__version__, prog_name=config.APP_NAME)
@click.option("--verbose", "-v", count=True, help="Log progress to stderr (-vv for debug output)")
@click.pass_context
def cli(ctx: click.Context, verbose: int):
    """Low-SNR capacity of the non-coherent Rayleigh fading channel.

    Solve for the optimal on-off input, tabulate capacity figures and run the
    invariant battery.
    """
    configure_logging(verbose)
    ctx.obj = config.get_settings()


# ============================================================================
# Single-Point Commands
# ============================================================================


@cli.command()
@snr_options
@click.option("--a-max", type=float, help="Largest SNR accepted (default 0.1)")
@click.option("--csv", "as_csv", is_flag=True, help="Print a CSV header and row instead")
@click.pass_obj
def solve(
    settings: config.Settings,
    snr: float | None,
    snr_db: float | None,
    a_max: float | None,
    as_csv: bool,
):
    """Optimal on-off input and capacity at one SNR.

    Examples:

    \b
        lowsnr solve --snr 1e-3
        lowsnr solve --snr-db -30
        lowsnr solve --snr 0.0582 --csv
    """
    a = resolve_snr(snr, snr_db)
    assert a is not None
    try:
        point = capacity_low_snr(
            a,
            a_max=a_max if a_max is not None else settings.a_max,
            order_limit=settings.order_limit,
        )
    except CapacityError as e:
        numeric_failure("Solver failed", e)

    a0 = low_snr_constants().a0
    record: dict[str, Any] = {"a": a, "a_db": snr_to_db(a)}
    record.update(point.to_dict())
    record["energy_per_bit_db"] = energy_per_bit_db(point)
    record["junction"] = abs(a - a0) <= JUNCTION_TOLERANCE * a0

    if as_csv:
        row = [("yes" if v else "no") if isinstance(v, bool) else v for v in record.values()]
        buffer = io.StringIO()
        write_csv(list(record), [row], buffer)
        click.echo(buffer.getvalue(), nl=False)
    else:
        echo_record(record)
    if not point.valid:
        click.echo(
            f"⚠ order-limit warning: a={a:g} is above {settings.order_limit:g}; "
            "the expansion is outside its range",
            err=True,
        )


@cli.command()
@snr_options
@grid_option(required=False)
@out_options
@click.option("--jobs", type=click.IntRange(min=1), help="Worker processes for grid evaluation")
@click.pass_obj
def bounds(
    settings: config.Settings,
    snr: float | None,
    snr_db: float | None,
    grid_text: str | None,
    out: str,
    fmt: str,
    jobs: int | None,
):
    """Analytic mass-point and capacity bounds (SNR below a0).

    Examples:

    \b
        lowsnr bounds --snr 1e-3
        lowsnr bounds --grid 1e-6:0.05:40
    """
    a = resolve_snr(snr, snr_db, required=grid_text is None)
    if grid_text is not None:
        if a is not None:
            raise click.UsageError("Use either --grid or a single SNR, not both.")
        table = run_sweep(
            Figure.BOUNDS,
            parse_grid_option(grid_text),
            jobs=jobs or settings.jobs,
            a_max=settings.a_max,
            order_limit=settings.order_limit,
        )
        emit_table(table, out, fmt)
        return

    assert a is not None
    try:
        point = capacity_bounds(a)
        exact = solve_x1(a, a_max=settings.a_max, order_limit=settings.order_limit).value
    except CapacityError as e:
        numeric_failure("Bounds failed", e)
    record: dict[str, Any] = asdict(point)
    record["x1_exact"] = exact
    record["capacity"] = capacity_at(a, exact)
    echo_record(record)


@cli.command()
@snr_options
@grid_option(required=False)
@out_options
@click.option("--jobs", type=click.IntRange(min=1), help="Worker processes for grid evaluation")
@click.pass_obj
def penalty(
    settings: config.Settings,
    snr: float | None,
    snr_db: float | None,
    grid_text: str | None,
    out: str,
    fmt: str,
    jobs: int | None,
):
    """Non-coherence penalty per SNR.

    Examples:

    \b
        lowsnr penalty --snr 0.1
        lowsnr penalty --grid 1e-8:0.1:50 --out penalty.csv
    """
    a = resolve_snr(snr, snr_db, required=grid_text is None)
    if grid_text is not None:
        if a is not None:
            raise click.UsageError("Use either --grid or a single SNR, not both.")
        table = run_sweep(
            Figure.PENALTY,
            parse_grid_option(grid_text),
            jobs=jobs or settings.jobs,
            a_max=settings.a_max,
            order_limit=settings.order_limit,
        )
        emit_table(table, out, fmt)
        return

    assert a is not None
    try:
        point = capacity_low_snr(a, a_max=settings.a_max, order_limit=settings.order_limit)
    except CapacityError as e:
        numeric_failure("Solver failed", e)
    echo_record(
        {
            "a": a,
            "x1": point.x1,
            "penalty": point.penalty,
            "delta_over_a": point.delta_over_a,
            "valid": point.valid,
        }
    )


# ============================================================================
# Sweep Command
# ============================================================================


@cli.command()
@click.option(
    "--figure",
    type=click.Choice([f.value for f in Figure]),
    required=True,
    help="Table to produce",
)
@grid_option(required=True)
@click.option(
    "--snr", "snrs", type=float, multiple=True, help="SNR to profile (mi-profile only, up to 5)"
)
@out_options
@click.option("--jobs", type=click.IntRange(min=1), help="Worker processes for grid evaluation")
@click.option("--a-max", type=float, help="Largest SNR accepted (default 0.1)")
@click.pass_obj
def sweep(
    settings: config.Settings,
    figure: str,
    grid_text: str,
    snrs: tuple[float, ...],
    out: str,
    fmt: str,
    jobs: int | None,
    a_max: float | None,
):
    """Tabulate a capacity figure over a grid.

    The grid runs over the SNR, except for mi-profile where it runs over x1
    and --snr picks the SNRs to profile.

    Examples:

    \b
        lowsnr sweep --figure capacity --grid 1e-6:1e-2:30
        lowsnr sweep --figure mass-point --grid 1e-6:0.1:40 --jobs 4 --out mass.csv
        lowsnr sweep --figure mi-profile --grid 1.1:6:60:lin --snr 1e-3 --snr 1e-2
    """
    selected = Figure(figure)
    grid = parse_grid_option(grid_text)
    if selected is Figure.MI_PROFILE:
        if not 1 <= len(snrs) <= 5:
            raise click.UsageError("mi-profile needs between 1 and 5 --snr values.")
        if any(a <= 0.0 for a in snrs):
            raise click.BadParameter("SNR values must be positive", param_hint="--snr")
    elif snrs:
        raise click.UsageError("--snr is only used by --figure mi-profile.")

    table = run_sweep(
        selected,
        grid,
        jobs=jobs or settings.jobs,
        profile_snrs=snrs,
        a_max=a_max if a_max is not None else settings.a_max,
        order_limit=settings.order_limit,
    )
    emit_table(table, out, fmt)


# ============================================================================
# Verification Command
# ============================================================================


@cli.command()
@click.option(
    "--level", type=click.Choice([lv.value for lv in Level]), default="fast", show_default=True
)
@click.option(
    "--seed", type=click.IntRange(0, MAX_SEED - 1), help="Base seed of the Monte Carlo battery"
)
@click.option("--samples", type=click.IntRange(min=MIN_SAMPLES), help="Samples per Monte Carlo run")
@click.option("--jobs", type=click.IntRange(min=1), help="Worker processes for Monte Carlo runs")
@click.pass_obj
def verify(
    settings: config.Settings,
    level: str,
    seed: int | None,
    samples: int | None,
    jobs: int | None,
):
    """Run the invariant battery and report pass/fail per check.

    Examples:

    \b
        lowsnr verify
        lowsnr verify --level full --seed 7 --samples 200000
    """
    options = VerifyOptions(
        seed=seed if seed is not None else settings.seed,
        samples=samples if samples is not None else settings.samples,
        workers=jobs or settings.jobs,
    )
    results = run_checks(Level(level), options)
    width = max(len(r.name) for r in results)
    for result in results:
        mark = "✓" if result.passed else "✗"
        click.echo(f"{mark} {result.name:<{width}}  {result.detail}")

    failed = [r.name for r in results if not r.passed]
    click.echo()
    if failed:
        click.echo(f"✗ {len(failed)} check(s) failed: {', '.join(failed)}", err=True)
        raise SystemExit(EXIT_VERIFY_FAILED)
    click.echo(f"✓ All {len(results)} checks passed")


# ============================================================================
# Settings Commands
# ============================================================================


@cli.group("config")
def config_group():
    """Show or change the saved defaults."""
    pass


@config_group.command("show")
@click.pass_obj
def config_show(settings: config.Settings):
    """Print the effective settings."""
    for key, value in asdict(settings).items():
        click.echo(f"{key}={value}")
    click.echo(f"# settings file: {config.SETTINGS_FILE}")


@config_group.command("set")
@click.argument("key", type=click.Choice(sorted(config.SETTING_TYPES)))
@click.argument("value")
def config_set(key: str, value: str):
    """Save a default, e.g. `lowsnr config set jobs 4`."""
    try:
        config.save_settings(**{key: value})
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="VALUE") from None
    click.echo(f"✓ Saved {key}={value}")


@config_group.command("clear")
def config_clear():
    """Remove the saved settings file."""
    config.clear_settings()
    click.echo("✓ Settings cleared")


# ============================================================================
# Entry Point
# ============================================================================


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
