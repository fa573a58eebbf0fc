"""
Core CLI interface for the spherical cap discrepancy toolkit.

Machine-readable results (JSON reports, point files, CSV tables) go to files
or stdout; human summaries and diagnostics go to stderr through rich.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path
from typing import Annotated, Any, NoReturn

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from cap_discrepancy.config_manager import ConfigurationError, ConfigurationManager, resolve_thread_count
from cap_discrepancy.discrepancy_core import PointSetError, lower_bound, lower_bound_details
from cap_discrepancy.enumerator import DiscrepancyReport, EnumerationConfig, enumerate_discrepancy
from cap_discrepancy.experiments import (
    EXPERIMENT_COLUMNS,
    LOGLOG_COLUMNS,
    RATIO_COLUMNS,
    SLOPE_COLUMNS,
    TIMING_COLUMNS,
    ExperimentPlan,
    calibrate_seconds_per_subset,
    loglog_rows,
    loglog_slope,
    parse_seeds,
    parse_sizes,
    ratio_summary,
    run_experiment,
    timing_table,
)
from cap_discrepancy.io_handler import (
    PointFileError,
    format_point_lines,
    read_point_file,
    write_csv,
    write_point_file,
    write_report_json,
)
from cap_discrepancy.oracle import GridSpec, OracleDimensionError, cross_check
from cap_discrepancy.samplers import MC_GENERATOR, SCHEMES, SamplerSpec, UnsupportedDimensionError, sample
from cap_discrepancy.unified_logger import configure_logging, get_logger

TOOL_VERSION = "1.0.0"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MALFORMED_FILE = 2
EXIT_NON_UNIT_POINTS = 3
EXIT_UNSUPPORTED_DIMENSION = 4

console = Console()
err_console = Console(stderr=True)
logger = get_logger(__name__)


class ApplicationFactory:
    """Factory for creating application instances with their settings."""

    @staticmethod
    def create_application(config_dir: Path | None = None) -> ApplicationInterface:
        config_manager = ConfigurationManager(config_dir)
        config_manager.load_settings()
        return ApplicationInterface(config_manager)


class ApplicationInterface:
    """Turns command-line flags plus the settings file into component configs."""

    def __init__(self, config_manager: ConfigurationManager) -> None:
        self.config_manager = config_manager

    def thread_count(self, flag: int | None) -> int:
        return resolve_thread_count(flag, self.config_manager.section("enumeration").get("threads"))

    def enumeration_config(
        self,
        threads: int | None = None,
        gamma_tol: float | None = None,
        rank_tol: float | None = None,
    ) -> EnumerationConfig:
        section = self.config_manager.section("enumeration")
        if gamma_tol is not None:
            section["gamma_tol"] = gamma_tol
        if rank_tol is not None:
            section["rank_tol"] = rank_tol
        return EnumerationConfig.from_settings(section, self.thread_count(threads))

    def grid_spec(self, dimension: int, resolution: float | None = None) -> GridSpec:
        section = self.config_manager.section("oracle")
        return GridSpec(
            resolution=float(resolution if resolution is not None else section["grid_resolution"]),
            dimension=dimension,
            tolerance_per_resolution=float(section["tolerance_per_resolution"]),
        )

    def experiment_settings(self) -> dict[str, Any]:
        return self.config_manager.section("experiment")


app = typer.Typer(
    name="capdisc",
    help="Exact spherical cap discrepancy, its lower estimate, samplers and experiments",
    epilog=(
        "Examples:\n"
        "  capdisc sample --scheme gauss-mc --dim 3 --count 50 --seed 7 --out pts.txt\n"
        "  capdisc compute --points pts.txt --output report.json\n"
        "  capdisc verify --points pts.txt --grid-resolution 0.002"
    ),
    rich_markup_mode="rich",
    no_args_is_help=True,
    add_completion=False,
)

_app_instance: ApplicationInterface | None = None
_config_dir: Path | None = None


def get_app() -> ApplicationInterface:
    """Get or create the application instance."""
    global _app_instance
    if _app_instance is None:
        _app_instance = ApplicationFactory.create_application(_config_dir)
    return _app_instance


def _exit_code_for(error: Exception) -> int:
    if isinstance(error, PointFileError):
        return EXIT_MALFORMED_FILE
    if isinstance(error, PointSetError):
        return EXIT_NON_UNIT_POINTS if "offenders" in error.context else EXIT_MALFORMED_FILE
    if isinstance(error, (UnsupportedDimensionError, OracleDimensionError)):
        return EXIT_UNSUPPORTED_DIMENSION
    return EXIT_FAILURE


def _handle_cli_error(error: Exception, operation: str) -> NoReturn:
    """Centralized CLI error handling with the documented exit codes."""
    err_console.print(f"[red]Error in {operation}: {error}[/red]")
    context = getattr(error, "context", {})
    for index, norm in context.get("offenders", []):
        err_console.print(f"  point {index + 1}: norm {norm!r}")
    logger.debug("command failed", operation=operation, error_type=type(error).__name__, context=context)
    raise typer.Exit(_exit_code_for(error))


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        path.write_text(text, encoding="utf-8")


def _report_document(report: DiscrepancyReport, delta_tilde: float) -> dict[str, Any]:
    document = report.to_dict()
    document["subsets_visited"] = report.subsets_enumerated
    document["lower_bound_check"] = {
        "delta_tilde": delta_tilde,
        "holds": delta_tilde <= report.delta + 1e-12,
    }
    document["tool_version"] = TOOL_VERSION
    return document


def _summary_table(title: str, values: dict[str, Any]) -> Table:
    table = Table(title=title, show_header=False)
    table.add_column("Key", style="cyan")
    table.add_column("Value", style="white")
    for key, value in values.items():
        table.add_row(key, str(value))
    return table


@app.callback()
def main_callback(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at debug level")] = False,
    log_json: Annotated[bool, typer.Option("--log-json", help="Render logs as JSON lines")] = False,
    config_dir: Annotated[
        Path | None, typer.Option("--config-dir", help="Directory holding capdisc_config.json")
    ] = None,
) -> None:
    """Configure logging and settings for every command."""
    global _app_instance, _config_dir
    _config_dir = config_dir
    _app_instance = None
    try:
        section = get_app().config_manager.section("logging")
    except ConfigurationError as e:
        _handle_cli_error(e, "configuration")
    level = "DEBUG" if verbose else str(section.get("level", "INFO"))
    configure_logging(level=level, json_output=log_json or bool(section.get("json", False)))


@app.command("compute", help="Compute the exact discrepancy by subset enumeration")
def compute(
    points: Annotated[Path, typer.Option("--points", "-p", help="Point file ('-' for stdin)")],
    threads: Annotated[int | None, typer.Option("--threads", "-k", help="Worker processes")] = None,
    gamma_tol: Annotated[float | None, typer.Option("--gamma-tol", help="Phi1/Phi0 separation")] = None,
    rank_tol: Annotated[float | None, typer.Option("--rank-tol", help="Relative pivot threshold")] = None,
    output: Annotated[Path | None, typer.Option("--output", "-o", help="Report file (stdout if omitted)")] = None,
) -> None:
    """Run the enumeration and write the JSON report."""
    try:
        app_instance = get_app()
        ps = read_point_file(points)
        config = app_instance.enumeration_config(threads, gamma_tol, rank_tol)
        report = enumerate_discrepancy(ps, config)
        delta_tilde = lower_bound(ps)
        document = _report_document(report, delta_tilde)
        _emit(write_report_json(None, document), output)
    except Exception as e:
        _handle_cli_error(e, "discrepancy computation")

    if output is not None:
        err_console.print(
            _summary_table(
                "Spherical cap discrepancy",
                {
                    "delta": report.delta,
                    "family": report.argmax_family.value,
                    "subset": report.argmax_subset,
                    "subsets visited": report.subsets_enumerated,
                    "subsets pruned": report.subsets_pruned,
                    "wall time [s]": round(report.wall_time, 3),
                },
            )
        )


@app.command("lower-bound", help="Compute the lower estimate over directions x^i")
def lower_bound_command(
    points: Annotated[Path, typer.Option("--points", "-p", help="Point file ('-' for stdin)")],
    output: Annotated[Path | None, typer.Option("--output", "-o", help="Report file (stdout if omitted)")] = None,
) -> None:
    """Write delta_tilde and the per-direction suprema."""
    try:
        ps = read_point_file(points)
        started = time.perf_counter()
        details = lower_bound_details(ps)
        elapsed = time.perf_counter() - started
        document = {
            "delta_tilde": max(entry.value for entry in details),
            "n": ps.n,
            "N": ps.N,
            "directions": [{"index": index, **entry.to_dict()} for index, entry in enumerate(details)],
            "wall_time_seconds": elapsed,
            "tool_version": TOOL_VERSION,
        }
        _emit(write_report_json(None, document), output)
    except Exception as e:
        _handle_cli_error(e, "lower estimate")


@app.command("sample", help="Generate a point file with one of the sampling schemes")
def sample_command(
    scheme: Annotated[str, typer.Option("--scheme", "-s", help=f"One of {', '.join(SCHEMES)}")],
    dim: Annotated[int, typer.Option("--dim", "-n", help="Ambient dimension n (points on S^(n-1))")],
    count: Annotated[int, typer.Option("--count", "-N", help="Number of points")],
    seed: Annotated[int, typer.Option("--seed", help="Generator seed (MC schemes)")] = 0,
    skip: Annotated[int, typer.Option("--skip", help="Sobol' offset after index 0 (QMC schemes)")] = 0,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Point file (stdout if omitted)")] = None,
) -> None:
    """Write a deterministic sample for the given flags."""
    try:
        is_qmc = scheme.endswith("sobol")
        spec = SamplerSpec(scheme, dim, count, skip if is_qmc else seed)  # type: ignore[arg-type]
        ps = sample(spec)
        origin = f"skip={skip}" if is_qmc else f"seed={seed} generator={MC_GENERATOR}"
        header = [f"capdisc {TOOL_VERSION} scheme={scheme} dim={dim} count={count} {origin}"]
        if out is None:
            _emit(format_point_lines(ps), None)
        else:
            write_point_file(out, ps, header)
    except Exception as e:
        _handle_cli_error(e, "sampling")


def _companion_path(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}.{suffix}{out.suffix or '.csv'}")


def _seconds_per_subset(
    settings: dict[str, Any], calibrate: bool, dims: list[int], enumeration: EnumerationConfig
) -> float:
    if not calibrate:
        return float(settings["seconds_per_subset"])
    # The highest dimension has the slowest per-subset solves.
    rate = calibrate_seconds_per_subset(max(dims), enumeration)
    err_console.print(f"[cyan]Calibrated enumeration rate: {rate:.2e} s/subset[/cyan]")
    return rate


@app.command("experiment", help="Ratio and convergence study over schemes and sample sizes")
def experiment(
    out: Annotated[Path, typer.Option("--out", "-o", help="Experiment CSV")],
    scheme: Annotated[list[str], typer.Option("--scheme", "-s", help="Scheme or 'all' (repeatable)")] = ["all"],
    dim: Annotated[list[int], typer.Option("--dim", "-n", help="Ambient dimension (repeatable)")] = [3],
    sizes: Annotated[str, typer.Option("--sizes", help="start:stop:step, stop inclusive")] = "50:1000:50",
    seeds: Annotated[str, typer.Option("--seeds", help="Comma list of seeds or skips")] = "0",
    budget: Annotated[float | None, typer.Option("--budget", help="Per-cell runtime budget [s]")] = None,
    threads: Annotated[int | None, typer.Option("--threads", "-k", help="Worker processes")] = None,
    calibrate: Annotated[
        bool, typer.Option("--calibrate", help="Measure the enumeration rate with a pilot run")
    ] = False,
) -> None:
    """Write the experiment rows plus log-log, slope and ratio companion CSVs."""
    try:
        app_instance = get_app()
        settings = app_instance.experiment_settings()
        enumeration = app_instance.enumeration_config(threads)
        plan = ExperimentPlan(
            schemes=tuple(scheme),
            dims=tuple(dim),
            sizes=tuple(parse_sizes(sizes)),
            seeds=tuple(parse_seeds(seeds)),
            budget_seconds=float(budget if budget is not None else settings["budget_seconds"]),
            seconds_per_subset=_seconds_per_subset(settings, calibrate, dim, enumeration),
            desk_scale_subsets=float(settings["desk_scale_subsets"]),
            enumeration=enumeration,
        )
        rows = run_experiment(plan)
        write_csv(out, EXPERIMENT_COLUMNS, (row.as_tuple() for row in rows))
        write_csv(_companion_path(out, "loglog"), LOGLOG_COLUMNS, loglog_rows(rows))
        slopes = loglog_slope(rows)
        write_csv(_companion_path(out, "slopes"), SLOPE_COLUMNS, (fit.as_tuple() for fit in slopes))
        ratios = ratio_summary(rows)
        write_csv(_companion_path(out, "ratios"), RATIO_COLUMNS, (summary.as_tuple() for summary in ratios))
    except Exception as e:
        _handle_cli_error(e, "experiment")

    skipped = sum(row.skipped for row in rows)
    if skipped:
        err_console.print(f"[yellow]Warning: {skipped} cell(s) skipped over the runtime budget[/yellow]")

    table = Table(title="Experiment summary", show_header=True)
    table.add_column("Scheme", style="cyan")
    table.add_column("n", style="green")
    table.add_column("Mean ratio", style="white")
    table.add_column("Rel. std", style="white")
    table.add_column("Slope", style="yellow")
    slope_by_key = {(fit.scheme, fit.n): fit.slope for fit in slopes}
    for summary in ratios:
        slope = slope_by_key.get((summary.scheme, summary.n))
        table.add_row(
            summary.scheme,
            str(summary.n),
            f"{summary.mean_ratio:.4f}",
            f"{summary.rel_std_ratio:.2%}",
            "n/a" if slope is None else f"{slope:.3f}",
        )
    err_console.print(table)


@app.command("timings", help="Wall-clock enumeration times over (n, N)")
def timings(
    dim: Annotated[list[int], typer.Option("--dim", "-n", help="Ambient dimension (repeatable)")] = [3],
    sizes: Annotated[str, typer.Option("--sizes", help="start:stop:step, stop inclusive")] = "100:500:100",
    budget: Annotated[float | None, typer.Option("--budget", help="Per-cell runtime budget [s]")] = None,
    threads: Annotated[int | None, typer.Option("--threads", "-k", help="Worker processes")] = None,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Timing CSV")] = None,
    calibrate: Annotated[
        bool, typer.Option("--calibrate", help="Measure the enumeration rate with a pilot run")
    ] = False,
) -> None:
    """Time the enumeration on gauss-mc samples, skipping over-budget cells."""
    try:
        app_instance = get_app()
        settings = app_instance.experiment_settings()
        enumeration = app_instance.enumeration_config(threads)
        rows = timing_table(
            dims=dim,
            sizes=parse_sizes(sizes),
            budget_seconds=float(budget if budget is not None else settings["budget_seconds"]),
            enumeration=enumeration,
            seconds_per_subset=_seconds_per_subset(settings, calibrate, dim, enumeration),
        )
        if out is not None:
            write_csv(out, TIMING_COLUMNS, (row.as_tuple() for row in rows))
    except Exception as e:
        _handle_cli_error(e, "timings")

    table = Table(title="Enumeration timings", show_header=True)
    for column in ("n", "N", "Subsets", "Seconds"):
        table.add_column(column)
    for row in rows:
        seconds = "skipped" if row.skipped or row.seconds is None else f"{row.seconds:.3f}"
        table.add_row(str(row.n), str(row.N), str(row.subset_space), seconds)
    err_console.print(table)


@app.command("verify", help="Cross-check the enumeration against the grid oracle")
def verify(
    points: Annotated[Path, typer.Option("--points", "-p", help="Point file on S^1 or S^2")],
    grid_resolution: Annotated[
        float | None, typer.Option("--grid-resolution", "-r", help="Angular grid step")
    ] = None,
    threads: Annotated[int | None, typer.Option("--threads", "-k", help="Worker processes")] = None,
) -> None:
    """Exit 0 when the oracle agrees, 1 otherwise."""
    try:
        app_instance = get_app()
        ps = read_point_file(points)
        grid = app_instance.grid_spec(ps.n, grid_resolution)
        config = app_instance.enumeration_config(threads)
        verdict = cross_check(ps, grid, config, workers=config.thread_count)
    except Exception as e:
        _handle_cli_error(e, "verification")

    status = "[green]PASS[/green]" if verdict.passed else "[red]FAIL[/red]"
    lines = [
        f"verdict: {status}",
        f"delta: {verdict.delta!r}",
        f"grid bound: {verdict.grid_bound!r}",
        f"gap: {verdict.gap!r} (tolerance {verdict.tolerance!r})",
        f"boundary distance: {verdict.boundary_distance!r}",
        f"empirical / cap measure: {verdict.empirical!r} / {verdict.cap_measure!r}",
    ]
    lines.extend(f"violation {name}: {details}" for name, details in verdict.violations.items())
    console.print(Panel("\n".join(lines), title="Oracle cross-check", border_style="blue"))
    raise typer.Exit(EXIT_OK if verdict.passed else EXIT_FAILURE)


@app.command("version", help="Show version information")
def show_version() -> None:
    """Display version and system information."""
    console.print(
        Panel.fit(
            "[bold cyan]Spherical Cap Discrepancy Toolkit[/bold cyan]\n"
            f"[green]Version:[/green] {TOOL_VERSION}\n"
            f"[green]Python:[/green] {sys.version.split()[0]}\n"
            f"[green]Platform:[/green] {sys.platform}\n"
            f"[green]MC generator:[/green] {MC_GENERATOR}",
            title="Version Info",
            border_style="blue",
        )
    )


def run_cli() -> None:
    """Main CLI entry point."""
    app()


if __name__ == "__main__":
    run_cli()
