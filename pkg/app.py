"""
Atom Localization Simulator - command-line front end.
Computes probe-absorption maps of a three-level atom in two standing waves,
sweeps the dipole angle and pump rate, and writes deterministic CSV/JSON/PGM data.

Usage:
    python app.py map --preset fig2d --out output/
    python app.py sweep-theta --preset fig2 --threads 8
    python app.py validate --config my_run.toml
"""

import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import typer
from rich.console import Console
from rich.table import Table

from analysis.contours import contour_levels
from analysis.peaks import localization_report
from core.errors import LocalizationError, OutputError
from simulation.absorption import compute_map
from simulation.sweeps import SweepResult, summarize_map, sweep_gamma, sweep_theta
from simulation.validation import run_validation
from storage.writers import (
    dumps_json,
    render_heatmap,
    write_contours_csv,
    write_json,
    write_map_csv,
)
from utils.config import RunConfig, list_presets, load_config, load_preset
from utils.helpers import format_angle, format_optional, is_strictly_monotone
from utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

COMMANDS = ("map", "sweep-theta", "sweep-gamma", "contours", "validate", "render")

app = typer.Typer(
    help="Probe-absorption atom localization simulator.",
    add_completion=False,
    no_args_is_help=True,
)


# ============= COMMAND RUNNER =============

class CommandRunner:
    """Routes a command name to the routine that computes and writes its artifacts."""

    def __init__(self, config: RunConfig, out_dir: Path, threads: int = 1, console: Optional[Console] = None):
        """
        Args:
            config: Validated run configuration
            out_dir: Directory for all artifacts
            threads: Worker threads for map rows (speed only, never output bytes)
            console: Status output; None keeps the runner silent
        """
        self.config = config
        self.out_dir = Path(out_dir)
        self.threads = max(1, int(threads))
        self.console = console
        self.status = 0
        self.progress = console is not None and sys.stderr.isatty()
        self.routes: Dict[str, Callable[[], List[Path]]] = {
            "map": self.run_map,
            "sweep-theta": self.run_sweep_theta,
            "sweep-gamma": self.run_sweep_gamma,
            "contours": self.run_contours,
            "validate": self.run_validate,
            "render": self.run_render,
        }

    def say(self, message: str) -> None:
        if self.console is not None:
            self.console.print(message)

    def path(self, suffix: str) -> Path:
        return self.out_dir / f"{self.config.stem}_{suffix}"

    def route(self, command: str) -> List[Path]:
        if command not in self.routes:
            raise typer.BadParameter(f"unknown command {command!r} (choose from {', '.join(COMMANDS)})")
        return self.routes[command]()

    def _map(self):
        cfg = self.config
        return compute_map(cfg.params, cfg.wave, cfg.grid, cfg.solver, self.threads)

    # ---- commands ----

    def run_map(self) -> List[Path]:
        cfg = self.config
        amap = self._map()
        report = localization_report(amap, max(cfg.analysis.min_prominence_fraction * amap.max_value, 0.0))
        summary = summarize_map(
            amap,
            cfg.analysis.min_prominence_fraction,
            innermost_fraction=cfg.analysis.innermost_level,
            report=report,
        )

        written = []
        if cfg.output.csv:
            written.append(write_map_csv(amap, self.path("map.csv")))
        if cfg.output.emit_json:
            written.append(write_json({
                "config": cfg.model_dump(by_alias=True),
                "report": report.to_dict(),
                "summary": summary.to_dict(),
            }, self.path("peaks.json")))
        if cfg.output.pgm:
            written.append(render_heatmap(amap, self.path("map.pgm")))

        self.say(
            f"📍 {report.peak_count} peak(s); height {format_optional(summary.peak_height)}, "
            f"diameter {format_optional(summary.diameter)} "
            f"(half wavelength {report.half_wavelength:.4g})"
        )
        return written

    def _write_sweep(self, result: SweepResult, label: str) -> List[Path]:
        cfg = self.config
        written = []
        for k, amap in enumerate(result.maps):
            if cfg.output.csv:
                written.append(write_map_csv(amap, self.path(f"{label}_{k}.csv")))
            if cfg.output.pgm:
                written.append(render_heatmap(amap, self.path(f"{label}_{k}.pgm")))
        if cfg.output.emit_json:
            written.append(write_json({
                "config": cfg.model_dump(by_alias=True),
                "sweep": result.to_dict(),
            }, self.path(f"sweep_{label}.json")))

        if self.console is not None:
            self.console.print(sweep_table(result))
        return written

    def run_sweep_theta(self) -> List[Path]:
        cfg = self.config
        thetas = cfg.sweep.thetas or [cfg.params.theta]
        result = sweep_theta(
            cfg.params, cfg.wave, cfg.grid, thetas, cfg.solver, self.threads,
            cfg.analysis.min_prominence_fraction, progress=self.progress,
        )
        if len(thetas) > 1 and not is_strictly_monotone(result.peak_heights, increasing=True):
            self.say("⚠️ peak heights are not strictly increasing across the theta sweep")
        return self._write_sweep(result, "theta")

    def run_sweep_gamma(self) -> List[Path]:
        cfg = self.config
        gammas = cfg.sweep.gammas or [cfg.params.pump]
        result = sweep_gamma(
            cfg.params, cfg.wave, cfg.grid, gammas, cfg.solver, self.threads,
            cfg.analysis.min_prominence_fraction, progress=self.progress,
        )
        if len(gammas) > 1 and not is_strictly_monotone(result.peak_heights, increasing=False):
            self.say("⚠️ peak heights are not strictly decreasing across the pump sweep")
        return self._write_sweep(result, "gamma")

    def run_contours(self) -> List[Path]:
        amap = self._map()
        contours = contour_levels(amap, self.config.analysis.contour_levels)
        total = sum(len(c) for c in contours)
        self.say(f"〰️ {total} polyline(s) over {len(contours)} level(s)")
        return [write_contours_csv(contours, self.path("contours.csv"))]

    def run_validate(self) -> List[Path]:
        cfg = self.config
        report = run_validation(
            cfg.params, cfg.wave, cfg.grid, cfg.solver, self.threads,
            progress=self.progress,
        )
        path = write_json(report.to_dict(), self.out_dir / "validation.json")
        oracle = report.oracle
        self.say(
            f"{'✅' if report.passed else '⚠️'} oracle max difference "
            f"{oracle['max_entrywise_difference']:.3e} over {oracle['sample_count']} samples; "
            f"analytic max |difference| {format_optional(report.analytic.get('max_abs_difference'))}"
        )
        if not report.passed:
            self.status = 1
        return [path]

    def run_render(self) -> List[Path]:
        return [render_heatmap(self._map(), self.path("map.pgm"))]


def sweep_table(result: SweepResult) -> Table:
    """Rich table of one sweep's summaries."""
    table = Table(title=f"{result.parameter} sweep")
    for column in (result.parameter, "peaks", "height", "x", "y", "fwhm_x", "fwhm_y", "< half wavelength"):
        table.add_column(column, justify="right")
    for value, s in zip(result.values, result.summaries):
        shown = format_angle(value) if result.parameter == "theta" else f"{value:.4g}"
        table.add_row(
            shown,
            str(s.peak_count),
            format_optional(s.peak_height),
            format_optional(s.peak_x),
            format_optional(s.peak_y),
            format_optional(s.fwhm_x),
            format_optional(s.fwhm_y),
            "n/a" if s.within_half_wavelength is None else ("yes" if s.within_half_wavelength else "no"),
        )
    return table


def run(
    command: str,
    config: RunConfig,
    out_dir: Optional[Path] = None,
    threads: int = 1,
    console: Optional[Console] = None,
) -> int:
    """
    Execute one command and write its artifacts.

    Returns:
        0 when every artifact was written; 1 when validation checks fail (the
        report is still written) or on any simulator error, in which case
        error.json is written to out_dir (when possible) and echoed on stdout
    """
    out_dir = Path(out_dir) if out_dir is not None else Path(config.output.directory)
    runner = CommandRunner(config, out_dir, threads, console)
    try:
        written = runner.route(command)
    except LocalizationError as e:
        logger.error("%s failed: %s", command, e.message)
        payload = {"command": command, **e.to_dict()}
        try:
            write_json(payload, out_dir / "error.json")
        except OutputError:
            pass
        sys.stdout.write(dumps_json(payload).decode("utf-8"))
        return 1

    for path in written:
        runner.say(f"✅ Wrote {path}")
    return runner.status


# ============= CLI =============

def _resolve_config(config_path: Optional[Path], preset: Optional[str]) -> RunConfig:
    if config_path is not None and preset is not None:
        raise typer.BadParameter("use either --config or --preset, not both")
    if config_path is None and preset is None:
        raise typer.BadParameter("one of --config or --preset is required")
    if preset is not None:
        return load_preset(preset)
    return load_config(config_path)


def _execute(command: str, config_path, preset, out, threads, quiet, verbose) -> None:
    setup_logging("ERROR" if quiet else "WARNING", verbose)
    console = None if quiet else Console()
    try:
        config = _resolve_config(config_path, preset)
    except LocalizationError as e:
        payload = {"command": command, **e.to_dict()}
        sys.stdout.write(dumps_json(payload).decode("utf-8"))
        raise typer.Exit(code=1)
    status = run(command, config, out, threads, console)
    raise typer.Exit(code=status)


ConfigOption = typer.Option(None, "--config", "-c", help="TOML run configuration")
PresetOption = typer.Option(None, "--preset", "-p", help="Shipped preset name (see `presets`)")
OutOption = typer.Option(None, "--out", "-o", help="Output directory (default: [output].directory)")
ThreadsOption = typer.Option(1, "--threads", "-t", min=1, help="Worker threads (speed only)")
QuietOption = typer.Option(False, "--quiet", "-q", help="No status output or progress bars")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Debug logging")


@app.command("map")
def map_command(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    threads: int = ThreadsOption,
    quiet: bool = QuietOption,
    verbose: bool = VerboseOption,
):
    """Compute one absorption map; write its CSV and peak report."""
    _execute("map", config, preset, out, threads, quiet, verbose)


@app.command("sweep-theta")
def sweep_theta_command(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    threads: int = ThreadsOption,
    quiet: bool = QuietOption,
    verbose: bool = VerboseOption,
):
    """Sweep the dipole angle over [sweep].thetas."""
    _execute("sweep-theta", config, preset, out, threads, quiet, verbose)


@app.command("sweep-gamma")
def sweep_gamma_command(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    threads: int = ThreadsOption,
    quiet: bool = QuietOption,
    verbose: bool = VerboseOption,
):
    """Sweep the incoherent pump rate over [sweep].gammas."""
    _execute("sweep-gamma", config, preset, out, threads, quiet, verbose)


@app.command("contours")
def contours_command(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    threads: int = ThreadsOption,
    quiet: bool = QuietOption,
    verbose: bool = VerboseOption,
):
    """Write contour polylines at [analysis].contour_levels (fractions of the maximum)."""
    _execute("contours", config, preset, out, threads, quiet, verbose)


@app.command("validate")
def validate_command(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    threads: int = ThreadsOption,
    quiet: bool = QuietOption,
    verbose: bool = VerboseOption,
):
    """Run the oracle, physicality, linearity and closed-form checks."""
    _execute("validate", config, preset, out, threads, quiet, verbose)


@app.command("render")
def render_command(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    threads: int = ThreadsOption,
    quiet: bool = QuietOption,
    verbose: bool = VerboseOption,
):
    """Write the map as a grayscale PGM."""
    _execute("render", config, preset, out, threads, quiet, verbose)


@app.command("presets")
def presets_command():
    """List the shipped presets."""
    table = Table(title="Presets")
    table.add_column("name", no_wrap=True)
    for column in ("theta", "pump", "sweep"):
        table.add_column(column)
    for name in list_presets():
        cfg = load_preset(name)
        sweep = []
        if cfg.sweep.thetas:
            sweep.append("theta: " + ", ".join(format_angle(t) for t in cfg.sweep.thetas))
        if cfg.sweep.gammas:
            sweep.append("pump: " + ", ".join(f"{g:g}" for g in cfg.sweep.gammas))
        table.add_row(name, format_angle(cfg.params.theta), f"{cfg.params.pump:g}", "; ".join(sweep))
    Console().print(table)


if __name__ == "__main__":
    app()
