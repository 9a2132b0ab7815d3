"""
Command-line interface: ``python -m src.cli <command>``.
"""

import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import click
from rich.console import Console
from rich.table import Table

from .config.presets import PRESETS, build_preset, verification_cube
from .config.problem import build_problem
from .config.run_config import RunConfig
from .config.settings import get_settings
from .core.exceptions import SimulationError
from .core.gmsh import read_msh
from .core.mesh import Region
from .core.runner import RunResult, run
from .core.verification import run_verification
from .observability.logging import configure_logging, get_logger
from .output.writers import SnapshotWriter, write_outputs

console = Console()
logger = get_logger(__name__)


def execute(config: RunConfig, output: Optional[str] = None, max_steps: Optional[int] = None) -> RunResult:
    """Build, run and write one configuration."""
    directory = Path(output or config.output.directory)
    problem = build_problem(config)
    observers = []
    if config.output.snapshot_stride > 0:
        observers.append(
            SnapshotWriter(problem.mesh, directory, config.name, config.output.snapshot_stride)
        )
    result = run(problem, max_steps=max_steps, observers=observers, keep_reports=False)
    write_outputs(result.rows, directory, config.name, config.output.csv)
    return result


def execute_all(
    configs: List[RunConfig], output: Optional[str], max_steps: Optional[int], threads: int
) -> List[RunResult]:
    """Run sweep members, at most ``threads`` at a time."""
    if threads <= 1 or len(configs) == 1:
        return [execute(c, output, max_steps) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: execute(c, output, max_steps), configs))


def _summary(results: List[RunResult]) -> Table:
    table = Table(title="Runs")
    for col in ("run", "steps", "final energy", "constraint L1", "max |m|", "wall [s]"):
        table.add_column(col)
    for r in results:
        last = r.rows[-1]
        table.add_row(
            r.name,
            str(r.steps),
            f"{last['totalenergy']:.6e}",
            f"{last['constraint_l1']:.3e}",
            f"{last['nodal_max']:.6f}",
            f"{r.wall_time:.2f}",
        )
    return table


@click.group()
@click.option("--log-level", default=None, help="Override MELLG_LOG_LEVEL")
def cli(log_level: Optional[str]) -> None:
    """Magnetoelastic LLG simulator."""
    settings = get_settings()
    configure_logging(log_level or settings.log_level, settings.log_json)


@cli.command("run")
@click.argument("config_path", type=click.Path())
@click.option("--output", "-o", default=None, help="Output directory")
@click.option("--max-steps", type=int, default=None, help="Stop after N steps")
@click.option("--set", "overrides", multiple=True, help="Override key=value (dotted)")
def run_command(config_path: str, output: Optional[str], max_steps: Optional[int], overrides: Tuple[str, ...]) -> None:
    """Run a YAML configuration."""
    try:
        config = RunConfig.from_yaml(config_path)
        if overrides:
            config = config.with_overrides(list(overrides))
        result = execute(config, output, max_steps)
    except SimulationError as e:
        raise click.ClickException(str(e))
    console.print(_summary([result]))


@cli.command("preset")
@click.argument("name")
@click.option("--output", "-o", default=None, help="Output directory")
@click.option("--max-steps", type=int, default=None, help="Stop each member after N steps")
@click.option("--set", "overrides", multiple=True, help="Override key=value (dotted)")
def preset_command(name: str, output: Optional[str], max_steps: Optional[int], overrides: Tuple[str, ...]) -> None:
    """Run every member of an experiment preset."""
    try:
        configs = build_preset(name, overrides)
        logger.info("preset_started", preset=name, members=len(configs))
        results = execute_all(configs, output, max_steps, get_settings().threads)
    except SimulationError as e:
        raise click.ClickException(str(e))
    console.print(_summary(results))


@cli.command("list-presets")
def list_presets_command() -> None:
    """Show available presets."""
    table = Table(title="Presets")
    table.add_column("name")
    table.add_column("members")
    table.add_column("first member")
    for name, builder in PRESETS.items():
        members = builder()
        table.add_row(name, str(len(members)), members[0].name)
    console.print(table)


@cli.command("verify")
@click.option("--steps", type=int, default=5, help="Steps on the verification cube")
def verify_command(steps: int) -> None:
    """Check the discrete invariants on a small built-in cube."""
    try:
        report = run_verification(build_problem(verification_cube(steps=steps)))
    except SimulationError as e:
        raise click.ClickException(str(e))
    table = Table(title="Verification")
    for col in ("check", "value", "threshold", "status"):
        table.add_column(col)
    for c in report.checks:
        table.add_row(c.name, f"{c.value:.3e}", f"{c.threshold:.1e}", "ok" if c.passed else "FAIL")
    console.print(table)
    if not report.passed:
        sys.exit(1)


@cli.command("mesh-info")
@click.argument("path", type=click.Path())
def mesh_info_command(path: str) -> None:
    """Print counts and volumes of an MSH file."""
    try:
        mesh = read_msh(path)
        geo = mesh.geometry
    except SimulationError as e:
        raise click.ClickException(str(e))
    table = Table(title=str(path))
    table.add_column("quantity")
    table.add_column("value")
    table.add_row("nodes", str(mesh.n_nodes))
    table.add_row("tetrahedra", str(mesh.n_tets))
    for region in Region:
        table.add_row(f"{region.name.lower()} faces", str(len(mesh.faces_in(region))))
    table.add_row("volume", f"{geo.total_volume:.12g}")
    table.add_row("neumann area", f"{geo.neumann_area:.12g}")
    table.add_row("h_max", f"{mesh.h_max:.6g}")
    console.print(table)


if __name__ == "__main__":
    cli()
