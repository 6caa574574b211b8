from pathlib import Path

import click

from gridshell.cli import cli, load_config, settings_option
from gridshell.services import errors
from gridshell.services.pipeline import ARTIFACTS, sweep_rotation, write_sweep


@cli.command()
@click.argument("config")
@click.option("--steps", type=int, help="Rotations evaluated over one turn.")
@settings_option
@errors.exits_on_error
def sweep(config, steps, settings):
    """Energies of the initial grid rotated around the boundary."""
    config = load_config(config, settings)
    rows = sweep_rotation(config, steps)
    dest = write_sweep(rows, Path(config.OUTPUT_DIR) / ARTIFACTS["sweep"])
    feasible = [row for row in rows if row.feasible]
    click.echo(f"{len(feasible)}/{len(rows)} rotations feasible -> `{dest}`")
