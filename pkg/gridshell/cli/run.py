import click

from gridshell.cli import cli, load_config, settings_option
from gridshell.services import errors
from gridshell.services.pipeline import run_pipeline


@cli.command()
@click.argument("config", default="config.yml")
@settings_option
@click.option("-o", "--output", help="Output directory.")
@click.option("-j", "--workers", type=int, help="Worker processes.")
@errors.exits_on_error
def run(config, settings, output, workers):
    """Optimize a grid and its planar layout, writing every artifact."""
    config = load_config(
        config, settings, OUTPUT_DIR=output, WORKERS=workers
    )
    report = run_pipeline(config)
    click.echo(
        f"E_grid {report.energies.e_grid:.6g}, E_shape"
        f" {report.energies.e_shape:.3g}, max notch"
        f" {report.notches.max:.4g} -> `{config.OUTPUT_DIR}`"
    )
