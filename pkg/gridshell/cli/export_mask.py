import click

from gridshell.cli import cli, load_config, settings_option
from gridshell.services import errors
from gridshell.services.dual import export_mask as write_mask
from gridshell.services.pipeline import open_surface


@cli.command("export-mask")
@click.argument("config")
@click.argument("dest")
@settings_option
@errors.exits_on_error
def export_mask(config, dest, settings):
    """Write the invalid-region mask (PNG, or PGM by suffix)."""
    surface = open_surface(load_config(config, settings))
    path = write_mask(surface.dual, dest)
    click.echo(
        f"{len(surface.dual.segments)} non-convex segment(s) -> `{path}`"
    )
