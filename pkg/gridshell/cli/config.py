from pathlib import Path

import click

from gridshell.cli import cli
from gridshell.services import errors
from gridshell.services.config import Config


@cli.command("config")
@click.argument("dest", default="config.yml")
@click.option("--force", is_flag=True, help="Overwrite an existing file.")
@errors.exits_on_error
def config_(dest, force):
    """Write a config file holding every default."""
    if Path(dest).exists() and not force:
        raise click.UsageError(f"`{dest}` exists, pass --force to overwrite")
    path = Config().save(dest)
    click.echo(f"Wrote default config to `{path}`.")
