import click

from gridshell.cli import cli
from gridshell.services import errors
from gridshell.services.errors import ValidationFailed
from gridshell.services.pipeline import validate_grid


@cli.command()
@click.argument("output_dir", type=click.Path(exists=True, file_okay=False))
@errors.exits_on_error
def validate(output_dir):
    """Re-check the artifacts of a finished run."""
    report = validate_grid(output_dir)
    click.echo(f"ε_geo {report.eps_geo:.3g}% of the mean edge length")
    if not report.ok:
        for violation in report.violations:
            click.echo(f"  {violation}")
        raise ValidationFailed(report.violations)
