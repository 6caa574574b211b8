import click

from gridshell.cli import cli
from gridshell.services import errors, surfaces
from gridshell.services.mesh import export_mesh


@cli.command()
@click.argument("name", type=click.Choice(list(surfaces.SURFACES)))
@click.argument("dest")
@click.option("-r", "--resolution", type=int, default=12, show_default=True)
@errors.exits_on_error
def surface(name, dest, resolution):
    """Export a builtin surface as OBJ."""
    mesh = surfaces.build(name, resolution)
    path = export_mesh(mesh, dest)
    click.echo(
        f"{len(mesh.vertices)} vertices, {mesh.boundary.N} on the boundary"
        f" -> `{path}`"
    )
