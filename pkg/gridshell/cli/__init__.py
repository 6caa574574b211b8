import logging

import click

from gridshell import __version__, data, setup_logging
from gridshell.services.config import Config


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages.")
def cli(verbose):
    """Elastic geodesic grids and their planar layouts."""
    setup_logging(logging.DEBUG if verbose else logging.INFO)


def resolve_config(source: str):
    """A config file path, or the stem of a bundled example."""
    if source in data.examples():
        return data.example(source)
    return source


def load_config(source: str, settings=(), **flags) -> Config:
    config = Config.load(resolve_config(source))
    values = {}
    for setting in settings:
        key, sep, value = setting.partition("=")
        if not sep:
            raise click.BadParameter(
                f"Expected KEY=VALUE, got `{setting}`", param_hint="--set"
            )
        values[key.strip()] = value.strip()
    values.update({k: v for k, v in flags.items() if v is not None})
    return config.override(**values)


def settings_option(f):
    return click.option(
        "--set",
        "settings",
        multiple=True,
        metavar="KEY=VALUE",
        help="Override a config key, may be repeated.",
    )(f)


from gridshell import auto_import  # noqa: E402

auto_import.auto_import("cli")
