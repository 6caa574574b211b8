import functools
from pathlib import Path

import ruamel.yaml

from gridshell import ROOT_DIR

# ruaeml.yaml is a YAML parser that preserves comments and formatting.
# Use this one instead of pyyaml when you need to write YAML files that may also
# be edited by humans.
yaml = ruamel.yaml.YAML()
yaml.indent(mapping=2, sequence=4, offset=2)

DATA_DIR = ROOT_DIR.parent / "data"


def resolve(path: str) -> Path:
    return DATA_DIR / path


def examples() -> list[str]:
    return sorted(p.stem for p in resolve("examples").glob("*.yml"))


@functools.cache
def example(name: str) -> Path:
    """Path of a bundled example config, by stem."""
    path = resolve("examples") / f"{name}.yml"
    if not path.is_file():
        raise FileNotFoundError(
            f"No bundled example `{name}`."
            f" Choose from: {', '.join(examples())}."
        )
    return path
