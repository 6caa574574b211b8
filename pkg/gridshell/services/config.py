import dataclasses
import os
import types
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from gridshell.services.errors import ConfigError

SCHEMA = 1
ENV_PREFIX = "GRIDSHELL_"
# Keys that only describe where a run writes, never what it computes
LOCAL_KEYS = ("OUTPUT_DIR", "WORKERS", "ATLAS_CACHE")


@dataclass
class Config:
    SCHEMA_VERSION: int = SCHEMA
    MESH: str = "builtin:disk"
    RESOLUTION: int = 12
    WELD_TOL: float | None = None
    N: int = 5
    M: int = 5
    ROTATION: float = 0.0
    MIN_GAP: int = 2
    LAMBDA: float | None = None
    EPSILON: float | None = None
    EPSILON_D: float | None = None
    EPSILON_X: float | None = None
    SPACING: float | None = None
    POPULATION: int = 32
    GENERATIONS: int = 60
    SEED_ROTATIONS: int = 64
    CROSSOVER: float = 0.8
    MUTATION: float = 0.01
    ELITE: int = 2
    TOURNAMENT: int = 3
    STALL_GENERATIONS: int = 15
    STALL_TOL: float = 1e-6
    SEED: int = 0
    MU: float = 0.0
    WIDTH: float = 0.0
    PLANAR_INIT: str = "uv"
    PLANAR_MAX_ITER: int = 50
    PLANAR_TOL: float = 1e-6
    NOTCH_CLEARANCE: float = 0.02
    SWEEP_STEPS: int = 64
    OUTPUT_DIR: str = "output"
    WORKERS: int = 1
    ATLAS_CACHE: bool = True

    def __post_init__(self):
        for field in fields(self):
            value = getattr(self, field.name)
            if isinstance(value, str) and _base_type(field.type) is not str:
                setattr(self, field.name, self.convert(value, field.type))
            elif isinstance(value, int) and _base_type(field.type) is float:
                setattr(self, field.name, float(value))

        if self.SCHEMA_VERSION != SCHEMA:
            raise ConfigError(
                f"Config schema {self.SCHEMA_VERSION} is not supported"
                f" (expected {SCHEMA})"
            )
        if self.N < 2 or self.M < 2:
            raise ConfigError(
                f"Need at least 2 members per family: {self.N=}, {self.M=}"
            )
        for name in (
            "WELD_TOL",
            "EPSILON",
            "EPSILON_D",
            "EPSILON_X",
            "SPACING",
            "STALL_TOL",
            "PLANAR_TOL",
            "LAMBDA",
        ):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.MU < 0 or self.WIDTH < 0:
            raise ConfigError(
                f"MU and WIDTH must be >= 0: {self.MU=}, {self.WIDTH=}"
            )
        if self.MIN_GAP < 1:
            raise ConfigError(f"MIN_GAP must be at least 1, got {self.MIN_GAP}")
        if self.PLANAR_INIT not in ("uv", "circle"):
            raise ConfigError(f"Unknown PLANAR_INIT `{self.PLANAR_INIT}`")

    @property
    def ga(self):
        from gridshell.services.optimizer import GAConfig

        return GAConfig(
            population=self.POPULATION,
            generations=self.GENERATIONS,
            seed_rotations=self.SEED_ROTATIONS,
            crossover=self.CROSSOVER,
            mutation=self.MUTATION,
            elite=self.ELITE,
            tournament=self.TOURNAMENT,
            min_gap=self.MIN_GAP,
            stall_generations=self.STALL_GENERATIONS,
            stall_tol=self.STALL_TOL,
            seed=self.SEED,
        )

    @property
    def planar(self):
        from gridshell.services.planar import PlanarizeConfig

        return PlanarizeConfig(
            mu=self.MU,
            width=self.WIDTH,
            max_iter=self.PLANAR_MAX_ITER,
            tol=self.PLANAR_TOL,
            init=self.PLANAR_INIT,
        )

    @staticmethod
    def convert(value, type):
        if value is None:
            return None
        if isinstance(value, str) and value.lower() in ("none", "null", "~"):
            if isinstance(type, types.UnionType):
                return None
        type = _base_type(type)
        if type == bool:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ["true", "1", "yes"]
        try:
            return type(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(
                f"Cannot read {value!r} as {type.__name__}"
            ) from e

    def override(self, **values):
        known = {field.name: field.type for field in fields(self)}
        changes = {}
        for key, value in values.items():
            key = key.upper()
            if key not in known:
                raise ConfigError(f"Unknown config key `{key}`")
            changes[key] = self.convert(value, known[key])
        return dataclasses.replace(self, **changes)

    def as_dict(self, portable=False):
        data = dataclasses.asdict(self)
        if portable:
            for key in LOCAL_KEYS:
                data.pop(key)
        return data

    def save(self, path):
        from gridshell import data

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as f:
            data.yaml.dump(self.as_dict(), f)
        return path

    @classmethod
    def load(cls, path="config.yml"):
        path = Path(path)
        if not path.exists():
            cls().save(path)
        with path.open() as f:
            data = yaml.safe_load(f) or {}
        unknown = set(data) - {field.name for field in fields(cls)}
        if unknown:
            keys = ", ".join(sorted(unknown))
            raise ConfigError(f"Unknown config keys: {keys}")
        for field in fields(cls):
            if ENV_PREFIX + field.name in os.environ:
                data[field.name] = cls.convert(
                    os.environ[ENV_PREFIX + field.name], field.type
                )
        return cls(**data)


def _base_type(type):
    if isinstance(type, types.UnionType):
        args = [arg for arg in type.__args__ if arg is not types.NoneType]
        return args[0]
    return type
