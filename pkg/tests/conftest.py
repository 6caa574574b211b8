import pytest

from gridshell.services import surfaces
from gridshell.services.layout import assemble, init_grid
from gridshell.services.surface import prepare

RINGS = 6


@pytest.fixture(autouse=True)
def var_dir(tmp_path, monkeypatch):
    monkeypatch.setattr("gridshell.services.geodesics.VAR_DIR", tmp_path)


@pytest.fixture(scope="session")
def disk_mesh():
    return surfaces.build("disk", RINGS)


@pytest.fixture(scope="session")
def disk(disk_mesh):
    return prepare(disk_mesh)


@pytest.fixture(scope="session")
def dome():
    return prepare(surfaces.build("dome", RINGS))


@pytest.fixture(scope="session")
def moon():
    return prepare(surfaces.build("moon", 10))


@pytest.fixture
def disk_grid(disk):
    return assemble(disk, init_grid(disk.dual, 3, 3))


@pytest.fixture
def dome_grid(dome):
    return assemble(dome, init_grid(dome.dual, 2, 2))
