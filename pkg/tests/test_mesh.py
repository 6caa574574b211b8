import numpy as np
import pytest

from gridshell.services import surfaces
from gridshell.services.errors import (
    DegenerateFace,
    NonManifold,
    NotADisk,
)
from gridshell.services.mesh import (
    build_mesh,
    estimate_curvature,
    export_mesh,
    load_mesh,
    normal_curvature,
    signed_uv_areas,
)
from tests.conftest import RINGS


def test_disk_boundary(disk_mesh):
    boundary = disk_mesh.boundary
    assert boundary.N == 6 * RINGS
    assert disk_mesh.boundary_loop[0] == disk_mesh.boundary_loop.min()
    assert np.allclose(np.diff(boundary.t), 1 / boundary.N)
    assert boundary.locate(0.0) == (0, 0.0)
    assert boundary.nearest(0.999) == 0


def test_boundary_point_interpolates(disk_mesh):
    loop = disk_mesh.boundary_loop
    p = disk_mesh.boundary_point(0.5 / disk_mesh.boundary.N)
    expected = disk_mesh.vertices[loop[:2]].mean(axis=0)
    assert np.allclose(p.position, expected)


def test_locate_uv_matches_position(disk_mesh):
    p = disk_mesh.locate_uv([0.31, -0.22])
    assert np.allclose(p.position[:2], [0.31, -0.22])
    assert np.isclose(p.bary.sum(), 1.0)


@pytest.mark.parametrize(
    "vertices,faces,error",
    [
        (
            [[0, 0], [1, 0], [0, 1], [5, 5], [6, 5], [5, 6]],
            [[0, 1, 2], [3, 4, 5]],
            NotADisk,
        ),
        ([[0, 0], [1, 0], [0, 1]], [[0, 1, 1]], DegenerateFace),
        ([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]], DegenerateFace),
        (
            [[0, 0], [1, 0], [0, 1], [0, -1]],
            [[0, 1, 2], [0, 1, 3]],
            NonManifold,
        ),
    ],
)
def test_rejects_bad_meshes(vertices, faces, error):
    with pytest.raises(error):
        build_mesh(vertices, faces)


def test_rejects_closed_surface():
    with pytest.raises(NotADisk):
        surfaces.build("torus", 4)


def test_welds_duplicate_vertices():
    vertices = [[0, 0], [1, 0], [1, 1], [0, 0], [1, 1], [0, 1]]
    mesh = build_mesh(vertices, [[0, 1, 2], [3, 4, 5]])
    assert len(mesh.vertices) == 4
    assert mesh.boundary.N == 4


def test_conformal_map_of_flat_patch():
    vertices, faces, _ = surfaces.plane(4)
    mesh = build_mesh(vertices, faces)
    a, b = mesh.edges.T
    planar = np.linalg.norm(mesh.uv[a] - mesh.uv[b], axis=1)
    assert np.allclose(planar / mesh.edge_lengths, 1.0, rtol=1e-6)


def test_fans_close_inside(disk_mesh):
    faces, spokes, closed = disk_mesh.fan(0)
    assert closed
    assert len(faces) == len(spokes) == 6
    corner = disk_mesh.boundary_loop[3]
    _, _, closed = disk_mesh.fan(int(corner))
    assert not closed


def test_dome_curvature_at_apex():
    field = estimate_curvature(surfaces.build("dome", RINGS))
    assert field.k1[0] == pytest.approx(0.6, abs=1e-6)
    assert field.k2[0] == pytest.approx(0.6, abs=1e-6)
    assert field.degenerate == 0


def test_flat_curvature_vanishes(disk):
    assert np.abs(disk.curvature.k1).max() < 1e-9
    assert np.abs(disk.curvature.k2).max() < 1e-9


def test_normal_curvature():
    v1 = np.array([1.0, 0.0, 0.0])
    diagonal = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    assert normal_curvature(2.0, -1.0, v1, v1) == pytest.approx(2.0)
    assert normal_curvature(2.0, -1.0, v1, np.eye(3)[1]) == pytest.approx(-1)
    assert normal_curvature(2.0, -1.0, v1, diagonal) == pytest.approx(0.5)


def test_obj_export(tmp_path, disk_mesh):
    first = export_mesh(disk_mesh, tmp_path / "disk.obj")
    mesh = load_mesh(first)
    assert np.allclose(mesh.vertices, disk_mesh.vertices)
    assert np.array_equal(mesh.faces, disk_mesh.faces)
    assert np.allclose(mesh.uv, disk_mesh.uv)
    assert np.array_equal(mesh.boundary_loop, disk_mesh.boundary_loop)
    second = export_mesh(mesh, tmp_path / "again.obj")
    assert second.read_bytes() == first.read_bytes()


@pytest.mark.parametrize("rings", [4, 6, 8, 10, 12])
def test_moon_builds_at_every_resolution(rings):
    mesh = surfaces.build("moon", rings)
    assert (signed_uv_areas(mesh.uv, mesh.faces) > 0).all()
    assert mesh.boundary.N == 6 * rings


def test_cylinder_curvature():
    field = estimate_curvature(surfaces.build("cylinder", 8))
    interior = ~field.mesh.is_boundary
    k1, k2 = field.k1[interior], field.k2[interior]
    bent = np.where(np.abs(k1) >= np.abs(k2), k1, k2)
    flat = np.where(np.abs(k1) >= np.abs(k2), k2, k1)
    assert np.abs(bent) == pytest.approx(np.ones(len(bent)), rel=0.05)
    assert np.abs(flat).max() < 0.05
    v1, normal = field.v1[interior], field.normal[interior]
    # principal direction of the bent one, away from the y axis
    direction = np.where(
        (np.abs(k1) >= np.abs(k2))[:, None], v1, np.cross(normal, v1)
    )
    assert np.abs(direction[:, 1]).max() < np.sin(np.radians(5))
