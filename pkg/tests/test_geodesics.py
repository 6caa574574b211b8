import numpy as np
import pytest

from gridshell.services import surfaces
from gridshell.services.errors import NoPath
from gridshell.services.geodesics import (
    atlas_path,
    boundary_distance,
    build_atlas,
    compute_field,
    load_atlas,
    propagate,
    propagation_table,
    save_atlas,
    trace_geodesic_oracle,
)


def test_flat_distances_are_chords(disk):
    atlas, mesh = disk.atlas, disk.mesh
    points = mesh.vertices[mesh.boundary_loop]
    chords = np.linalg.norm(points[:, None] - points[None], axis=2)
    edge = mesh.mean_edge_length
    assert np.allclose(atlas.D, chords, rtol=0.02, atol=0.05 * edge)


def test_distance_map_shape(disk):
    atlas = disk.atlas
    assert (atlas.D == atlas.D.T).all()
    assert (np.diag(atlas.D) == 0).all()
    assert (atlas.D <= atlas.B + 1e-9).all()
    assert atlas.asymmetry >= 0


def test_field_from_center(disk_mesh):
    field = compute_field(disk_mesh, 0)
    radii = np.linalg.norm(disk_mesh.vertices, axis=1)
    assert np.allclose(field.values, radii, rtol=0.01)


def test_boundary_distance_at_vertices(disk):
    atlas = disk.atlas
    t = disk.mesh.boundary.t
    value = boundary_distance(atlas, t[3], t[20])
    assert value == pytest.approx(atlas.D[3, 20], abs=atlas.asymmetry + 1e-12)


def test_boundary_distance_between_vertices(disk):
    atlas = disk.atlas
    t = disk.mesh.boundary.t
    middle = (t[3] + t[4]) / 2
    value = boundary_distance(atlas, middle, t[20])
    low, high = sorted((atlas.D[3, 20], atlas.D[4, 20]))
    assert low - 1e-9 <= value <= high + 1e-9


def test_atlas_cache(tmp_path, disk_mesh):
    atlas = build_atlas(disk_mesh, cache=True)
    path = atlas_path(disk_mesh)
    assert path.is_file()
    cached = load_atlas(disk_mesh, path)
    assert np.array_equal(cached.D, atlas.D)
    assert np.array_equal(cached.fields, atlas.fields)


def test_atlas_rejects_truncated(tmp_path, disk):
    path = save_atlas(disk.atlas, tmp_path / "disk.atlas")
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError, match="Truncated"):
        load_atlas(disk.mesh, path)


def test_atlas_rejects_bad_magic(tmp_path, disk):
    path = save_atlas(disk.atlas, tmp_path / "disk.atlas")
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ValueError, match="atlas"):
        load_atlas(disk.mesh, path)


def test_oracle_is_straight_on_flat_disk(disk_mesh):
    a = disk_mesh.boundary_point(0.1)
    b = disk_mesh.boundary_point(0.55)
    path = trace_geodesic_oracle(disk_mesh, a, b)
    chord = np.linalg.norm(b.position - a.position)
    assert path.length == pytest.approx(chord, rel=1e-6)
    assert not path.touches_boundary()


def test_oracle_on_dome_bounds(dome):
    mesh = dome.mesh
    a, b = mesh.boundary_point(0.0), mesh.boundary_point(0.5)
    path = trace_geodesic_oracle(mesh, a, b)
    chord = np.linalg.norm(b.position - a.position)
    assert chord < path.length
    assert path.length <= boundary_distance(dome.atlas, 0.0, 0.5) * 1.01


def test_oracle_needs_distinct_points(disk_mesh):
    a = disk_mesh.boundary_point(0.2)
    with pytest.raises(NoPath):
        trace_geodesic_oracle(disk_mesh, a, a)


def test_atlas_rejects_other_mesh(tmp_path, disk):
    path = save_atlas(disk.atlas, tmp_path / "disk.atlas")
    with pytest.raises(ValueError, match="does not match"):
        load_atlas(surfaces.build("disk", 4), path)


def test_every_vertex_is_reached():
    mesh = surfaces.build("square", 1)
    values = propagate(propagation_table(mesh.vertices, mesh.faces), 0)
    assert np.isfinite(values).all()
    expected = np.linalg.norm(mesh.vertices - mesh.vertices[0], axis=1)
    assert np.allclose(values, expected)


def test_aligned_grid_distances_are_euclidean():
    # rows and diagonals of a regular grid tie with the edge paths
    mesh = surfaces.build("plane", 8)
    table = propagation_table(mesh.vertices, mesh.faces)
    for source in (0, len(mesh.vertices) // 2):
        values = propagate(table, source)
        expected = np.linalg.norm(
            mesh.vertices - mesh.vertices[source], axis=1
        )
        assert np.allclose(values, expected, rtol=1e-6, atol=1e-9)


@pytest.fixture(scope="module")
def octant_mesh():
    return surfaces.build("octant", 16)


def test_octant_field_from_pole(octant_mesh):
    pole = int(np.argmax(octant_mesh.vertices[:, 2]))
    field = compute_field(octant_mesh, pole)
    arcs = np.arccos(np.clip(octant_mesh.vertices[:, 2], -1.0, 1.0))
    edge = octant_mesh.mean_edge_length
    assert np.allclose(field.values, arcs, rtol=0.01, atol=0.05 * edge)


def test_octant_distances_are_arcs(octant_mesh):
    atlas = build_atlas(octant_mesh)
    points = octant_mesh.vertices[octant_mesh.boundary_loop]
    arcs = np.arccos(np.clip(points @ points.T, -1.0, 1.0))
    edge = octant_mesh.mean_edge_length
    assert np.allclose(atlas.D, arcs, rtol=0.01, atol=0.05 * edge)
    rng = np.random.default_rng(0)
    i, j, k = rng.integers(0, len(points), (3, 10000))
    slack = atlas.asymmetry + 1e-3 * edge
    assert (atlas.D[i, k] <= atlas.D[i, j] + atlas.D[j, k] + slack).all()
