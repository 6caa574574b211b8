import numpy as np
import pytest

from gridshell.services import surfaces
from gridshell.services.dual import (
    CORE,
    DIAGONAL,
    NonConvexSegment,
    build_dual,
    canonicalize,
    check_provenance,
    cyclic_separation,
    export_mask,
    segments_model,
)
from gridshell.services.errors import DegenerateMember
from gridshell.services.geodesics import build_atlas, trace_geodesic_oracle
from gridshell.services.mesh import build_mesh


def test_canonicalize():
    assert canonicalize(0.7, 0.2) == (0.2, 0.7, True)
    tx, ty, flipped = canonicalize(1.25, 0.5)
    assert (tx, ty, flipped) == (pytest.approx(0.25), 0.5, False)
    assert canonicalize(-1e-17, 0.5) == (0.0, 0.5, False)


@pytest.mark.parametrize("tx,ty", [(0.1, 0.6), (0.9, 0.35), (0.0, 0.5)])
@pytest.mark.parametrize("shift", [(1, 0), (0, -1), (2, 3), (-3, 1)])
def test_canonicalize_ignores_unit_shifts(tx, ty, shift):
    expected = canonicalize(tx, ty)
    tx2, ty2, flipped = canonicalize(tx + shift[0], ty + shift[1])
    assert (tx2, ty2) == pytest.approx(expected[:2], abs=1e-12)
    assert flipped == expected[2]


@pytest.mark.parametrize("tx,ty", [(0.7, 0.2), (1.25, 0.5), (-0.4, 2.1)])
def test_canonicalize_is_idempotent(tx, ty):
    a, b, _ = canonicalize(tx, ty)
    assert canonicalize(a, b) == (a, b, False)


@pytest.mark.parametrize("tx,ty", [(0.3, 0.3), (0.3, 1.3), (0.0, 1.0)])
def test_canonicalize_rejects_coinciding(tx, ty):
    with pytest.raises(DegenerateMember):
        canonicalize(tx, ty)


def test_cyclic_separation():
    assert cyclic_separation(0, 9, 10) == 1
    assert cyclic_separation(2, 7, 10) == 5
    assert (cyclic_separation(np.array([1, 8]), 0, 10) == [1, 2]).all()


def test_segment_over_the_seam():
    segment = NonConvexSegment(8, 2, 0.8, 1.2, 10)
    assert segment.length == 4
    assert segment.indices == [8, 9, 0, 1, 2]
    assert segment.contains(0)
    assert not segment.contains(5)
    assert segment.away(8) == -1
    assert segment.away(2) == 1
    assert segment.away(9) == 0
    assert segment.away(4) == 1
    assert segment.away(6) == -1


def test_convex_disk_has_no_invalid_region(disk):
    dual = disk.dual
    assert dual.segments == []
    assert (dual.invalid_mask == np.eye(dual.N, dtype=bool)).all()
    assert (np.diag(dual.provenance) == DIAGONAL).all()
    assert check_provenance(dual) == []


def test_moon_bay_is_detected(moon):
    dual = moon.dual
    assert len(dual.segments) == 1
    t = moon.mesh.boundary.t
    for segment in dual.segments:
        # the bay is centred three quarters of the way around
        middle = t[segment.indices[len(segment.indices) // 2]]
        assert abs(middle - 0.75) < 0.15
    assert (dual.provenance == CORE).any()
    assert (dual.invalid_mask == dual.invalid_mask.T).all()
    assert check_provenance(dual) == []


def test_core_covers_segment_pairs(moon):
    dual = moon.dual
    segment = dual.segments[0]
    a, b = segment.i1, segment.i2
    assert dual.invalid_mask[a, b]
    assert dual.core_mask[a, b]
    assert not dual.is_valid(
        moon.mesh.boundary.t[a], moon.mesh.boundary.t[b]
    )


def test_segments_model(moon):
    model = segments_model(moon.dual)
    assert model.N == moon.dual.N
    assert len(model.segments) == len(moon.dual.segments)
    assert model.invalid_cells > model.N


def test_export_pgm(tmp_path, disk):
    path = export_mask(disk.dual, tmp_path / "mask.pgm")
    raw = path.read_bytes()
    header = f"P5\n{disk.dual.N} {disk.dual.N}\n255\n".encode()
    assert raw.startswith(header)
    assert len(raw) == len(header) + disk.dual.N**2


def test_export_png(tmp_path, moon):
    path = export_mask(moon.dual, tmp_path / "mask.png")
    assert path.read_bytes()[:4] == b"\x89PNG"


def test_moon_mask_matches_traced_contact(moon):
    dual, mesh = moon.dual, moon.mesh
    t = mesh.boundary.t
    wrong = []
    for i in range(dual.N):
        for j in range(i + 2, dual.N):
            if cyclic_separation(i, j, dual.N) < 2:
                continue
            a, b = mesh.boundary_point(t[i]), mesh.boundary_point(t[j])
            touches = trace_geodesic_oracle(mesh, a, b).touches_boundary()
            if touches != dual.invalid_mask[i, j]:
                wrong.append((i, j))
    assert wrong == []


def test_mask_follows_the_seam(moon):
    vertices, faces, uv = surfaces.arrays("moon", 10)
    loop = moon.mesh.boundary_loop
    k = 7
    # swap the centre with a boundary vertex so the loop starts there
    order = np.arange(len(vertices))
    order[[0, loop[k]]] = order[[loop[k], 0]]
    mesh = build_mesh(vertices[order], np.argsort(order)[faces], uv[order])
    assert mesh.boundary_loop[0] == 0
    dual = build_dual(build_atlas(mesh), moon.dual.eps, moon.dual.eps_d)
    index = (np.arange(dual.N) + k) % dual.N
    rolled = moon.dual.invalid_mask[np.ix_(index, index)]
    assert (dual.invalid_mask == rolled).all()
    assert len(dual.segments) == len(moon.dual.segments)
