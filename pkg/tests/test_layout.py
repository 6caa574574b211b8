import numpy as np
import pytest

from gridshell.services.errors import InfeasibleGrid
from gridshell.services.layout import (
    Grid,
    Member,
    assemble,
    audit_grid,
    correct_layout,
    grid_from_model,
    grid_model,
    init_grid,
    interleaved,
    slot_parameters,
)


def test_slot_parameters():
    t = slot_parameters(2, 2)
    expected = np.array([[0, 5], [1, 4], [2, 7], [3, 6]]) + 0.5
    assert np.allclose(t, expected / 8)
    assert np.allclose(slot_parameters(2, 2, 0.25), t + 0.25)


def test_from_vector_canonicalizes():
    grid = Grid.from_vector([0.6, 0.1, 0.2, 0.7, 0.3, 0.8, 0.4, 0.9], 2, 2)
    first, second = grid.g
    assert (first.tx, first.ty, first.flipped) == (0.1, 0.6, True)
    assert (second.tx, second.ty, second.flipped) == (0.2, 0.7, False)
    assert [x.id for x in grid.members] == ["g0", "g1", "h0", "h1"]


def test_interleaved():
    a = Member("g", 0, 0.1, 0.5)
    assert interleaved(a, Member("h", 0, 0.3, 0.7))
    assert not interleaved(a, Member("h", 1, 0.2, 0.4))
    assert not interleaved(a, Member("h", 2, 0.6, 0.9))


def test_init_grid_on_convex_disk(disk):
    grid = init_grid(disk.dual, 3, 3)
    assert grid.version == 0
    assert grid.combinatorics == "g:3|h:3|shifted:-"
    assert all(0 <= x.tx < x.ty < 1 for x in grid.members)


def test_init_grid_needs_two_per_family(disk):
    with pytest.raises(InfeasibleGrid):
        init_grid(disk.dual, 1, 3)


def test_assembled_grid(disk, disk_grid):
    for member in disk_grid.members:
        assert len(member.intersections) == 3
        others = {c.other[0] for c in member.intersections}
        assert others == {"h" if member.family == "g" else "g"}
        s = [c.s for c in member.intersections]
        assert s == sorted(s)
        assert 0 < s[0] and s[-1] < member.length
    assert audit_grid(disk, disk_grid) == []


def test_crossings_agree(disk_grid):
    g0 = disk_grid.member("g0")
    for crossing in g0.intersections:
        other = disk_grid.member(crossing.other)
        back = next(c for c in other.intersections if c.other == "g0")
        assert np.allclose(crossing.point.position, back.point.position)


def test_members_follow_straight_lines(disk, disk_grid):
    for member in disk_grid.members:
        chord = np.linalg.norm(member.points[-1] - member.points[0])
        assert member.length == pytest.approx(chord, rel=0.01)
        assert (np.diff(member.arc) > 0).all()


def test_members_do_not_share_close_anchors(disk):
    grid = Grid.from_vector(
        [0.0, 0.5, 0.01, 0.6, 0.25, 0.75, 0.3, 0.8], 2, 2
    )
    with pytest.raises(InfeasibleGrid, match="closer than"):
        correct_layout(disk.dual, grid, 2)


def test_audit_flags_broken_grid(disk, disk_grid):
    member = disk_grid.member("h1")
    member.arc = member.arc * 1.5
    member.intersections.reverse()
    violations = audit_grid(disk, disk_grid)
    assert any("h1 length" in x for x in violations)
    assert any("h1 crossings out of order" in x for x in violations)


def test_correction_leaves_bay(moon):
    grid = init_grid(moon.dual, 3, 3)
    for member in grid.members:
        assert moon.dual.is_valid(member.tx, member.ty)
    assembled = assemble(moon, grid)
    assert not [x for x in audit_grid(moon, assembled) if "invalid" in x]


def test_correction_moves_only_invalid_members(moon):
    dual = moon.dual
    t = moon.mesh.boundary.t
    segment = dual.segments[0]
    vector = slot_parameters(2, 2, 0.1)
    vector[0] = (t[segment.i1], t[segment.i2])
    grid = Grid.from_vector(vector.ravel(), 2, 2)
    valid = {(x.tx, x.ty) for x in grid.members if dual.is_valid(x.tx, x.ty)}
    assert len(valid) < len(grid.members)

    corrected = correct_layout(dual, grid, 2)
    assert corrected.version == grid.version + 1
    for member in corrected.members:
        assert dual.is_valid(member.tx, member.ty)
        assert member.shifted != ((member.tx, member.ty) in valid)


def test_model_rebuild(disk, disk_grid):
    model = grid_model(disk_grid)
    rebuilt = grid_from_model(disk, model)
    assert rebuilt.combinatorics == disk_grid.combinatorics
    for a, b in zip(disk_grid.members, rebuilt.members):
        assert a.id == b.id
        assert b.length == pytest.approx(a.length)
        assert len(b.intersections) == len(a.intersections)
