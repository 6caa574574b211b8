import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel as Model

from gridshell.services import audit
from gridshell.services.dual import (
    CORE,
    GROWN,
    DualSpace,
    canonicalize,
    cyclic_separation,
)
from gridshell.services.errors import InfeasibleGrid
from gridshell.services.geodesics import (
    DistanceAtlas,
    boundary_distance,
    field_at,
)
from gridshell.services.mesh import SurfacePoint, TriMesh
from gridshell.services.surface import Surface

FAMILIES = ("g", "h")


@dataclass
class Intersection:
    other: str
    point: SurfacePoint
    s: float


@dataclass
class Member:
    family: str
    index: int
    tx: float
    ty: float
    subfamily: int = 0
    flipped: bool = False
    shifted: bool = False
    intersections: list[Intersection] = field(default_factory=list)
    points: np.ndarray | None = None
    uv: np.ndarray | None = None
    faces: np.ndarray | None = None
    bary: np.ndarray | None = None
    arc: np.ndarray | None = None
    distance_sum: np.ndarray | None = field(default=None, repr=False)

    @property
    def id(self) -> str:
        return f"{self.family}{self.index}"

    @property
    def length(self) -> float:
        return float(self.arc[-1]) if self.arc is not None else float("nan")

    def fresh(self) -> "Member":
        return Member(
            self.family,
            self.index,
            self.tx,
            self.ty,
            self.subfamily,
            self.flipped,
            self.shifted,
        )


@dataclass
class Grid:
    g: list[Member]
    h: list[Member]
    rotation: float = 0.0
    version: int = 0

    @property
    def members(self) -> list[Member]:
        return self.g + self.h

    @property
    def n(self) -> int:
        return len(self.g)

    @property
    def m(self) -> int:
        return len(self.h)

    def member(self, id: str) -> Member:
        return next(x for x in self.members if x.id == id)

    def vector(self) -> np.ndarray:
        return np.array([(x.tx, x.ty) for x in self.members]).ravel()

    @classmethod
    def from_vector(cls, t, n: int, m: int, rotation=0.0, version=0):
        pairs = np.asarray(t, float).reshape(n + m, 2)
        families = {"g": [], "h": []}
        for k, (tx, ty) in enumerate(pairs.tolist()):
            tx, ty, flipped = canonicalize(tx, ty)
            family = "g" if k < n else "h"
            families[family].append(Member(family, 0, tx, ty, flipped=flipped))
        grid = cls(families["g"], families["h"], rotation, version)
        _sort_families(grid)
        return grid

    def copy(self) -> "Grid":
        return Grid(
            [x.fresh() for x in self.g],
            [x.fresh() for x in self.h],
            self.rotation,
            self.version,
        )

    @property
    def combinatorics(self) -> str:
        """Subfamily sizes per family plus the members moved by correction."""
        parts = []
        for family in FAMILIES:
            members = getattr(self, family)
            sizes = np.bincount([x.subfamily for x in members]).tolist()
            parts.append(f"{family}:{'+'.join(map(str, sizes))}")
        shifted = ",".join(x.id for x in self.members if x.shifted)
        parts.append(f"shifted:{shifted or '-'}")
        return "|".join(parts)


def _sort_families(grid: Grid):
    for family in FAMILIES:
        members = sorted(getattr(grid, family), key=lambda x: (x.tx, x.ty))
        for k, member in enumerate(members):
            member.index = k
        setattr(grid, family, members)


def slot_parameters(n: int, m: int, rotation=0.0) -> np.ndarray:
    """
    Raw (tx, ty) pairs of the initial scissor grid: 2(n+m) equal slots, g
    running from the first arc to the third, h from the second to the fourth.
    """
    slots = 2 * (n + m)
    delta = 1.0 / slots
    pairs = []
    for k in range(n):
        pairs.append((k, (n + m) + (n - 1 - k)))
    for k in range(m):
        pairs.append((n + k, (2 * n + m) + (m - 1 - k)))
    return (np.array(pairs, float) + 0.5) * delta + rotation


def init_grid(dual: DualSpace, n: int, m: int, rotation=0.0, min_gap=2):
    if n < 2 or m < 2:
        raise InfeasibleGrid(f"Need n, m >= 2, got {n=}, {m=}")
    grid = Grid.from_vector(slot_parameters(n, m, rotation), n, m, rotation)
    return correct_layout(dual, grid, min_gap)


def _exit_direction(dual: DualSpace, label: int, i: int) -> int:
    segment = dual.segments[label]
    step = segment.away(i)
    if step:
        return step
    n = dual.N
    return -1 if (i - segment.i1) % n <= (segment.i2 - i) % n else 1


def _far_enough(index, taken, gap, n) -> bool:
    if not taken:
        return True
    return bool(cyclic_separation(index, np.array(taken), n).min() >= gap)


def correct_layout(dual: DualSpace, grid: Grid, min_gap=2) -> Grid:
    """
    Move members out of invalid dual-space regions along each region's
    fixed directions. Valid members are never moved.
    """
    n = dual.N
    t = dual.mesh.boundary.t
    result = grid.copy()
    anchors = {x.id: (dual.z(x.tx), dual.z(x.ty)) for x in result.members}
    valid = [x for x in result.members if dual.is_valid(x.tx, x.ty)]
    invalid = [x for x in result.members if not dual.is_valid(x.tx, x.ty)]

    taken = []
    for member in valid:
        for index in anchors[member.id]:
            if not _far_enough(index, taken, min_gap, n):
                raise InfeasibleGrid(
                    f"Anchor of {member.id} at boundary vertex {index} is"
                    f" closer than {min_gap} to another anchor"
                )
            taken.append(index)

    for member in invalid:
        ix, iy = anchors[member.id]
        label = int(dual.region_labels[ix, iy])
        if label < 0:
            # only the diagonal: spread the endpoints apart
            sx, sy = -1, 1
        else:
            sx = _exit_direction(dual, label, ix)
            sy = _exit_direction(dual, label, iy)
        found = None
        for total in range(1, n + 1):
            for a in range(total + 1):
                x = (ix + a * sx) % n
                y = (iy + (total - a) * sy) % n
                if x == y or dual.invalid_mask[x, y]:
                    continue
                if cyclic_separation(x, y, n) < min_gap:
                    continue
                if _far_enough(x, taken, min_gap, n) and _far_enough(
                    y, taken, min_gap, n
                ):
                    found = (x, y)
                    break
            if found:
                break
        if found is None:
            raise InfeasibleGrid(f"No valid slot left for member {member.id}")
        taken.extend(found)
        member.tx, member.ty, member.flipped = canonicalize(
            t[found[0]], t[found[1]]
        )
        member.shifted = True
        audit.log(
            "Shifted member out of an invalid region",
            member=member.id,
            frm=(ix, iy),
            to=found,
        )

    _sort_families(result)
    _assign_subfamilies(dual, result)
    if invalid or result.combinatorics != grid.combinatorics:
        result.version = grid.version + 1
    return result


def _assign_subfamilies(dual: DualSpace, grid: Grid):
    blocked = (dual.provenance == CORE) | (dual.provenance == GROWN)
    for family in FAMILIES:
        members = getattr(grid, family)
        subfamily = 0
        for k, member in enumerate(members):
            if k:
                prev = members[k - 1]
                a = np.array([dual.z(prev.tx), dual.z(prev.ty)])
                b = np.array([dual.z(member.tx), dual.z(member.ty)])
                steps = int(np.abs(b - a).max()) + 1
                cells = np.rint(np.linspace(a, b, steps + 1)).astype(int)
                cells %= dual.N
                if blocked[cells[:, 0], cells[:, 1]].any():
                    subfamily += 1
            member.subfamily = subfamily


def member_field(atlas: DistanceAtlas, member: Member) -> np.ndarray:
    """Sum of the endpoint distance fields; minimal along the member."""
    if member.distance_sum is None:
        member.distance_sum = (
            field_at(atlas, member.tx).values
            + field_at(atlas, member.ty).values
        )
    return member.distance_sum


def interleaved(a: Member, b: Member) -> bool:
    """Whether the endpoints of a and b alternate around the boundary."""
    inside = [a.tx < t < a.ty for t in (b.tx, b.ty)]
    return inside[0] != inside[1]


def _refine(mesh: TriMesh, values: np.ndarray, v: int) -> SurfacePoint:
    ring = mesh.adjacency.indices[
        mesh.adjacency.indptr[v] : mesh.adjacency.indptr[v + 1]
    ]
    if len(ring) < 5:
        return mesh.vertex_point(v)
    nodes = np.concatenate([[v], ring])
    du, dv = (mesh.uv[nodes] - mesh.uv[v]).T
    design = np.column_stack(
        [np.ones_like(du), du, dv, du * du, du * dv, dv * dv]
    )
    coef, _, rank, _ = np.linalg.lstsq(design, values[nodes], rcond=None)
    if rank < 6:
        return mesh.vertex_point(v)
    hessian = np.array([[2 * coef[3], coef[4]], [coef[4], 2 * coef[5]]])
    if np.linalg.eigvalsh(hessian).min() <= 0:
        return mesh.vertex_point(v)
    step = np.linalg.solve(hessian, -coef[1:3])
    reach = np.hypot(du, dv).max()
    if np.linalg.norm(step) > reach:
        return mesh.vertex_point(v)
    return mesh.locate_uv(mesh.uv[v] + step)


def intersect_members(
    surface: Surface, a: Member, b: Member
) -> SurfacePoint | None:
    if a.family == b.family or not interleaved(a, b):
        return None
    atlas = surface.atlas
    values = member_field(atlas, a) + member_field(atlas, b)
    v = int(np.argmin(values))
    bound = (
        boundary_distance(atlas, a.tx, a.ty)
        + boundary_distance(atlas, b.tx, b.ty)
        + surface.eps_x
    )
    if values[v] > bound:
        return None
    return _refine(surface.mesh, values, v)


def _point_value(mesh: TriMesh, values: np.ndarray, p: SurfacePoint):
    return float(p.bary @ values[mesh.faces[p.face]])


def _sample(mesh: TriMesh, a: SurfacePoint, b: SurfacePoint, spacing):
    gap = np.linalg.norm(b.position - a.position)
    count = max(int(np.ceil(gap / spacing)), 1)
    return [
        mesh.locate_uv((1 - w) * a.uv + w * b.uv)
        for w in np.arange(1, count) / count
    ]


def reconstruct_member(surface: Surface, member: Member) -> Member:
    """Chain endpoints and ordered intersections into a dense polyline."""
    mesh = surface.mesh
    start = mesh.boundary_point(member.tx)
    end = mesh.boundary_point(member.ty)
    from_start = field_at(surface.atlas, member.tx).values
    keyed = []
    for crossing in member.intersections:
        s = _point_value(mesh, from_start, crossing.point)
        tie = np.linalg.norm(crossing.point.uv - start.uv)
        keyed.append((s, tie, crossing))
    keyed.sort(key=lambda x: (x[0], x[1]))
    for (s0, _, c0), (s1, _, c1) in zip(keyed, keyed[1:]):
        if s1 - s0 <= 1e-9 * max(s1, 1.0):
            audit.log(
                "OrderingConflict",
                member=member.id,
                first=c0.other,
                second=c1.other,
                level=logging.WARNING,
            )

    anchors = [start] + [c.point for _, _, c in keyed] + [end]
    samples, marks = [start], []
    for k, (a, b) in enumerate(zip(anchors, anchors[1:])):
        samples.extend(_sample(mesh, a, b, surface.spacing))
        samples.append(b)
        if k < len(keyed):
            marks.append(len(samples) - 1)

    member.points = np.array([p.position for p in samples])
    member.uv = np.array([p.uv for p in samples])
    member.faces = np.array([p.face for p in samples])
    member.bary = np.array([p.bary for p in samples])
    steps = np.linalg.norm(np.diff(member.points, axis=0), axis=1)
    member.arc = np.concatenate([[0.0], np.cumsum(steps)])
    member.intersections = [
        Intersection(c.other, c.point, float(member.arc[k]))
        for (_, _, c), k in zip(keyed, marks)
    ]
    return member


def assemble(surface: Surface, grid: Grid) -> Grid:
    """Intersect every g member with every h member, then rebuild members."""
    for member in grid.members:
        member.intersections = []
    for a in grid.g:
        for b in grid.h:
            point = intersect_members(surface, a, b)
            if point is None:
                continue
            a.intersections.append(Intersection(b.id, point, 0.0))
            b.intersections.append(Intersection(a.id, point, 0.0))
    for member in grid.members:
        reconstruct_member(surface, member)
    return grid


def _segments_cross(p, q) -> bool:
    """Whether two 2D polylines cross, ignoring shared endpoints."""
    for a0, a1 in zip(p, p[1:]):
        for b0, b1 in zip(q, q[1:]):
            d = np.cross(a1 - a0, b1 - b0)
            if abs(d) < 1e-15:
                continue
            s = np.cross(b0 - a0, b1 - b0) / d
            u = np.cross(b0 - a0, a1 - a0) / d
            if 1e-9 < s < 1 - 1e-9 and 1e-9 < u < 1 - 1e-9:
                return True
    return False


def audit_grid(surface: Surface, grid: Grid, min_gap=None) -> list[str]:
    """Every grid invariant that does not hold, as readable messages."""
    dual = surface.dual
    min_gap = surface.min_gap if min_gap is None else min_gap
    violations = []
    for member in grid.members:
        if not dual.is_valid(member.tx, member.ty):
            violations.append(f"{member.id} lies in an invalid region")
        if not 0 <= member.tx < member.ty < 1:
            violations.append(f"{member.id} is not canonical")
        if member.arc is not None:
            if (np.diff(member.arc) <= 0).any():
                violations.append(f"{member.id} arc is not increasing")
            s = [c.s for c in member.intersections]
            if (np.diff(s) <= 0).any():
                violations.append(f"{member.id} crossings out of order")
            expected = boundary_distance(surface.atlas, member.tx, member.ty)
            if abs(member.length - expected) > 0.02 * expected:
                violations.append(
                    f"{member.id} length {member.length:.6g} deviates from"
                    f" the geodesic distance {expected:.6g}"
                )
        for crossing in member.intersections:
            other = grid.member(crossing.other)
            if other.family == member.family:
                violations.append(f"{member.id} crosses its own family")

    anchors = [dual.z(t) for x in grid.members for t in (x.tx, x.ty)]
    for k, index in enumerate(anchors):
        rest = anchors[:k] + anchors[k + 1 :]
        if not _far_enough(index, rest, min_gap, dual.N):
            violations.append(f"anchor {index} violates the minimum gap")
            break

    for family in FAMILIES:
        members = getattr(grid, family)
        if any(a.tx >= b.tx for a, b in zip(members, members[1:])):
            violations.append(f"family {family} is not ordered by t_x")
        for a, b in zip(members, members[1:]):
            if a.uv is None or a.subfamily != b.subfamily:
                continue
            if _segments_cross(a.uv, b.uv):
                violations.append(f"consecutive {a.id} and {b.id} intersect")
    return violations


class CrossingModel(Model):
    other: str
    s: float
    uv: list[float]
    position: list[float]


class MemberModel(Model):
    id: str
    family: str
    subfamily: int
    tx: float
    ty: float
    flipped: bool
    shifted: bool
    length: float
    uv: list[list[float]]
    points: list[list[float]]
    intersections: list[CrossingModel]


class GridModel(Model):
    version: int
    rotation: float
    combinatorics: str
    n: int
    m: int
    members: list[MemberModel]


def grid_model(grid: Grid) -> GridModel:
    return GridModel(
        version=grid.version,
        rotation=grid.rotation,
        combinatorics=grid.combinatorics,
        n=grid.n,
        m=grid.m,
        members=[
            MemberModel(
                id=x.id,
                family=x.family,
                subfamily=x.subfamily,
                tx=x.tx,
                ty=x.ty,
                flipped=x.flipped,
                shifted=x.shifted,
                length=x.length,
                uv=x.uv.tolist(),
                points=x.points.tolist(),
                intersections=[
                    CrossingModel(
                        other=c.other,
                        s=c.s,
                        uv=c.point.uv.tolist(),
                        position=c.point.position.tolist(),
                    )
                    for c in x.intersections
                ],
            )
            for x in grid.members
        ],
    )


def grid_from_model(surface: Surface, model: GridModel) -> Grid:
    """Rebuild a grid from its exported combinatorics and anchors."""
    members = {"g": [], "h": []}
    for x in model.members:
        member = Member(
            x.family,
            int(x.id[1:]),
            x.tx,
            x.ty,
            x.subfamily,
            x.flipped,
            x.shifted,
        )
        members[x.family].append(member)
    grid = Grid(members["g"], members["h"], model.rotation, model.version)
    return assemble(surface, grid)
