import functools
import heapq
import logging
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from gridshell import VAR_DIR
from gridshell.parallel import parallel_map
from gridshell.services import audit
from gridshell.services.errors import DisconnectedMesh, NoPath
from gridshell.services.mesh import SurfacePoint, TriMesh

ATLAS_MAGIC = b"GDAT"
ATLAS_VERSION = 1
ATLAS_HEADER = struct.Struct("<4sIIId")
# Slack on the unfolded ray crossing, relative to the edge length
CROSSING_SLACK = 1e-6
# Relative distance under which two candidate labels count as equal
TIE = 1e-9
# A path bent around an interior vertex is rerouted when the far side of
# the vertex leaves less than a straight angle by more than this
BEND_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DistanceField:
    source: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class InterpolatedField:
    t: float
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class DistanceAtlas:
    mesh: TriMesh
    fields: np.ndarray
    D: np.ndarray
    B: np.ndarray
    asymmetry: float = 0.0

    @property
    def N(self) -> int:
        return len(self.D)

    def field(self, i: int) -> DistanceField:
        return DistanceField(int(self.mesh.boundary_loop[i]), self.fields[i])


def propagation_table(vertices: np.ndarray, faces: np.ndarray):
    """
    For every vertex w, the unfolding data of each incident triangle
    (w, o, t): o placed on the +x axis at distance L, t at (cx, cy > 0).
    """
    rows = []
    for a, b, c in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1)):
        rows.append(faces[:, [a, b, c]])
    rows.append(faces[:, [2, 1, 0]])
    w, o, t = np.vstack(rows).T
    length = np.linalg.norm(vertices[o] - vertices[w], axis=1)
    wt = np.linalg.norm(vertices[t] - vertices[w], axis=1)
    ot = np.linalg.norm(vertices[t] - vertices[o], axis=1)
    cx = (wt**2 - ot**2 + length**2) / (2 * length)
    cy = np.sqrt(np.maximum(wt**2 - cx**2, 0.0))

    order = np.argsort(w, kind="stable")
    splits = np.searchsorted(w[order], np.arange(1, len(vertices)))
    columns = [x[order].tolist() for x in (o, t, length, cx, cy, wt)]
    entries = list(zip(*columns))
    table, start = [], 0
    for stop in list(splits) + [len(entries)]:
        table.append(entries[start:stop])
        start = stop
    return table


def propagate(table, source: int) -> np.ndarray:
    """
    Label-correcting fast marching. Each vertex keeps its distance, the
    pseudo-source it is seen from in a straight unfolded line, and that
    pseudo-source's own distance.
    """
    n = len(table)
    inf = math.inf
    dist = [inf] * n
    pseudo = [-1] * n
    offset = [0.0] * n
    dist[source] = 0.0
    pseudo[source] = source
    heap = [(0.0, source)]
    while heap:
        dw, w = heapq.heappop(heap)
        if dw > dist[w]:
            continue
        sw, ow = pseudo[w], offset[w]
        ra = dw - ow
        for o, t, length, cx, cy, wt in table[w]:
            best, best_pseudo, best_offset = dw + wt, w, dw
            do = dist[o]
            if do < inf and pseudo[o] == sw and ra > 0:
                rb = do - ow
                x = (ra * ra - rb * rb + length * length) / (2 * length)
                h2 = ra * ra - x * x
                if h2 >= -1e-12 * length * length:
                    y = -math.sqrt(max(h2, 0.0))
                    cross = x + (cx - x) * (-y) / (cy - y)
                    slack = CROSSING_SLACK * length
                    if -slack <= cross <= length + slack:
                        unfolded = ow + math.hypot(cx - x, cy - y)
                        # on a tie keep the unfolded label
                        if unfolded <= best * (1 + TIE):
                            best, best_pseudo, best_offset = unfolded, sw, ow
            current = dist[t]
            if current == inf:
                improves = True
            else:
                tie = TIE * max(current, 1.0)
                improves = best < current - tie or (
                    best <= current + tie and best_offset < offset[t] - tie
                )
            if improves:
                dist[t] = min(best, current)
                pseudo[t] = best_pseudo
                offset[t] = best_offset
                heapq.heappush(heap, (dist[t], t))
    return np.array(dist)


def _setup(payload):
    vertices, faces = payload
    return propagation_table(vertices, faces)


def _field_task(table, source):
    return propagate(table, source)


def compute_field(mesh: TriMesh, source: int) -> DistanceField:
    table = _table(mesh)
    values = propagate(table, source)
    if not np.isfinite(values).all():
        raise DisconnectedMesh(
            f"{int((~np.isfinite(values)).sum())} vertices unreachable"
            f" from {source}"
        )
    return DistanceField(source, values)


@functools.lru_cache(maxsize=4)
def _table(mesh: TriMesh):
    return propagation_table(mesh.vertices, mesh.faces)


def boundary_arc_matrix(mesh: TriMesh) -> np.ndarray:
    boundary = mesh.boundary
    cumulative = boundary.cumulative_arclength
    forward = (cumulative[None, :] - cumulative[:, None]) % (
        boundary.total_length
    )
    return np.minimum(forward, boundary.total_length - forward)


def build_atlas(mesh: TriMesh, workers=1, cache=False) -> DistanceAtlas:
    path = atlas_path(mesh)
    if cache and path.is_file():
        try:
            atlas = load_atlas(mesh, path)
            logging.info(f"Reusing cached distance atlas `{path.name}`")
            return atlas
        except ValueError as e:
            audit.log(
                "Ignoring stale atlas cache",
                path=str(path),
                reason=str(e),
                level=logging.WARNING,
            )

    loop = mesh.boundary_loop
    logging.info(f"Computing {len(loop)} distance fields ({workers=})")
    fields = np.array(
        parallel_map(
            _field_task,
            loop.tolist(),
            _setup,
            (mesh.vertices, mesh.faces),
            workers=workers,
        )
    )
    unreachable = ~np.isfinite(fields)
    if unreachable.any():
        raise DisconnectedMesh(
            f"{int(unreachable.any(axis=0).sum())} vertices unreachable"
            " from the boundary"
        )

    raw = fields[:, loop]
    asymmetry = float(np.abs(raw - raw.T).max())
    D = (raw + raw.T) / 2
    np.fill_diagonal(D, 0.0)
    atlas = DistanceAtlas(mesh, fields, D, boundary_arc_matrix(mesh), asymmetry)
    logging.info(f"Distance map asymmetry before averaging: {asymmetry:.3g}")
    if cache:
        save_atlas(atlas, path)
    return atlas


def atlas_path(mesh: TriMesh) -> Path:
    return VAR_DIR / "atlas" / f"{mesh.content_hash}.atlas"


def save_atlas(atlas: DistanceAtlas, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ATLAS_HEADER.pack(
        ATLAS_MAGIC,
        ATLAS_VERSION,
        atlas.N,
        len(atlas.mesh.vertices),
        atlas.asymmetry,
    )
    with path.open("wb") as f:
        f.write(header)
        for array in (atlas.D, atlas.B, atlas.fields):
            f.write(np.ascontiguousarray(array, "<f8").tobytes())
    return path


def load_atlas(mesh: TriMesh, path) -> DistanceAtlas:
    raw = Path(path).read_bytes()
    if len(raw) < ATLAS_HEADER.size:
        raise ValueError("Truncated atlas header")
    magic, version, n, n_vertices, asymmetry = ATLAS_HEADER.unpack_from(raw)
    if magic != ATLAS_MAGIC or version != ATLAS_VERSION:
        raise ValueError(f"Not a version {ATLAS_VERSION} atlas")
    if n != mesh.boundary.N or n_vertices != len(mesh.vertices):
        raise ValueError("Atlas does not match the mesh")
    body = np.frombuffer(raw, "<f8", offset=ATLAS_HEADER.size)
    if len(body) != 2 * n * n + n * n_vertices:
        raise ValueError("Truncated atlas body")
    D = body[: n * n].reshape(n, n).copy()
    B = body[n * n : 2 * n * n].reshape(n, n).copy()
    fields = body[2 * n * n :].reshape(n, n_vertices).copy()
    return DistanceAtlas(mesh, fields, D, B, asymmetry)


def _bracket(atlas: DistanceAtlas, t: float):
    """Bracketing loop positions and weight, snapped onto exact vertices."""
    k, w = atlas.mesh.boundary.locate(t)
    if w <= 1e-12:
        return k, k, 0.0
    if w >= 1 - 1e-12:
        k = (k + 1) % atlas.N
        return k, k, 0.0
    return k, (k + 1) % atlas.N, w


def field_at(atlas: DistanceAtlas, t: float) -> InterpolatedField:
    i, j, w = _bracket(atlas, t)
    if w == 0.0:
        return InterpolatedField(t, atlas.fields[i])
    return InterpolatedField(
        t, (1 - w) * atlas.fields[i] + w * atlas.fields[j]
    )


def boundary_distance(atlas: DistanceAtlas, tx: float, ty: float) -> float:
    """Geodesic distance between two boundary parameters, from the fields."""
    field = field_at(atlas, tx).values
    loop = atlas.mesh.boundary_loop
    i, j, w = _bracket(atlas, ty)
    return float((1 - w) * field[loop[i]] + w * field[loop[j]])


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    mesh: TriMesh
    points: np.ndarray
    # (p, q, tau) per interior point: the point is p + tau (q - p)
    portals: list
    ends: tuple

    @cached_property
    def length(self) -> float:
        return float(
            np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum()
        )

    def touched_vertices(self, tol=1e-9) -> set[int]:
        touched = set()
        for p, q, tau in self.portals:
            if tau <= tol:
                touched.add(p)
            elif tau >= 1 - tol:
                touched.add(q)
        return touched - {v for v in self.ends if v is not None}

    def touches_boundary(self, tol=1e-9) -> bool:
        """Whether the path runs through a boundary vertex between its ends."""
        return any(
            self.mesh.is_boundary[v] for v in self.touched_vertices(tol)
        )


@functools.lru_cache(maxsize=4)
def _steiner_graph(mesh: TriMesh):
    n = len(mesh.vertices)
    edge_index = {tuple(e): n + k for k, e in enumerate(mesh.edges.tolist())}
    points = np.vstack(
        [mesh.vertices, mesh.vertices[mesh.edges].mean(axis=1)]
    )
    pairs = []
    for face in mesh.faces.tolist():
        nodes = list(face)
        for k in range(3):
            a, b = face[k], face[(k + 1) % 3]
            nodes.append(edge_index[min(a, b), max(a, b)])
        for x in range(6):
            for y in range(x + 1, 6):
                pairs.append((min(nodes[x], nodes[y]), max(nodes[x], nodes[y])))
    pairs = np.unique(np.array(pairs), axis=0)
    return points, pairs, edge_index


def _face_nodes(mesh, edge_index, face):
    corners = mesh.faces[face].tolist()
    nodes = list(corners)
    for k in range(3):
        a, b = corners[k], corners[(k + 1) % 3]
        nodes.append(edge_index[min(a, b), max(a, b)])
    return nodes


def _node(mesh: TriMesh, p: SurfacePoint):
    """Classify a surface point as a vertex, an edge point or a face point."""
    corners = mesh.faces[p.face]
    support = corners[p.bary > 1e-12]
    if len(support) == 1:
        return ("vertex", int(support[0]))
    if len(support) == 2:
        a, b = sorted(support.tolist())
        return ("edge", (a, b), p)
    return ("face", p.face, p)


def _node_faces(mesh, node) -> list[int]:
    if node[0] == "vertex":
        return mesh.vertex_faces[node[1]].tolist()
    if node[0] == "edge":
        return mesh.edge_faces[node[1]]
    return [node[1]]


def _graph_path(mesh: TriMesh, a: SurfacePoint, b: SurfacePoint):
    points, pairs, edge_index = _steiner_graph(mesh)
    n = len(points)
    extra, ends = [], []
    for k, p in enumerate((a, b)):
        node = _node(mesh, p)
        if node[0] == "vertex":
            ends.append(node[1])
            continue
        ends.append(n + k)
        for other in _face_nodes(mesh, edge_index, p.face):
            extra.append((other, n + k))
    if _node(mesh, a)[0] != "vertex" and _node(mesh, b)[0] != "vertex":
        if a.face == b.face:
            extra.append((n, n + 1))
    all_points = np.vstack([points, a.position, b.position])
    all_pairs = np.vstack([pairs, np.array(extra, int).reshape(-1, 2)])
    weights = np.linalg.norm(
        all_points[all_pairs[:, 0]] - all_points[all_pairs[:, 1]], axis=1
    )
    # csgraph treats explicit zeros as missing edges
    weights = np.maximum(weights, 1e-300)
    graph = sp.coo_matrix(
        (weights, (all_pairs[:, 0], all_pairs[:, 1])), shape=(n + 2, n + 2)
    ).tocsr()
    dist, predecessors = csgraph.dijkstra(
        graph, directed=False, indices=ends[0], return_predecessors=True
    )
    if not np.isfinite(dist[ends[1]]):
        raise NoPath("Endpoints are not connected")

    chain = [ends[1]]
    while chain[-1] != ends[0]:
        chain.append(int(predecessors[chain[-1]]))
    chain.reverse()

    inverse = {v: k for k, v in edge_index.items()}
    nodes = []
    for index in chain:
        if index == n or index == n + 1:
            nodes.append(_node(mesh, a if index == n else b))
        elif index < len(mesh.vertices):
            nodes.append(("vertex", index))
        else:
            nodes.append(("edge", inverse[index], None))
    return nodes


def _adjacent(mesh, f, g) -> bool:
    return len(set(mesh.faces[f].tolist()) & set(mesh.faces[g].tolist())) == 2


def _fan_between(mesh: TriMesh, v: int, f: int, g: int) -> list[int]:
    """Faces strictly between f and g around v, on the narrower side."""
    faces, _, closed = mesh.fan(v)
    i, j = faces.index(f), faces.index(g)
    forward = [faces[k % len(faces)] for k in range(i + 1, j + (
        len(faces) if j < i else 0
    ))]
    backward = [faces[k % len(faces)] for k in range(i - 1, j - (
        len(faces) if j > i else 0
    ), -1)]
    if not closed:
        return forward if i < j else backward

    def angle(side):
        return sum(mesh.corner_angle(h, v) for h in side)

    return forward if angle(forward) <= angle(backward) else backward


def _strip(mesh: TriMesh, nodes: list) -> list[int]:
    deduped = [nodes[0]]
    for node in nodes[1:]:
        if node[:2] != deduped[-1][:2]:
            deduped.append(node)
    nodes = deduped
    if len(nodes) == 1:
        return [_node_faces(mesh, nodes[0])[0]]

    segment_faces = []
    for x, y in zip(nodes, nodes[1:]):
        common = sorted(set(_node_faces(mesh, x)) & set(_node_faces(mesh, y)))
        if not common:
            raise NoPath("Path steps between faces that do not touch")
        previous = segment_faces[-1] if segment_faces else None
        segment_faces.append(previous if previous in common else common[0])

    strip = [segment_faces[0]]
    for node, g in zip(nodes[1:], segment_faces[1:]):
        f = strip[-1]
        if f == g:
            continue
        if not _adjacent(mesh, f, g):
            shared = set(mesh.faces[f].tolist()) & set(mesh.faces[g].tolist())
            v = node[1] if node[0] == "vertex" else min(shared)
            strip.extend(_fan_between(mesh, v, f, g))
        strip.append(g)

    return _cleanup(strip)


def _unfold(mesh: TriMesh, strip: list[int]):
    """Isometric 2D coordinates of every strip face, chained across edges."""
    frames = []
    a, b, c = mesh.faces[strip[0]].tolist()
    pa, pb, pc = mesh.vertices[[a, b, c]]
    ab = np.linalg.norm(pb - pa)
    x = (pc - pa) @ (pb - pa) / ab
    y = math.sqrt(max(np.linalg.norm(pc - pa) ** 2 - x * x, 0.0))
    frames.append({a: np.zeros(2), b: np.array([ab, 0.0]), c: np.array([x, y])})
    for f in strip[1:]:
        prev = frames[-1]
        corners = mesh.faces[f].tolist()
        k = next(i for i, v in enumerate(corners) if v not in prev)
        r = corners[k]
        # In f's own counterclockwise order the shared edge runs q -> p
        q, p = corners[(k + 1) % 3], corners[(k + 2) % 3]
        p2, q2 = prev[p], prev[q]
        length = np.linalg.norm(q2 - p2)
        pr = np.linalg.norm(mesh.vertices[r] - mesh.vertices[p])
        qr = np.linalg.norm(mesh.vertices[r] - mesh.vertices[q])
        x = (pr**2 - qr**2 + length**2) / (2 * length)
        y = math.sqrt(max(pr**2 - x * x, 0.0))
        e = (q2 - p2) / length
        left = np.array([-e[1], e[0]])
        frames.append({p: p2, q: q2, r: p2 + x * e - y * left})
    return frames


def _portals(mesh: TriMesh, strip: list[int]):
    """Shared edges as (right, left) vertex pairs when leaving each face."""
    portals = []
    for f, g in zip(strip, strip[1:]):
        corners = mesh.faces[f].tolist()
        other = set(mesh.faces[g].tolist())
        for k in range(3):
            p, q = corners[k], corners[(k + 1) % 3]
            if p in other and q in other:
                portals.append((p, q))
                break
    return portals


def _cross(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def _pull(start, end, portals) -> tuple[list, list]:
    """
    String pulling through a funnel of (right, left) 2D portals. Returns the
    polyline and, for each of its inner corners, the portal index and side
    (0 right, 1 left) it was taken from.
    """
    portals = portals + [(end, end)]
    path, corners = [start], []
    apex = left = right = start
    apex_index = left_index = right_index = -1
    i = 0
    while i < len(portals):
        new_right, new_left = portals[i]
        if _cross(right - apex, new_right - apex) >= 0:
            if right_index == apex_index or (
                _cross(new_right - apex, left - apex) > 0
            ):
                right, right_index = new_right, i
            else:
                path.append(left)
                corners.append((left_index, 1))
                apex, apex_index = left, left_index
                right, right_index = apex, apex_index
                i = apex_index + 1
                continue
        if _cross(left - apex, new_left - apex) <= 0:
            if left_index == apex_index or (
                _cross(right - apex, new_left - apex) > 0
            ):
                left, left_index = new_left, i
            else:
                path.append(right)
                corners.append((right_index, 0))
                apex, apex_index = right, right_index
                left, left_index = apex, apex_index
                i = apex_index + 1
                continue
        i += 1
    path.append(end)
    return path, corners


def _crossings(polyline, portal_points) -> list[float]:
    taus, k = [], 0
    for p2, q2 in portal_points:
        edge = q2 - p2
        tau = None
        for s in range(k, len(polyline) - 1):
            s0, s1 = polyline[s], polyline[s + 1]
            denom = _cross(s1 - s0, edge)
            if abs(denom) < 1e-300:
                continue
            along = _cross(p2 - s0, edge) / denom
            u = _cross(p2 - s0, s1 - s0) / denom
            if -1e-9 <= along <= 1 + 1e-9 and -1e-9 <= u <= 1 + 1e-9:
                tau, k = min(max(u, 0.0), 1.0), s
                break
        if tau is None:
            nearest = min(
                polyline, key=lambda x: np.linalg.norm(x - (p2 + q2) / 2)
            )
            tau = float(
                np.clip((nearest - p2) @ edge / (edge @ edge), 0.0, 1.0)
            )
        taus.append(float(tau))
    return taus


def _local(frame, mesh, p: SurfacePoint):
    corners = mesh.faces[p.face]
    return sum(
        w * frame[v] for v, w in zip(corners.tolist(), p.bary) if w > 1e-12
    )


@dataclass(frozen=True, eq=False)
class _Pulled:
    strip: list
    portals: list
    polyline: list
    # (portal index, vertex) per inner corner of the polyline
    corners: list


def _straighten(mesh, a, b, strip) -> _Pulled:
    frames = _unfold(mesh, strip)
    portals = _portals(mesh, strip)
    portal_points = [
        (frames[k][p], frames[k][q]) for k, (p, q) in enumerate(portals)
    ]
    start = _local(frames[0], mesh, a)
    end = _local(frames[-1], mesh, b)
    polyline, corners = _pull(start, end, portal_points)
    return _Pulled(
        strip,
        portals,
        polyline,
        [(k, portals[k][side]) for k, side in corners],
    )


def _total_angle(mesh: TriMesh, v: int) -> float:
    faces, _, _ = mesh.fan(v)
    return sum(mesh.corner_angle(f, v) for f in faces)


def _far_side(mesh: TriMesh, v: int, run: list[int]) -> list[int] | None:
    """The faces around v from run[0] to run[-1] the other way round."""
    faces, _, closed = mesh.fan(v)
    if not closed or run[0] == run[-1]:
        return None
    n = len(faces)
    i, j = faces.index(run[0]), faces.index(run[-1])
    step = -1 if faces[(i + 1) % n] == run[1] else 1
    side, k = [run[0]], i
    while k != j:
        k = (k + step) % n
        side.append(faces[k])
    return side


def _reroute(mesh: TriMesh, pulled: _Pulled) -> list[int] | None:
    """
    A strip passing the first interior vertex the path bends around on its
    far side, when that side is shorter. None when the path is taut.
    """
    strip, points = pulled.strip, pulled.polyline
    for c, (k, v) in enumerate(pulled.corners, start=1):
        if mesh.is_boundary[v]:
            continue
        before, after = points[c - 1] - points[c], points[c + 1] - points[c]
        cos = before @ after / (
            np.linalg.norm(before) * np.linalg.norm(after)
        )
        wedge = math.acos(min(max(float(cos), -1.0), 1.0))
        far = _total_angle(mesh, v) - (2 * math.pi - wedge)
        if far >= math.pi - BEND_TOL:
            continue
        i, j = k, k + 1
        while i > 0 and v in mesh.faces[strip[i - 1]]:
            i -= 1
        while j + 1 < len(strip) and v in mesh.faces[strip[j + 1]]:
            j += 1
        side = _far_side(mesh, v, strip[i : j + 1])
        if side is None:
            continue
        return _cleanup(strip[:i] + side + strip[j + 1 :])
    return None


def _cleanup(strip: list[int]) -> list[int]:
    """Drop repeated faces and immediate backtracks from a strip."""
    changed = True
    while changed:
        changed = False
        for k in range(len(strip) - 1):
            if strip[k] == strip[k + 1]:
                del strip[k + 1]
                changed = True
                break
            if k + 2 < len(strip) and strip[k] == strip[k + 2]:
                del strip[k + 1 : k + 3]
                changed = True
                break
    return strip


def trace_geodesic_oracle(
    mesh: TriMesh, a: SurfacePoint, b: SurfacePoint, max_rounds=500
) -> GeodesicPath:
    """
    Shortest path on the Steiner-refined edge graph, string pulled through
    the unfolded face strip. Whenever the pulled path bends around an
    interior vertex with less than a straight angle on its other side, the
    strip is moved over to that side and pulled again.
    """
    if np.linalg.norm(a.position - b.position) <= 1e-12 * max(
        mesh.mean_edge_length, 1.0
    ):
        raise NoPath("Endpoints coincide")
    strip = _strip(mesh, _graph_path(mesh, a, b))
    pulled = _straighten(mesh, a, b, strip)
    for _ in range(max_rounds):
        strip = _reroute(mesh, pulled)
        if strip is None:
            break
        pulled = _straighten(mesh, a, b, strip)
    else:
        audit.log(
            "Traced geodesic did not settle",
            rounds=max_rounds,
            level=logging.WARNING,
        )

    frames = _unfold(mesh, pulled.strip)
    portal_points = [
        (frames[k][p], frames[k][q]) for k, (p, q) in enumerate(pulled.portals)
    ]
    taus = _crossings(pulled.polyline, portal_points)
    crossings = [(p, q, tau) for (p, q), tau in zip(pulled.portals, taus)]
    points = [a.position]
    for p, q, tau in crossings:
        points.append((1 - tau) * mesh.vertices[p] + tau * mesh.vertices[q])
    points.append(b.position)
    ends = (_node(mesh, a), _node(mesh, b))
    return GeodesicPath(
        mesh,
        np.array(points),
        crossings,
        tuple(n[1] if n[0] == "vertex" else None for n in ends),
    )
