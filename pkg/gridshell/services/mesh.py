import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import matplotlib.tri as mtri
import meshio
import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve
from scipy.spatial import cKDTree

from gridshell.services import audit
from gridshell.services.errors import (
    DegenerateFace,
    MeshError,
    NonManifold,
    NotADisk,
    UVFlip,
)

# Relative to the squared bounding box diagonal
AREA_EPS = 1e-14
WELD_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    face: int
    bary: np.ndarray
    uv: np.ndarray
    position: np.ndarray

    @property
    def vertex(self) -> int | None:
        """Corner index if the point sits on a vertex, else None."""
        k = int(np.argmax(self.bary))
        return k if self.bary[k] >= 1 - 1e-12 else None


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    vertex_indices: np.ndarray
    cumulative_arclength: np.ndarray
    total_length: float

    @property
    def N(self) -> int:
        return len(self.vertex_indices)

    @cached_property
    def t(self) -> np.ndarray:
        return self.cumulative_arclength / self.total_length

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        ends = np.append(self.cumulative_arclength[1:], self.total_length)
        return ends - self.cumulative_arclength

    def locate(self, t: float) -> tuple[int, float]:
        """Loop position k and weight w with p(t) = (1 - w) p_k + w p_k+1."""
        s = (t % 1.0) * self.total_length
        k = int(np.searchsorted(self.cumulative_arclength, s, side="right"))
        k = min(max(k - 1, 0), self.N - 1)
        w = (s - self.cumulative_arclength[k]) / self.segment_lengths[k]
        return k, float(min(max(w, 0.0), 1.0))

    def nearest(self, t: float) -> int:
        k, w = self.locate(t)
        return k if w < 0.5 else (k + 1) % self.N

    def arc_distance(self, a: int, b: int) -> float:
        forward = (
            self.cumulative_arclength[b] - self.cumulative_arclength[a]
        ) % self.total_length
        return float(min(forward, self.total_length - forward))


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray
    uv: np.ndarray
    boundary_loop: np.ndarray

    def __getstate__(self):
        # cached queries (the UV trifinder among them) are rebuilt on demand
        names = ("vertices", "faces", "uv", "boundary_loop")
        return {name: self.__dict__[name] for name in names}

    @cached_property
    def edges(self) -> np.ndarray:
        pairs = np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), 1)
        return np.unique(pairs, axis=0)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        a, b = self.edges.T
        return np.linalg.norm(self.vertices[a] - self.vertices[b], axis=1)

    @cached_property
    def mean_edge_length(self) -> float:
        return float(self.edge_lengths.mean())

    @cached_property
    def boundary(self) -> BoundaryCurve:
        loop = self.boundary_loop
        points = self.vertices[loop]
        lengths = np.linalg.norm(np.roll(points, -1, 0) - points, axis=1)
        cumulative = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
        return BoundaryCurve(loop, cumulative, float(lengths.sum()))

    @property
    def mean_boundary_edge(self) -> float:
        return self.boundary.total_length / self.boundary.N

    @cached_property
    def is_boundary(self) -> np.ndarray:
        mask = np.zeros(len(self.vertices), bool)
        mask[self.boundary_loop] = True
        return mask

    @cached_property
    def face_normals(self) -> np.ndarray:
        p = self.vertices[self.faces]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return cross / np.linalg.norm(cross, axis=1)[:, None]

    @cached_property
    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    @cached_property
    def vertex_normals(self) -> np.ndarray:
        weighted = self.face_normals * self.face_areas[:, None]
        normals = np.zeros_like(self.vertices)
        for k in range(3):
            np.add.at(normals, self.faces[:, k], weighted)
        return normals / np.linalg.norm(normals, axis=1)[:, None]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        n = len(self.vertices)
        a, b = self.edges.T
        data = np.ones(2 * len(a))
        return sp.coo_matrix(
            (data, (np.r_[a, b], np.r_[b, a])), shape=(n, n)
        ).tocsr()

    @cached_property
    def vertex_faces(self) -> list[np.ndarray]:
        order = np.argsort(self.faces.ravel(), kind="stable")
        corners = self.faces.ravel()[order]
        splits = np.searchsorted(corners, np.arange(1, len(self.vertices)))
        return np.split(order // 3, splits)

    @cached_property
    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        result = {}
        for f, face in enumerate(self.faces.tolist()):
            for k in range(3):
                a, b = face[k], face[(k + 1) % 3]
                result.setdefault((min(a, b), max(a, b)), []).append(f)
        return result

    @cached_property
    def boundary_faces(self) -> np.ndarray:
        """Face owning each boundary edge (loop[k], loop[k+1])."""
        loop = self.boundary_loop
        return np.array(
            [
                self.edge_faces[(min(a, b), max(a, b))][0]
                for a, b in zip(loop, np.roll(loop, -1))
            ]
        )

    @cached_property
    def _fans(self) -> dict:
        return {}

    def fan(self, v: int) -> tuple[list[int], list[int], bool]:
        """
        Faces around `v` in counterclockwise order, with the spoke vertex
        shared by consecutive faces, and whether the fan closes.
        spokes[j] is the far end of the edge between faces[j] and faces[j+1].
        """
        if v in self._fans:
            return self._fans[v]
        following, before, after = {}, {}, {}
        for f in self.vertex_faces[v].tolist():
            face = self.faces[f].tolist()
            k = face.index(v)
            p, q = face[(k + 1) % 3], face[(k + 2) % 3]
            following[p] = f
            before[f] = p
            after[f] = q
        ends = set(after.values())
        starts = [f for f in after if before[f] not in ends]
        start = starts[0] if starts else min(after)
        faces, spokes = [start], []
        while True:
            q = after[faces[-1]]
            nxt = following.get(q)
            if nxt is None or nxt == start:
                closed = nxt == start
                break
            spokes.append(q)
            faces.append(nxt)
        if closed:
            spokes.append(after[faces[-1]])
        self._fans[v] = (faces, spokes, closed)
        return self._fans[v]

    def corner_angle(self, f: int, v: int) -> float:
        face = self.faces[f].tolist()
        k = face.index(v)
        p = self.vertices[face[k]]
        a = self.vertices[face[(k + 1) % 3]] - p
        b = self.vertices[face[(k + 2) % 3]] - p
        cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        return float(np.arccos(np.clip(cos, -1.0, 1.0)))

    @cached_property
    def trifinder(self):
        triangulation = mtri.Triangulation(
            self.uv[:, 0], self.uv[:, 1], self.faces
        )
        return triangulation.get_trifinder()

    @cached_property
    def _uv_tree(self) -> cKDTree:
        return cKDTree(self.uv[self.faces].mean(axis=1))

    @cached_property
    def content_hash(self) -> str:
        digest = hashlib.sha256()
        for array in (self.vertices, self.faces, self.uv, self.boundary_loop):
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()[:24]

    def point(self, face: int, bary) -> SurfacePoint:
        bary = np.asarray(bary, float)
        corners = self.faces[face]
        return SurfacePoint(
            int(face),
            bary,
            bary @ self.uv[corners],
            bary @ self.vertices[corners],
        )

    def vertex_point(self, v: int) -> SurfacePoint:
        face = int(self.vertex_faces[v][0])
        bary = (self.faces[face] == v).astype(float)
        return self.point(face, bary)

    def boundary_point(self, t: float) -> SurfacePoint:
        k, w = self.boundary.locate(t)
        loop = self.boundary_loop
        a, b = loop[k], loop[(k + 1) % len(loop)]
        face = int(self.boundary_faces[k])
        corners = self.faces[face]
        bary = (1 - w) * (corners == a) + w * (corners == b)
        return self.point(face, bary)

    def locate_uv(self, uv) -> SurfacePoint:
        uv = np.asarray(uv, float)
        face = int(self.trifinder(uv[0], uv[1]))
        if face >= 0:
            bary = _barycentric(self.uv[self.faces[face]], uv)
            bary = np.clip(bary, 0.0, None)
            return self.point(face, bary / bary.sum())
        # Outside the parameter domain: snap to the closest nearby face
        _, candidates = self._uv_tree.query(uv, k=min(8, len(self.faces)))
        best = None
        for face in np.atleast_1d(candidates).tolist():
            bary = _barycentric(self.uv[self.faces[face]], uv)
            clipped = np.clip(bary, 0.0, None)
            clipped /= clipped.sum()
            error = np.linalg.norm(clipped @ self.uv[self.faces[face]] - uv)
            if best is None or error < best[0]:
                best = (error, face, clipped)
        return self.point(best[1], best[2])


def _barycentric(triangle: np.ndarray, point: np.ndarray) -> np.ndarray:
    a, b, c = triangle
    m = np.column_stack([b - a, c - a])
    lb, lc = np.linalg.solve(m, point - a)
    return np.array([1 - lb - lc, lb, lc])


def signed_uv_areas(uv: np.ndarray, faces: np.ndarray) -> np.ndarray:
    p = uv[faces]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _weld(vertices, faces, uv, tol):
    pairs = cKDTree(vertices).query_pairs(tol, output_type="ndarray")
    if not len(pairs):
        return vertices, faces, uv
    n = len(vertices)
    graph = sp.coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    _, labels = csgraph.connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(len(first), int)
    remap[order] = np.arange(len(first))
    keep = first[order]
    audit.log(
        "Welded duplicate vertices",
        merged=n - len(keep),
        tolerance=tol,
        level=logging.WARNING,
    )
    uv = uv[keep] if uv is not None else None
    return vertices[keep], remap[labels][faces], uv


def _compact(vertices, faces, uv):
    used = np.unique(faces)
    if len(used) == len(vertices):
        return vertices, faces, uv
    audit.log(
        "Dropped unreferenced vertices",
        count=len(vertices) - len(used),
        level=logging.WARNING,
    )
    remap = np.full(len(vertices), -1)
    remap[used] = np.arange(len(used))
    uv = uv[used] if uv is not None else None
    return vertices[used], remap[faces], uv


def _boundary_loop(faces: np.ndarray, n_vertices: int) -> np.ndarray:
    half = faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    keys = np.minimum(half[:, 0], half[:, 1]) * n_vertices + np.maximum(
        half[:, 0], half[:, 1]
    )
    _, inverse, counts = np.unique(
        keys, return_inverse=True, return_counts=True
    )
    if counts.max() > 2:
        raise NonManifold(f"{int((counts > 2).sum())} edges shared by >2 faces")
    directed = half[:, 0] * n_vertices + half[:, 1]
    if len(np.unique(directed)) != len(directed):
        raise NonManifold("Faces are not consistently oriented")

    border = half[counts[inverse] == 1]
    if not len(border):
        raise NotADisk("Mesh has no boundary")
    following = {}
    for a, b in border.tolist():
        if a in following:
            raise NonManifold(f"Boundary pinches at vertex {a}")
        following[a] = b

    loops = []
    remaining = set(following)
    while remaining:
        start = min(remaining)
        loop = [start]
        remaining.discard(start)
        v = following[start]
        while v != start:
            loop.append(v)
            remaining.discard(v)
            v = following[v]
        loops.append(loop)
    if len(loops) != 1:
        raise NotADisk(f"Expected one boundary loop, found {len(loops)}")
    n_edges = len(counts)
    euler = n_vertices - n_edges + len(faces)
    if euler != 1:
        raise NotADisk(f"Euler characteristic is {euler}, expected 1")
    return np.array(loops[0])


def lscm(vertices: np.ndarray, faces: np.ndarray, loop: np.ndarray):
    """
    Least squares conformal map with two boundary vertices pinned at their
    3D distance apart.
    """
    n = len(vertices)
    p = vertices[faces]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    x_axis = e1 / np.linalg.norm(e1, axis=1)[:, None]
    normal = np.cross(e1, e2)
    normal /= np.linalg.norm(normal, axis=1)[:, None]
    y_axis = np.cross(normal, x_axis)
    local = np.zeros((len(faces), 3, 2))
    local[:, 1, 0] = np.linalg.norm(e1, axis=1)
    local[:, 2, 0] = np.einsum("ij,ij->i", e2, x_axis)
    local[:, 2, 1] = np.einsum("ij,ij->i", e2, y_axis)
    scale = 1 / np.sqrt(local[:, 1, 0] * local[:, 2, 1])

    rows, cols, vals = [], [], []
    face_rows = np.arange(len(faces))
    for j in range(3):
        delta = local[:, (j + 2) % 3] - local[:, (j + 1) % 3]
        re, im = delta[:, 0] * scale, delta[:, 1] * scale
        u_col, v_col = faces[:, j], faces[:, j] + n
        real_row, imag_row = 2 * face_rows, 2 * face_rows + 1
        rows += [real_row, real_row, imag_row, imag_row]
        cols += [u_col, v_col, u_col, v_col]
        vals += [re, -im, im, re]
    a = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * len(faces), 2 * n),
    ).tocsc()

    pin_a, pin_b = loop[0], loop[len(loop) // 2]
    pinned = np.array([pin_a, pin_b, pin_a + n, pin_b + n])
    distance = np.linalg.norm(vertices[pin_a] - vertices[pin_b])
    pinned_values = np.array([0.0, distance, 0.0, 0.0])
    free = np.setdiff1d(np.arange(2 * n), pinned)
    a_free = a[:, free]
    rhs = -a[:, pinned] @ pinned_values
    solution = spsolve((a_free.T @ a_free).tocsc(), a_free.T @ rhs)

    x = np.empty(2 * n)
    x[free] = solution
    x[pinned] = pinned_values
    return np.column_stack([x[:n], x[n:]])


def build_mesh(vertices, faces, uv=None, weld_tol=None) -> TriMesh:
    vertices = np.asarray(vertices, float)
    faces = np.asarray(faces, np.int64)
    if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
        raise MeshError(f"Bad vertex array shape {vertices.shape}")
    if vertices.shape[1] == 2:
        vertices = np.column_stack([vertices, np.zeros(len(vertices))])
    if faces.ndim != 2 or faces.shape[1] != 3 or not len(faces):
        raise MeshError("Mesh needs at least one triangle")
    uv = None if uv is None else np.asarray(uv, float)[:, :2]

    diagonal = float(np.linalg.norm(np.ptp(vertices, axis=0)))
    if weld_tol is None:
        weld_tol = WELD_EPS * diagonal
    if weld_tol > 0:
        vertices, faces, uv = _weld(vertices, faces, uv, weld_tol)
    repeated = (
        (faces[:, 0] == faces[:, 1])
        | (faces[:, 1] == faces[:, 2])
        | (faces[:, 2] == faces[:, 0])
    )
    if repeated.any():
        raise DegenerateFace(
            f"Face {int(np.argmax(repeated))} repeats a vertex"
        )
    vertices, faces, uv = _compact(vertices, faces, uv)

    p = vertices[faces]
    areas = 0.5 * np.linalg.norm(
        np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
    )
    if (areas <= AREA_EPS * diagonal**2).any():
        raise DegenerateFace(f"Face {int(np.argmin(areas))} has zero area")

    n = len(vertices)
    a, b = faces[:, [0, 1, 2]].T, faces[:, [1, 2, 0]].T
    graph = sp.coo_matrix(
        (np.ones(a.size), (a.ravel(), b.ravel())), shape=(n, n)
    )
    components, _ = csgraph.connected_components(graph, directed=False)
    if components != 1:
        raise NotADisk(f"Mesh has {components} connected components")

    loop = _boundary_loop(faces, n)
    loop = np.roll(loop, -int(np.argmin(loop)))

    if uv is None:
        logging.info(f"Computing conformal UVs for {n} vertices")
        uv = lscm(vertices, faces, loop)
    areas = signed_uv_areas(uv, faces)
    if (areas < 0).all():
        uv = uv * np.array([-1.0, 1.0])
        areas = -areas
    if (areas <= 0).any():
        raise UVFlip(f"{int((areas <= 0).sum())} triangles flip in UV space")

    return TriMesh(vertices, faces, uv, loop)


def load_mesh(path, weld_tol=None) -> TriMesh:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No mesh at `{path}`")
    raw = meshio.read(path)
    triangles = [block.data for block in raw.cells if block.type == "triangle"]
    if not triangles:
        raise MeshError(f"`{path}` holds no triangles")
    uv = raw.point_data.get("obj:vt")
    mesh = build_mesh(raw.points, np.vstack(triangles), uv, weld_tol)
    logging.info(
        f"Loaded `{path.name}`: {len(mesh.vertices)} vertices,"
        f" {len(mesh.faces)} faces, N={mesh.boundary.N}"
    )
    return mesh


def export_mesh(mesh: TriMesh, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meshio.write(
        path,
        meshio.Mesh(
            mesh.vertices,
            [("triangle", mesh.faces)],
            point_data={"obj:vt": mesh.uv},
        ),
        file_format="obj",
    )
    return path


def boundary_resolution_warning(mesh: TriMesh):
    interior = mesh.mean_edge_length
    boundary = mesh.mean_boundary_edge
    if boundary > interior:
        audit.log(
            "Boundary is coarser than the interior",
            mean_boundary_edge=round(boundary, 9),
            mean_edge=round(interior, 9),
            level=logging.WARNING,
        )


@dataclass(frozen=True, eq=False)
class CurvatureField:
    mesh: TriMesh
    k1: np.ndarray
    k2: np.ndarray
    v1: np.ndarray
    normal: np.ndarray
    degenerate: int = 0


def any_tangent(normal: np.ndarray) -> np.ndarray:
    axis = np.eye(3)[int(np.argmin(np.abs(normal)))]
    tangent = np.cross(normal, axis)
    return tangent / np.linalg.norm(tangent)


def _fit_quadric(offsets: np.ndarray, normal: np.ndarray):
    if len(offsets) < 5:
        return None
    e1 = any_tangent(normal)
    e2 = np.cross(normal, e1)
    x, y, z = offsets @ e1, offsets @ e2, offsets @ normal
    design = np.column_stack([x * x, x * y, y * y, x, y])
    coef, _, rank, _ = np.linalg.lstsq(design, z, rcond=None)
    if rank < 5:
        return None
    a, b, c, d, e = coef
    w = np.sqrt(1 + d * d + e * e)
    first = np.array([[1 + d * d, d * e], [d * e, 1 + e * e]])
    second = np.array([[2 * a, b], [b, 2 * c]]) / w
    values, vectors = np.linalg.eig(np.linalg.solve(first, second))
    # Positive where the surface bends away from its normal
    kappas = -values.real
    order = np.argsort(kappas)[::-1]
    k1, k2 = kappas[order]
    alpha, beta = vectors[:, order[0]].real

    frame = np.column_stack([e1, e2, normal])
    fitted_normal = frame @ np.array([-d, -e, 1.0]) / w
    direction = frame @ np.array([alpha, beta, alpha * d + beta * e])
    direction -= (direction @ fitted_normal) * fitted_normal
    length = np.linalg.norm(direction)
    if length < 1e-12:
        direction = any_tangent(fitted_normal)
    else:
        direction /= length
    return float(k1), float(k2), direction, fitted_normal


def estimate_curvature(mesh: TriMesh) -> CurvatureField:
    n = len(mesh.vertices)
    adjacency = mesh.adjacency
    ring2 = (adjacency + adjacency @ adjacency).tocsr()
    k1, k2 = np.zeros(n), np.zeros(n)
    v1 = np.zeros((n, 3))
    normal = mesh.vertex_normals.copy()
    fitted = np.zeros(n, bool)
    degenerate = 0

    interior = np.flatnonzero(~mesh.is_boundary)
    targets = interior if len(interior) else np.arange(n)
    for v in targets.tolist():
        ring = ring2.indices[ring2.indptr[v] : ring2.indptr[v + 1]]
        ring = ring[ring != v]
        fit = _fit_quadric(mesh.vertices[ring] - mesh.vertices[v], normal[v])
        if fit is None:
            degenerate += 1
            v1[v] = any_tangent(normal[v])
            continue
        k1[v], k2[v], v1[v], normal[v] = fit
        fitted[v] = True

    if len(interior):
        tree = cKDTree(mesh.vertices[interior])
        for b in mesh.boundary_loop.tolist():
            source = _nearest_interior(mesh, ring2, b, interior, tree)
            k1[b], k2[b] = k1[source], k2[source]
            direction = v1[source] - (v1[source] @ normal[b]) * normal[b]
            length = np.linalg.norm(direction)
            v1[b] = (
                direction / length
                if length > 1e-12
                else any_tangent(normal[b])
            )

    if degenerate:
        audit.log(
            "Curvature fits fell back to zero",
            count=degenerate,
            level=logging.WARNING,
        )
    return CurvatureField(mesh, k1, k2, v1, normal, degenerate)


def _nearest_interior(mesh, ring2, b, interior, tree) -> int:
    for ring in (mesh.adjacency, ring2):
        candidates = ring.indices[ring.indptr[b] : ring.indptr[b + 1]]
        candidates = candidates[~mesh.is_boundary[candidates]]
        if len(candidates):
            distances = np.linalg.norm(
                mesh.vertices[candidates] - mesh.vertices[b], axis=1
            )
            return int(candidates[np.argmin(distances)])
    _, k = tree.query(mesh.vertices[b])
    return int(interior[k])


def interpolate_curvature(field: CurvatureField, faces, bary):
    """Vectorized curvature_at over many (face, barycentric) samples."""
    corners = field.mesh.faces[np.asarray(faces)]
    bary = np.asarray(bary, float)
    k1 = np.einsum("ij,ij->i", bary, field.k1[corners])
    k2 = np.einsum("ij,ij->i", bary, field.k2[corners])
    normal = np.einsum("ij,ijk->ik", bary, field.normal[corners])
    normal /= np.linalg.norm(normal, axis=1)[:, None]

    directions = field.v1[corners]
    signs = np.sign(
        np.einsum("ijk,ik->ij", directions, directions[:, 0])
    )
    signs[signs == 0] = 1.0
    v1 = np.einsum("ij,ijk->ik", bary * signs, directions)
    v1 -= np.einsum("ij,ij->i", v1, normal)[:, None] * normal
    lengths = np.linalg.norm(v1, axis=1)
    for i in np.flatnonzero(lengths < 1e-12).tolist():
        v1[i] = any_tangent(normal[i])
        lengths[i] = 1.0
    return k1, k2, v1 / lengths[:, None], normal


def curvature_at(field: CurvatureField, p: SurfacePoint):
    k1, k2, v1, normal = interpolate_curvature(field, [p.face], [p.bary])
    return float(k1[0]), float(k2[0]), v1[0], normal[0]


def normal_curvature(k1, k2, v1, tangent):
    """Euler's theorem, for unit tangents."""
    cos = np.einsum("...i,...i->...", tangent, v1)
    return (k1 - k2) * cos**2 + k2
