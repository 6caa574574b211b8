import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib import image
from pydantic import BaseModel as Model
from scipy import ndimage

from gridshell.services import audit
from gridshell.services.errors import DegenerateMember
from gridshell.services.geodesics import DistanceAtlas

VALID, CORE, GROWN, DIAGONAL = 0, 1, 2, 3
# Components spanning no more boundary steps than this are sampling noise
ARTIFACT_SPAN = 3


def canonicalize(tx: float, ty: float) -> tuple[float, float, bool]:
    """
    Representative of (tx, ty) under unit translations and the diagonal
    reflection, plus whether the endpoints were swapped.
    """
    a, b = tx % 1.0, ty % 1.0
    # -1e-17 % 1.0 rounds to 1.0
    a = 0.0 if a >= 1.0 else a
    b = 0.0 if b >= 1.0 else b
    gap = abs(a - b)
    if min(gap, 1 - gap) < 1e-12:
        raise DegenerateMember(f"Endpoints coincide: ({tx}, {ty})")
    if a > b:
        return b, a, True
    return a, b, False


def cyclic_separation(i, j, n):
    gap = np.abs(np.asarray(i) - np.asarray(j)) % n
    return np.minimum(gap, n - gap)


@dataclass(frozen=True)
class NonConvexSegment:
    i1: int
    i2: int
    t1: float
    # Past 1.0 when the segment runs over the seam
    t2: float
    N: int

    @property
    def indices(self) -> list[int]:
        return [(self.i1 + k) % self.N for k in range(self.length + 1)]

    @property
    def length(self) -> int:
        return (self.i2 - self.i1) % self.N

    def contains(self, i: int) -> bool:
        return (i - self.i1) % self.N <= self.length

    def p_theta(self, atlas: DistanceAtlas, i: int) -> int:
        """Segment endpoint closest to boundary vertex i along the boundary."""
        if atlas.B[i, self.i1] <= atlas.B[i, self.i2]:
            return self.i1
        return self.i2

    def away(self, i: int) -> int:
        """Step direction moving vertex i further from the segment."""
        if i == self.i1:
            return -1
        if i == self.i2:
            return 1
        if self.contains(i):
            return 0
        before = (self.i1 - i) % self.N
        after = (i - self.i2) % self.N
        return -1 if before < after else 1


@dataclass(frozen=True, eq=False)
class DualSpace:
    atlas: DistanceAtlas
    eps: float
    eps_d: float
    segments: list[NonConvexSegment]
    invalid_mask: np.ndarray
    core_mask: np.ndarray
    provenance: np.ndarray
    region_labels: np.ndarray

    @property
    def N(self) -> int:
        return self.atlas.N

    @property
    def mesh(self):
        return self.atlas.mesh

    def z(self, t: float) -> int:
        return self.mesh.boundary.nearest(t)

    def is_valid(self, tx: float, ty: float) -> bool:
        return not self.invalid_mask[self.z(tx), self.z(ty)]


def is_valid(dual: DualSpace, tx: float, ty: float) -> bool:
    return dual.is_valid(tx, ty)


def default_tolerances(atlas: DistanceAtlas) -> tuple[float, float]:
    edge = atlas.mesh.mean_boundary_edge
    return 1e-3 * edge, 1e-2 * edge


def _periodic_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), int))
    if not count:
        return labels, 0
    parent = list(range(count + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for shift in (-1, 0, 1):
        first_rows = labels[0]
        last_rows = np.roll(labels[-1], shift)
        first_cols = labels[:, 0]
        last_cols = np.roll(labels[:, -1], shift)
        for a, b in ((first_rows, last_rows), (first_cols, last_cols)):
            for x, y in zip(a.tolist(), b.tolist()):
                if x and y:
                    parent[find(x)] = find(y)
    roots = {find(k) for k in range(1, count + 1)}
    relabel = {root: k + 1 for k, root in enumerate(sorted(roots))}
    lookup = np.array([0] + [relabel[find(k)] for k in range(1, count + 1)])
    return lookup[labels], len(roots)


def _covering_interval(indices, n) -> tuple[int, int]:
    """Smallest cyclic interval holding every index."""
    indices = np.unique(indices)
    if len(indices) == 1:
        return int(indices[0]), int(indices[0])
    gaps = np.diff(np.append(indices, indices[0] + n))
    k = int(np.argmax(gaps))
    return int(indices[(k + 1) % len(indices)]), int(indices[k])


def nonconvex_matrix(atlas: DistanceAtlas, eps: float) -> np.ndarray:
    """Pairs whose shortest connection is as long as the boundary path."""
    n = atlas.N
    i, j = np.indices((n, n))
    return ((atlas.B - atlas.D) < eps) & (cyclic_separation(i, j, n) > 1)


def detect_nonconvex(atlas: DistanceAtlas, eps: float | None = None):
    if eps is None:
        eps, _ = default_tolerances(atlas)
    n = atlas.N
    labels, count = _periodic_components(nonconvex_matrix(atlas, eps))
    t = atlas.mesh.boundary.t
    segments = []
    for label in range(1, count + 1):
        rows, cols = np.nonzero(labels == label)
        if cyclic_separation(rows, cols, n).max() <= ARTIFACT_SPAN:
            logging.debug(f"Dropping boundary-hugging noise component {label}")
            continue
        i1, i2 = _covering_interval(np.concatenate([rows, cols]), n)
        t2 = t[i2] if i2 >= i1 else t[i2] + 1.0
        segment = NonConvexSegment(i1, i2, float(t[i1]), float(t2), n)
        if segment not in segments:
            segments.append(segment)
    segments.sort(key=lambda s: s.i1)
    for segment in segments:
        audit.log(
            "Non-convex boundary segment",
            t1=round(segment.t1, 6),
            t2=round(segment.t2, 6),
            vertices=segment.length + 1,
        )
    return segments


def _derivative_holds(atlas, segment, u, v, eps_d) -> bool:
    """Discrete d/dv of D(u, v) - D(Θ, v) vanishes on one side of v."""
    n, D = atlas.N, atlas.D
    theta = segment.p_theta(atlas, u)

    def d_g(w):
        return D[u, w] - D[theta, w]

    here = d_g(v)
    return min(
        abs(here - d_g((v + 1) % n)), abs(here - d_g((v - 1) % n))
    ) < eps_d


def _contact_holds(atlas, segment, u, v, eps_d) -> bool:
    """The u-v connection runs through some segment vertex besides u, v."""
    D = atlas.D
    candidates = [p for p in segment.indices if p != u and p != v]
    if not candidates:
        return False
    candidates = np.array(candidates)
    excess = D[u, candidates] + D[candidates, v] - D[u, v]
    return bool(excess.min() < eps_d)


def accepts(atlas, segment, u, v, eps_d) -> bool:
    return _derivative_holds(atlas, segment, u, v, eps_d) and _contact_holds(
        atlas, segment, u, v, eps_d
    )


def _grow(atlas, segment, eps_d):
    n = atlas.N
    core = np.zeros((n, n), bool)
    indices = segment.indices
    core[np.ix_(indices, indices)] = True
    np.fill_diagonal(core, False)

    region = core.copy()
    queue = deque(zip(*np.nonzero(core)))
    while queue:
        x, y = queue.popleft()
        for axis in (0, 1):
            moving = (x, y)[axis]
            step = segment.away(moving)
            if step == 0:
                continue
            moved = (moving + step) % n
            cell = (moved, y) if axis == 0 else (x, moved)
            other = cell[1 - axis]
            if region[cell] or moved == other:
                continue
            if segment.contains(moved):
                continue
            if accepts(atlas, segment, moved, other, eps_d):
                region[cell] = True
                queue.append(cell)
    region |= region.T
    return core | core.T, region


def compute_invalid_regions(
    atlas: DistanceAtlas, segments, eps_d: float | None = None
):
    if eps_d is None:
        _, eps_d = default_tolerances(atlas)
    n = atlas.N
    provenance = np.zeros((n, n), np.int8)
    labels = np.full((n, n), -1, np.int16)
    np.fill_diagonal(provenance, DIAGONAL)
    merges = set()
    for r, segment in enumerate(segments):
        core, region = _grow(atlas, segment, eps_d)
        overlap = region & (labels >= 0)
        for other in np.unique(labels[overlap]).tolist():
            if (other, r) not in merges:
                merges.add((other, r))
                audit.log(
                    "Invalid regions merge",
                    first=other,
                    second=r,
                    cells=int((overlap & (labels == other)).sum()),
                    level=logging.WARNING,
                )
        fresh = region & (provenance == VALID)
        provenance[fresh & core] = CORE
        provenance[fresh & ~core] = GROWN
        # a core cell of this segment outranks a grown cell of an earlier one
        provenance[core & (provenance == GROWN)] = CORE
        labels[region & (labels < 0)] = r
    invalid = provenance != VALID
    return invalid, provenance == CORE, provenance, labels


def build_dual(atlas: DistanceAtlas, eps=None, eps_d=None) -> DualSpace:
    default_eps, default_eps_d = default_tolerances(atlas)
    eps = default_eps if eps is None else eps
    eps_d = default_eps_d if eps_d is None else eps_d
    segments = detect_nonconvex(atlas, eps)
    invalid, core, provenance, labels = compute_invalid_regions(
        atlas, segments, eps_d
    )
    logging.info(
        f"Dual space: {len(segments)} non-convex segment(s),"
        f" {int(invalid.sum()) - atlas.N} invalid off-diagonal cells"
    )
    return DualSpace(
        atlas, eps, eps_d, segments, invalid, core, provenance, labels
    )


def check_provenance(dual: DualSpace) -> list[str]:
    """Re-derive every masked cell from the distance map."""
    atlas = dual.atlas
    violations = []
    if not (dual.invalid_mask == dual.invalid_mask.T).all():
        violations.append("invalid mask is not symmetric")
    if (dual.core_mask & ~dual.invalid_mask).any():
        violations.append("core cells outside the invalid mask")
    if not np.diag(dual.invalid_mask).all():
        violations.append("diagonal cells are not invalid")
    rows, cols = np.nonzero(dual.provenance == GROWN)
    for x, y in zip(rows.tolist(), cols.tolist()):
        segment = dual.segments[dual.region_labels[x, y]]
        if not (
            accepts(atlas, segment, x, y, dual.eps_d)
            or accepts(atlas, segment, y, x, dual.eps_d)
        ):
            violations.append(f"grown cell ({x}, {y}) fails the growth test")
    return violations


class SegmentModel(Model):
    i1: int
    i2: int
    t1: float
    t2: float


class SegmentsModel(Model):
    N: int
    eps: float
    eps_d: float
    segments: list[SegmentModel]
    invalid_cells: int


def segments_model(dual: DualSpace) -> SegmentsModel:
    return SegmentsModel(
        N=dual.N,
        eps=dual.eps,
        eps_d=dual.eps_d,
        segments=[
            SegmentModel(i1=s.i1, i2=s.i2, t1=s.t1, t2=s.t2)
            for s in dual.segments
        ],
        invalid_cells=int(dual.invalid_mask.sum()),
    )


def export_mask(dual: DualSpace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".pgm":
        pixels = np.where(dual.invalid_mask, 0, 255).astype(np.uint8)
        header = f"P5\n{dual.N} {dual.N}\n255\n".encode()
        path.write_bytes(header + pixels[::-1].tobytes())
    else:
        image.imsave(
            path,
            dual.provenance,
            cmap="viridis",
            vmin=VALID,
            vmax=DIAGONAL,
            origin="lower",
        )
    return path
