"""
End-to-end runs: surface, distances, dual space, initial grid, genetic
optimization, planarization and export, plus the rotation sweep and the
re-validation of a finished run.
"""
import csv
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel as Model

from gridshell import svg
from gridshell.services import audit
from gridshell.services.config import Config
from gridshell.services.dual import export_mask, segments_model
from gridshell.services.geodesics import (
    boundary_distance,
    trace_geodesic_oracle,
)
from gridshell.services.layout import (
    Grid,
    GridModel,
    audit_grid,
    grid_from_model,
    grid_model,
    init_grid,
)
from gridshell.services.optimizer import (
    Candidate,
    auto_lambda,
    measure,
    optimize,
    rotation_vectors,
)
from gridshell.services.planar import (
    PlanarGrid,
    PlanarModel,
    planar_model,
    planarize,
)
from gridshell.services.surface import Surface, open_mesh, prepare
from gridshell.stages import Stages, descript_stage

REPORT_SCHEMA = 1
PLANAR_LENGTH_TOL = 1e-6
MEMBER_LENGTH_TOL = 0.02

ARTIFACTS = {
    "config": "config.yml",
    "report": "report.json",
    "timings": "timings.json",
    "grid": "grid.json",
    "energy": "energy.json",
    "history": "history.csv",
    "members": "members.obj",
    "svg": "layout.svg",
    "layout": "layout.json",
    "segments": "segments.json",
    "mask": "mask.png",
    "sweep": "sweep.csv",
}


class MeshStats(Model):
    vertices: int
    faces: int
    boundary_vertices: int
    mean_edge: float
    mean_boundary_edge: float
    distance_asymmetry: float


class Energies(Model):
    e_effort: float
    e_shape: float
    e_grid: float
    mean_e_c: float


class NotchStats(Model):
    count: int
    max: float
    mean: float


class RunReport(Model):
    schema_version: int = REPORT_SCHEMA
    mesh: MeshStats
    members: int
    combinatorics: str
    version: int
    seed: int
    lam: float
    segments: int
    energies: Energies
    notches: NotchStats
    planar_residual: float
    eps_geo: float
    warnings: list[str]
    config: dict


class Timings(Model):
    t_pre: float
    t_opt: float
    t_pla: float
    stages: dict[str, float]


class SweepRow(Model):
    rotation: float
    feasible: bool
    e_effort: float | None
    e_shape: float | None
    e_grid: float | None
    version: int | None
    combinatorics: str | None
    changed: bool


class ValidationReport(Model):
    eps_geo: float
    deviations: dict[str, float]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def load_surface_mesh(config: Config):
    return open_mesh(config.MESH, config.RESOLUTION, config.WELD_TOL)


def open_surface(config: Config, mesh=None) -> Surface:
    mesh = load_surface_mesh(config) if mesh is None else mesh
    return prepare(
        mesh,
        eps=config.EPSILON,
        eps_d=config.EPSILON_D,
        eps_x=config.EPSILON_X,
        spacing=config.SPACING,
        min_gap=config.MIN_GAP,
        workers=config.WORKERS,
        cache=config.ATLAS_CACHE,
    )


def mesh_stats(surface: Surface) -> MeshStats:
    mesh = surface.mesh
    return MeshStats(
        vertices=len(mesh.vertices),
        faces=len(mesh.faces),
        boundary_vertices=mesh.boundary.N,
        mean_edge=mesh.mean_edge_length,
        mean_boundary_edge=mesh.mean_boundary_edge,
        distance_asymmetry=surface.atlas.asymmetry,
    )


def _distance_to_polyline(points: np.ndarray, polyline: np.ndarray):
    a, b = polyline[:-1], polyline[1:]
    ab = b - a
    lengths = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    ap = points[:, None, :] - a[None]
    w = np.clip(np.einsum("pij,ij->pi", ap, ab) / lengths, 0.0, 1.0)
    closest = a[None] + w[..., None] * ab[None]
    return np.linalg.norm(points[:, None, :] - closest, axis=2).min(axis=1)


def geodesic_deviation(surface: Surface, grid: Grid):
    """
    Mean distance between each reconstructed member and the traced geodesic
    between its anchors, in percent of the mean edge length.
    """
    mesh = surface.mesh
    deviations = {}
    for member in grid.members:
        a = mesh.boundary_point(member.tx)
        b = mesh.boundary_point(member.ty)
        path = trace_geodesic_oracle(mesh, a, b)
        distance = _distance_to_polyline(member.points, path.points)
        deviations[member.id] = float(
            100 * distance.mean() / mesh.mean_edge_length
        )
    return float(np.mean(list(deviations.values()))), deviations


def write_members_obj(grid: Grid, path) -> Path:
    path = Path(path)
    lines = ["# grid members as 3D polylines"]
    offset = 1
    for member in grid.members:
        lines.append(f"o {member.id}")
        for x, y, z in member.points.tolist():
            lines.append(f"v {x!r} {y!r} {z!r}")
        count = len(member.points)
        lines.append(
            "l " + " ".join(str(offset + k) for k in range(count))
        )
        offset += count
    path.write_text("\n".join(lines) + "\n")
    return path


def write_history(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["generation", "best", "mean", "feasible"])
        for row in rows:
            writer.writerow(
                [row.generation, repr(row.best), repr(row.mean), row.feasible]
            )
    return path


def _write_json(model: Model, path) -> Path:
    path = Path(path)
    path.write_text(model.model_dump_json(indent=2) + "\n")
    return path


def _notch_stats(pg: PlanarGrid) -> NotchStats:
    lengths = pg.notch_lengths
    if not len(lengths):
        return NotchStats(count=0, max=0.0, mean=0.0)
    return NotchStats(
        count=len(lengths),
        max=float(lengths.max()),
        mean=float(lengths.mean()),
    )


def run_pipeline(config: Config):
    """Run every stage, writing artifacts as soon as they are final."""
    out = Path(config.OUTPUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / ARTIFACTS["config"])
    stage = Stages()

    with audit.journal() as warnings:
        with stage("load"):
            mesh = load_surface_mesh(config)
        with stage("distances"):
            surface = open_surface(config, mesh)
            segments = segments_model(surface.dual)
            _write_json(segments, out / ARTIFACTS["segments"])
            export_mask(surface.dual, out / ARTIFACTS["mask"])
        with stage("layout"):
            grid0 = init_grid(
                surface.dual,
                config.N,
                config.M,
                config.ROTATION,
                config.MIN_GAP,
            )
        with stage("optimize"):
            result = optimize(surface, grid0, config.ga, config.LAMBDA)
            grid = result.grid
            _write_json(grid_model(grid), out / ARTIFACTS["grid"])
            _write_json(result.report, out / ARTIFACTS["energy"])
            write_history(result.history, out / ARTIFACTS["history"])
            write_members_obj(grid, out / ARTIFACTS["members"])
        with stage("planarize"):
            pg = planarize(grid, config.planar)
            _write_json(planar_model(pg), out / ARTIFACTS["layout"])
            svg.render_svg(pg, out / ARTIFACTS["svg"], config.NOTCH_CLEARANCE)
        with stage("validate"):
            eps_geo, _ = geodesic_deviation(surface, grid)
            for violation in audit_grid(surface, grid):
                audit.log(
                    "Grid invariant violated",
                    violation=violation,
                    level=logging.WARNING,
                )

    report = RunReport(
        mesh=mesh_stats(surface),
        members=len(grid.members),
        combinatorics=grid.combinatorics,
        version=grid.version,
        seed=config.SEED,
        lam=result.lam,
        segments=len(surface.dual.segments),
        energies=Energies(
            e_effort=result.report.e_effort,
            e_shape=result.report.e_shape,
            e_grid=result.report.e_grid,
            mean_e_c=result.report.mean_e_c,
        ),
        notches=_notch_stats(pg),
        planar_residual=float(pg.residuals.max(initial=0.0)),
        eps_geo=eps_geo,
        warnings=list(warnings),
        config=config.as_dict(portable=True),
    )
    _write_json(report, out / ARTIFACTS["report"])
    timings = stage.timings
    _write_json(
        Timings(
            t_pre=timings["load"] + timings["distances"],
            t_opt=timings["layout"] + timings["optimize"],
            t_pla=timings["planarize"],
            stages=timings,
        ),
        out / ARTIFACTS["timings"],
    )
    logging.info(f"Wrote run artifacts to `{out}`")
    return report


@descript_stage
def sweep_rotation(config: Config, steps=None, surface=None) -> list[SweepRow]:
    """
    Energies of the initial grid at evenly spaced rotations, without any
    optimization. Infeasible rotations are kept as empty rows.
    """
    steps = config.SWEEP_STEPS if steps is None else steps
    surface = open_surface(config) if surface is None else surface
    n, m = config.N, config.M
    rotations, vectors = rotation_vectors(n, m, config.ROTATION, steps)
    candidates = [Candidate(t=t) for t in vectors]
    measure(surface, candidates, n, m, config.MIN_GAP)
    lam = auto_lambda(candidates) if config.LAMBDA is None else config.LAMBDA

    rows, previous = [], None
    for rotation, candidate in zip(rotations, candidates):
        if not candidate.feasible:
            rows.append(
                SweepRow(
                    rotation=rotation % 1.0,
                    feasible=False,
                    e_effort=None,
                    e_shape=None,
                    e_grid=None,
                    version=None,
                    combinatorics=None,
                    changed=False,
                )
            )
            continue
        changed = previous is not None and candidate.combinatorics != previous
        previous = candidate.combinatorics
        rows.append(
            SweepRow(
                rotation=rotation % 1.0,
                feasible=True,
                e_effort=candidate.e_effort,
                e_shape=candidate.e_shape,
                e_grid=candidate.score(lam),
                version=candidate.version,
                combinatorics=candidate.combinatorics,
                changed=changed,
            )
        )
    return rows


def _cell(value):
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else value


def write_sweep(rows: list[SweepRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = list(SweepRow.model_fields)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(fields)
        for row in rows:
            values = row.model_dump()
            writer.writerow([_cell(values[k]) for k in fields])
    return path


def _planar_violations(model: PlanarModel) -> list[str]:
    violations = []
    for member in model.members:
        error = abs(member.planar_length - member.length) / member.length
        if error > PLANAR_LENGTH_TOL:
            violations.append(
                f"planar {member.id} length off by {error:.3g} (relative)"
            )
    for notch in model.notches:
        for name, value in (("lam_g", notch.lam_g), ("lam_h", notch.lam_h)):
            if not 0 < value < 1:
                violations.append(
                    f"notch {notch.g}/{notch.h} has {name} = {value}"
                )
    return violations


def _recorded_violations(surface: Surface, model: GridModel) -> list[str]:
    """Check the lengths and crossings as written, before any rebuild."""
    violations = []
    for member in model.members:
        expected = boundary_distance(surface.atlas, member.tx, member.ty)
        if abs(member.length - expected) > MEMBER_LENGTH_TOL * expected:
            violations.append(
                f"recorded {member.id} length {member.length:.6g} deviates"
                f" from the geodesic distance {expected:.6g}"
            )
        s = [c.s for c in member.intersections]
        if any(b <= a for a, b in zip(s, s[1:])):
            violations.append(f"recorded {member.id} crossings out of order")
    return violations


@descript_stage
def validate_grid(path, surface=None) -> ValidationReport:
    """
    Re-derive a finished run from its artifacts: recorded lengths, the
    rebuilt grid's invariants, the planar layout and the deviation of every
    member from its traced geodesic.
    """
    path = Path(path)
    if surface is None:
        surface = open_surface(Config.load(path / ARTIFACTS["config"]))
    model = GridModel.model_validate_json(
        (path / ARTIFACTS["grid"]).read_text()
    )
    violations = _recorded_violations(surface, model)
    grid = grid_from_model(surface, model)
    violations += audit_grid(surface, grid)

    layout = path / ARTIFACTS["layout"]
    if layout.is_file():
        planar = PlanarModel.model_validate_json(layout.read_text())
        violations += _planar_violations(planar)

    eps_geo, deviations = geodesic_deviation(surface, grid)
    for violation in violations:
        audit.log(
            "Validation failed", violation=violation, level=logging.WARNING
        )
    logging.info(f"ε_geo = {eps_geo:.3g}% of the mean edge length")
    return ValidationReport(
        eps_geo=eps_geo, deviations=deviations, violations=violations
    )

