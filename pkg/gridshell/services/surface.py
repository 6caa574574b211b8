import logging
from dataclasses import dataclass

from gridshell.services import surfaces
from gridshell.services.dual import DualSpace, build_dual
from gridshell.services.geodesics import DistanceAtlas, build_atlas
from gridshell.services.mesh import (
    CurvatureField,
    TriMesh,
    boundary_resolution_warning,
    estimate_curvature,
    load_mesh,
)

BUILTIN = "builtin:"


@dataclass(frozen=True, eq=False)
class Surface:
    """Everything computed once per mesh, shared by every grid evaluation."""

    mesh: TriMesh
    curvature: CurvatureField
    atlas: DistanceAtlas
    dual: DualSpace
    eps_x: float
    spacing: float
    min_gap: int = 2
    workers: int = 1


def resolve_tolerances(
    mesh: TriMesh, eps=None, eps_d=None, eps_x=None, spacing=None
) -> dict:
    edge = mesh.mean_edge_length
    boundary_edge = mesh.mean_boundary_edge
    return {
        "eps": 1e-3 * boundary_edge if eps is None else eps,
        "eps_d": 1e-2 * boundary_edge if eps_d is None else eps_d,
        "eps_x": 1.5 * edge if eps_x is None else eps_x,
        "spacing": edge if spacing is None else spacing,
    }


def open_mesh(source: str, resolution=12, weld_tol=None) -> TriMesh:
    if source.startswith(BUILTIN):
        return surfaces.build(source.removeprefix(BUILTIN), resolution)
    return load_mesh(source, weld_tol)


def prepare(
    mesh: TriMesh,
    *,
    eps=None,
    eps_d=None,
    eps_x=None,
    spacing=None,
    min_gap=2,
    workers=1,
    cache=False,
) -> Surface:
    boundary_resolution_warning(mesh)
    tolerances = resolve_tolerances(mesh, eps, eps_d, eps_x, spacing)
    curvature = estimate_curvature(mesh)
    atlas = build_atlas(mesh, workers=workers, cache=cache)
    dual = build_dual(atlas, tolerances["eps"], tolerances["eps_d"])
    logging.debug(f"Tolerances: {tolerances}")
    return Surface(
        mesh,
        curvature,
        atlas,
        dual,
        tolerances["eps_x"],
        tolerances["spacing"],
        min_gap,
        workers,
    )
