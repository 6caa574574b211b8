"""
Bending effort and shape stability of grid members, from the normal
curvature the surface imposes along each geodesic.
"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel as Model

from gridshell.services.layout import Grid, Member
from gridshell.services.mesh import (
    CurvatureField,
    interpolate_curvature,
    normal_curvature,
)
from gridshell.services.surface import Surface

KAPPA_TOL_FRACTION = 0.05
KAPPA_TOL_FLOOR = 1e-6
# Share of |κ_n| mass the weaker lobe may carry for a stable σ = 2 member
LOBE_RATIO = 0.3


@dataclass
class CurvatureProfile:
    kappa: np.ndarray
    weights: np.ndarray
    s: np.ndarray
    length: float


class SegmentRecord(Model):
    start: float
    end: float
    omega: int


class MemberEnergy(Model):
    id: str
    length: float
    e_c: float
    sigma: int
    eta: float
    inflections: list[float]
    segments: list[SegmentRecord]


class EnergyReport(Model):
    members: list[MemberEnergy]
    mean_e_c: float
    e_effort: float
    e_shape: float
    lam: float
    e_grid: float


def _tangents(points: np.ndarray) -> np.ndarray:
    edges = np.diff(points, axis=0)
    lengths = np.linalg.norm(edges, axis=1)
    directions = edges / np.maximum(lengths, 1e-300)[:, None]
    tangents = np.empty_like(points)
    tangents[0] = directions[0]
    tangents[-1] = directions[-1]
    tangents[1:-1] = directions[:-1] + directions[1:]
    return tangents


def curvature_profile(field: CurvatureField, member: Member):
    points = member.points
    if points is None or len(points) < 2:
        raise ValueError(f"Member {member.id} has no polyline")
    k1, k2, v1, normal = interpolate_curvature(
        field, member.faces, member.bary
    )
    tangents = _tangents(points)
    tangents -= np.einsum("ij,ij->i", tangents, normal)[:, None] * normal
    norms = np.linalg.norm(tangents, axis=1)
    tangents /= np.maximum(norms, 1e-300)[:, None]
    kappa = normal_curvature(k1, k2, v1, tangents)

    segments = np.linalg.norm(np.diff(points, axis=0), axis=1)
    weights = np.zeros(len(points))
    weights[:-1] += segments / 2
    weights[1:] += segments / 2
    s = np.concatenate([[0.0], np.cumsum(segments)])
    return CurvatureProfile(kappa, weights, s, float(s[-1]))


def effort_energy(profile: CurvatureProfile) -> float:
    if profile.length <= 0:
        return 0.0
    return float(profile.weights @ profile.kappa**2 / profile.length)


def effort_variance(energies) -> float:
    energies = np.asarray(energies, float)
    return float(-np.sum((energies - energies.mean()) ** 2))


def inflection_tolerance(profile: CurvatureProfile) -> float:
    peak = np.abs(profile.kappa).max(initial=0.0)
    return max(KAPPA_TOL_FRACTION * peak, KAPPA_TOL_FLOOR)


def inflections(profile: CurvatureProfile, tol=None) -> list[float]:
    """
    Arc positions where κ_n changes sign. Samples inside the dead band are
    neutral, so a flip through a neutral run counts once, at its middle.
    """
    tol = inflection_tolerance(profile) if tol is None else tol
    kappa, s = profile.kappa, profile.s
    signs = np.where(np.abs(kappa) < tol, 0, np.sign(kappa)).astype(int)
    positions = []
    last = None
    for j in np.flatnonzero(signs).tolist():
        if last is not None and signs[j] != signs[last]:
            if j == last + 1:
                a, b = kappa[last], kappa[j]
                w = a / (a - b)
                positions.append(float((1 - w) * s[last] + w * s[j]))
            else:
                positions.append(float((s[last + 1] + s[j - 1]) / 2))
        last = j
    return positions


def count_inflections(profile: CurvatureProfile, tol=None) -> int:
    return len(inflections(profile, tol))


def lobe_ratio(profile: CurvatureProfile) -> float:
    """Share of the |κ_n| mass carried by the weaker sign."""
    mass = profile.weights * profile.kappa
    positive = mass[mass > 0].sum()
    negative = -mass[mass < 0].sum()
    total = positive + negative
    if total <= 0:
        return 0.0
    return float(min(positive, negative) / total)


def classify_member(sigma: int, profile: CurvatureProfile | None = None):
    if sigma < 2:
        return 1
    if sigma > 2:
        return 0
    return int(profile is not None and lobe_ratio(profile) < LOBE_RATIO)


@dataclass
class StabilityRecord:
    sigma: int
    eta: float
    inflections: list[float]
    segments: list[SegmentRecord]


def stability_record(profile: CurvatureProfile, tol=None) -> StabilityRecord:
    positions = inflections(profile, tol)
    sigma = len(positions)
    eta = classify_member(sigma, profile)
    segments = []
    if not eta:
        segments = [
            SegmentRecord(start=a, end=b, omega=0)
            for a, b in zip(positions, positions[1:])
        ]
    return StabilityRecord(sigma, float(eta), positions, segments)


def _segment_of(segments: list[SegmentRecord], s: float) -> int | None:
    # a crossing exactly on an inflection belongs to the earlier segment
    for j, segment in enumerate(segments):
        if segment.start < s <= segment.end:
            return j
    return None


def shape_stability(grid: Grid, records: dict[str, StabilityRecord]):
    """
    Let stable members support the segments of unstable members they cross,
    then average the resulting η over the grid.
    """
    stable = {id for id, record in records.items() if record.eta == 1}
    for member in grid.members:
        record = records[member.id]
        if not record.segments:
            continue
        for crossing in member.intersections:
            if crossing.other not in stable:
                continue
            j = _segment_of(record.segments, crossing.s)
            if j is not None:
                record.segments[j].omega = 1
        record.eta = float(np.mean([x.omega for x in record.segments]))
    return float(np.mean([records[x.id].eta for x in grid.members]))


def grid_energy(e_effort: float, e_shape: float, lam: float) -> float:
    return e_effort - lam * e_shape


def evaluate_energy(surface: Surface, grid: Grid, lam: float) -> EnergyReport:
    profiles = {
        x.id: curvature_profile(surface.curvature, x) for x in grid.members
    }
    energies = {id: effort_energy(p) for id, p in profiles.items()}
    records = {id: stability_record(p) for id, p in profiles.items()}
    e_shape = shape_stability(grid, records)
    e_effort = effort_variance([energies[x.id] for x in grid.members])
    return EnergyReport(
        members=[
            MemberEnergy(
                id=x.id,
                length=x.length,
                e_c=energies[x.id],
                sigma=records[x.id].sigma,
                eta=records[x.id].eta,
                inflections=records[x.id].inflections,
                segments=records[x.id].segments,
            )
            for x in grid.members
        ],
        mean_e_c=float(np.mean(list(energies.values()))),
        e_effort=e_effort,
        e_shape=e_shape,
        lam=lam,
        e_grid=grid_energy(e_effort, e_shape, lam),
    )
