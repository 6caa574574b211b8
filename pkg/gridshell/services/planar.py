"""
Planar layout of a spatial grid: every member keeps its exact length while
the notches (distance between where two crossing members meet in the plane)
are made as short as possible. Solved with an augmented Lagrangian around
L-BFGS-B, with the rigid motion of the plane pinned.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel as Model
from scipy import optimize, sparse
from scipy.special import expit

from gridshell.services import audit
from gridshell.services.errors import NonConvergence
from gridshell.services.layout import Grid

# Pinned coordinates: first member p_x at the origin, p_y on the +x axis
GAUGE = (0, 1, 3)
SHARPNESS = 1e3
RHO = 10.0
RHO_GROWTH = 10.0
MU_GROWTH = 10.0
MU_RETRIES = 3
PROJECTION_STEPS = 30


@dataclass(frozen=True)
class PlanarizeConfig:
    mu: float = 0.0
    width: float = 0.0
    max_iter: int = 50
    tol: float = 1e-6
    init: str = "uv"
    inner_iter: int = 500


@dataclass(frozen=True)
class Notch:
    g: int
    h: int
    lam_g: float
    lam_h: float


@dataclass
class PlanarGrid:
    ids: list[str]
    lengths: np.ndarray
    notches: list[Notch]
    # consecutive same-family members (a, b) with the side each one sees
    # the other on, +1 for left
    pairs: list[tuple[int, int, int, int]]
    x: np.ndarray
    width: float = 0.0
    mu: float = 0.0
    converged: bool = False
    iterations: int = 0
    stationarity: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def endpoints(self) -> np.ndarray:
        return self.x.reshape(-1, 2, 2)

    @property
    def scale(self) -> float:
        return float(np.mean(self.lengths) ** 2)

    @property
    def planar_lengths(self) -> np.ndarray:
        ends = self.endpoints
        return np.linalg.norm(ends[:, 1] - ends[:, 0], axis=1)

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(self.planar_lengths - self.lengths) / self.lengths

    @property
    def notch_points(self) -> np.ndarray:
        """Planar crossing points on each member, shape (notches, 2, 2)."""
        operator = notch_operator(self, points=True)
        return (operator @ self.x).reshape(-1, 2, 2)

    @property
    def notch_lengths(self) -> np.ndarray:
        points = self.notch_points
        return np.linalg.norm(points[:, 0] - points[:, 1], axis=1)


def _lambdas(grid: Grid):
    index = {x.id: k for k, x in enumerate(grid.members)}
    notches = []
    for a in grid.g:
        for crossing in a.intersections:
            b = grid.member(crossing.other)
            back = next(c for c in b.intersections if c.other == a.id)
            notches.append(
                Notch(
                    index[a.id],
                    index[b.id],
                    crossing.s / a.length,
                    back.s / b.length,
                )
            )
    return notches


def _gauge(x: np.ndarray) -> np.ndarray:
    """Move member 0 to start at the origin and point along +x."""
    ends = x.reshape(-1, 2, 2) - x[:2]
    direction = ends[0, 1] / np.linalg.norm(ends[0, 1])
    rotation = np.array(
        [[direction[0], direction[1]], [-direction[1], direction[0]]]
    )
    ends = ends @ rotation.T
    ends[0, 0] = 0.0
    ends[0, 1, 1] = 0.0
    return ends.ravel()


def _side(ends: np.ndarray, base: int, other: int) -> int:
    direction = ends[base, 1] - ends[base, 0]
    gap = ends[other].mean(axis=0) - ends[base].mean(axis=0)
    return 1 if direction[0] * gap[1] - direction[1] * gap[0] >= 0 else -1


def _sides(ends: np.ndarray, grid: Grid):
    pairs = []
    offset = 0
    for members in (grid.g, grid.h):
        for k in range(len(members) - 1):
            a, b = offset + k, offset + k + 1
            pairs.append((a, b, _side(ends, a, b), _side(ends, b, a)))
        offset += len(members)
    return pairs


def init_planar(grid: Grid, init="uv", width=0.0) -> PlanarGrid:
    """
    Starting layout from the surface parameterization (`uv`) or from a
    circle carrying the boundary parameters (`circle`), scaled so the mean
    chord matches the mean member length, then projected onto exact lengths.
    """
    members = grid.members
    lengths = np.array([x.length for x in members])
    if init == "uv":
        ends = np.array([[x.uv[0], x.uv[-1]] for x in members])
    elif init == "circle":
        t = np.array([[x.tx, x.ty] for x in members]) * 2 * np.pi
        ends = np.stack([np.cos(t), np.sin(t)], axis=-1)
    else:
        raise ValueError(f"Unknown planar initialization `{init}`")
    chords = np.linalg.norm(ends[:, 1] - ends[:, 0], axis=1)
    ends = ends * (lengths.mean() / chords.mean())

    planar = PlanarGrid(
        ids=[x.id for x in members],
        lengths=lengths,
        notches=_lambdas(grid),
        pairs=_sides(ends, grid),
        x=_gauge(ends.ravel()),
        width=width,
    )
    before = float(planar.residuals.max())
    planar.x = project_lengths(planar, planar.x)
    planar.diagnostics["initial_residual"] = before
    logging.debug(
        f"Initial length residual {before:.3g},"
        f" {planar.residuals.max():.3g} after projection"
    )
    return planar


def notch_operator(pg: PlanarGrid, points=False) -> sparse.csr_matrix:
    """
    Linear map from endpoint coordinates to notch vectors q_g - q_h, or to
    the stacked crossing points (q_g, q_h) when `points` is set.
    """
    rows, cols, values = [], [], []
    for k, notch in enumerate(pg.notches):
        terms = [
            (notch.g, 0, 1 - notch.lam_g, 1.0, 0),
            (notch.g, 1, notch.lam_g, 1.0, 0),
            (notch.h, 0, 1 - notch.lam_h, -1.0, 1),
            (notch.h, 1, notch.lam_h, -1.0, 1),
        ]
        for member, end, weight, sign, slot in terms:
            for axis in range(2):
                if points:
                    rows.append(4 * k + 2 * slot + axis)
                    values.append(weight)
                else:
                    rows.append(2 * k + axis)
                    values.append(sign * weight)
                cols.append(4 * member + 2 * end + axis)
    shape = ((4 if points else 2) * len(pg.notches), len(pg.x))
    return sparse.csr_matrix((values, (rows, cols)), shape=shape)


def notch_objective(pg: PlanarGrid, x=None):
    """Sum of squared notch lengths and its gradient."""
    x = pg.x if x is None else x
    operator = notch_operator(pg)
    notches = operator @ x
    return float(notches @ notches), 2 * (operator.T @ notches)


def length_constraints(pg: PlanarGrid, x=None):
    """Relative squared-length residuals G_len and their Jacobian."""
    x = pg.x if x is None else x
    ends = x.reshape(-1, 2, 2)
    delta = ends[:, 1] - ends[:, 0]
    squared = pg.lengths**2
    c = (np.einsum("ij,ij->i", delta, delta) - squared) / (2 * squared)
    jacobian = np.zeros((len(pg.lengths), len(x)))
    for k, (d, l2) in enumerate(zip(delta, squared)):
        jacobian[k, 4 * k : 4 * k + 2] = -d / l2
        jacobian[k, 4 * k + 2 : 4 * k + 4] = d / l2
    return c, jacobian


def _determinants(pg: PlanarGrid, x, width):
    """
    Overlap determinants of every consecutive pair with their gradients.
    Positive values mean an endpoint reaches into the neighbour's lamella.
    """
    ends = x.reshape(-1, 2, 2)
    values, gradients = [], []
    for a, b, side_ab, side_ba in pg.pairs:
        for base, other, sign in ((a, b, side_ab), (b, a, side_ba)):
            p, q = ends[base]
            delta = q - p
            norm = np.linalg.norm(delta)
            unit = delta / max(norm, 1e-300)
            for end in range(2):
                r = ends[other, end] - p
                det = delta[0] * r[1] - delta[1] * r[0]
                values.append(width * norm - sign * det)
                grad = np.zeros(len(x))
                d_delta = np.array([r[1], -r[0]])
                d_r = np.array([-delta[1], delta[0]])
                grad[4 * base + 2 : 4 * base + 4] = (
                    width * unit - sign * d_delta
                )
                grad[4 * base : 4 * base + 2] = -width * unit + sign * (
                    d_delta + d_r
                )
                at = 4 * other + 2 * end
                grad[at : at + 2] += -sign * d_r
                gradients.append(grad)
    if not values:
        return np.zeros(0), np.zeros((0, len(x)))
    return np.array(values), np.array(gradients)


def fab_penalty(pg: PlanarGrid, width=None, x=None, beta=None):
    """
    Gated sum of positive overlap determinants with a subgradient, or its
    softplus smoothing of sharpness `beta` when one is given.
    """
    x = pg.x if x is None else x
    width = pg.width if width is None else width
    values, gradients = _determinants(pg, x, width)
    if not len(values):
        return 0.0, np.zeros(len(x))
    if beta is None:
        gate = values > 0
        return float(values[gate].sum()), gradients[gate].sum(axis=0)
    smooth = np.logaddexp(0.0, beta * values) / beta
    return float(smooth.sum()), expit(beta * values) @ gradients


def project_lengths(pg: PlanarGrid, x: np.ndarray) -> np.ndarray:
    """Minimal-norm Gauss-Newton steps onto the exact member lengths."""
    x = x.copy()
    free = _free(len(x))
    for _ in range(PROJECTION_STEPS):
        c, jacobian = length_constraints(pg, x)
        if np.abs(c).max(initial=0.0) < 1e-14:
            break
        step, *_ = np.linalg.lstsq(jacobian[:, free], -c, rcond=None)
        x[free] += step
    return x


def _free(size: int) -> np.ndarray:
    free = np.ones(size, bool)
    free[list(GAUGE)] = False
    return free


def _objective(pg: PlanarGrid, x, mu, beta):
    value, grad = notch_objective(pg, x)
    if mu > 0:
        fab, fab_grad = fab_penalty(pg, x=x, beta=beta)
        value += mu * fab
        grad = grad + mu * fab_grad
    return value / pg.scale, grad / pg.scale


def _stationarity(pg: PlanarGrid, x, mu, beta) -> float:
    _, grad = _objective(pg, x, mu, beta)
    _, jacobian = length_constraints(pg, x)
    free = _free(len(x))
    g, j = grad[free], jacobian[:, free]
    multipliers, *_ = np.linalg.lstsq(j.T, g, rcond=None)
    return float(np.linalg.norm(g - j.T @ multipliers))


def _solve(pg: PlanarGrid, config: PlanarizeConfig, mu: float):
    free = _free(len(pg.x))
    beta = SHARPNESS / pg.scale
    x = pg.x.copy()
    nu = np.zeros(len(pg.lengths))
    rho = RHO
    previous = np.inf

    def merit(z):
        x[free] = z
        value, grad = _objective(pg, x, mu, beta)
        c, jacobian = length_constraints(pg, x)
        value += -nu @ c + 0.5 * rho * c @ c
        grad = grad + jacobian.T @ (rho * c - nu)
        return value, grad[free]

    initial = _stationarity(pg, x, mu, beta)
    for iteration in range(1, config.max_iter + 1):
        result = optimize.minimize(
            merit,
            x[free],
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": config.inner_iter,
                "gtol": 1e-12,
                "ftol": 1e-16,
            },
        )
        x[free] = result.x
        c, _ = length_constraints(pg, x)
        violation = float(np.abs(c).max(initial=0.0))
        stationarity = _stationarity(pg, x, mu, beta)
        logging.debug(
            f"Outer step {iteration}: violation {violation:.3g},"
            f" stationarity {stationarity:.3g}, {rho=:.3g}"
        )
        if violation < 0.1 * config.tol and (
            stationarity <= 1e-5 * max(initial, 1e-300)
        ):
            break
        nu = nu - rho * c
        if violation > 0.25 * previous:
            rho *= RHO_GROWTH
        previous = violation
    x = project_lengths(pg, x)
    ratio = _stationarity(pg, x, mu, beta) / initial if initial else 0.0
    return x, iteration, ratio


def planarize(grid: Grid, config: PlanarizeConfig) -> PlanarGrid:
    pg = init_planar(grid, config.init, config.width)
    pg.diagnostics["initial_notch"] = notch_objective(pg)[0]
    mu = config.mu
    for attempt in range(MU_RETRIES + 1):
        x, iterations, stationarity = _solve(pg, config, mu)
        pg.x, pg.mu, pg.stationarity = x, mu, stationarity
        pg.iterations += iterations
        if mu <= 0 or attempt == MU_RETRIES:
            break
        overlap, _ = fab_penalty(pg)
        if overlap <= 0:
            break
        audit.log(
            "Lamellae still overlap, raising the fabrication weight",
            overlap=overlap,
            mu=mu * MU_GROWTH,
        )
        mu *= MU_GROWTH

    residual = float(pg.residuals.max(initial=0.0))
    pg.converged = residual < config.tol
    pg.diagnostics.update(
        residual=residual,
        notch=notch_objective(pg)[0],
        fab=fab_penalty(pg)[0],
    )
    if stationarity > 1e-5:
        audit.log(
            "Planar layout is not fully stationary",
            ratio=stationarity,
            level=logging.WARNING,
        )
    if not pg.converged:
        raise NonConvergence(
            f"Member lengths off by {residual:.3g} after"
            f" {pg.iterations} iterations",
            result=pg,
        )
    logging.info(
        f"Planarized {len(pg.ids)} members: E_notch"
        f" {pg.diagnostics['notch']:.6g}, residual {residual:.3g}"
    )
    return pg


class NotchModel(Model):
    g: str
    h: str
    lam_g: float
    lam_h: float
    length: float


class LamellaModel(Model):
    id: str
    length: float
    planar_length: float
    start: list[float]
    end: list[float]


class PlanarModel(Model):
    width: float
    mu: float
    converged: bool
    iterations: int
    residual: float
    stationarity: float
    e_notch: float
    e_fab: float
    members: list[LamellaModel]
    notches: list[NotchModel]


def planar_model(pg: PlanarGrid) -> PlanarModel:
    lengths = pg.notch_lengths
    return PlanarModel(
        width=pg.width,
        mu=pg.mu,
        converged=pg.converged,
        iterations=pg.iterations,
        residual=float(pg.residuals.max(initial=0.0)),
        stationarity=pg.stationarity,
        e_notch=notch_objective(pg)[0],
        e_fab=fab_penalty(pg)[0],
        members=[
            LamellaModel(
                id=id,
                length=float(pg.lengths[k]),
                planar_length=float(pg.planar_lengths[k]),
                start=pg.endpoints[k, 0].tolist(),
                end=pg.endpoints[k, 1].tolist(),
            )
            for k, id in enumerate(pg.ids)
        ],
        notches=[
            NotchModel(
                g=pg.ids[n.g],
                h=pg.ids[n.h],
                lam_g=n.lam_g,
                lam_h=n.lam_h,
                length=float(length),
            )
            for n, length in zip(pg.notches, lengths)
        ],
    )
