"""
Genetic search over the boundary anchors of a grid. Candidates are repaired
onto the linear constraint set before evaluation, so only meaningful grids
get scored; anything that still fails scores +inf.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from gridshell.parallel import parallel_map
from gridshell.services import audit
from gridshell.services.dual import canonicalize
from gridshell.services.energy import EnergyReport, evaluate_energy
from gridshell.services.errors import (
    DegenerateMember,
    GridshellError,
    InfeasibleGrid,
)
from gridshell.services.layout import (
    Grid,
    assemble,
    correct_layout,
    slot_parameters,
)
from gridshell.services.surface import Surface

BLEND_ALPHA = 0.5
JITTER_TRIES = 8


@dataclass(frozen=True)
class GAConfig:
    population: int = 32
    generations: int = 60
    seed_rotations: int = 64
    crossover: float = 0.8
    mutation: float = 0.01
    elite: int = 2
    tournament: int = 3
    min_gap: int = 2
    stall_generations: int = 15
    stall_tol: float = 1e-6
    seed: int = 0


@dataclass
class Candidate:
    t: np.ndarray
    repaired: np.ndarray | None = None
    e_effort: float = np.inf
    e_shape: float = 0.0
    fitness: float = np.inf
    version: int = 0
    combinatorics: str = ""
    feasible: bool = False
    rotation: float | None = None

    def score(self, lam: float) -> float:
        self.fitness = (
            self.e_effort - lam * self.e_shape if self.feasible else np.inf
        )
        return self.fitness


@dataclass
class HistoryRow:
    generation: int
    best: float
    mean: float
    feasible: int


@dataclass
class Optimization:
    grid: Grid
    report: EnergyReport
    best: Candidate
    lam: float
    history: list[HistoryRow] = field(default_factory=list)
    seeds: list[Candidate] = field(default_factory=list)


def gap_in_t(surface: Surface, min_gap: int) -> float:
    """Discrete anchor gap expressed in boundary parameter units."""
    return min_gap / surface.dual.N


def constraint_system(n: int, m: int, gap: float):
    """
    Rows of A t <= b over t = [g_0x, g_0y, g_1x, ..., h_0x, h_0y, ...]:
    each member spans at least `gap` both ways around the loop, each family
    is strictly ordered by t_x with gaps of at least `gap`, and every
    entry lies in [0, 1].
    """
    size = 2 * (n + m)
    rows, bounds = [], []

    def row(entries, bound):
        a = np.zeros(size)
        for index, value in entries:
            a[index] = value
        rows.append(a)
        bounds.append(bound)

    for k in range(n + m):
        x, y = 2 * k, 2 * k + 1
        row([(x, 1), (y, -1)], -gap)
        row([(y, 1), (x, -1)], 1 - gap)
    for start, count in ((0, n), (n, m)):
        for k in range(start, start + count - 1):
            row([(2 * k, 1), (2 * k + 2, -1)], -gap)
    for k in range(size):
        row([(k, -1)], 0.0)
        row([(k, 1)], 1.0)
    return np.array(rows), np.array(bounds)


def satisfies(t, n: int, m: int, gap: float, tol=1e-12) -> bool:
    A, b = constraint_system(n, m, gap)
    return bool((A @ np.asarray(t, float) <= b + tol).all())


def repair(t, n: int, m: int, gap: float) -> np.ndarray | None:
    """
    Project a working vector in [0, 2) onto the constraint set: wrap each
    pair onto its canonical representative, sort each family, then push
    entries forward until every gap holds. None when that overruns [0, 1).
    """
    pairs = np.asarray(t, float).reshape(n + m, 2) % 2.0
    repaired = []
    for start, count in ((0, n), (n, m)):
        members = []
        for tx, ty in pairs[start : start + count].tolist():
            try:
                tx, ty, _ = canonicalize(tx, ty)
            except DegenerateMember:
                tx, ty, _ = canonicalize(tx, tx + gap)
            members.append((tx, ty))
        members.sort()
        previous = None
        for tx, ty in members:
            if previous is not None and tx < previous + gap:
                tx = previous + gap
            ty = max(ty, tx + gap)
            if ty - tx > 1 - gap or ty >= 1.0:
                return None
            repaired.append((tx, ty))
            previous = tx
    return np.array(repaired).ravel()


def _identity(payload):
    return payload


def build_grid(surface: Surface, t, n, m, min_gap, rotation=0.0):
    """Repair, correct and assemble the grid for one working vector."""
    repaired = repair(t, n, m, gap_in_t(surface, min_gap))
    if repaired is None:
        raise InfeasibleGrid("Anchor vector violates the gap constraints")
    grid = Grid.from_vector(repaired, n, m, rotation)
    grid = correct_layout(surface.dual, grid, min_gap)
    return assemble(surface, grid)


def _measure(surface: Surface, job):
    """Build and score the grid for one anchor vector."""
    t, n, m, min_gap = job
    try:
        grid = build_grid(surface, t, n, m, min_gap)
        report = evaluate_energy(surface, grid, 0.0)
    except (GridshellError, ValueError) as e:
        logging.debug(f"Infeasible candidate: {e}")
        return None
    return {
        "repaired": grid.vector(),
        "e_effort": report.e_effort,
        "e_shape": report.e_shape,
        "version": grid.version,
        "combinatorics": grid.combinatorics,
    }


def measure(surface: Surface, candidates: list[Candidate], n, m, min_gap):
    results = parallel_map(
        _measure,
        [(c.t, n, m, min_gap) for c in candidates],
        _identity,
        surface,
        workers=surface.workers,
    )
    for candidate, result in zip(candidates, results):
        candidate.feasible = result is not None
        if result is None:
            continue
        candidate.repaired = result["repaired"]
        candidate.e_effort = result["e_effort"]
        candidate.e_shape = result["e_shape"]
        candidate.version = result["version"]
        candidate.combinatorics = result["combinatorics"]
    return candidates


def evaluate(surface: Surface, candidate: Candidate, n, m, lam, min_gap=2):
    measure(surface, [candidate], n, m, min_gap)
    return candidate.score(lam)


def auto_lambda(candidates: list[Candidate]) -> float:
    efforts = [abs(c.e_effort) for c in candidates if c.feasible]
    return max(1.0, float(np.mean(efforts))) if efforts else 1.0


def rotation_vectors(n: int, m: int, rotation: float, steps: int):
    rotations = [rotation + j / steps for j in range(steps)]
    return rotations, [slot_parameters(n, m, r) for r in rotations]


def seed_population(
    surface: Surface, grid0: Grid, config: GAConfig, lam=None
) -> tuple[list[Candidate], float, list[Candidate]]:
    """
    Evaluate evenly spaced rotations of the initial grid and keep the best.
    Returns the population, the weighting λ (derived when not given) and
    every evaluated seed.
    """
    n, m = grid0.n, grid0.m
    rotations, vectors = rotation_vectors(
        n, m, grid0.rotation, config.seed_rotations
    )
    seeds = [
        Candidate(t=t, rotation=r % 1.0) for r, t in zip(rotations, vectors)
    ]
    measure(surface, seeds, n, m, config.min_gap)

    rng = np.random.default_rng([config.seed, 0])
    spread = 0.5 / config.seed_rotations
    for k, seed in enumerate(seeds):
        tries = 0
        while not seed.feasible and tries < JITTER_TRIES:
            shift = rng.normal(0.0, spread)
            rotation = rotations[k] + shift
            seed = Candidate(
                t=slot_parameters(n, m, rotation), rotation=rotation % 1.0
            )
            measure(surface, [seed], n, m, config.min_gap)
            tries += 1
        if seed.feasible and seed is not seeds[k]:
            audit.log(
                "Replaced infeasible seed rotation",
                rotation=round(rotations[k] % 1.0, 6),
                jittered=round(seed.rotation, 6),
            )
        seeds[k] = seed

    feasible = [x for x in seeds if x.feasible]
    if not feasible:
        raise InfeasibleGrid("No rotation of the initial grid is feasible")
    lam = auto_lambda(feasible) if lam is None else lam
    for seed in seeds:
        seed.score(lam)

    size = population_size(config, n, m)
    order = sorted(range(len(seeds)), key=lambda k: (seeds[k].fitness, k))
    population = [seeds[k] for k in order[:size] if seeds[k].feasible]
    while len(population) < size:
        k = len(population)
        child_rng = np.random.default_rng([config.seed, 0, k])
        parent = population[k % len(feasible)]
        child = Candidate(
            t=parent.repaired
            + child_rng.normal(0.0, config.mutation, parent.repaired.shape)
        )
        population.append(child)
    fresh = [x for x in population if x.repaired is None]
    measure(surface, fresh, n, m, config.min_gap)
    for candidate in fresh:
        candidate.score(lam)
    logging.info(
        f"Seeded {len(population)} candidates from {len(seeds)} rotations,"
        f" {len(feasible)} feasible, λ = {lam:.6g}"
    )
    return population, lam, seeds


def population_size(config: GAConfig, n: int, m: int) -> int:
    # at least two candidates per entry of the 2(n + m) working vector
    size = max(config.population, 4 * (n + m))
    if size != config.population:
        logging.info(f"Population raised to {size} for {n + m} members")
    return size


def _tournament(rng, population: list[Candidate], size: int) -> Candidate:
    picks = rng.integers(0, len(population), size)
    best = min(picks.tolist(), key=lambda k: (population[k].fitness, k))
    return population[best]


def _blend(rng, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    low, high = np.minimum(a, b), np.maximum(a, b)
    spread = BLEND_ALPHA * (high - low)
    return rng.uniform(low - spread, high + spread)


def offspring(
    config: GAConfig, population: list[Candidate], generation: int, k: int
) -> Candidate:
    rng = np.random.default_rng([config.seed, generation, k])
    first = _tournament(rng, population, config.tournament)
    second = _tournament(rng, population, config.tournament)
    same = first.combinatorics == second.combinatorics
    if same and rng.random() < config.crossover:
        t = _blend(rng, first.repaired, second.repaired)
    else:
        t = first.repaired.copy()
    t = t + rng.normal(0.0, config.mutation, t.shape)
    return Candidate(t=t % 2.0)


def _history_row(generation, population) -> HistoryRow:
    finite = [x.fitness for x in population if np.isfinite(x.fitness)]
    return HistoryRow(
        generation,
        min(x.fitness for x in population),
        float(np.mean(finite)) if finite else np.inf,
        len(finite),
    )


def optimize(
    surface: Surface, grid0: Grid, config: GAConfig, lam=None
) -> Optimization:
    n, m = grid0.n, grid0.m
    population, lam, seeds = seed_population(surface, grid0, config, lam)
    size = len(population)
    elite = min(config.elite, size)
    history = [_history_row(0, population)]

    for generation in range(1, config.generations + 1):
        ranked = sorted(
            range(size), key=lambda k: (population[k].fitness, k)
        )
        parents = [x for x in population if x.feasible]
        parents = parents or [population[ranked[0]]]
        children = [
            offspring(config, parents, generation, k)
            for k in range(elite, size)
        ]
        measure(surface, children, n, m, config.min_gap)
        for child in children:
            child.score(lam)
        population = [population[k] for k in ranked[:elite]] + children
        history.append(_history_row(generation, population))

        stall = config.stall_generations
        if generation >= stall:
            gain = history[generation - stall].best - history[-1].best
            if gain < config.stall_tol:
                logging.info(f"Stalled after {generation} generations")
                break

    best = min(population, key=lambda x: x.fitness)
    rotation = grid0.rotation if best.rotation is None else best.rotation
    grid = build_grid(surface, best.t, n, m, config.min_gap, rotation)
    report = evaluate_energy(surface, grid, lam)
    logging.info(
        f"Optimized E_grid = {report.e_grid:.6g}"
        f" after {len(history) - 1} generations"
    )
    return Optimization(grid, report, best, lam, history, seeds)
