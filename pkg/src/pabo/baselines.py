"""Grid search, random search and NSGA-II over the same discrete grids."""

from __future__ import annotations

import bisect
import math
from dataclasses import asdict, dataclass

import numpy as np

from .objectives import ObjectiveFn
from .result import BUDGET, EXHAUSTED, Recorder, RunResult
from .space import CARDINALITY_GUARD, SearchSpace, SpaceError, enumerate_space, sample_distinct

CROWDING_RANGE_FLOOR = 1e-12


def run_grid(space: SearchSpace, objective: ObjectiveFn, guard: int = CARDINALITY_GUARD) -> RunResult:
    points = enumerate_space(space, guard)
    rec = Recorder(objective)
    for hp in points:
        rec(hp)
    return rec.result(EXHAUSTED, "grid")


def run_random(space: SearchSpace, objective: ObjectiveFn, budget: int, seed: int = 0) -> RunResult:
    if budget > space.cardinality:
        raise SpaceError(f"budget {budget} exceeds cardinality {space.cardinality}")
    rng = np.random.default_rng(seed)
    rec = Recorder(objective)
    for hp in sample_distinct(space, rng, budget):
        rec(hp)
    return rec.result(BUDGET, "random", budget=budget, seed=seed)


def fast_nondominated_sort(points) -> list[list[int]]:
    """Partition indices of 2-objective ``points`` into ranked fronts.

    Uses the two-objective sweep: after a lexicographic sort, a point belongs
    to the first front whose smallest second objective exceeds its own.
    Those front minima increase with rank, so a binary search finds it.
    Identical pairs share a rank.  Within a front indices are ascending.
    """
    P = np.asarray([tuple(p) for p in points], dtype=float).reshape(-1, 2)
    n = P.shape[0]
    if n == 0:
        return []
    order = np.lexsort((P[:, 1], P[:, 0]))
    front_min: list[float] = []
    rank = np.empty(n, dtype=int)
    prev = None
    for i in order:
        pair = (P[i, 0], P[i, 1])
        if pair == prev:
            rank[i] = rank[prev_i]
            continue
        r = bisect.bisect_right(front_min, pair[1])
        if r == len(front_min):
            front_min.append(pair[1])
        else:
            front_min[r] = pair[1]
        rank[i] = r
        prev, prev_i = pair, i
    fronts: list[list[int]] = [[] for _ in range(len(front_min))]
    for i in range(n):
        fronts[rank[i]].append(i)
    return fronts


def crowding_distance(front) -> list[float]:
    P = np.asarray([tuple(p) for p in front], dtype=float).reshape(-1, 2)
    n = P.shape[0]
    if n <= 2:
        return [math.inf] * n
    dist = np.zeros(n)
    for m in range(P.shape[1]):
        order = np.argsort(P[:, m], kind="stable")
        vals = P[order, m]
        span = max(vals[-1] - vals[0], CROWDING_RANGE_FLOOR)
        dist[order[0]] = dist[order[-1]] = math.inf
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist.tolist()


@dataclass(frozen=True)
class Nsga2Config:
    pop_size: int = 10
    max_generations: int = 50
    crossover_prob: float = 0.9
    mutation_prob: float | None = None  # None -> 1 / number of params
    seed: int = 0

    def __post_init__(self):
        if self.pop_size < 4 or self.pop_size % 2:
            raise ValueError("pop_size must be even and at least 4")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")
        for p in (self.crossover_prob, self.mutation_prob):
            if p is not None and not 0 <= p <= 1:
                raise ValueError("probabilities must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


def _rank_and_crowding(pairs):
    fronts = fast_nondominated_sort(pairs)
    rank = np.empty(len(pairs), dtype=int)
    crowd = np.empty(len(pairs))
    for r, members in enumerate(fronts):
        rank[members] = r
        crowd[members] = crowding_distance([pairs[i] for i in members])
    return fronts, rank, crowd


def environmental_selection(pairs, size: int) -> list[int]:
    """Pick ``size`` indices by rank, breaking the last front by crowding."""
    fronts, _, crowd = _rank_and_crowding(pairs)
    chosen: list[int] = []
    for members in fronts:
        if len(chosen) + len(members) <= size:
            chosen.extend(members)
        else:
            members = sorted(members, key=lambda i: -crowd[i])
            chosen.extend(members[: size - len(chosen)])
        if len(chosen) == size:
            break
    return chosen


def run_nsga2(space: SearchSpace, objective: ObjectiveFn, cfg: Nsga2Config = Nsga2Config()) -> RunResult:
    if cfg.pop_size > space.cardinality:
        raise SpaceError("pop_size exceeds cardinality")
    rng = np.random.default_rng(cfg.seed)
    n_genes = len(space.params)
    sizes = np.array(space.shape)
    pm = 1.0 / n_genes if cfg.mutation_prob is None else cfg.mutation_prob
    rec = Recorder(objective)

    pop = [tuple(hp) for hp in sample_distinct(space, rng, cfg.pop_size)]
    pairs = [rec(hp).objectives for hp in pop]

    def better(i, j, rank, crowd):
        if rank[i] != rank[j]:
            return i if rank[i] < rank[j] else j
        return i if crowd[i] >= crowd[j] else j

    for _ in range(cfg.max_generations):
        _, rank, crowd = _rank_and_crowding(pairs)
        children = []
        while len(children) < cfg.pop_size:
            parents = []
            for _ in range(2):
                i, j = rng.integers(cfg.pop_size, size=2)
                parents.append(np.array(pop[better(i, j, rank, crowd)]))
            a, b = parents
            if n_genes > 1 and rng.random() < cfg.crossover_prob:
                cut = int(rng.integers(1, n_genes))
                a, b = np.r_[a[:cut], b[cut:]], np.r_[b[:cut], a[cut:]]
            for child in (a, b):
                flips = rng.random(n_genes) < pm
                if flips.any():
                    child = child.copy()
                    child[flips] = rng.integers(sizes[flips])
                children.append(tuple(int(g) for g in child))
        children = children[: cfg.pop_size]
        child_pairs = [rec(hp).objectives for hp in children]
        merged = pop + children
        merged_pairs = pairs + child_pairs
        keep = environmental_selection(merged_pairs, cfg.pop_size)
        pop = [merged[i] for i in keep]
        pairs = [merged_pairs[i] for i in keep]

    return rec.result(
        BUDGET,
        "nsga2",
        population=pop,
        cache_hits=rec.cache_hits,
        config=cfg.to_dict(),
    )
