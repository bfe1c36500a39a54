"""Dominance, non-dominated filtering and 2-D hypervolume.

Everything here is minimization over exactly two objectives, ``err`` and
``eng``.  Dominance is the strict form: no worse in both, better in one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .space import HPVector


class ObjectivePair(NamedTuple):
    err: float
    eng: float

    def validate(self) -> "ObjectivePair":
        if not (math.isfinite(self.err) and math.isfinite(self.eng)):
            raise ValueError(f"non-finite objective pair {self}")
        if self.err < 0 or self.eng < 0:
            raise ValueError(f"negative objective value in {self}")
        return self


@dataclass(frozen=True)
class Observation:
    hp: HPVector
    objectives: ObjectivePair
    eval_index: int


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def _pairs(points) -> np.ndarray:
    if len(points) == 0:
        return np.empty((0, 2))
    first = points[0]
    if isinstance(first, Observation):
        return np.array([p.objectives for p in points], dtype=float)
    return np.asarray(points, dtype=float).reshape(-1, 2)


def non_dominated_mask(points) -> np.ndarray:
    """Boolean mask of points not dominated by any other point.

    Sorts once by (err, eng) and sweeps, so this is O(n log n).  Equal pairs
    never dominate each other and are all kept.
    """
    P = _pairs(points)
    n = P.shape[0]
    keep = np.zeros(n, dtype=bool)
    if n == 0:
        return keep
    order = np.lexsort((P[:, 1], P[:, 0]))
    best_before = math.inf  # min eng over strictly smaller err
    i = 0
    while i < n:
        err = P[order[i], 0]
        j = i
        while j < n and P[order[j], 0] == err:
            j += 1
        group_min = P[order[i], 1]
        if group_min < best_before:
            for k in order[i:j]:
                if P[k, 1] == group_min:
                    keep[k] = True
        best_before = min(best_before, group_min)
        i = j
    return keep


def non_dominated_filter(points: Sequence) -> list:
    """The non-dominated subset of ``points`` in input order."""
    mask = non_dominated_mask(points)
    return [p for p, m in zip(points, mask) if m]


@dataclass
class ParetoArchive:
    members: list[Observation] = field(default_factory=list)

    def insert(self, obs: Observation) -> tuple[bool, list[Observation]]:
        return archive_insert(self, obs)

    def dominated_by_member(self, pair: ObjectivePair) -> bool:
        return any(dominates(m.objectives, pair) for m in self.members)

    def pairs(self) -> list[ObjectivePair]:
        return [m.objectives for m in self.members]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def archive_insert(archive: ParetoArchive, obs: Observation) -> tuple[bool, list[Observation]]:
    """Insert unless dominated; evict whatever the newcomer dominates."""
    if archive.dominated_by_member(obs.objectives):
        return False, []
    evicted = [m for m in archive.members if dominates(obs.objectives, m.objectives)]
    if evicted:
        archive.members = [m for m in archive.members if m not in evicted]
    archive.members.append(obs)
    return True, evicted


def hypervolume_2d(front: Iterable[Sequence[float]], ref: Sequence[float]) -> float:
    """Area dominated by ``front`` inside the box bounded by ``ref``."""
    P = _pairs(list(front))
    if P.shape[0] == 0:
        return 0.0
    r_err, r_eng = float(ref[0]), float(ref[1])
    if np.any(P[:, 0] > r_err) or np.any(P[:, 1] > r_eng):
        raise ValueError("front point lies outside the reference box")
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    area = 0.0
    level = r_eng
    for err, eng in P:
        if eng < level:
            area += (r_err - float(err)) * (level - float(eng))
            level = float(eng)
    return float(area)


def reference_point(*point_sets: Iterable[Sequence[float]], margin: float = 1.01) -> ObjectivePair:
    """Componentwise max over all given points, scaled by ``margin``."""
    stacked = [_pairs(list(s)) for s in point_sets]
    P = np.vstack([s for s in stacked if s.size] or [np.zeros((1, 2))])
    top = P.max(axis=0) * margin
    return ObjectivePair(float(top[0]), float(top[1]))
