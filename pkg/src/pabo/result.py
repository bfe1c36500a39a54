from __future__ import annotations

import time
from dataclasses import dataclass, field

from .objectives import ObjectiveFn
from .pareto import Observation, ObjectivePair, ParetoArchive, archive_insert

BUDGET = "budget"
VANISHED = "acquisition-vanished"
EXHAUSTED = "space-exhausted"
FAILED = "gp-failure"


@dataclass
class RunResult:
    front: ParetoArchive
    history: list[Observation]
    stop_reason: str
    wall_time: float
    algorithm: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def evals_used(self) -> int:
        return len(self.history)

    def front_pairs(self) -> list[ObjectivePair]:
        return self.front.pairs()


class Recorder:
    """Memoizing evaluation front-end shared by all optimizers.

    Each HPVector reaches the objective at most once; repeats are cache hits
    and do not add to the history.
    """

    def __init__(self, objective: ObjectiveFn):
        self.objective = objective
        self.cache: dict[tuple, Observation] = {}
        self.history: list[Observation] = []
        self.archive = ParetoArchive()
        self.cache_hits = 0
        self.timestamps: list[float] = []
        self.started = time.perf_counter()

    def __call__(self, hp) -> Observation:
        hp = tuple(hp)
        obs = self.cache.get(hp)
        if obs is not None:
            self.cache_hits += 1
            return obs
        pair = self.objective.evaluate(hp)
        obs = Observation(hp, pair, len(self.history))
        self.cache[hp] = obs
        self.history.append(obs)
        self.timestamps.append(time.time())
        archive_insert(self.archive, obs)
        return obs

    def __contains__(self, hp) -> bool:
        return tuple(hp) in self.cache

    def __len__(self) -> int:
        return len(self.history)

    def result(self, stop_reason: str, algorithm: str, **extra) -> RunResult:
        extra.setdefault("timestamps", list(self.timestamps))
        return RunResult(
            self.archive,
            self.history,
            stop_reason,
            time.perf_counter() - self.started,
            algorithm,
            extra,
        )
