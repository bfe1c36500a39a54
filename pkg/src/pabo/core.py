"""Pseudo agent-based multi-objective Bayesian optimization.

Two single-objective BO processes run side by side, one modelling ``err`` on
its training set ``d_err`` and one modelling ``eng`` on ``d_eng``.  Each
iteration each process proposes its EI maximizer (``theta`` for err, ``gamma``
for eng) and both points are evaluated.  A supervisor then cross-feeds:
``gamma`` joins ``d_err`` iff its (err, eng) pair is non-dominated among all
observations so far, and symmetrically ``theta`` joins ``d_eng``.  The loop
ends when both acquisitions vanish, the budget is spent, or the grid runs out.

The reported front is the non-dominated subset of everything evaluated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import gp
from .acquisition import select_next
from .objectives import ObjectiveFn
from .pareto import Observation, ParetoArchive, dominates
from .result import BUDGET, EXHAUSTED, FAILED, VANISHED, Recorder, RunResult
from .space import HPVector, SearchSpace, numeric_grid, sample_distinct, to_numeric

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PaboConfig:
    n_init: int = 2
    stop_epsilon: float = 1e-6
    max_evals: int = 40
    seed: int = 0
    gp_refit_every: int = 1
    supervisor: bool = True
    kernel_family: str = gp.MATERN52
    ard: bool = False
    skip_vanished: bool = False

    def __post_init__(self):
        if self.n_init < 2:
            raise ValueError("n_init must be at least 2")
        if self.max_evals < self.n_init:
            raise ValueError("max_evals must be at least n_init")
        if self.stop_epsilon < 0:
            raise ValueError("stop_epsilon must be non-negative")
        if self.gp_refit_every < 1:
            raise ValueError("gp_refit_every must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PaboState:
    d_err: list[HPVector]
    d_eng: list[HPVector]
    history: list[Observation]
    archive: ParetoArchive
    cardinality: int
    iteration: int = 0


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    theta: HPVector | None
    gamma: HPVector | None
    err_acq: float
    eng_acq: float
    theta_to_eng: bool
    gamma_to_err: bool


def non_dominated_in_history(obs: Observation, history: list[Observation]) -> bool:
    return not any(dominates(o.objectives, obs.objectives) for o in history if o is not obs)


def supervisor_step(
    state: PaboState, theta: Observation | None, gamma: Observation | None
) -> tuple[PaboState, bool, bool]:
    """Cross-feed non-dominated proposals into the other process's set.

    Returns the state plus whether theta went to d_eng and gamma to d_err.
    ``None`` stands for a process that proposed nothing this iteration.
    Calling it again with the same pair changes nothing.
    """
    theta_to_eng = gamma_to_err = False
    if theta is not None:
        theta_to_eng = non_dominated_in_history(theta, state.history)
        if theta_to_eng and theta.hp not in state.d_eng:
            state.d_eng.append(theta.hp)
    if gamma is not None:
        gamma_to_err = non_dominated_in_history(gamma, state.history)
        if gamma_to_err and gamma.hp not in state.d_err:
            state.d_err.append(gamma.hp)
    return state, theta_to_eng, gamma_to_err


def should_stop(
    state: PaboState, last_err_acq: float, last_eng_acq: float, cfg: PaboConfig
) -> tuple[bool, str | None]:
    """Stop test; acquisitions are standardized EI maxima."""
    n = len(state.history)
    if n >= state.cardinality:
        return True, EXHAUSTED
    if n >= cfg.max_evals:
        return True, BUDGET
    if max(last_err_acq, last_eng_acq) < cfg.stop_epsilon:
        return True, VANISHED
    return False, None


def _fit_objective(X, y, kernel, family, ard):
    if kernel is None:
        kernel = gp.fit_kernel_hyperparams(X, y, gp.default_kernel_grid(family))
        if ard:
            kernel = gp.refine_length_scales(X, y, kernel)
    return gp.fit(X, y, kernel), kernel


def run_pabo(space: SearchSpace, objective: ObjectiveFn, cfg: PaboConfig = PaboConfig()) -> RunResult:
    if space.cardinality < cfg.n_init:
        raise ValueError("search space is smaller than n_init")
    rec = Recorder(objective)
    rng = np.random.default_rng(cfg.seed)
    init = sample_distinct(space, rng, cfg.n_init)
    for hp in init:
        rec(hp)
    state = PaboState(list(init), list(init), rec.history, rec.archive, space.cardinality)
    grid = numeric_grid(space)
    trace: list[IterationRecord] = []
    kernels = {"err": None, "eng": None}
    err_acq = eng_acq = math.inf

    def extra():
        return {
            "trace": trace,
            "d_err": list(state.d_err),
            "d_eng": list(state.d_eng),
            "kernels": dict(kernels),
            "config": cfg.to_dict(),
        }

    while True:
        stop, reason = should_stop(state, err_acq, eng_acq, cfg)
        if stop:
            break
        if state.iteration % cfg.gp_refit_every == 0:
            kernels = {"err": None, "eng": None}
        models = {}
        try:
            for key, pts in (("err", state.d_err), ("eng", state.d_eng)):
                X = np.array([to_numeric(space, hp) for hp in pts])
                y = np.array([getattr(rec.cache[hp].objectives, key) for hp in pts])
                models[key], kernels[key] = _fit_objective(X, y, kernels[key], cfg.kernel_family, cfg.ard)
        except np.linalg.LinAlgError as exc:
            log.warning("GP fit failed at iteration %d: %s", state.iteration, exc)
            return rec.result(FAILED, "pabo", partial=True, error=str(exc), **extra())

        evaluated = rec.cache.keys()
        best_err = min(rec.cache[hp].objectives.err for hp in state.d_err)
        best_eng = min(rec.cache[hp].objectives.eng for hp in state.d_eng)
        a_err = select_next(models["err"], space, evaluated, best_err, grid)
        a_eng = select_next(models["eng"], space, evaluated, best_eng, grid)
        # EI scales with the target std, so this is EI on standardized targets
        err_acq = a_err.best_value / models["err"].target_std
        eng_acq = a_eng.best_value / models["eng"].target_std
        stop, reason = should_stop(state, err_acq, eng_acq, cfg)
        if stop:
            break

        state.iteration += 1
        theta = gamma = None
        if err_acq >= cfg.stop_epsilon or not cfg.skip_vanished:
            theta = rec(a_err.best_point)
        if (eng_acq >= cfg.stop_epsilon or not cfg.skip_vanished) and (a_eng.best_point in rec or len(rec) < cfg.max_evals):
            gamma = rec(a_eng.best_point)
        if theta is not None and theta.hp not in state.d_err:
            state.d_err.append(theta.hp)
        if gamma is not None and gamma.hp not in state.d_eng:
            state.d_eng.append(gamma.hp)
        to_eng = to_err = False
        if cfg.supervisor:
            state, to_eng, to_err = supervisor_step(state, theta, gamma)
        trace.append(
            IterationRecord(
                state.iteration,
                theta.hp if theta is not None else None,
                gamma.hp if gamma is not None else None,
                err_acq,
                eng_acq,
                to_eng,
                to_err,
            )
        )
        log.debug(
            "iter %d: theta=%s gamma=%s evals=%d front=%d",
            state.iteration, theta and theta.hp, gamma and gamma.hp, len(rec), len(rec.archive),
        )

    return rec.result(reason, "pabo", partial=False, **extra())


def replay_supervisor(
    history: list[Observation], trace: list[IterationRecord], n_init: int, supervisor: bool = True
):
    """Recompute d_err / d_eng offline from a history and its proposals.

    Cross-feed decisions are re-derived with a direct pairwise check against
    the observations made up to the end of each iteration.
    """
    by_hp = {o.hp: o for o in history}
    d_err = [o.hp for o in history[:n_init]]
    d_eng = list(d_err)
    decisions = []
    for rec in trace:
        proposed = [hp for hp in (rec.theta, rec.gamma) if hp is not None]
        prefix = history[: max(by_hp[hp].eval_index for hp in proposed) + 1]

        def free(hp):
            if hp is None or not supervisor:
                return False
            e, g = by_hp[hp].objectives
            return not any(
                o.objectives.err <= e and o.objectives.eng <= g and tuple(o.objectives) != (e, g)
                for o in prefix
            )

        if rec.theta is not None and rec.theta not in d_err:
            d_err.append(rec.theta)
        if rec.gamma is not None and rec.gamma not in d_eng:
            d_eng.append(rec.gamma)
        t_free, g_free = free(rec.theta), free(rec.gamma)
        if t_free and rec.theta not in d_eng:
            d_eng.append(rec.theta)
        if g_free and rec.gamma not in d_err:
            d_err.append(rec.gamma)
        decisions.append((t_free, g_free))
    return d_err, d_eng, decisions
