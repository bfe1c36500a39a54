import math

import numpy as np
import pytest

from pabo.baselines import run_grid
from pabo.cases import generate_case_bundle
from pabo.core import (
    PaboConfig,
    PaboState,
    non_dominated_in_history,
    replay_supervisor,
    run_pabo,
    should_stop,
    supervisor_step,
)
from pabo.objectives import make_synthetic
from pabo.pareto import Observation, ObjectivePair, ParetoArchive, hypervolume_2d, non_dominated_filter, reference_point
from pabo.result import BUDGET, EXHAUSTED, VANISHED
from pabo.space import parse_space

GRID = parse_space({"params": [{"name": "x1", "values": list(np.linspace(0, 1, 16))}, {"name": "x2", "values": list(np.linspace(0, 1, 16))}]})


@pytest.fixture(scope="module")
def cs1():
    return generate_case_bundle("cs1-analogue", 0)


def _state(pairs):
    hist = [Observation((i,), ObjectivePair(*p), i) for i, p in enumerate(pairs)]
    return PaboState([hist[0].hp, hist[1].hp], [hist[0].hp, hist[1].hp], hist, ParetoArchive(), 100), hist


def test_supervisor_rejects_dominated_gamma():
    state, hist = _state([(0.1, 0.1), (0.5, 0.5), (0.3, 0.9), (0.4, 0.8)])
    state, to_eng, to_err = supervisor_step(state, hist[2], hist[3])
    assert not to_err and hist[3].hp not in state.d_err


def test_supervisor_accepts_nondominated_theta():
    state, hist = _state([(0.5, 0.1), (0.9, 0.05), (0.1, 0.9), (0.95, 0.95)])
    state, to_eng, _ = supervisor_step(state, hist[2], hist[3])
    assert to_eng and hist[2].hp in state.d_eng


def test_supervisor_same_point_once():
    state, hist = _state([(0.5, 0.5), (0.6, 0.6), (0.1, 0.1)])
    state.d_err.append(hist[2].hp)
    state.d_eng.append(hist[2].hp)
    for _ in range(2):  # idempotent
        state, _, _ = supervisor_step(state, hist[2], hist[2])
    assert state.d_err.count(hist[2].hp) == 1 and state.d_eng.count(hist[2].hp) == 1


@pytest.mark.parametrize(
    "n, err_acq, eng_acq, reason",
    [
        (5, 0.0, 0.0, VANISHED),
        (40, 1.0, 1.0, BUDGET),
        (192, 1.0, 1.0, EXHAUSTED),
        (5, 1.0, 0.0, None),
    ],
)
def test_should_stop(n, err_acq, eng_acq, reason):
    hist = [Observation((i,), ObjectivePair(0.1, 0.1), i) for i in range(n)]
    state = PaboState([], [], hist, ParetoArchive(), 192)
    stop, why = should_stop(state, err_acq, eng_acq, PaboConfig(max_evals=40))
    assert why == reason and stop == (reason is not None)


@pytest.mark.parametrize("kwargs", [dict(n_init=1), dict(max_evals=1), dict(stop_epsilon=-1.0), dict(gp_refit_every=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PaboConfig(**kwargs)


def test_budget_equals_init(cs1):
    res = run_pabo(cs1.space, cs1.objective, PaboConfig(max_evals=2, seed=1))
    assert res.stop_reason == BUDGET and res.evals_used == 2
    assert sorted(res.front_pairs()) == sorted(non_dominated_filter([o.objectives for o in res.history]))


def test_conflicting_quadratics_recovery():
    obj = make_synthetic("conflicting-quadratics", GRID)
    truth = run_grid(GRID, obj)
    ref = reference_point([o.objectives for o in truth.history])
    hv_true = hypervolume_2d(truth.front_pairs(), ref)
    ratios = [
        hypervolume_2d(run_pabo(GRID, obj, PaboConfig(seed=s, max_evals=60)).front_pairs(), ref) / hv_true
        for s in range(3)
    ]
    assert np.median(ratios) >= 0.95


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_run_invariants(cs1, seed):
    cs1.objective.reset()
    res = run_pabo(cs1.space, cs1.objective, PaboConfig(seed=seed))
    hist = res.history
    assert res.evals_used <= 40 and cs1.objective.eval_count == res.evals_used
    assert len({o.hp for o in hist}) == len(hist)
    assert sorted(res.front_pairs()) == sorted(non_dominated_filter([o.objectives for o in hist]))
    seen = {o.hp for o in hist}
    assert set(res.extra["d_err"]) <= seen and set(res.extra["d_eng"]) <= seen
    trace = res.extra["trace"]
    assert {t.theta for t in trace if t.theta} <= set(res.extra["d_err"])
    assert {t.gamma for t in trace if t.gamma} <= set(res.extra["d_eng"])
    d_err, d_eng, decisions = replay_supervisor(hist, trace, 2)
    assert d_err == res.extra["d_err"] and d_eng == res.extra["d_eng"]
    assert decisions == [(t.theta_to_eng, t.gamma_to_err) for t in trace]


def test_bit_reproducible(cs1):
    a = run_pabo(cs1.space, cs1.objective, PaboConfig(seed=7))
    b = run_pabo(cs1.space, cs1.objective, PaboConfig(seed=7))
    assert [(o.hp, o.objectives) for o in a.history] == [(o.hp, o.objectives) for o in b.history]


def test_ablation_keeps_sets_separate(cs1):
    res = run_pabo(cs1.space, cs1.objective, PaboConfig(seed=0, supervisor=False))
    trace = res.extra["trace"]
    assert not any(t.theta_to_eng or t.gamma_to_err for t in trace)
    init = [o.hp for o in res.history[:2]]
    assert set(res.extra["d_err"]) == set(init) | {t.theta for t in trace if t.theta}


def test_small_space_exhausts():
    space = parse_space({"params": [{"name": "x", "values": [0, 1, 2]}]})
    res = run_pabo(space, make_synthetic("conflicting-quadratics", space), PaboConfig(max_evals=10, seed=0))
    assert res.stop_reason in (EXHAUSTED, VANISHED)
    assert res.evals_used <= 3


def test_non_dominated_in_history():
    hist = [Observation((i,), ObjectivePair(*p), i) for i, p in enumerate([(0.1, 0.1), (0.2, 0.2), (0.1, 0.1)])]
    assert non_dominated_in_history(hist[0], hist)
    assert not non_dominated_in_history(hist[1], hist)
