import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pabo import gp
from pabo.acquisition import SpaceExhausted, expected_improvement, select_next
from pabo.space import enumerate_space, parse_space, to_numeric


@pytest.mark.parametrize(
    "mean, var, best, expected",
    [
        (0.0, 1.0, 0.0, 1 / math.sqrt(2 * math.pi)),
        (1.0, 0.0, 2.0, 1.0),
        (3.0, 0.0, 2.0, 0.0),
    ],
)
def test_ei_examples(mean, var, best, expected):
    assert expected_improvement(mean, var, best) == pytest.approx(expected, abs=1e-15)


def test_ei_matches_quadrature():
    mu, sd, best = 0.3, 0.7, 0.1
    x = np.linspace(mu - 12 * sd, mu + 12 * sd, 200001)
    integrand = np.maximum(best - x, 0) * stats.norm.pdf(x, mu, sd)
    assert expected_improvement(mu, sd**2, best) == pytest.approx(np.trapezoid(integrand, x), rel=1e-6)


@settings(max_examples=200)
@given(st.floats(-10, 10), st.floats(1e-6, 10), st.floats(-10, 10), st.floats(1e-6, 10))
def test_ei_monotone(mu, var, best, delta):
    ei = expected_improvement(mu, var, best)
    assert ei >= 0
    assert expected_improvement(mu + delta, var, best) <= ei + 1e-12
    assert expected_improvement(mu, var + delta, best) >= ei - 1e-12


SPACE = parse_space({"params": [{"name": "x", "values": [0, 1, 2, 3, 4]}]})


def _model(points, y):
    X = np.array([to_numeric(SPACE, hp) for hp in points])
    return gp.fit(X, y, gp.KernelConfig(gp.MATERN52, 0.3, 1.0, 1e-6))


def test_select_never_returns_evaluated():
    evaluated = [(0,), (4,)]
    res = select_next(_model(evaluated, [1.0, 0.0]), SPACE, evaluated, 0.0, keep_values=True)
    assert res.best_point not in evaluated
    assert res.best_value == max(res.values.values())


def test_select_single_remaining():
    evaluated = [(i,) for i in range(5) if i != 2]
    res = select_next(_model(evaluated, [1.0, 0.5, 0.2, 0.0]), SPACE, evaluated, 0.0)
    assert res.best_point == (2,)


def test_select_exhausted():
    evaluated = list(enumerate_space(SPACE))
    with pytest.raises(SpaceExhausted):
        select_next(_model(evaluated, [0.0, 1, 2, 3, 4]), SPACE, evaluated, 0.0)


def test_select_tie_breaks_to_lowest_index():
    # constant data makes every unevaluated point equally promising by symmetry
    evaluated = [(2,)]
    res = select_next(_model(evaluated, [1.0]), SPACE, evaluated, 1.0, keep_values=True)
    top = max(res.values.values())
    ties = sorted(hp for hp, v in res.values.items() if v == top)
    assert res.best_point == ties[0]


def test_select_matches_exhaustive_scan():
    rng = np.random.default_rng(2)
    space = parse_space({"params": [{"name": "a", "values": list(range(6))}, {"name": "b", "values": list(range(5))}]})
    pts = list(enumerate_space(space))
    evaluated = [pts[i] for i in rng.choice(len(pts), 8, replace=False)]
    X = np.array([to_numeric(space, hp) for hp in evaluated])
    y = rng.normal(size=8)
    model = gp.fit(X, y, gp.KernelConfig(gp.MATERN52, 0.4, 1.0, 1e-4))
    res = select_next(model, space, evaluated, y.min())
    best, best_hp = -1.0, None
    for hp in pts:
        if hp in evaluated:
            continue
        mu, var = gp.posterior(model, to_numeric(space, hp))
        ei = float(expected_improvement(mu, var, y.min()))
        if ei > best:
            best, best_hp = ei, hp
    assert res.best_point == best_hp
    assert res.best_value == pytest.approx(best, rel=1e-9)
