import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_gp
from pabo import gp
from pabo.gp import KernelConfig, NotPSDError

SE = "squared-exponential"


def test_single_point_interpolates():
    model = gp.fit([[0.5]], [3.0], KernelConfig(SE, 0.2, 1.0, 0.0))
    mean, var = gp.posterior(model, [0.5])
    assert mean == pytest.approx(3.0, abs=1e-9)
    assert var <= 1e-8


def test_linear_data_interpolates():
    X = np.linspace(0, 1, 5)[:, None]
    y = X.ravel().copy()
    model = gp.fit(X, y, KernelConfig(gp.MATERN52, 0.3, 1.0, 0.0))
    for x, t in zip(X, y):
        mean, var = gp.posterior(model, x)
        assert mean == pytest.approx(t, rel=1e-6, abs=1e-9)
        assert var <= 1e-8


def test_far_query_reverts_to_prior():
    X = np.array([[0.0], [0.1], [0.2]])
    y = np.array([-1.0, 0.0, 1.0])  # population std sqrt(2/3)
    k = KernelConfig(SE, 0.05, 1.7, 1e-6)
    model = gp.fit(X, y, k)
    mean, var = gp.posterior(model, [50.0])
    assert mean == pytest.approx(y.mean(), abs=1e-9)
    assert var == pytest.approx(1.7 * y.var(), rel=0.01)


def test_duplicate_conflicting_inputs_use_jitter_or_fail():
    X = [[0.3], [0.3]]
    y = [0.0, 1.0]
    try:
        model = gp.fit(X, y, KernelConfig(SE, 0.2, 1.0, 0.0))
    except NotPSDError:
        return
    assert model.jitter > 0


def test_dimension_mismatch():
    model = gp.fit([[0.1, 0.2]], [1.0])
    with pytest.raises(ValueError):
        gp.posterior(model, [0.1])
    with pytest.raises(ValueError):
        gp.fit([[0.1], [0.2]], [1.0])


def test_matches_dense_oracle_small():
    rng = np.random.default_rng(7)
    X = rng.random((6, 3))
    y = rng.normal(size=6)
    Xq = rng.random((4, 3))
    k = KernelConfig(gp.MATERN52, (0.3, 0.5, 0.8), 1.3, 1e-3)
    model = gp.fit(X, y, k)
    mu, var = gp.posterior_batch(model, Xq)
    o_mu, o_var, o_lml = dense_gp(X, y, Xq, k.family, k.length_scale, k.signal_variance, k.noise_variance)
    np.testing.assert_allclose(mu, o_mu, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(var, o_var, rtol=1e-8, atol=1e-10)
    assert gp.log_marginal_likelihood(model) == pytest.approx(o_lml, rel=1e-8)


def test_lml_single_point_closed_form():
    model = gp.fit([[0.0]], [2.5], KernelConfig(SE, 1.0, 1.0, 0.0))
    assert gp.log_marginal_likelihood(model) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)


def test_lml_prefers_generating_length_scale():
    rng = np.random.default_rng(11)
    wins = 0
    for trial in range(10):
        X = rng.random((25, 1))
        true = KernelConfig(SE, 0.2, 1.0, 1e-4)
        K = true(X, X) + 1e-4 * np.eye(25)
        y = np.linalg.cholesky(K) @ rng.normal(size=25)
        good = gp.log_marginal_likelihood(gp.fit(X, y, true))
        bad = gp.log_marginal_likelihood(gp.fit(X, y, KernelConfig(SE, 20.0, 1.0, 1e-4)))
        wins += good > bad
    assert wins == 10


def test_kernel_selection_fine_sinusoid():
    X = np.linspace(0, 1, 40)[:, None]
    y = np.sin(2 * np.pi * 15 * X.ravel())
    fine = KernelConfig(SE, 0.01, 1.0, 1e-4)
    coarse = KernelConfig(SE, 10.0, 1.0, 1e-4)
    # independent check of the expected winner
    lml_fine = dense_gp(X, y, X[:1], SE, 0.01, 1.0, 1e-4)[2]
    lml_coarse = dense_gp(X, y, X[:1], SE, 10.0, 1.0, 1e-4)[2]
    assert lml_fine > lml_coarse
    assert gp.fit_kernel_hyperparams(X, y, [coarse, fine]) == fine


def test_kernel_selection_tie_goes_to_smaller_length_scale():
    # points so far apart that K is the identity for both candidates
    X = [[0.0], [1.0]]
    y = [1.0, 1.0]
    a = KernelConfig(gp.MATERN52, 0.02, 1.0, 1e-6)
    b = KernelConfig(gp.MATERN52, 0.01, 1.0, 1e-6)
    assert gp.fit_kernel_hyperparams(X, y, [a, b]) == b


def test_kernel_selection_all_fail():
    X = [[0.5], [0.5]]
    y = [0.0, 1.0]
    cands = [KernelConfig(SE, ls, 1.0, 0.0) for ls in (0.1, 1.0)]
    with pytest.raises(NotPSDError):
        gp.fit_kernel_hyperparams(X, y, cands)


def test_refine_length_scales_finds_irrelevant_dimension():
    rng = np.random.default_rng(0)
    X = rng.random((30, 2))
    y = np.sin(6 * X[:, 0])  # second coordinate is irrelevant
    start = gp.fit_kernel_hyperparams(X, y)
    refined = gp.refine_length_scales(X, y, start)
    assert refined.length_scale[1] > refined.length_scale[0]
    assert gp.log_marginal_likelihood(gp.fit(X, y, refined)) >= gp.log_marginal_likelihood(gp.fit(X, y, start))


@st.composite
def gp_problems(draw):
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, 64))
    dim = draw(st.integers(1, 8))
    family = draw(st.sampled_from([SE, gp.MATERN52]))
    k = KernelConfig(family, float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.5, 2.0)), float(10 ** rng.uniform(-3, -1)))
    return rng.random((n, dim)), rng.normal(size=n) * rng.uniform(0.1, 100), rng.random((5, dim)), k


@settings(max_examples=40, deadline=None)
@given(gp_problems())
def test_posterior_matches_dense_oracle(problem):
    X, y, Xq, k = problem
    model = gp.fit(X, y, k)
    mu, var = gp.posterior_batch(model, Xq)
    o_mu, o_var, _ = dense_gp(X, y, Xq, k.family, k.length_scale, k.signal_variance, k.noise_variance)
    scale = model.target_std
    np.testing.assert_allclose(mu, o_mu, rtol=1e-8, atol=1e-8 * scale)
    np.testing.assert_allclose(var, o_var, rtol=1e-8, atol=1e-8 * k.signal_variance * scale**2)
    assert np.all(var >= 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 20))
def test_adding_point_never_increases_variance(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.random((n + 1, 2))
    y = rng.normal(size=n + 1)
    k = KernelConfig(gp.MATERN52, 0.3, 1.0, 1e-3)
    xq = rng.random((7, 2))
    # same target standardization on both sides so variances are comparable
    before = gp.posterior_standardized(gp.fit(X[:n], y[:n], k), xq)[1]
    after = gp.posterior_standardized(gp.fit(X, y, k), xq)[1]
    assert np.all(after <= before + 1e-9)
