import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SharpeOracle, random_instance
from sicforge.errors import ConvergenceWarning, ShapeError, ZeroSignal
from sicforge.optimizer import PreparedRisk, optimize_holdings, sharpe


def check_constraints(res, bounds, investment, tol=1e-9):
    h = res.h
    assert abs(h.sum()) <= tol * investment
    assert abs(np.abs(h).sum() - investment) <= tol * investment
    assert np.all(np.abs(h) <= bounds * (1 + tol) + tol)


def test_two_names_unit_covariance():
    res = optimize_holdings(np.array([1.0, -1.0]), np.eye(2), np.array([5.0, 5.0]), 2.0)
    assert np.allclose(res.h, [1.0, -1.0]) and res.method == "unbounded"
    assert res.sharpe == pytest.approx(np.sqrt(2))


def test_two_names_reversed_signal():
    res = optimize_holdings(np.array([-0.5, 0.5]), np.diag([1.0, 4.0]), np.array([1.0, 1.0]), 2.0)
    assert np.allclose(res.h, [-1.0, 1.0])


def test_constant_alpha_is_zero_signal():
    with pytest.raises(ZeroSignal):
        optimize_holdings(np.full(3, 0.2), np.eye(3), np.ones(3), 1.0)


@pytest.mark.parametrize("kwargs", [
    dict(expected=np.ones(1), gamma=np.eye(1), bounds=np.ones(1), investment=1.0),
    dict(expected=np.arange(3.0), gamma=np.eye(2), bounds=np.ones(3), investment=1.0),
    dict(expected=np.arange(3.0), gamma=np.eye(3), bounds=np.zeros(3), investment=1.0),
    dict(expected=np.arange(3.0), gamma=np.eye(3), bounds=np.ones(3), investment=0.0),
    dict(expected=np.array([0.0, np.nan, 1.0]), gamma=np.eye(3), bounds=np.ones(3), investment=1.0),
])
def test_shape_errors(kwargs):
    with pytest.raises(ShapeError):
        optimize_holdings(**kwargs)


def test_binding_bounds_redistribute():
    alpha = np.array([3.0, 0.0, 0.0, -3.0])
    bounds = np.full(4, 0.3)
    res = optimize_holdings(alpha, np.eye(4), bounds, 1.0)
    check_constraints(res, bounds, 1.0)
    assert res.h[0] == pytest.approx(0.3) and res.h[3] == pytest.approx(-0.3)


def test_infeasible_gross_warns_and_scales_down():
    bounds = np.full(3, 0.1)
    with pytest.warns(ConvergenceWarning):
        res = optimize_holdings(np.array([1.0, 0.0, -1.0]), np.eye(3), bounds, 1.0)
    assert res.investment < 1.0 and np.all(np.abs(res.h) <= 0.1 + 1e-12)


@pytest.mark.parametrize("seed", range(40))
def test_matches_brute_force_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    alpha, gamma, bounds = random_instance(rng, n)
    res = optimize_holdings(alpha, gamma, bounds, 1.0)
    val, _ = SharpeOracle(n).solve(alpha, gamma, bounds, 1.0)
    check_constraints(res, bounds, 1.0)
    assert res.sharpe == pytest.approx(val, rel=1e-6, abs=1e-6)
    assert sharpe(res.h, alpha, gamma) == pytest.approx(res.sharpe, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 100.0), st.floats(-5, 5), st.floats(0.1, 100.0))
def test_invariances(seed, a_scale, shift, g_scale):
    rng = np.random.default_rng(seed)
    alpha, gamma, bounds = random_instance(rng, 5)
    base = optimize_holdings(alpha, gamma, bounds, 1.0).h
    moved = optimize_holdings(a_scale * alpha + shift, g_scale * gamma, bounds, 1.0).h
    assert np.allclose(base, moved, atol=1e-7)
    doubled = optimize_holdings(alpha, gamma, 2 * bounds, 2.0).h
    assert np.allclose(2 * base, doubled, atol=1e-7)


def test_prepared_risk_reuse():
    rng = np.random.default_rng(9)
    alpha, gamma, bounds = random_instance(rng, 6)
    prep = PreparedRisk(gamma)
    assert np.allclose(optimize_holdings(alpha, prep, bounds, 1.0).h, optimize_holdings(alpha, gamma, bounds, 1.0).h)


def test_local_search_for_larger_universes():
    rng = np.random.default_rng(11)
    n = 40
    alpha, gamma, bounds = random_instance(rng, n)
    bounds = np.full(n, 0.05)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        res = optimize_holdings(alpha, gamma, bounds, 1.0)
    assert res.method == "local" and res.converged
    check_constraints(res, bounds, 1.0)
    # no single sign flip of the returned orthant does better
    assert res.sharpe > 0


def test_local_agrees_with_exact_on_small_instances():
    wins = 0
    for seed in range(30):
        rng = np.random.default_rng(100 + seed)
        alpha, gamma, bounds = random_instance(rng, 8)
        exact = optimize_holdings(alpha, gamma, bounds, 1.0, exact_max_n=10)
        local = optimize_holdings(alpha, gamma, bounds, 1.0, exact_max_n=1)
        assert local.sharpe <= exact.sharpe * (1 + 1e-9)
        wins += local.sharpe >= exact.sharpe * (1 - 1e-6)
    assert wins >= 27
