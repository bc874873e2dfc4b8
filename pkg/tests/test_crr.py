import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msaci.crr import (
    IntervalVector,
    compute_components,
    conformal_interval,
    critical_points,
    order_indices,
    predict_intervals,
)
from msaci.errors import DefinednessError
from msaci.ridge import RidgeState

from oracles import dense_components, full_conformal_interval, random_crr_instance


def view_for(X, Y, x_n, a):
    return RidgeState(a, X.shape[1], Y.shape[1]).absorb_many(X, Y).peek_with_test(x_n)


def test_components_constant_feature_hand_values():
    # n = 4, c = 2, a = 0: C = I - J/4, worked out by hand
    X = np.ones((3, 1))
    Y = np.full((3, 1), 2.0)
    comp = compute_components(view_for(X, Y, np.ones(1), 0.0))
    np.testing.assert_allclose(comp.A[:, 0], [0.5, 0.5, 0.5, -1.5], atol=1e-14)
    np.testing.assert_allclose(comp.b, [-0.25, -0.25, -0.25, 0.75], atol=1e-14)
    A, B = dense_components(X, Y, np.ones(1), 0.0)
    np.testing.assert_allclose(comp.A, A, atol=1e-12)
    np.testing.assert_allclose(comp.B, B, atol=1e-12)


def test_components_zero_labels():
    rng = np.random.default_rng(0)
    comp = compute_components(view_for(rng.normal(size=(5, 2)), np.zeros((5, 3)), rng.normal(size=2), 1.0))
    np.testing.assert_array_equal(comp.A[:-1], 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_components_match_dense(seed):
    rng = np.random.default_rng(seed)
    X, Y, x_n = rng.normal(size=(5, 2)), rng.normal(size=(5, 3)), rng.normal(size=2)
    comp = compute_components(view_for(X, Y, x_n, 1.3))
    A, B = dense_components(X, Y, x_n, 1.3)
    np.testing.assert_allclose(comp.A, A, atol=1e-9)
    np.testing.assert_allclose(comp.B, B, atol=1e-9)
    # dense B really has identical columns
    assert np.abs(B - B[:, :1]).max() < 1e-12
    # ours by construction exactly
    assert np.abs(comp.B - comp.B[:, :1]).max() == 0.0


def test_components_need_training_data():
    with pytest.raises(ValueError):
        compute_components(RidgeState(1.0, 1, 1).peek_with_test(np.ones(1)))


def test_constant_labels_give_point_interval():
    X = np.ones((9, 1))
    Y = np.full((9, 2), 3.25)
    iv = conformal_interval(view_for(X, Y, np.ones(1), 0.0), [0.4, 0.3])
    np.testing.assert_array_equal(iv.lower, [3.25, 3.25])
    np.testing.assert_array_equal(iv.upper, [3.25, 3.25])


@pytest.mark.parametrize("xv", [0.3, -2.7, 1e-3])
def test_constant_labels_exact_for_any_feature_value(xv):
    X = np.full((11, 1), xv)
    Y = np.full((11, 3), -183.8530583081131)
    for a in (0.0, 0.5, 5.0):
        iv = conformal_interval(view_for(X, Y, np.full(1, xv), a), [0.3, 0.5, 0.9])
        np.testing.assert_array_equal(iv.lower, Y[0])
        np.testing.assert_array_equal(iv.upper, Y[0])


def test_gaps_match_component_differences():
    rng = np.random.default_rng(4)
    comp = compute_components(view_for(rng.normal(size=(8, 3)), rng.normal(size=(8, 2)), rng.normal(size=3), 0.5))
    np.testing.assert_allclose(comp.gap_a, comp.A[:-1] - comp.A[-1], atol=1e-12)
    np.testing.assert_allclose(comp.gap_b, comp.b[-1] - comp.b[:-1], atol=1e-12)


def test_order_indices():
    assert order_indices(0.4, 5) == (1, 4)
    assert order_indices(0.1, 20) == (1, 19)
    assert order_indices(0.3, 10) == (1, 9)
    assert order_indices(0.2, 100) == (10, 90)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 2000), eps=st.floats(0.0, 1.0))
def test_upper_index_not_below_lower(n, eps):
    lo, hi = order_indices(eps, n)
    assert hi >= lo
    if eps >= 2 / n:
        assert 1 <= lo <= hi <= n - 1


def test_definedness_error():
    rng = np.random.default_rng(0)
    comp = compute_components(view_for(rng.normal(size=(4, 1)), rng.normal(size=(4, 2)), np.ones(1), 1.0))
    with pytest.raises(DefinednessError) as info:
        predict_intervals(comp, [0.5, 0.2])
    assert info.value.step == 2
    iv = predict_intervals(comp, [0.5, 0.2], allow_infinite=True)
    assert np.isfinite(iv.lower[0]) and iv.lower[1] == -np.inf and iv.upper[1] == np.inf


def test_equal_b_treated_as_infinite():
    comp = compute_components(view_for(np.ones((2, 1)), np.array([[0.0], [1.0]]), np.ones(1), 0.0))
    assert np.isfinite(critical_points(comp)).all()
    # strict inequality b_n > b_j: equal coefficients contribute no finite bound
    tied = type(comp)(comp.A, np.array([0.5, 0.5, 0.5]))
    assert np.isnan(critical_points(tied)).all()
    iv = predict_intervals(tied, [1.0])
    assert iv.lower[0] == -np.inf and iv.upper[0] == np.inf


def test_interval_vector_invariant():
    with pytest.raises(ValueError):
        IntervalVector(np.array([1.0]), np.array([0.0]), np.array([0.1]))
    iv = IntervalVector(np.array([0.0, -np.inf]), np.array([1.0, np.inf]), np.array([0.1, 0.1]), 3)
    assert iv.covers(1, 1.0) and iv.covers(1, 0.0) and not iv.covers(1, 1.0000001)
    assert iv.covers(2, 1e300)
    assert iv.width[1] == np.inf


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(6, 30),
    seed=st.integers(0, 10_000),
    e1=st.floats(0.0, 1.0),
    e2=st.floats(0.0, 1.0),
)
def test_nestedness(n, seed, e1, e2):
    rng = np.random.default_rng(seed)
    comp = compute_components(view_for(rng.normal(size=(n - 1, 2)), rng.normal(size=(n - 1, 2)), rng.normal(size=2), 1.0))
    lo_e, hi_e = sorted([2 / n + (1 - 2 / n) * e1, 2 / n + (1 - 2 / n) * e2])
    small = predict_intervals(comp, [lo_e, lo_e])
    big = predict_intervals(comp, [hi_e, hi_e])
    assert np.all(small.lower <= big.lower) and np.all(small.upper >= big.upper)


def compare_with_oracle(X, Y, x_n, a, eps, grid_step=1e-3):
    """Returns 'exact' when endpoints agree within one grid cell, 'superset'
    when b_n <= b_j for some j and our interval contains the oracle hull."""
    comp = compute_components(view_for(X, Y, x_n, a))
    iv = predict_intervals(comp, [eps] * Y.shape[1])
    degenerate = bool(np.any(comp.b[-1] <= comp.b[:-1]))
    for i in range(Y.shape[1]):
        lo, hi = full_conformal_interval(X, Y[:, i], x_n, a, eps, step=grid_step)
        if degenerate:
            assert iv.lower[i] <= lo + grid_step and iv.upper[i] >= hi - grid_step
            continue
        for ours, ref in ((iv.lower[i], lo), (iv.upper[i], hi)):
            if np.isinf(ref):
                assert ours == ref
            else:
                assert abs(ours - ref) <= grid_step, (ours, ref)
    return "superset" if degenerate else "exact"


def test_random_instance_matches_full_conformal_oracle():
    rng = np.random.default_rng(2024)
    X, Y = rng.normal(size=(9, 2)), rng.normal(size=(9, 2))
    assert compare_with_oracle(X, Y, rng.normal(size=2), 1.0, 0.4) == "exact"


def test_more_oracle_instances():
    rng = np.random.default_rng(77)
    outcomes = [compare_with_oracle(*random_crr_instance(rng)) for _ in range(20)]
    assert outcomes.count("exact") >= 15


def test_fixed_eps_online_coverage_iid():
    """Exchangeable data at fixed eps=0.2: miss rate within 0.05 over 500 steps."""
    rng = np.random.default_rng(0)
    p, h, n0, steps = 3, 2, 50, 500
    beta = rng.normal(size=(p, h))
    X = rng.normal(size=(n0 + steps, p))
    Y = X @ beta + rng.normal(size=(n0 + steps, h))
    state = RidgeState(1.0, p, h).absorb_many(X[:n0], Y[:n0])
    misses = np.zeros(h)
    for t in range(n0, n0 + steps):
        iv = conformal_interval(state.peek_with_test(X[t]), [0.2] * h)
        misses += ~((iv.lower <= Y[t]) & (Y[t] <= iv.upper))
        state.absorb(X[t], Y[t])
    rates = misses / steps
    assert np.all(np.abs(rates - 0.2) <= 0.05), rates
