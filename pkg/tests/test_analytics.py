import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perimeter_defense.analytics import (
    MarkovModel,
    asymptotic_percentage,
    expected_percentage,
    monte_carlo_summary,
    percentage_curve,
    state_distribution,
    stationary_distribution,
    transition_matrix,
)
from perimeter_defense.errors import ChainIndexError, DegenerateChainError

from oracles import power_iteration, sample_chain_percentage

probs = st.floats(0.0, 1.0, allow_nan=False)


@pytest.mark.parametrize("p1, p2", [(-0.1, 0.5), (0.5, 1.2)])
def test_model_validation(p1, p2):
    with pytest.raises(ValueError):
        MarkovModel(p1, p2)


@pytest.mark.parametrize("p1, p2, expected", [
    (0.0, 0.0, [[1, 1], [0, 0]]),
    (1.0, 1.0, [[0, 0], [1, 1]]),
    (0.3, 0.6, [[0.7, 0.4], [0.3, 0.6]]),
])
def test_transition_matrix(p1, p2, expected):
    np.testing.assert_allclose(transition_matrix(MarkovModel(p1, p2)), expected)


@given(probs, probs)
def test_columns_are_stochastic(p1, p2):
    P = transition_matrix(MarkovModel(p1, p2))
    np.testing.assert_allclose(P.sum(axis=0), 1.0, atol=1e-15)
    assert P[1, 0] == p1 and P[1, 1] == p2


def test_state_distribution_examples():
    m = MarkovModel(0.3, 0.6)
    np.testing.assert_array_equal(state_distribution(m, 1), [1.0, 0.0])
    np.testing.assert_allclose(state_distribution(m, 2), [0.7, 0.3])
    np.testing.assert_allclose(state_distribution(m, 200), power_iteration(transition_matrix(m)), atol=1e-10)
    np.testing.assert_allclose(state_distribution(m, 200), [4 / 7, 3 / 7], atol=1e-10)


@pytest.mark.parametrize("i", [0, -3])
def test_state_distribution_index(i):
    with pytest.raises(ChainIndexError):
        state_distribution(MarkovModel(0.3, 0.6), i)


@given(probs, probs, st.integers(1, 60))
def test_distributions_are_probability_vectors(p1, p2, i):
    eta = state_distribution(MarkovModel(p1, p2), i)
    assert np.all(eta >= -1e-15)
    assert eta.sum() == pytest.approx(1.0, abs=1e-12)


@given(probs, probs)
def test_first_game_percentage_is_p1(p1, p2):
    assert expected_percentage(MarkovModel(p1, p2), 1) == 100.0 * p1


@pytest.mark.parametrize("p", [0.0, 0.25, 0.9, 1.0])
def test_equal_probabilities_are_flat(p):
    m = MarkovModel(p, p)
    assert percentage_curve(m, 30) == pytest.approx(np.full(30, 100 * p))
    if p > 0:
        np.testing.assert_allclose(stationary_distribution(m), [1 - p, p])
        assert asymptotic_percentage(m) == pytest.approx(100 * p)


def test_expected_percentage_index():
    with pytest.raises(ChainIndexError):
        expected_percentage(MarkovModel(0.3, 0.6), 0)
    assert percentage_curve(MarkovModel(0.3, 0.6), 0).size == 0


def test_percentage_curve_matches_explicit_sum():
    m = MarkovModel(0.35, 0.8)
    p = np.array([m.p1, m.p2])
    for n in (1, 2, 7, 40):
        ref = 100 * sum(p @ state_distribution(m, i) for i in range(1, n + 1)) / n
        assert expected_percentage(m, n) == pytest.approx(ref, abs=1e-12)


def test_expected_percentage_matches_chain_sampling():
    assert expected_percentage(MarkovModel(0.3, 0.6), 50) == pytest.approx(
        sample_chain_percentage(0.3, 0.6, 50, 1_000_000, seed=1), abs=0.2
    )


def test_stationary_examples():
    m = MarkovModel(0.3, 0.6)
    np.testing.assert_allclose(stationary_distribution(m), [0.4 / 0.7, 0.3 / 0.7])
    assert asymptotic_percentage(m) == pytest.approx(42.857, abs=1e-3)
    assert abs(expected_percentage(m, 500) - asymptotic_percentage(m)) < 0.5
    np.testing.assert_array_equal(stationary_distribution(MarkovModel(0.0, 0.4)), [1.0, 0.0])


def test_degenerate_chain():
    with pytest.raises(DegenerateChainError):
        stationary_distribution(MarkovModel(0.0, 1.0))
    with pytest.raises(DegenerateChainError):
        asymptotic_percentage(MarkovModel(0.0, 1.0))


@given(probs, probs)
def test_stationary_fixed_point(p1, p2):
    m = MarkovModel(p1, p2)
    if 1 + p1 - p2 == 0:
        return
    eta = stationary_distribution(m)
    assert np.max(np.abs(transition_matrix(m) @ eta - eta)) <= 1e-12


@pytest.mark.parametrize("p1, p2", [(0.3, 0.6), (1.0, 0.5), (0.9, 0.1), (0.2, 0.95)])
def test_convergence_to_asymptote(p1, p2):
    m = MarkovModel(p1, p2)
    curve = percentage_curve(m, 200)
    limit = asymptotic_percentage(m)
    assert abs(curve[199] - limit) < abs(curve[19] - limit)


def test_monte_carlo_small(params, grid, engine):
    a = monte_carlo_summary(params, 3, 25, 7, grid, engine=engine)
    b = monte_carlo_summary(params, 3, 25, 7, grid, engine=engine)
    assert a.mean_curve.shape == a.theory_curve.shape == (25,)
    np.testing.assert_array_equal(a.mean_curve, b.mean_curve)
    np.testing.assert_array_equal(a.per_trial_fractions, b.per_trial_fractions)
    assert np.all((a.mean_curve >= 0) & (a.mean_curve <= 100))
    np.testing.assert_allclose(a.mean_curve, a.per_trial_curves.mean(axis=0))
    assert a.theory_curve[0] == pytest.approx(100 * a.p1)


def test_monte_carlo_empty(params, grid, engine):
    s = monte_carlo_summary(params, 1, 0, 0, grid, engine=engine)
    assert s.mean_curve.size == 0 and s.theory_curve.size == 0
    with pytest.raises(ValueError):
        monte_carlo_summary(params, 0, 5, 0, grid, engine=engine)
