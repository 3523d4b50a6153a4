"""Two-state Markov model of repeated games and Monte Carlo aggregation.

State 1 is "defender at the centre", state 2 "defender on the capture
circle". ``eta_i`` is the distribution at the start of game ``i``, so game 1
starts at the centre with certainty.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engagement import Branch, capture_probabilities
from .errors import ChainIndexError, DegenerateChainError
from .game import GameEngine, Outcome, run_sequence


@dataclass(frozen=True)
class MarkovModel:
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("p1", "p2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    @property
    def p(self) -> np.ndarray:
        return np.array([self.p1, self.p2])


def transition_matrix(model: MarkovModel) -> np.ndarray:
    """Column-stochastic: column j is the next-state distribution from state j."""
    return np.array([[1.0 - model.p1, 1.0 - model.p2], [model.p1, model.p2]])


def state_distribution(model: MarkovModel, i: int) -> np.ndarray:
    if i < 1:
        raise ChainIndexError(f"game index must be >= 1, got {i}")
    return np.linalg.matrix_power(transition_matrix(model), i - 1) @ np.array([1.0, 0.0])


def percentage_curve(model: MarkovModel, n: int) -> np.ndarray:
    """``expected_percentage`` for every horizon 1..n."""
    if n < 1:
        return np.empty(0)
    P = transition_matrix(model)
    eta = np.array([1.0, 0.0])
    per_game = np.empty(n)
    for k in range(n):
        per_game[k] = model.p @ eta
        eta = P @ eta
    return 100.0 * np.cumsum(per_game) / np.arange(1, n + 1)


def expected_percentage(model: MarkovModel, n: int) -> float:
    if n < 1:
        raise ChainIndexError(f"n must be >= 1, got {n}")
    return float(percentage_curve(model, n)[-1])


def stationary_distribution(model: MarkovModel) -> np.ndarray:
    denom = 1.0 + model.p1 - model.p2
    if denom == 0.0:
        raise DegenerateChainError("p1 = 0 and p2 = 1: no unique stationary distribution")
    return np.array([(1.0 - model.p2) / denom, model.p1 / denom])


def asymptotic_percentage(model: MarkovModel) -> float:
    return float(100.0 * model.p @ stationary_distribution(model))


@dataclass
class TrialSummary:
    n_trials: int
    n_arrivals: int
    per_trial_fractions: np.ndarray
    per_trial_curves: np.ndarray
    mean_curve: np.ndarray
    theory_curve: np.ndarray
    asymptotic: float
    p1: float
    p2: float


def monte_carlo_summary(params, n_trials: int, n_arrivals: int, seed: int, grid, *, engine=None) -> TrialSummary:
    """Independent sequences with substream seeds ``seed + trial``."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    engine = engine or GameEngine(params, grid, record_trajectories=False)
    curves = np.zeros((n_trials, n_arrivals))
    for trial in range(n_trials):
        result = run_sequence(params, n_arrivals, seed + trial, grid, engine=engine)
        hits = np.array([r.outcome is Outcome.CAPTURE for r in result.records], dtype=float)
        if n_arrivals:
            curves[trial] = 100.0 * np.cumsum(hits) / np.arange(1, n_arrivals + 1)
    p1, p2 = capture_probabilities(
        params, engine.sol, grid, engine.canonical_capture(Branch.CCW), engine.n_samples, engine.n_boundary
    )
    model = MarkovModel(p1, p2)
    fractions = curves[:, -1] / 100.0 if n_arrivals else np.zeros(n_trials)
    return TrialSummary(
        n_trials,
        n_arrivals,
        fractions,
        curves,
        curves.mean(axis=0),
        percentage_curve(model, n_arrivals),
        asymptotic_percentage(model),
        p1,
        p2,
    )
