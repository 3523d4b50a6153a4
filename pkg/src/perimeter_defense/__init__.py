"""Sequential perimeter defense against a faster-turning intruder, with Dubins kinematics."""

__version__ = "0.1.0"

from .analytics import (
    MarkovModel,
    asymptotic_percentage,
    expected_percentage,
    monte_carlo_summary,
    state_distribution,
    stationary_distribution,
    transition_matrix,
)
from .dubins import Configuration, Kinematics, shortest_path_fixed_heading, shortest_path_free_heading
from .engagement import (
    GameParams,
    capture_probabilities,
    guarding_arc,
    solve_capture_point,
    solve_critical_radius,
    tau,
)
from .game import ArrivalProcess, GameEngine, is_head_on, run_sequence, run_single_engagement, validate_assumptions
from .reachability import GridSpec, apollonius_disk, dominance_region, reach_set, time_field
