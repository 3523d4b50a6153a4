"""Sequential perimeter-defense games: validation, arrivals and the decision loop."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dubins import (
    TWO_PI,
    Configuration,
    DubinsPath,
    SegmentKind,
    sample_path,
    shortest_path_fixed_heading,
    shortest_path_free_heading,
    wrap_angle,
)
from .engagement import (
    ARC_SAMPLES,
    BOUNDARY_SAMPLES,
    Branch,
    CapturePoint,
    EngagementSolution,
    GameParams,
    engagement_configs,
    head_on_region,
    solve_capture_point,
    solve_critical_radius,
    tau,
)
from .errors import CollocatedError, NoFeasibleEngagementError
from .reachability import GridSpec, region_max_norm

HEAD_ON_TOL = 1e-6
DEFAULT_DT = 0.05

Trajectory = list[tuple[float, Configuration]]


@dataclass(frozen=True)
class Verdict:
    passed: bool
    lhs: float
    rhs: float
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    assumption1: Verdict
    assumption2: Verdict

    @property
    def ok(self) -> bool:
        return self.assumption1.passed and self.assumption2.passed

    def warnings(self) -> list[str]:
        out = []
        if not self.assumption1.passed:
            out.append(f"assumption 1 fails: {self.assumption1.note}")
        if not self.assumption2.passed:
            out.append(
                f"assumption 2 fails: {self.assumption2.lhs:.4f} > {self.assumption2.rhs:.4f}"
            )
        return out


def assumption2_sides(params: GameParams) -> tuple[float, float]:
    rho_hat = params.rho_T + params.r_T - params.rho_A
    m = 2.0 * rho_hat * params.omega_D / (rho_hat**2 - 1.0)
    lhs = rho_hat + (math.pi + math.atan(m)) / params.omega_D
    return lhs, params.rho_T / params.nu


def validate_assumptions(params: GameParams, grid: GridSpec) -> ValidationReport:
    bound = params.entry_radius
    try:
        sol = solve_critical_radius(params, grid)
    except NoFeasibleEngagementError as exc:
        a1 = Verdict(False, math.nan, bound, str(exc))
    else:
        region = head_on_region(params, grid.cell, 0.0, sol.r_D_star)
        reach = region_max_norm(region)
        a1 = Verdict(reach <= bound, reach, bound, "" if reach <= bound else "dominance region leaves the sensing region")
    lhs, rhs = assumption2_sides(params)
    return ValidationReport(a1, Verdict(lhs <= rhs, lhs, rhs))


def is_head_on(xi_D: Configuration, xi_A: Configuration, tol: float = HEAD_ON_TOL) -> bool:
    dx, dy = xi_A.x - xi_D.x, xi_A.y - xi_D.y
    if dx == 0.0 and dy == 0.0:
        raise CollocatedError("agents are collocated")
    bearing = math.atan2(dy, dx)
    return (
        abs(wrap_angle(xi_D.heading - bearing)) <= tol
        and abs(wrap_angle(xi_A.heading - xi_D.heading - math.pi)) <= tol
    )


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    arrivals, coins = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(arrivals), np.random.default_rng(coins)


@dataclass(frozen=True)
class ArrivalProcess:
    seed: int
    count: int

    def angles(self) -> np.ndarray:
        """Independent arrival angles, uniform on (-pi, pi]."""
        if self.count < 0:
            raise ValueError("count must be non-negative")
        rng, _ = _streams(self.seed)
        return math.pi - TWO_PI * rng.random(self.count)


class Outcome(str, enum.Enum):
    CAPTURE = "Capture"
    BREACH = "Breach"


class StartState(str, enum.Enum):
    CENTER = "Center"
    CAPTURE_CIRCLE = "CaptureCircle"


@dataclass
class EngagementRecord:
    index: int
    phi: float
    outcome: Outcome
    start_state: StartState
    t_start: float
    t_end: float
    end_pose: Configuration
    capture_point: CapturePoint | None = None
    breach_point: tuple[float, float] | None = None
    defender_trajectory: Trajectory = field(default_factory=list)
    intruder_trajectory: Trajectory = field(default_factory=list)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass
class SequenceResult:
    records: list[EngagementRecord]

    @property
    def n_captures(self) -> int:
        return sum(r.outcome is Outcome.CAPTURE for r in self.records)

    @property
    def capture_fraction(self) -> float:
        return self.n_captures / max(1, len(self.records))


def _straight(start: Configuration, length: float, radius: float) -> DubinsPath:
    return DubinsPath(start, radius, ((SegmentKind.STRAIGHT, length),) if length > 0 else ())


def _shift(samples: Trajectory, t0: float) -> Trajectory:
    return [(t0 + t, pose) for t, pose in samples]


class GameEngine:
    """Runs engagements for one parameter set, caching the per-class solutions.

    Capture points for every arrival angle are rotations of the two
    canonical (zero-angle) solutions, one per symmetry branch.
    """

    def __init__(
        self,
        params: GameParams,
        grid: GridSpec,
        sol: EngagementSolution | None = None,
        *,
        n_samples: int = ARC_SAMPLES,
        n_boundary: int = BOUNDARY_SAMPLES,
        dt: float = DEFAULT_DT,
        branch: str = "random",
        record_trajectories: bool = True,
    ):
        if branch not in ("random", "ccw", "cw"):
            raise ValueError(f"branch must be random, ccw or cw, got {branch!r}")
        self.params = params
        self.grid = grid
        self.sol = sol or solve_critical_radius(params, grid)
        self.n_samples = n_samples
        self.n_boundary = n_boundary
        self.dt = dt
        self.branch = branch
        self.record_trajectories = record_trajectories
        self._canonical: dict[Branch, CapturePoint] = {}

    def canonical_capture(self, branch: Branch) -> CapturePoint:
        if branch not in self._canonical:
            self._canonical[branch] = solve_capture_point(
                0.0, self.params, self.sol, self.grid, self.n_boundary, branch, self.n_samples
            )
        return self._canonical[branch]

    def capture_point(self, phi: float, branch: Branch) -> CapturePoint:
        return self.canonical_capture(branch).rotated(phi)

    def _pick_branch(self, coins: np.random.Generator) -> Branch:
        if self.branch == "random":
            return Branch.CCW if coins.random() < 0.5 else Branch.CW
        return Branch(self.branch)

    def engage(
        self,
        xi_D: Configuration,
        phi: float,
        coins: np.random.Generator,
        index: int = 0,
        t_start: float = 0.0,
        start_state: StartState = StartState.CENTER,
    ) -> EngagementRecord:
        p, sol = self.params, self.sol
        R_D, R_A = p.kin_D.radius, p.kin_A.radius
        phi = float(wrap_angle(phi))
        entry = Configuration(
            (p.r_T + p.rho_T) * math.cos(phi), (p.r_T + p.rho_T) * math.sin(phi), phi + math.pi
        )
        if tau(xi_D, phi, p, sol) <= sol.deadline:
            cap = self.capture_point(phi, self._pick_branch(coins))
            xi_Ds, xi_As = engagement_configs(phi, sol.r_D_star, p.rho_A)
            record = EngagementRecord(
                index, phi, Outcome.CAPTURE, start_state, t_start,
                t_start + sol.deadline + cap.intruder_time, cap.post_capture, capture_point=cap,
            )
            if self.record_trajectories:
                to_engage = shortest_path_fixed_heading(xi_D, xi_Ds, R_D)
                to_capture = shortest_path_free_heading(xi_Ds, cap.x_cap, R_D)
                d = _shift(sample_path(to_engage, self.dt, p.kin_D), t_start)
                hold = t_start + to_engage.length / p.kin_D.speed
                if sol.deadline > hold - t_start:
                    d.append((t_start + sol.deadline, xi_Ds))
                d += _shift(sample_path(to_capture, self.dt, p.kin_D)[1:], t_start + sol.deadline)
                inbound = _straight(entry, p.r_T + p.rho_T - sol.r_D_star - p.rho_A, R_A)
                pursue = shortest_path_free_heading(xi_As, cap.x_cap, R_A)
                a = _shift(sample_path(inbound, self.dt, p.kin_A), t_start)
                a += _shift(sample_path(pursue, self.dt, p.kin_A)[1:], t_start + sol.deadline)
                record.defender_trajectory, record.intruder_trajectory = d, a
            return record

        breach = (p.r_T * math.cos(phi), p.r_T * math.sin(phi))
        t_breach = p.rho_T / p.nu
        if math.hypot(xi_D.x, xi_D.y) == 0.0:
            home = _straight(xi_D, 0.0, R_D)
        else:
            home = shortest_path_free_heading(xi_D, (0.0, 0.0), R_D)
        t_home = home.length / p.kin_D.speed
        end_pose = Configuration(0.0, 0.0, home.end.heading)
        record = EngagementRecord(
            index, phi, Outcome.BREACH, start_state, t_start,
            t_start + max(t_breach, t_home), end_pose, breach_point=breach,
        )
        if self.record_trajectories:
            record.defender_trajectory = _shift(sample_path(home, self.dt, p.kin_D), t_start)
            record.intruder_trajectory = _shift(
                sample_path(_straight(entry, p.rho_T, R_A), self.dt, p.kin_A), t_start
            )
        return record

    def run(self, angles, seed: int = 0) -> SequenceResult:
        _, coins = _streams(seed)
        pose = Configuration(0.0, 0.0, 0.0)
        state = StartState.CENTER
        t = 0.0
        records = []
        for k, phi in enumerate(angles):
            rec = self.engage(pose, float(phi), coins, k, t, state)
            records.append(rec)
            t, pose = rec.t_end, rec.end_pose
            state = StartState.CAPTURE_CIRCLE if rec.outcome is Outcome.CAPTURE else StartState.CENTER
        return SequenceResult(records)


def run_single_engagement(
    xi_D: Configuration,
    phi: float,
    params: GameParams,
    sol: EngagementSolution,
    grid: GridSpec,
    rng: np.random.Generator,
    **engine_kwargs,
) -> EngagementRecord:
    return GameEngine(params, grid, sol, **engine_kwargs).engage(xi_D, phi, rng)


def run_sequence(
    params: GameParams,
    n_arrivals: int,
    seed: int,
    grid: GridSpec,
    *,
    engine: GameEngine | None = None,
    angles=None,
    **engine_kwargs,
) -> SequenceResult:
    """Chained games from a defender at the centre; ``angles`` overrides random arrivals."""
    if n_arrivals < 0:
        raise ValueError("n_arrivals must be non-negative")
    engine = engine or GameEngine(params, grid, **engine_kwargs)
    if angles is None:
        angles = ArrivalProcess(seed, n_arrivals).angles()
    return engine.run(angles, seed)
