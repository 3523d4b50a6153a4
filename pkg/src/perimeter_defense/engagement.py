"""Critical engagement radius, guarding arcs and capture-point selection."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dubins import (
    TWO_PI,
    Configuration,
    Kinematics,
    fixed_heading_length,
    free_heading_solve,
    wrap_angle,
)
from .errors import NoBoundaryError, NoFeasibleEngagementError
from .reachability import GridSpec, Region, dominance_region, region_intersects_disk

log = logging.getLogger(__name__)

ARC_SAMPLES = 1440
BOUNDARY_SAMPLES = 720
ARC_TOL = 1e-4
RADIUS_TOL = 1e-3
TIE_TOL = 1e-6


@dataclass(frozen=True)
class GameParams:
    r_T: float
    rho_T: float
    rho_A: float
    nu: float
    omega_D: float
    omega_A: float

    def __post_init__(self):
        for name in ("r_T", "rho_T", "rho_A", "nu", "omega_D", "omega_A"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.nu >= 1.0:
            raise ValueError(f"nu must be < 1 (the defender is faster), got {self.nu}")
        if self.rho_A >= self.rho_T:
            raise ValueError("rho_A must be smaller than rho_T")

    @property
    def kin_D(self) -> Kinematics:
        return Kinematics(1.0, self.omega_D)

    @property
    def kin_A(self) -> Kinematics:
        return Kinematics(self.nu, self.omega_A)

    @property
    def entry_radius(self) -> float:
        """Radial distance at which the intruder has been sensed and engagement can start."""
        return self.r_T + self.rho_T - self.rho_A


class Branch(str, enum.Enum):
    CCW = "ccw"
    CW = "cw"


def engagement_configs(phi: float, r_D: float, rho_A: float) -> tuple[Configuration, Configuration]:
    """Head-on pair (defender, intruder) on the ray at angle ``phi``."""
    c, s = math.cos(phi), math.sin(phi)
    xi_D = Configuration(r_D * c, r_D * s, phi)
    xi_A = Configuration((r_D + rho_A) * c, (r_D + rho_A) * s, phi + math.pi)
    return xi_D, xi_A


def head_on_region(params: GameParams, cell: float, phi: float, r_D: float, half_extent: float | None = None) -> Region:
    """Dominance region of a head-on pair on a local grid that grows until the region fits."""
    R = params.kin_A.radius + params.kin_D.radius
    half = half_extent or params.rho_A + 3.0 * R
    limit = 4.0 * (params.r_T + params.rho_T)
    xi_D, xi_A = engagement_configs(phi, r_D, params.rho_A)
    mid = ((xi_D.x + xi_A.x) / 2.0, (xi_D.y + xi_A.y) / 2.0)
    while True:
        grid = GridSpec.with_cell(mid, half, cell)
        region = dominance_region(xi_A, params.kin_A, xi_D, params.kin_D, grid)
        m = region.membership
        touches = m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any()
        if not touches or half >= limit:
            return region
        half *= 1.5


@dataclass(frozen=True)
class EngagementSolution:
    t_star: float
    r_D_star: float
    deadline: float
    cell: float
    monotone: bool = True

    @property
    def deadline_t_A_star(self) -> float:
        return self.deadline


def solve_critical_radius(
    params: GameParams,
    grid: GridSpec,
    scan_points: int = 50,
    tol: float = RADIUS_TOL,
) -> EngagementSolution:
    """Smallest head-on engagement radius whose dominance region avoids the target.

    The relative geometry of a head-on pair does not change as both agents
    slide along the axis, so the region is computed once and translated.
    """
    r0 = params.entry_radius
    nu = params.nu
    t_max = r0 / nu
    base = head_on_region(params, grid.cell, 0.0, r0)

    def feasible(t: float) -> bool:
        return not region_intersects_disk(base.translated(-nu * t, 0.0), (0.0, 0.0), params.r_T)

    ts = np.linspace(0.0, t_max, scan_points)
    flags = np.array([feasible(t) for t in ts])
    if not flags[0]:
        raise NoFeasibleEngagementError(
            "every head-on engagement lets the intruder's dominance region reach the target"
        )
    changes = int(np.count_nonzero(flags[1:] != flags[:-1]))
    monotone = changes <= 1
    if monotone:
        if flags[-1]:
            t_star = t_max
        else:
            k = int(np.argmin(flags))
            lo, hi = float(ts[k - 1]), float(ts[k])
            while nu * (hi - lo) > tol:
                mid = 0.5 * (lo + hi)
                if feasible(mid):
                    lo = mid
                else:
                    hi = mid
            t_star = lo
    else:
        log.warning("feasibility is not monotone in t; falling back to a full scan")
        fine = np.arange(0.0, t_max + tol / nu, tol / nu)
        t_star = max(float(t) for t in fine if t <= t_max and feasible(float(t)))
    r_D = r0 - nu * t_star
    return EngagementSolution(t_star, r_D, (r0 - r_D) / nu, grid.cell, monotone)


def tau(xi_D: Configuration, phi, params: GameParams, sol: EngagementSolution):
    """Defender time to the head-on engagement configuration for arrival ``phi``."""
    phi = np.asarray(phi, dtype=float)
    r = sol.r_D_star
    out = fixed_heading_length(
        xi_D.x, xi_D.y, xi_D.heading, r * np.cos(phi), r * np.sin(phi), phi, params.kin_D.radius
    ) / params.kin_D.speed
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def _tau_many(x, y, h, phi, r, radius):
    return fixed_heading_length(x, y, h, r * np.cos(phi), r * np.sin(phi), phi, radius)


@dataclass(frozen=True)
class GuardingArc:
    intervals: tuple[tuple[float, float], ...]
    measure: float

    def contains(self, phi: float) -> bool:
        p = wrap_angle(phi)
        return any(lo <= p <= hi for lo, hi in self.intervals)


def _arc_transitions(x, y, h, params, sol, n_samples, tol):
    """Sampled membership and refined transition angles for many defender poses.

    Returns ``(members, rows, angles, rising)`` where ``angles`` are unwrapped
    in ``(-pi, pi + step)`` and ``rising`` marks non-member -> member changes.
    """
    x, y, h = (np.asarray(v, dtype=float).reshape(-1, 1) for v in (x, y, h))
    step = TWO_PI / n_samples
    phis = -math.pi + step * (np.arange(n_samples) + 1)
    r, R, T = sol.r_D_star, params.kin_D.radius, sol.deadline * params.kin_D.speed
    members = _tau_many(x, y, h, phis[None, :], r, R) <= T
    nxt = np.roll(members, -1, axis=1)
    rows, cols = np.nonzero(members != nxt)
    lo = phis[cols].copy()
    hi = lo + step
    lo_member = members[rows, cols]
    px, py, ph = x[rows, 0], y[rows, 0], h[rows, 0]
    for _ in range(max(1, math.ceil(math.log2(step / tol)))):
        mid = 0.5 * (lo + hi)
        m = _tau_many(px, py, ph, mid, r, R) <= T
        same = m == lo_member
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return members, rows, 0.5 * (lo + hi), ~lo_member


def guarding_arc_measures(x, y, h, params: GameParams, sol: EngagementSolution,
                          n_samples: int = ARC_SAMPLES, tol: float = ARC_TOL) -> np.ndarray:
    """Refined guarding-arc measure for each defender pose (vectorized)."""
    members, rows, angles, rising = _arc_transitions(x, y, h, params, sol, n_samples, tol)
    n = members.shape[0]
    signed = np.where(rising, -angles, angles)
    total = np.bincount(rows, weights=signed, minlength=n)
    has = np.bincount(rows, minlength=n) > 0
    # arcs that straddle the first sample started before it
    total = np.where(has & members[:, 0], total + TWO_PI, total)
    return np.where(has, total, np.where(members[:, 0], TWO_PI, 0.0))


def guarding_arc(xi_D: Configuration, params: GameParams, sol: EngagementSolution,
                 n_samples: int = ARC_SAMPLES, tol: float = ARC_TOL) -> GuardingArc:
    if n_samples < 360:
        raise ValueError("n_samples must be at least 360")
    members, rows, angles, rising = _arc_transitions(
        xi_D.x, xi_D.y, xi_D.heading, params, sol, n_samples, tol
    )
    if angles.size == 0:
        if members[0, 0]:
            return GuardingArc(((-math.pi, math.pi),), TWO_PI)
        return GuardingArc((), 0.0)
    order = np.argsort(angles)
    angles, rising = angles[order], rising[order]
    if not rising[0]:
        # first change is a fall: the arc began at the last rise, one turn earlier
        angles = np.concatenate([angles[1:], angles[:1] + TWO_PI])
        rising = np.concatenate([rising[1:], rising[:1]])
    arcs = []
    for start, end in zip(angles[0::2], angles[1::2]):
        a = float(wrap_angle(start))
        b = a + float(end - start)
        if b > math.pi:
            arcs.append((a, math.pi))
            arcs.append((-math.pi, b - TWO_PI))
        else:
            arcs.append((a, b))
    arcs.sort()
    measure = float(sum(b - a for a, b in arcs))
    return GuardingArc(tuple(arcs), measure)


@dataclass(frozen=True)
class CapturePoint:
    x_cap: tuple[float, float]
    psi_cap: float
    r_cap: float
    theta_cap: float
    arc_measure: float
    intruder_time: float
    defender_time: float
    phi: float
    branch: Branch

    @property
    def post_capture(self) -> Configuration:
        return Configuration(self.x_cap[0], self.x_cap[1], self.psi_cap)

    def rotated(self, angle: float) -> "CapturePoint":
        """The equivalent capture for an arrival ``angle`` further round."""
        c, s = math.cos(angle), math.sin(angle)
        x, y = self.x_cap
        return CapturePoint(
            (c * x - s * y, s * x + c * y),
            float(wrap_angle(self.psi_cap + angle)),
            self.r_cap,
            self.theta_cap,
            self.arc_measure,
            self.intruder_time,
            self.defender_time,
            float(wrap_angle(self.phi + angle)),
            self.branch,
        )


def resample_boundary(polys: Sequence[np.ndarray], n: int) -> np.ndarray:
    """``n`` points spread evenly by arc length over all polylines."""
    lengths = [np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(p, axis=0).T))]) for p in polys]
    total = sum(float(s[-1]) for s in lengths)
    if total == 0.0:
        return np.concatenate(polys)[:n]
    out = []
    for poly, s in zip(polys, lengths):
        k = max(1, int(round(n * s[-1] / total)))
        targets = np.linspace(0.0, s[-1], k, endpoint=False) + 0.5 * s[-1] / k
        out.append(np.column_stack([np.interp(targets, s, poly[:, 0]), np.interp(targets, s, poly[:, 1])]))
    return np.concatenate(out)


def solve_capture_point(
    phi: float,
    params: GameParams,
    sol: EngagementSolution,
    grid: GridSpec,
    n_boundary: int = BOUNDARY_SAMPLES,
    branch: Branch | str = Branch.CCW,
    n_samples: int = ARC_SAMPLES,
) -> CapturePoint:
    """Boundary point whose post-capture guarding arc is smallest."""
    branch = Branch(branch)
    xi_D, xi_A = engagement_configs(phi, sol.r_D_star, params.rho_A)
    region = head_on_region(params, grid.cell, phi, sol.r_D_star)
    if not region.boundary:
        raise NoBoundaryError("dominance boundary extraction produced no contour")
    pts = resample_boundary(region.boundary, n_boundary)
    side = wrap_angle(np.arctan2(pts[:, 1], pts[:, 0]) - phi)
    keep = side > 0 if branch is Branch.CCW else side < 0
    keep &= np.hypot(pts[:, 0], pts[:, 1]) > params.r_T
    if not keep.any():
        raise NoBoundaryError(f"no boundary points on the {branch.value} side outside the target")
    pts = pts[keep]
    t_D, psi = free_heading_solve(xi_D, pts[:, 0], pts[:, 1], params.kin_D.radius)
    measures = guarding_arc_measures(pts[:, 0], pts[:, 1], psi, params, sol, n_samples)
    polar = np.arctan2(pts[:, 1], pts[:, 0])
    ties = np.flatnonzero(measures <= measures.min() + TIE_TOL)
    k = int(ties[np.argmin(polar[ties])])
    x_cap = (float(pts[k, 0]), float(pts[k, 1]))
    t_A, _ = free_heading_solve(xi_A, x_cap[0], x_cap[1], params.kin_A.radius)
    return CapturePoint(
        x_cap,
        float(psi[k]),
        math.hypot(*x_cap),
        float(wrap_angle(polar[k] - psi[k])),
        float(measures[k]),
        float(t_A) / params.kin_A.speed,
        float(t_D[k]) / params.kin_D.speed,
        float(wrap_angle(phi)),
        branch,
    )


def capture_probabilities(
    params: GameParams,
    sol: EngagementSolution,
    grid: GridSpec,
    capture: CapturePoint | None = None,
    n_samples: int = ARC_SAMPLES,
    n_boundary: int = BOUNDARY_SAMPLES,
) -> tuple[float, float]:
    """Single-game capture probabilities from the centre and from the capture circle."""
    if capture is None:
        capture = solve_capture_point(0.0, params, sol, grid, n_boundary, Branch.CCW, n_samples)
    p1 = guarding_arc(Configuration(0.0, 0.0, 0.0), params, sol, n_samples).measure / TWO_PI
    p2 = guarding_arc(capture.post_capture, params, sol, n_samples).measure / TWO_PI
    return min(1.0, p1), min(1.0, p2)
