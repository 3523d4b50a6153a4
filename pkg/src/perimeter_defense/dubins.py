"""Time-optimal paths for forward-only, curvature-bounded agents.

Two solvers are provided, both with scalar (path-returning) and vectorized
(length-only) entry points:

* fixed final heading: the six classical words LSL, RSR, LSR, RSL, RLR, LRL;
* free final heading: C, CS and CC candidates, which is the relaxed problem
  used for time-to-reach fields.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ON_CIRCLE_TOL = 1e-9

WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")
FREE_FAMILIES = ("LS", "RS", "LR", "LR", "RL", "RL")


def wrap_angle(angle):
    """Wrap an angle (scalar or array) into (-pi, pi]."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), TWO_PI)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def _mod2pi(angle):
    out = np.mod(angle, TWO_PI)
    # values a hair below 2*pi are numerically zero-length arcs
    return np.where(out > TWO_PI - 1e-10, 0.0, out)


@dataclass(frozen=True)
class Configuration:
    """Planar pose. The heading is wrapped into (-pi, pi] on construction."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def __iter__(self) -> Iterator[float]:
        return iter((self.x, self.y, self.heading))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def rotated(self, angle: float) -> "Configuration":
        """Rigid rotation about the origin."""
        c, s = math.cos(angle), math.sin(angle)
        return Configuration(c * self.x - s * self.y, s * self.x + c * self.y, self.heading + angle)

    def mirrored(self) -> "Configuration":
        """Reflection across the x-axis."""
        return Configuration(self.x, -self.y, -self.heading)


@dataclass(frozen=True)
class Kinematics:
    speed: float
    max_turn_rate: float

    def __post_init__(self):
        if not (self.speed > 0 and self.max_turn_rate > 0):
            raise ValueError(f"speed and max_turn_rate must be positive, got {self.speed}, {self.max_turn_rate}")

    @property
    def radius(self) -> float:
        return self.speed / self.max_turn_rate


class SegmentKind(str, enum.Enum):
    LEFT = "L"
    RIGHT = "R"
    STRAIGHT = "S"


def advance(pose: Configuration, kind: SegmentKind, length: float, radius: float) -> Configuration:
    """Exact pose after travelling ``length`` along one segment."""
    x, y, h = pose
    if kind is SegmentKind.STRAIGHT:
        return Configuration(x + length * math.cos(h), y + length * math.sin(h), h)
    turn = length / radius
    if kind is SegmentKind.LEFT:
        return Configuration(
            x + radius * (math.sin(h + turn) - math.sin(h)),
            y - radius * (math.cos(h + turn) - math.cos(h)),
            h + turn,
        )
    return Configuration(
        x - radius * (math.sin(h - turn) - math.sin(h)),
        y + radius * (math.cos(h - turn) - math.cos(h)),
        h - turn,
    )


@dataclass(frozen=True)
class DubinsPath:
    start: Configuration
    turning_radius: float
    segments: tuple[tuple[SegmentKind, float], ...] = field(default_factory=tuple)

    @property
    def length(self) -> float:
        return float(sum(length for _, length in self.segments))

    @property
    def word(self) -> str:
        return "".join(kind.value for kind, _ in self.segments)

    @property
    def end(self) -> Configuration:
        return self.pose_at(self.length)

    def pose_at(self, s: float) -> Configuration:
        """Pose after arc length ``s`` (clamped to the path)."""
        pose = self.start
        remaining = max(0.0, s)
        for kind, length in self.segments:
            step = min(length, remaining)
            pose = advance(pose, kind, step, self.turning_radius)
            remaining -= step
            if remaining <= 0.0:
                break
        return pose

    def controls(self) -> list[tuple[float, int]]:
        """(arc length, turn sign) pairs, +1 left, -1 right, 0 straight."""
        sign = {SegmentKind.LEFT: 1, SegmentKind.RIGHT: -1, SegmentKind.STRAIGHT: 0}
        return [(length, sign[kind]) for kind, length in self.segments]


# ---------------------------------------------------------------------------
# fixed final heading


def fixed_heading_word_lengths(x0, y0, h0, x1, y1, h1, radius):
    """Normalized (t, p, q) segment parameters for all six words.

    Inputs broadcast against each other. Returns an array of shape
    ``(6, 3, *broadcast_shape)``; arc entries are angles, the straight entry
    (or middle arc) is in units of ``radius``. Infeasible words are NaN.
    """
    dx = np.asarray(x1, dtype=float) - x0
    dy = np.asarray(y1, dtype=float) - y0
    d = np.hypot(dx, dy) / radius
    theta = np.arctan2(dy, dx)
    a = np.mod(np.asarray(h0, dtype=float) - theta, TWO_PI)
    b = np.mod(np.asarray(h1, dtype=float) - theta, TWO_PI)
    a, b, d = np.broadcast_arrays(a, b, d)
    sa, ca, sb, cb = np.sin(a), np.cos(a), np.sin(b), np.cos(b)
    cab = np.cos(a - b)
    out = np.full((6, 3) + d.shape, np.nan)

    with np.errstate(invalid="ignore"):
        # LSL
        p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb)
        ok = p2 >= -1e-12
        tmp = np.arctan2(cb - ca, d + sa - sb)
        out[0] = np.where(ok, [_mod2pi(tmp - a), np.sqrt(np.maximum(p2, 0)), _mod2pi(b - tmp)], np.nan)
        # RSR
        p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa)
        ok = p2 >= -1e-12
        tmp = np.arctan2(ca - cb, d - sa + sb)
        out[1] = np.where(ok, [_mod2pi(a - tmp), np.sqrt(np.maximum(p2, 0)), _mod2pi(tmp - b)], np.nan)
        # LSR
        p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb)
        ok = p2 >= -1e-12
        p = np.sqrt(np.maximum(p2, 0))
        tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        out[2] = np.where(ok, [_mod2pi(tmp - a), p, _mod2pi(tmp - b)], np.nan)
        # RSL
        p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb)
        ok = p2 >= -1e-12
        p = np.sqrt(np.maximum(p2, 0))
        tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        out[3] = np.where(ok, [_mod2pi(a - tmp), p, _mod2pi(b - tmp)], np.nan)
        # RLR
        c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0
        ok = np.abs(c) <= 1.0 + 1e-12
        p = _mod2pi(TWO_PI - np.arccos(np.clip(c, -1, 1)))
        t = _mod2pi(a - np.arctan2(ca - cb, d - sa + sb) + p / 2.0)
        out[4] = np.where(ok, [t, p, _mod2pi(a - b - t + p)], np.nan)
        # LRL
        c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0
        ok = np.abs(c) <= 1.0 + 1e-12
        p = _mod2pi(TWO_PI - np.arccos(np.clip(c, -1, 1)))
        t = _mod2pi(-a - np.arctan2(ca - cb, d + sa - sb) + p / 2.0)
        out[5] = np.where(ok, [t, p, _mod2pi(b - a - t + p)], np.nan)
    return out


def fixed_heading_length(x0, y0, h0, x1, y1, h1, radius):
    """Vectorized minimum path length with prescribed final heading."""
    params = fixed_heading_word_lengths(x0, y0, h0, x1, y1, h1, radius)
    totals = np.nansum(params, axis=1)
    totals = np.where(np.isnan(params).any(axis=1), np.inf, totals)
    best = radius * totals.min(axis=0)
    if np.ndim(best) == 0:
        return float(best)
    return best


def shortest_path_fixed_heading(start: Configuration, goal: Configuration, radius: float) -> DubinsPath:
    if radius <= 0:
        raise ValueError("radius must be positive")
    if (start.x, start.y, start.heading) == (goal.x, goal.y, goal.heading):
        return DubinsPath(start, radius, ())
    params = fixed_heading_word_lengths(*start, *goal, radius)
    totals = np.where(np.isnan(params).any(axis=1), np.inf, np.nansum(params, axis=1))
    # first word within rounding of the minimum wins, in WORDS order
    best = int(np.flatnonzero(totals <= totals.min() + 1e-12)[0])
    segs = tuple(
        (SegmentKind(letter), float(radius * params[best, i]))
        for i, letter in enumerate(WORDS[best])
    )
    return DubinsPath(start, radius, segs)


# ---------------------------------------------------------------------------
# free final heading


def _free_heading_local(px, py, radius):
    """Candidates for a start at the origin heading +x, over a point array.

    Returns ``(lengths, end_headings, seg1, seg2)`` each shaped (6, N); the
    candidate order follows FREE_FAMILIES. Segment entries are arc lengths.
    """
    R = radius
    n = px.shape[0]
    lengths = np.full((6, n), np.inf)
    heads = np.zeros((6, n))
    seg1 = np.zeros((6, n))
    seg2 = np.zeros((6, n))

    for k, sgn in ((0, 1.0), (1, -1.0)):
        # CS on the left (sgn=+1) or right (mirror y) circle
        qy = sgn * py
        dx, dy = px, qy - R
        dc = np.hypot(dx, dy)
        ok = dc >= R - ON_CIRCLE_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            straight = np.sqrt(np.maximum(dc * dc - R * R, 0.0))
            arc = _mod2pi(np.arctan2(dy, dx) - np.arccos(np.clip(R / dc, -1.0, 1.0)) + math.pi / 2)
        lengths[k] = np.where(ok, R * arc + straight, np.inf)
        heads[k] = sgn * arc
        seg1[k] = R * arc
        seg2[k] = straight

    for k0, sgn in ((2, 1.0), (4, -1.0)):
        # CC: first arc on the (sgn) circle, second arc of opposite turn
        qy = sgn * py
        ex, ey = px, qy - R
        e = np.hypot(ex, ey)
        ok = (e >= R - ON_CIRCLE_TOL) & (e <= 3.0 * R + ON_CIRCLE_TOL)
        with np.errstate(invalid="ignore", divide="ignore"):
            spread = np.arccos(np.clip((e * e + 3.0 * R * R) / (4.0 * R * np.maximum(e, 1e-300)), -1.0, 1.0))
        base = np.arctan2(ey, ex)
        for j, s in enumerate((1.0, -1.0)):
            ang_c2 = base + s * spread
            a = _mod2pi(ang_c2 + math.pi / 2)
            c2x = 2.0 * R * np.cos(ang_c2)
            c2y = R + 2.0 * R * np.sin(ang_c2)
            ang_q = a + math.pi / 2
            ang_p = np.arctan2(qy - c2y, px - c2x)
            b = _mod2pi(ang_q - ang_p)
            lengths[k0 + j] = np.where(ok, R * (a + b), np.inf)
            heads[k0 + j] = sgn * (a - b)
            seg1[k0 + j] = R * a
            seg2[k0 + j] = R * b
    return lengths, heads, seg1, seg2


def _to_local(start_x, start_y, start_h, gx, gy):
    c, s = np.cos(start_h), np.sin(start_h)
    dx = np.asarray(gx, dtype=float) - start_x
    dy = np.asarray(gy, dtype=float) - start_y
    return c * dx + s * dy, -s * dx + c * dy


def free_heading_solve(start: Configuration, gx, gy, radius: float):
    """Vectorized free-heading solve from one start to many points.

    Returns ``(length, arrival_heading)`` arrays shaped like the broadcast of
    ``gx`` and ``gy``. Arrival headings are in the world frame, wrapped.
    """
    gx, gy = np.broadcast_arrays(np.asarray(gx, dtype=float), np.asarray(gy, dtype=float))
    shape = gx.shape
    px, py = _to_local(start.x, start.y, start.heading, gx.ravel(), gy.ravel())
    lengths, heads, _, _ = _free_heading_local(px, py, radius)
    best = np.argmin(lengths, axis=0)
    idx = np.arange(px.shape[0])
    length = lengths[best, idx]
    head = heads[best, idx]
    zero = np.hypot(px, py) == 0.0
    length = np.where(zero, 0.0, length)
    head = np.where(zero, 0.0, head)
    return length.reshape(shape), wrap_angle(head + start.heading).reshape(shape)


def free_heading_length(start: Configuration, gx, gy, radius: float):
    return free_heading_solve(start, gx, gy, radius)[0]


def shortest_path_free_heading(start: Configuration, goal_point: Sequence[float], radius: float) -> DubinsPath:
    if radius <= 0:
        raise ValueError("radius must be positive")
    px, py = _to_local(start.x, start.y, start.heading, [goal_point[0]], [goal_point[1]])
    if px[0] == 0.0 and py[0] == 0.0:
        return DubinsPath(start, radius, ())
    lengths, _, seg1, seg2 = _free_heading_local(px, py, radius)
    best = int(np.argmin(lengths[:, 0]))
    family = FREE_FAMILIES[best]
    segs = tuple(
        (SegmentKind(letter), float(seg[best, 0]))
        for letter, seg in zip(family, (seg1, seg2))
    )
    return DubinsPath(start, radius, segs)


# ---------------------------------------------------------------------------
# timing and sampling


def time_to_config(start: Configuration, goal: Configuration, kin: Kinematics) -> float:
    return shortest_path_fixed_heading(start, goal, kin.radius).length / kin.speed


def time_to_point(start: Configuration, goal_point: Sequence[float], kin: Kinematics) -> float:
    return shortest_path_free_heading(start, goal_point, kin.radius).length / kin.speed


def sample_path(path: DubinsPath, dt: float, kin: Kinematics) -> list[tuple[float, Configuration]]:
    """Poses every ``dt`` along ``path``; the final sample is the exact endpoint."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    total = path.length / kin.speed
    n = int(math.floor(total / dt + 1e-9))
    samples = [(k * dt, path.pose_at(k * dt * kin.speed)) for k in range(n + 1)]
    if total - n * dt > 1e-9:
        samples.append((total, path.end))
    return samples


_FIRST_TURN = np.array([1.0, -1.0, 1.0, 1.0, -1.0, -1.0])
_SECOND_TURN = np.array([0.0, 0.0, -1.0, -1.0, 1.0, 1.0])


def free_heading_path_points(start: Configuration, gx, gy, radius: float, fractions: Sequence[float]):
    """Points along each optimal free-heading path, at fractions of its length.

    Yields ``(arc_length, x, y)`` flat arrays (one entry per goal point) for
    every fraction in ``fractions``.
    """
    R = radius
    px, py = _to_local(start.x, start.y, start.heading, np.ravel(gx), np.ravel(gy))
    lengths, _, seg1, _ = _free_heading_local(px, py, R)
    best = np.argmin(lengths, axis=0)
    idx = np.arange(px.shape[0])
    total = np.where(np.hypot(px, py) == 0.0, 0.0, lengths[best, idx])
    first = seg1[best, idx]
    sign1 = _FIRST_TURN[best]
    sign2 = _SECOND_TURN[best]
    ch, sh = math.cos(start.heading), math.sin(start.heading)
    for f in fractions:
        s = f * total
        a1 = np.minimum(s, first)
        a2 = np.maximum(s - first, 0.0)
        th = sign1 * a1 / R
        x = R * np.sin(np.abs(th))
        y = sign1 * R * (1.0 - np.cos(th))
        arc_x = x + sign2 * R * (np.sin(th + sign2 * a2 / R) - np.sin(th))
        arc_y = y - sign2 * R * (np.cos(th + sign2 * a2 / R) - np.cos(th))
        x = np.where(sign2 == 0.0, x + a2 * np.cos(th), arc_x)
        y = np.where(sign2 == 0.0, y + a2 * np.sin(th), arc_y)
        yield s, start.x + ch * x - sh * y, start.y + sh * x + ch * y
