"""Grid-backed reachable sets and dominance regions.

Every cell value is a closed-form free-heading Dubins time, so there is no
propagation error. Boundaries are extracted by marching squares on the
defining scalar field (positive inside).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import ndimage
from skimage import measure

from .dubins import Configuration, Kinematics, free_heading_length, free_heading_path_points
from .errors import CollocatedError, EmptyRegionError, SpeedRatioError

DEFAULT_RESOLUTION = 512
PATH_SAMPLES = 48


@dataclass(frozen=True)
class GridSpec:
    center: tuple[float, float]
    half_extent: float
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 16:
            raise ValueError(f"resolution must be an integer >= 16, got {self.resolution}")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "resolution", int(self.resolution))

    @classmethod
    def with_cell(cls, center: Sequence[float], half_extent: float, cell: float) -> "GridSpec":
        """Grid of (at least) the requested extent whose cell size is exactly ``cell``."""
        n = max(16, int(math.ceil(2.0 * half_extent / cell)))
        return cls(tuple(center), n * cell / 2.0, n)

    @property
    def cell(self) -> float:
        return 2.0 * self.half_extent / self.resolution

    @property
    def xs(self) -> np.ndarray:
        return self.center[0] - self.half_extent + (np.arange(self.resolution) + 0.5) * self.cell

    @property
    def ys(self) -> np.ndarray:
        return self.center[1] - self.half_extent + (np.arange(self.resolution) + 0.5) * self.cell

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates indexed ``[row=y, col=x]``."""
        return np.meshgrid(self.xs, self.ys, indexing="xy")

    def cell_index(self, x: float, y: float) -> tuple[int, int] | None:
        col = int(math.floor((x - self.center[0] + self.half_extent) / self.cell))
        row = int(math.floor((y - self.center[1] + self.half_extent) / self.cell))
        if 0 <= row < self.resolution and 0 <= col < self.resolution:
            return row, col
        return None

    def shifted(self, dx: float, dy: float) -> "GridSpec":
        return replace(self, center=(self.center[0] + dx, self.center[1] + dy))


def game_grid(r_T: float, rho_T: float, resolution: int = DEFAULT_RESOLUTION) -> GridSpec:
    """Default grid covering the target plus its sensing annulus."""
    return GridSpec((0.0, 0.0), r_T + rho_T, resolution)


@dataclass(frozen=True)
class TimeField:
    grid: GridSpec
    values: np.ndarray
    source: Configuration
    kin: Kinematics


@dataclass
class Region:
    grid: GridSpec
    membership: np.ndarray
    boundary: list[np.ndarray]
    level: np.ndarray | None = None
    fields: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def area(self) -> float:
        return float(self.membership.sum()) * self.grid.cell**2

    @property
    def is_empty(self) -> bool:
        return not bool(self.membership.any())

    def member_points(self) -> np.ndarray:
        X, Y = self.grid.mesh()
        return np.column_stack([X[self.membership], Y[self.membership]])

    def boundary_points(self) -> np.ndarray:
        if not self.boundary:
            return np.empty((0, 2))
        return np.concatenate(self.boundary)

    def translated(self, dx: float, dy: float) -> "Region":
        """The same region moved rigidly; arrays are shared, not copied."""
        shift = np.array([dx, dy])
        return Region(
            self.grid.shifted(dx, dy),
            self.membership,
            [poly + shift for poly in self.boundary],
            self.level,
            self.fields,
        )


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def contour(level: np.ndarray, grid: GridSpec) -> list[np.ndarray]:
    """Zero level set of ``level`` as counterclockwise world-frame polylines."""
    x0 = grid.center[0] - grid.half_extent + 0.5 * grid.cell
    y0 = grid.center[1] - grid.half_extent + 0.5 * grid.cell
    polys = []
    for rc in measure.find_contours(level, 0.0):
        poly = np.column_stack([x0 + rc[:, 1] * grid.cell, y0 + rc[:, 0] * grid.cell])
        if _signed_area(poly) < 0:
            poly = poly[::-1]
        polys.append(poly)
    return polys


def time_field(source: Configuration, kin: Kinematics, grid: GridSpec) -> TimeField:
    X, Y = grid.mesh()
    values = free_heading_length(source, X, Y, kin.radius) / kin.speed
    return TimeField(grid, values, source, kin)


def reach_set(source: Configuration, kin: Kinematics, T: float, grid: GridSpec) -> Region:
    if T < 0:
        raise ValueError("T must be non-negative")
    tf = time_field(source, kin, grid)
    level = T - tf.values
    membership = level >= 0
    home = grid.cell_index(source.x, source.y)
    if home is not None:
        membership[home] = True
    return Region(grid, membership, contour(level, grid), level, {"t": tf.values})


def turning_disks(pose: Configuration, radius: float) -> tuple[tuple[float, float], tuple[float, float]]:
    nx, ny = -math.sin(pose.heading), math.cos(pose.heading)
    return (
        (pose.x + radius * nx, pose.y + radius * ny),
        (pose.x - radius * nx, pose.y - radius * ny),
    )


def _forward_seeds(xi_A, kin_A, xi_D, kin_D, grid, labels) -> set[int]:
    """Component labels met along the intruder's straight-ahead ray.

    A point ``d`` ahead is reached in ``d / v_A`` while the defender needs at
    least ``(|AD| - d) / v_D``, so the ray belongs to the region up to
    ``|AD| v_A / (v_A + v_D)``.
    """
    gap = math.hypot(xi_A.x - xi_D.x, xi_A.y - xi_D.y)
    reach = gap * kin_A.speed / (kin_A.speed + kin_D.speed)
    found = set()
    for d in np.linspace(0.1, 0.9, 17) * reach:
        cell = grid.cell_index(xi_A.x + d * math.cos(xi_A.heading), xi_A.y + d * math.sin(xi_A.heading))
        if cell is not None and labels[cell] > 0:
            found.add(int(labels[cell]))
    return found


def dominance_region(
    xi_A: Configuration,
    kin_A: Kinematics,
    xi_D: Configuration,
    kin_D: Kinematics,
    grid: GridSpec,
    path_samples: int = PATH_SAMPLES,
) -> Region:
    """Cells the intruder reaches no later than the defender.

    A cell qualifies when ``t_A <= t_D`` holds at the cell and at every point
    the intruder passes on its own time-optimal path there (the defender
    could otherwise wait on that path). Cells strictly inside the defender's
    minimum turning disks are dropped, and only the connected component met
    by the intruder's straight-ahead ray is kept.
    """
    if math.hypot(xi_A.x - xi_D.x, xi_A.y - xi_D.y) == 0.0:
        raise CollocatedError("intruder and defender are collocated")
    X, Y = grid.mesh()
    t_A = free_heading_length(xi_A, X, Y, kin_A.radius) / kin_A.speed
    t_D = free_heading_length(xi_D, X, Y, kin_D.radius) / kin_D.speed
    margin = t_D - t_A

    flat = margin.reshape(-1)
    idx = np.flatnonzero(flat >= 0)
    if idx.size:
        worst = flat[idx]
        fractions = np.linspace(0.0, 1.0, path_samples + 1)[1:-1]
        xs, ys = X.reshape(-1)[idx], Y.reshape(-1)[idx]
        for s, qx, qy in free_heading_path_points(xi_A, xs, ys, kin_A.radius, fractions):
            t_D_path = free_heading_length(xi_D, qx, qy, kin_D.radius) / kin_D.speed
            worst = np.minimum(worst, t_D_path - s / kin_A.speed)
        flat[idx] = worst

    outside_disks = np.ones(margin.shape, dtype=bool)
    R_D = kin_D.radius
    for cx, cy in turning_disks(xi_D, R_D):
        outside_disks &= np.hypot(X - cx, Y - cy) >= R_D - 1e-9
    candidates = (margin >= 0) & outside_disks

    membership = np.zeros_like(candidates)
    if candidates.any():
        labels, _ = ndimage.label(candidates)
        seeds = _forward_seeds(xi_A, kin_A, xi_D, kin_D, grid, labels)
        if not seeds:
            cell = np.unravel_index(np.argmin(np.where(candidates, t_A, np.inf)), t_A.shape)
            seeds = {int(labels[cell])}
        membership = np.isin(labels, list(seeds))

    level = margin.copy()
    dropped = (margin >= 0) & ~membership
    level[dropped] = -np.maximum(margin[dropped], 1e-6)
    fields = {"t_A": t_A, "t_D": t_D, "margin": margin}
    return Region(grid, membership, contour(level, grid), level, fields)


@dataclass(frozen=True)
class ApolloniusDisk:
    center: tuple[float, float]
    radius: float


def apollonius_disk(x_A: Sequence[float], x_D: Sequence[float], nu: float) -> ApolloniusDisk:
    if not 0.0 < nu < 1.0:
        raise SpeedRatioError(f"speed ratio must lie in (0, 1), got {nu}")
    alpha = 1.0 / (1.0 - nu * nu)
    beta = nu * nu * alpha
    gamma = nu * alpha
    center = (alpha * x_A[0] - beta * x_D[0], alpha * x_A[1] - beta * x_D[1])
    return ApolloniusDisk(center, gamma * math.hypot(x_A[0] - x_D[0], x_A[1] - x_D[1]))


def _segment_distances(polys: list[np.ndarray], point: np.ndarray) -> float:
    best = math.inf
    for poly in polys:
        if len(poly) == 1:
            best = min(best, float(np.hypot(*(poly[0] - point))))
            continue
        a, b = poly[:-1], poly[1:]
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        t = np.where(denom > 0, np.einsum("ij,ij->i", point - a, ab) / np.where(denom > 0, denom, 1.0), 0.0)
        closest = a + np.clip(t, 0.0, 1.0)[:, None] * ab
        best = min(best, float(np.min(np.hypot(*(closest - point).T))))
    return best


def region_intersects_disk(region: Region, center: Sequence[float], radius: float) -> bool:
    c = np.asarray(center, dtype=float)
    home = region.grid.cell_index(c[0], c[1])
    if home is not None and region.membership[home]:
        return True
    pts = region.member_points()
    if pts.size and np.any(np.hypot(*(pts - c).T) < radius):
        return True
    return _segment_distances(region.boundary, c) < radius


def region_max_norm(region: Region) -> float:
    if region.is_empty:
        raise EmptyRegionError("region has no member cells")
    pts = region.boundary_points()
    if pts.size == 0:
        pts = region.member_points()
    return float(np.max(np.hypot(pts[:, 0], pts[:, 1])))


def dump_region_csv(path, region: Region) -> None:
    """Per-cell debug dump: x, y, t_A, t_D, member."""
    X, Y = region.grid.mesh()
    t_A = region.fields.get("t_A", np.full(X.shape, np.nan))
    t_D = region.fields.get("t_D", np.full(X.shape, np.nan))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "t_A", "t_D", "member"])
        for row in zip(X.ravel(), Y.ravel(), t_A.ravel(), t_D.ravel(), region.membership.ravel()):
            writer.writerow([repr(float(v)) for v in row[:4]] + [int(row[4])])


def boundary_json(region: Region) -> str:
    return json.dumps([[[float(x), float(y)] for x, y in poly] for poly in region.boundary])
