import csv
import json
import math

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

from perimeter_defense.dubins import Configuration, Kinematics, free_heading_length
from perimeter_defense.errors import CollocatedError, EmptyRegionError, SpeedRatioError
from perimeter_defense.reachability import (
    GridSpec,
    Region,
    apollonius_disk,
    boundary_json,
    contour,
    dominance_region,
    dump_region_csv,
    reach_set,
    region_intersects_disk,
    region_max_norm,
    time_field,
)

from oracles import apollonius_circle_points, sweep_free_length


def signed_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])


@pytest.mark.parametrize("kwargs", [
    dict(center=(0, 0), half_extent=1.0, resolution=8),
    dict(center=(0, 0), half_extent=0.0, resolution=32),
    dict(center=(0, 0), half_extent=1.0, resolution=20.5),
])
def test_gridspec_validation(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_gridspec_geometry():
    g = GridSpec((1.0, -2.0), 4.0, 16)
    assert g.cell == pytest.approx(0.5)
    assert g.xs[0] == pytest.approx(-2.75) and g.xs[-1] == pytest.approx(4.75)
    assert g.cell_index(1.1, -1.9) == (8, 8)
    assert g.cell_index(100, 0) is None
    fine = GridSpec.with_cell((0, 0), 3.0, 0.25)
    assert fine.cell == pytest.approx(0.25) and fine.half_extent >= 3.0


def test_time_field_values_match_sweep_oracle():
    g = GridSpec((0, 0), 4.0, 16)
    src = Configuration(0.3, 0.1, 0.8)
    tf = time_field(src, Kinematics(0.8, 1.5), g)
    X, Y = g.mesh()
    for r, c in [(0, 0), (5, 11), (8, 8), (15, 2)]:
        ref = sweep_free_length(0.3, 0.1, 0.8, X[r, c], Y[r, c], 0.8 / 1.5, n=240) / 0.8
        assert tf.values[r, c] == pytest.approx(ref, abs=1e-6)


def test_reach_set_contains_source_and_straight_ray():
    g = GridSpec((0, 0), 8.0, 128)
    src = Configuration(0.0, 0.0, 0.0)
    reg = reach_set(src, Kinematics(1.0, 0.5), 5.0, g)
    assert reg.membership[g.cell_index(0.0, 0.0)]
    assert reg.membership[g.cell_index(4.9, 0.0)]
    assert not reg.membership[g.cell_index(5.2, 0.0)]
    # a point right next to the source but beside it needs a loop
    assert reg.area > 0 and reg.boundary


def test_reach_set_zero_horizon_keeps_source():
    g = GridSpec((0, 0), 2.0, 32)
    reg = reach_set(Configuration(0.01, 0.01, 0.0), Kinematics(1.0, 1.0), 0.0, g)
    assert reg.membership.sum() == 1


def test_reach_set_rejects_negative_horizon():
    with pytest.raises(ValueError):
        reach_set(Configuration(0, 0, 0), Kinematics(1, 1), -1.0, GridSpec((0, 0), 1, 16))


def test_reach_set_boundary_is_level_set():
    g = GridSpec((0, 0), 6.0, 96)
    src = Configuration(0, 0, 0.4)
    kin = Kinematics(1.0, 1.0)
    reg = reach_set(src, kin, 4.0, g)
    pts = reg.boundary_points()
    times = free_heading_length(src, pts[:, 0], pts[:, 1], kin.radius)
    inner = np.hypot(pts[:, 0], pts[:, 1]) > 1.5  # avoid the discontinuous region near the source
    assert np.median(np.abs(times[inner] - 4.0)) < g.cell


def test_contours_are_counterclockwise():
    g = GridSpec((0, 0), 3.0, 64)
    X, Y = g.mesh()
    level = 2.0 - np.hypot(X, Y)
    (poly,) = contour(level, g)
    assert signed_area(poly) > 0
    assert signed_area(poly) == pytest.approx(math.pi * 4, rel=0.01)


def test_dominance_collocated():
    g = GridSpec((0, 0), 3.0, 32)
    with pytest.raises(CollocatedError):
        dominance_region(Configuration(1, 1, 0), Kinematics(0.8, 1.5), Configuration(1, 1, 2), Kinematics(1, 0.5), g)


@pytest.fixture(scope="module")
def head_on():
    kin_A, kin_D = Kinematics(0.8, 1.5), Kinematics(1.0, 0.5)
    xi_D, xi_A = Configuration(8.0, 0.0, 0.0), Configuration(11.0, 0.0, math.pi)
    g = GridSpec.with_cell((9.5, 0.0), 11.0, 0.12)
    return dominance_region(xi_A, kin_A, xi_D, kin_D, g), xi_A, xi_D, kin_A, kin_D


def test_dominance_members_satisfy_time_order(head_on):
    reg, xi_A, xi_D, kin_A, kin_D = head_on
    pts = reg.member_points()
    t_A = free_heading_length(xi_A, pts[:, 0], pts[:, 1], kin_A.radius) / kin_A.speed
    t_D = free_heading_length(xi_D, pts[:, 0], pts[:, 1], kin_D.radius) / kin_D.speed
    assert np.all(t_A <= t_D + 1e-12)


def test_dominance_contains_forward_axis_and_is_symmetric(head_on):
    reg, xi_A, *_ = head_on
    g = reg.grid
    assert reg.membership[g.cell_index(10.0, 0.0)]
    # the head-on problem is mirror-symmetric about the axis
    m = reg.membership
    assert np.mean(m == m[::-1, :]) > 0.995


def test_dominance_excludes_defender_turning_disks(head_on):
    reg, _, xi_D, _, kin_D = head_on
    X, Y = reg.grid.mesh()
    for cy in (kin_D.radius, -kin_D.radius):
        inside = np.hypot(X - xi_D.x, Y - cy) < kin_D.radius - 1e-6
        assert not (reg.membership & inside).any()


def test_dominance_boundary_between_agents(head_on):
    reg, *_ = head_on
    g = reg.grid
    # on the axis, the head-on split point sits nu/(1+nu) of the gap from the intruder
    split = 11.0 - 3.0 * 0.8 / 1.8
    assert reg.membership[g.cell_index(split + 2 * g.cell, 0.0)]
    assert not reg.membership[g.cell_index(split - 2 * g.cell, 0.0)]


def test_translated_region(head_on):
    reg, *_ = head_on
    moved = reg.translated(-3.0, 1.0)
    assert moved.membership is reg.membership
    assert moved.grid.center == pytest.approx((reg.grid.center[0] - 3.0, reg.grid.center[1] + 1.0))
    np.testing.assert_allclose(moved.boundary[0], reg.boundary[0] + [-3.0, 1.0])
    assert moved.area == reg.area


def test_intersects_and_max_norm(head_on):
    reg, *_ = head_on
    r_max = region_max_norm(reg)
    assert region_intersects_disk(reg, (0, 0), r_max + 0.5)
    assert not region_intersects_disk(reg, (0, 0), 9.0)
    assert region_intersects_disk(reg, (10.0, 0.0), 0.01)


def test_max_norm_empty_region():
    g = GridSpec((0, 0), 1.0, 16)
    empty = Region(g, np.zeros((16, 16), dtype=bool), [])
    with pytest.raises(EmptyRegionError):
        region_max_norm(empty)


@pytest.mark.parametrize("nu", [0.0, 1.0, 1.3, -0.2])
def test_apollonius_speed_ratio(nu):
    with pytest.raises(SpeedRatioError):
        apollonius_disk((0, 0), (1, 0), nu)


@pytest.mark.parametrize("x_A, x_D, nu", [((0, 0), (3, 0), 0.5), ((1, 2), (-2, 5), 0.8), ((0, 0), (0, -1), 0.3)])
def test_apollonius_disk_matches_ray_roots(x_A, x_D, nu):
    disk = apollonius_disk(x_A, x_D, nu)
    pts = apollonius_circle_points(x_A, x_D, nu, n=400)
    np.testing.assert_allclose(np.hypot(pts[:, 0] - disk.center[0], pts[:, 1] - disk.center[1]), disk.radius, atol=1e-9)


def test_holonomic_limit_matches_apollonius():
    rng = np.random.default_rng(2)
    nu = 0.6
    for _ in range(3):
        x_A = rng.uniform(-2, 2, 2)
        ang = rng.uniform(0, 2 * math.pi)
        x_D = x_A + 2.0 * np.array([math.cos(ang), math.sin(ang)])
        disk = apollonius_disk(x_A, x_D, nu)
        g = GridSpec(disk.center, disk.radius * 1.25, 128)
        reg = dominance_region(
            Configuration(*x_A, rng.uniform(-3, 3)), Kinematics(nu, 1e3),
            Configuration(*x_D, rng.uniform(-3, 3)), Kinematics(1.0, 1e3), g,
        )
        circle = apollonius_circle_points(x_A, x_D, nu)
        b = reg.boundary_points()
        h = max(directed_hausdorff(b, circle)[0], directed_hausdorff(circle, b)[0])
        assert h <= 2 * g.cell


def test_debug_dumps(tmp_path, head_on):
    reg, *_ = head_on
    path = tmp_path / "cells.csv"
    dump_region_csv(path, reg)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "t_A", "t_D", "member"]
    assert len(rows) == reg.membership.size + 1
    assert sum(int(r[4]) for r in rows[1:]) == reg.membership.sum()
    polys = json.loads(boundary_json(reg))
    assert len(polys) == len(reg.boundary)
