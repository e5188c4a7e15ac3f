"""
Tests for obstacle geometry, Hausdorff distances, facets and the front solver.
"""

import math

import numpy as np
import pytest

from src.cell import SolveMode
from src.medium import Direction, SineProfile, make_constant, make_laminar
from src.shapes import (
    FACET_COLUMNS,
    SHAPE_COLUMNS,
    ObstacleProblem,
    ObstacleSettings,
    convexity_violations,
    detect_facets,
    facet_coverage,
    facet_frame,
    hausdorff,
    homogeneous_disk_radius,
    make_polygon,
    perimeter,
    polygon_vertices,
    regular_polygon,
    resample,
    rescaling_defect,
    rounded_square,
    shape_frame,
    solve_obstacle,
    square,
    support_radius,
)
from src.utils.errors import ConfigurationError


class TestPolygons:
    def test_square_vertices_counter_clockwise(self):
        verts = polygon_vertices(square(2.0))
        assert len(verts) == 4
        x, y = verts[:, 0], verts[:, 1]
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        assert signed_area == pytest.approx(4.0)

    def test_non_convex_rejected(self):
        with pytest.raises(ConfigurationError, match="convex"):
            make_polygon([(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)])

    def test_too_few_vertices(self):
        with pytest.raises(ConfigurationError, match="at least 3"):
            make_polygon([(0, 0), (1, 0)])

    def test_regular_polygon_needs_three_sides(self):
        with pytest.raises(ConfigurationError, match="n >= 3"):
            regular_polygon(2, 1.0)

    def test_rounded_square_radius(self):
        with pytest.raises(ConfigurationError, match="Corner radius"):
            rounded_square(1.0, 0.6)
        shape = rounded_square(2.0, 0.25)
        assert shape.area < 4.0

    def test_support_radius(self):
        rho = support_radius(square(2.0), np.array([0.0, math.pi / 4.0, math.pi / 2.0]))
        np.testing.assert_allclose(rho, [1.0, math.sqrt(2.0), 1.0])

    def test_support_radius_needs_interior_origin(self):
        with pytest.raises(ConfigurationError, match="origin"):
            support_radius(square(1.0, centre=(2.0, 2.0)), np.array([0.0]))


class TestPolylines:
    def test_resample_keeps_vertices_and_perimeter(self):
        verts = polygon_vertices(square(2.0))
        dense = resample(verts, 0.25)
        assert len(dense) == 32
        assert perimeter(dense) == pytest.approx(8.0)

    def test_concentric_squares_meet_at_corners(self):
        inner = polygon_vertices(square(2.0))
        outer = polygon_vertices(square(3.0))
        assert hausdorff(inner, outer) == pytest.approx(0.5 * math.sqrt(2.0), abs=1e-9)

    def test_rotated_square(self):
        axis = polygon_vertices(regular_polygon(4, math.sqrt(2.0), phase=math.pi / 4.0))
        rotated = polygon_vertices(regular_polygon(4, math.sqrt(2.0)))
        assert hausdorff(axis, rotated) == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-3)

    def test_self_intersecting_rejected(self):
        bowtie = np.array([(0, 0), (1, 1), (1, 0), (0, 1)], dtype=float)
        with pytest.raises(ValueError, match="intersects itself"):
            hausdorff(bowtie, polygon_vertices(square(2.0)))

    def test_convexity_violations(self):
        assert convexity_violations(polygon_vertices(square(2.0))) == []
        dented = np.array([(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)], dtype=float)
        assert convexity_violations(dented) == [2]


class TestFacets:
    def test_square_has_four_lattice_facets(self):
        dense = resample(polygon_vertices(square(2.0)), 0.1)
        facets = detect_facets(dense)
        assert len(facets) == 4
        assert sorted(round(f.normal_deg) % 360 for f in facets) == [0, 90, 180, 270]
        for f in facets:
            assert f.length == pytest.approx(2.0)
        assert facet_coverage(facets, perimeter(dense)) == pytest.approx(1.0)

    def test_circle_has_no_long_facets(self):
        circle = polygon_vertices(regular_polygon(360, 1.0))
        assert detect_facets(circle, angle_tol=0.5, min_len=0.2) == []

    def test_min_len_filters(self):
        facets = detect_facets(polygon_vertices(square(2.0)), min_len=3.0)
        assert facets == []

    def test_frame_and_gradient(self):
        verts = polygon_vertices(square(2.0))
        facets = detect_facets(verts, gradient=np.full(4, 2.5))
        frame = facet_frame(facets)
        assert list(frame.columns) == FACET_COLUMNS
        np.testing.assert_allclose(frame["mean_grad"], 2.5)


class TestObstacleProblem:
    def _make_problem(self, **kwargs):
        params = dict(obstacle=regular_polygon(64, 0.5), medium=make_constant(1.0), epsilon=0.5, box=4.0, h=0.05)
        params.update(kwargs)
        return ObstacleProblem(**params)

    def test_resolution(self):
        with pytest.raises(ConfigurationError, match="epsilon/10"):
            self._make_problem(h=0.1)

    def test_obstacle_inside_box(self):
        with pytest.raises(ConfigurationError, match="inside the box"):
            self._make_problem(obstacle=square(5.0))

    def test_obstacle_contains_origin(self):
        with pytest.raises(ConfigurationError, match="contain the origin"):
            self._make_problem(obstacle=square(1.0, centre=(2.0, 2.0)), box=10.0)

    def test_axis(self):
        axis = self._make_problem().axis
        assert axis[0] == pytest.approx(-2.0)
        assert axis[-1] == pytest.approx(2.0)
        assert len(axis) == 81

    def test_disk_radius(self):
        R = homogeneous_disk_radius(0.5, 1.0)
        assert R * math.log(R / 0.5) == pytest.approx(1.0)
        assert R == pytest.approx(1.173, abs=2e-3)

    def test_rescaling_needs_constant_medium(self):
        laminar = make_laminar(SineProfile(), Direction.from_lattice((1, 0)))
        with pytest.raises(ValueError, match="constant medium"):
            rescaling_defect(self._make_problem(medium=laminar), 2.0)


@pytest.fixture(scope="module")
def disk_result():
    problem = ObstacleProblem(regular_polygon(64, 0.5), make_constant(1.0), 0.5, 4.0, 0.05)
    return solve_obstacle(problem, SolveMode.MIN_SUPERSOLUTION, tol=1e-2, settings=ObstacleSettings(n_theta=90))


class TestObstacleSolve:
    """Homogeneous disk obstacles have a circular free boundary."""

    settings = ObstacleSettings(n_theta=90)

    def test_front_is_the_disk_radius(self, disk_result):
        R = homogeneous_disk_radius(0.5, 1.0)
        assert np.max(np.abs(disk_result.rho - R)) < 0.08
        assert disk_result.rho.std() < 0.02

    def test_result_tables(self, disk_result):
        frame = shape_frame(disk_result)
        assert list(frame.columns) == SHAPE_COLUMNS
        assert len(frame) == 90
        summary = disk_result.summary()
        assert summary["mode"] == "min_supersolution"
        assert summary["mean_radius"] == pytest.approx(float(disk_result.rho.mean()))

    def test_rescaling_is_exact(self):
        problem = ObstacleProblem(regular_polygon(64, 0.5), make_constant(1.0), 0.5, 4.0, 0.05)
        defect = rescaling_defect(problem, 2.0, tol=1e-2, settings=self.settings)
        assert defect == pytest.approx(0.0, abs=1e-6)


@pytest.fixture(scope="module")
def laminar_square_fronts():
    laminar = make_laminar(SineProfile(mean=1.0, amplitude=0.5), Direction.from_lattice((1, 0)))
    out = {}
    for eps in (1.0, 0.5):
        problem = ObstacleProblem(square(1.0), laminar, eps, 5.0, 0.05)
        out[eps] = solve_obstacle(problem, tol=1e-2, settings=ObstacleSettings(n_theta=180))
    return out


class TestLaminarSquare:
    """Square obstacle in a laminar medium at two scales of oscillation."""

    def test_fronts_converge(self, laminar_square_fronts):
        for result in laminar_square_fronts.values():
            assert result.iterations >= 1
            assert len(result.rho) == 180

    def test_fronts_between_constant_medium_disks(self, laminar_square_fronts):
        # Q in [0.5, 1.5] around a square between the disks of radius 0.5 and 1/sqrt(2)
        for result in laminar_square_fronts.values():
            assert result.rho.min() > 0.85
            assert result.rho.max() < 2.1

    def test_scales_give_nearby_fronts(self, laminar_square_fronts):
        distance = hausdorff(laminar_square_fronts[1.0].positivity_boundary, laminar_square_fronts[0.5].positivity_boundary)
        assert 0.0 <= distance < 1.25
