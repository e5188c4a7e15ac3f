"""
Tests for plane-like offsets, translation families and bending.
"""

import math

import numpy as np
import pytest

from src.cell import SlabProblem, solve_corrector
from src.grid import SlabGrid
from src.medium import Direction, SineProfile, make_constant, make_laminar
from src.planelike import (
    FAMILY_COLUMNS,
    band_deviation,
    bend,
    build_sweep_family,
    extract_offset,
    fully_positive_rows,
    make_bending_profile,
    offset_family_frame,
    plateau,
    strip_harmonic,
)
from src.utils.errors import ConfigurationError

E1 = Direction.from_lattice((1, 0))
PROFILE = SineProfile(mean=1.0, amplitude=0.5)


@pytest.fixture(scope="module")
def constant_plane():
    problem = SlabProblem.build(make_constant(1.0), E1, 1.0, h_max=0.1)
    return extract_offset(solve_corrector(problem, tol=1e-3))


class TestOffsets:
    """A constant medium gives an exact plane with offset t."""

    def test_exact_plane(self, constant_plane):
        assert constant_plane.offset == pytest.approx(1.0, abs=1e-9)
        assert constant_plane.slope == pytest.approx(1.0, abs=5e-3)
        assert math.isinf(constant_plane.decay_rate)
        assert constant_plane.decay_fitted
        assert constant_plane.offset_residual < 1e-9

    def test_zero_position(self, constant_plane):
        assert constant_plane.zero_position == pytest.approx(-1.0, abs=5e-3)
        d = constant_plane.to_dict()
        assert set(d) == {"slope", "offset", "offset_residual", "decay_rate", "zero_position"}

    def test_plane_matches_field(self, constant_plane):
        rows = fully_positive_rows(constant_plane.cell_solution)
        assert rows >= 2
        field = constant_plane.cell_solution.field.values
        np.testing.assert_allclose(constant_plane.plane()[:, :rows], field[:, :rows], atol=1e-8)

    def test_band_deviation(self):
        deviation = np.array([1.0, 0.5, 0.25, 0.125])
        distance = np.array([3.5, 2.5, 1.5, 0.5])
        centres, sups = band_deviation(deviation, distance, width=2.0)
        np.testing.assert_allclose(centres, [1.0, 3.0])
        np.testing.assert_allclose(sups, [0.25, 1.0])


class TestFamily:
    def test_constant_family_has_no_gaps(self, unit_medium):
        family = build_sweep_family(unit_medium, (1, 0), n_translates=4, depth=1.0, h_max=0.1)
        assert len(family.offsets) == 4
        assert family.offsets == sorted(family.offsets)
        assert family.gaps == []
        assert family.order_defect == pytest.approx(0.0, abs=1e-9)
        assert sum(family.gap_to_next()) == pytest.approx(family.period)
        frame = offset_family_frame(family)
        assert list(frame.columns) == FAMILY_COLUMNS
        assert len(frame) == 4

    def test_laminar_offsets_cluster(self):
        # plane-like solutions at the rms slope sit near one level set of Q per period
        medium = make_laminar(PROFILE, E1)
        family = build_sweep_family(medium, (1, 0), n_translates=8, depth=4.0, h_max=0.1)
        assert family.gaps
        assert max(family.gap_to_next()) >= 0.5 * family.period
        assert family.order_defect <= 0.2

    def test_needs_translates(self, unit_medium):
        with pytest.raises(ValueError, match="n_translates"):
            build_sweep_family(unit_medium, (1, 0), n_translates=0)


class TestPlateau:
    def test_levels(self):
        assert plateau(0.0, 3.0) == pytest.approx(3.0)
        assert plateau(0.3, 3.0) == pytest.approx(3.0)
        assert plateau(0.8, 3.0) == pytest.approx(1.0)
        mid = plateau(0.5, 3.0)
        assert 1.0 < mid < 3.0

    def test_even(self):
        t = np.linspace(-1.0, 1.0, 41)
        np.testing.assert_allclose(plateau(t, 2.0), plateau(-t, 2.0))


class TestStripHarmonic:
    def test_constant_data_is_linear(self):
        out = strip_harmonic(np.full(8, 2.0), 0.1, 4)
        assert out.shape == (8, 5)
        np.testing.assert_allclose(out[0], [2.0, 1.5, 1.0, 0.5, 0.0], atol=1e-12)

    def test_discrete_harmonic(self):
        data = np.cos(2.0 * math.pi * np.arange(8) / 8.0)
        psi = strip_harmonic(data, 0.1, 6)
        np.testing.assert_allclose(psi[:, 0], data, atol=1e-12)
        np.testing.assert_allclose(psi[:, -1], 0.0, atol=1e-12)
        lap = (
            np.roll(psi, 1, axis=0)[:, 1:-1] + np.roll(psi, -1, axis=0)[:, 1:-1]
            + psi[:, :-2] + psi[:, 2:] - 4.0 * psi[:, 1:-1]
        )
        np.testing.assert_allclose(lap, 0.0, atol=1e-12)


class TestBending:
    def _make_grid(self):
        return SlabGrid.build(E1, 1.0, 0.1)

    def test_radius_must_dominate_plateau(self):
        with pytest.raises(ConfigurationError, match="r must be at least"):
            make_bending_profile(E1, 2.0, 15.0, 0.02, self._make_grid())

    def test_parameter_checks(self):
        grid = self._make_grid()
        with pytest.raises(ConfigurationError, match="M must be"):
            make_bending_profile(E1, 0.5, 10.0, 0.02, grid)
        with pytest.raises(ConfigurationError, match="eps_amp"):
            make_bending_profile(E1, 1.0, 10.0, 0.0, grid)
        with pytest.raises(ConfigurationError, match="direction"):
            make_bending_profile(Direction.from_lattice((0, 1)), 1.0, 10.0, 0.02, grid)

    def test_flat_profile(self):
        profile = make_bending_profile(E1, 1.0, 10.0, 0.2, self._make_grid())
        np.testing.assert_allclose(profile.phi.values, 0.2)
        np.testing.assert_allclose(profile.heights(), 1.0)
        assert profile.convexity_defect == pytest.approx(0.0, abs=1e-12)

    def test_constant_radius_bend(self, constant_plane):
        grid = constant_plane.cell_solution.grid
        profile = make_bending_profile(E1, 1.0, 10.0, 0.2, grid)
        result = bend(constant_plane, profile)
        original = constant_plane.cell_solution.field.values
        # the front moves two rows deeper
        assert np.count_nonzero(result.bent.values[0] > 0) == np.count_nonzero(original[0] > 0) + 2
        assert result.slope_ok
        assert list(result.slope_report.columns) == ["tau", "depth", "measured", "bound", "grad_phi", "ok"]

    def test_plateau_bend_at_full_radius(self):
        # M=4, r=64 over a period of 128 on an h=0.05 constant plane
        problem = SlabProblem.build(make_constant(1.0), E1, 2.0, h_max=0.05, period_len=128.0)
        plane = extract_offset(solve_corrector(problem, tol=1e-3))
        profile = make_bending_profile(E1, 4.0, 64.0, 0.05, problem.grid)
        result = bend(plane, profile)
        h = problem.grid.h
        low, high = result.lift_ratio
        assert result.min_laplacian >= -10.0 * h
        assert 0.3 <= low and high <= 3.0
        assert result.slope_ok
