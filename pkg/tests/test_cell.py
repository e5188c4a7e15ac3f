"""
Tests for the slab corrector, endpoint extrapolation and diagnostics.
"""

import math

import numpy as np
import pytest

from src.cell import (
    CorrectorSettings,
    PinningInterval,
    SlabProblem,
    SolveMode,
    birkhoff_check,
    check_t_list,
    estimate_endpoint,
    fit_endpoint,
    laminar_oracle,
    mode_ordering_defect,
    solve_corrector,
    subadditivity_defects,
    success_fraction,
    sweep_directions,
    sweep_frame,
    verify_normal_bound,
    SWEEP_COLUMNS,
)
from src.cell.corrector import reversed_columns
from src.grid import SlabGrid
from src.medium import Direction, SineProfile, make_bump_lattice, make_constant, make_laminar
from src.utils.errors import ConvergenceError, EndpointError

E1 = Direction.from_lattice((1, 0))
PROFILE = SineProfile(mean=1.0, amplitude=0.5)


@pytest.fixture(scope="module")
def constant_solutions():
    medium = make_constant(1.0)
    out = {}
    for mode in SolveMode:
        problem = SlabProblem.build(medium, E1, 1.0, mode, h_max=0.1)
        out[mode] = solve_corrector(problem, tol=1e-3)
    return out


class TestSolveMode:
    def test_parse(self):
        assert SolveMode.parse("max_subsolution") is SolveMode.MAX_SUBSOLUTION
        assert SolveMode.parse(SolveMode.MIN_SUPERSOLUTION) is SolveMode.MIN_SUPERSOLUTION

    def test_parse_unknown(self):
        with pytest.raises(ValueError, match="Unknown mode"):
            SolveMode.parse("viscosity")


class TestSlabProblem:
    def test_build_height(self):
        problem = SlabProblem.build(make_constant(2.0), E1, 1.0, h_max=0.1)
        assert problem.grid.height >= 1.0
        assert problem.mode is SolveMode.MIN_SUPERSOLUTION

    def test_period_len_widens(self):
        problem = SlabProblem.build(make_constant(1.0), E1, 1.0, h_max=0.1, period_len=3.0)
        assert problem.grid.n_tan == 30

    def test_short_slab_rejected(self):
        grid = SlabGrid.build(E1, 1.0, 0.1)
        with pytest.raises(ValueError, match="below"):
            SlabProblem(make_constant(1.0), E1, 1.0, grid)

    def test_nonpositive_t(self):
        grid = SlabGrid.build(E1, 1.0, 0.1)
        with pytest.raises(ValueError, match="positive"):
            SlabProblem(make_constant(1.0), E1, 0.0, grid)


class TestConstantCorrector:
    """In a constant medium the plane solution is exact: r = t/Q."""

    def test_both_modes_reach_flat_front(self, constant_solutions):
        for solution in constant_solutions.values():
            assert solution.r == pytest.approx(1.0, abs=5e-3)
            assert solution.alpha == pytest.approx(1.0, abs=5e-3)
            assert solution.width_osc < 5e-3

    def test_summary_keys(self, constant_solutions):
        summary = constant_solutions[SolveMode.MIN_SUPERSOLUTION].summary()
        assert set(summary) == {
            "t", "mode", "r", "alpha", "width_osc", "fb_residual", "fb_violation", "iterations",
        }
        assert summary["mode"] == "min_supersolution"

    def test_modes_ordered(self, constant_solutions):
        defect = mode_ordering_defect(
            constant_solutions[SolveMode.MIN_SUPERSOLUTION],
            constant_solutions[SolveMode.MAX_SUBSOLUTION],
        )
        assert defect == 0.0

    def test_birkhoff(self, constant_solutions):
        solution = constant_solutions[SolveMode.MIN_SUPERSOLUTION]
        assert birkhoff_check(solution, (-1, 0)) == pytest.approx(0.0, abs=1e-9)
        assert birkhoff_check(solution, (0, 1)) == pytest.approx(0.0, abs=1e-9)

    def test_birkhoff_rejects_upward_shift(self, constant_solutions):
        with pytest.raises(ValueError, match="k.p <= 0"):
            birkhoff_check(constant_solutions[SolveMode.MIN_SUPERSOLUTION], (1, 0))

    def test_iteration_cap(self):
        problem = SlabProblem.build(make_constant(1.0), E1, 1.0, h_max=0.1)
        with pytest.raises(ConvergenceError) as info:
            solve_corrector(problem, settings=CorrectorSettings(max_iterations=1))
        assert info.value.residual_history


class TestLaminarOracle:
    def test_oracle_roots(self):
        for mode in SolveMode:
            r, alpha = laminar_oracle(PROFILE, 1.0, mode)
            assert r * PROFILE(-r) == pytest.approx(1.0, abs=1e-9)
            assert alpha == pytest.approx(1.0 / r)

    def test_oracle_modes_bracket(self):
        r_super, _ = laminar_oracle(PROFILE, 1.0, SolveMode.MIN_SUPERSOLUTION)
        r_sub, _ = laminar_oracle(PROFILE, 1.0, SolveMode.MAX_SUBSOLUTION)
        assert r_super < 1.0 < r_sub

    def test_oracle_rejects_nonpositive_t(self):
        with pytest.raises(ValueError, match="positive"):
            laminar_oracle(PROFILE, -1.0)

    @pytest.mark.parametrize("mode", list(SolveMode))
    def test_solver_matches_oracle(self, mode):
        medium = make_laminar(PROFILE, E1)
        problem = SlabProblem.build(medium, E1, 1.0, mode, h_max=0.05)
        solution = solve_corrector(problem, tol=1e-3)
        r, _ = laminar_oracle(PROFILE, 1.0, mode)
        assert solution.r == pytest.approx(r, abs=2e-2)


class TestEndpointFit:
    def test_t_list_checks(self):
        assert check_t_list([1, 2, 4, 8]) == [1.0, 2.0, 4.0, 8.0]
        with pytest.raises(ValueError, match="at least 4"):
            check_t_list([1, 2, 4])
        with pytest.raises(ValueError, match="increasing"):
            check_t_list([1, 4, 2, 8])
        with pytest.raises(ValueError, match="geometrically"):
            check_t_list([1, 2, 3, 4])

    def test_fit_exact_model(self):
        ts = [1.0, 2.0, 4.0, 8.0]
        alphas = [2.0 + 3.0 / t for t in ts]
        a, c, error = fit_endpoint(ts, alphas)
        assert a == pytest.approx(2.0)
        assert c == pytest.approx(3.0)
        assert error == pytest.approx(0.0, abs=1e-10)

    def test_fit_error_floor(self):
        ts = [1.0, 2.0, 4.0, 8.0]
        _, _, error = fit_endpoint(ts, [1.0] * 4, floor=0.01)
        assert error == 0.01

    def test_subadditivity_of_linear_series(self):
        series = [{"t": t, "r": t} for t in (1.0, 2.0, 4.0)]
        defects = subadditivity_defects(series)
        assert set(defects) == {(1.0, 1.0), (2.0, 2.0)}
        assert all(abs(v) < 1e-12 for v in defects.values())

    def test_constant_endpoint(self, unit_medium, e1):
        estimate = estimate_endpoint(unit_medium, e1, [0.5, 1.0, 2.0, 4.0], h_max=0.1)
        assert estimate.value == pytest.approx(1.0, abs=1e-2)
        assert estimate.error >= 1e-3 * 0.1 - 1e-15
        assert len(estimate.t_series) == 4

    def test_failed_solve_keeps_partial_series(self, unit_medium, e1):
        with pytest.raises(EndpointError) as info:
            estimate_endpoint(
                unit_medium, e1, [0.5, 1.0, 2.0, 4.0], h_max=0.1,
                settings=CorrectorSettings(max_iterations=1),
            )
        assert info.value.partial_series == []


class TestPinningInterval:
    def _make_interval(self, lower=0.9, upper=1.1, status="ok"):
        return PinningInterval(E1, q_upper=upper, q_lower=lower, q_upper_err=0.01, q_lower_err=0.01,
                               rms_mean=1.0, status=status)

    def test_width_and_rms(self):
        interval = self._make_interval()
        assert interval.width == pytest.approx(0.2)
        assert interval.is_consistent()
        assert interval.contains_rms()
        assert not self._make_interval(lower=1.05).contains_rms()

    def test_frame_and_success(self):
        intervals = [self._make_interval(), self._make_interval(status="ConvergenceError")]
        frame = sweep_frame(intervals)
        assert list(frame.columns) == SWEEP_COLUMNS
        assert frame.loc[0, "theta"] == pytest.approx(0.0)
        assert success_fraction(intervals) == 0.5
        assert success_fraction([]) == 0.0

    def test_sweep_needs_xi_max(self):
        with pytest.raises(ValueError, match="xi_max"):
            sweep_directions(make_constant(1.0), 1, [1, 2, 4, 8])


class TestAcceptanceScale:
    """Corrector runs at the resolution and slab heights the validate suites use."""

    @pytest.mark.parametrize("lattice", [(1, 0), (1, 1)])
    def test_constant_front_at_t4(self, unit_medium, lattice):
        direction = Direction.from_lattice(lattice)
        problem = SlabProblem.build(unit_medium, direction, 4.0, h_max=0.05)
        solution = solve_corrector(problem, tol=1e-3)
        h = problem.grid.h
        assert solution.r == pytest.approx(4.0, abs=2.0 * h)
        assert solution.width_osc < h

    @pytest.mark.parametrize("lattice", [(1, 0), (1, 1)])
    @pytest.mark.parametrize("mode", list(SolveMode))
    def test_constant_endpoints(self, unit_medium, lattice, mode):
        direction = Direction.from_lattice(lattice)
        estimate = estimate_endpoint(unit_medium, direction, [4.0, 8.0, 16.0, 32.0], mode=mode, h_max=0.05)
        assert estimate.value == pytest.approx(1.0, abs=2e-2)

    @pytest.mark.parametrize("mode", list(SolveMode))
    def test_laminar_diagonal_endpoints_meet_at_rms(self, mode):
        medium = make_laminar(PROFILE, E1)
        direction = Direction.from_lattice((1, 1))
        estimate = estimate_endpoint(medium, direction, [4.0, 8.0, 16.0, 32.0], mode=mode, h_max=0.1)
        assert estimate.value == pytest.approx(math.sqrt(1.125), rel=0.05)


    @pytest.mark.parametrize("t", [8.0, 16.0])
    def test_bump_medium_solves(self, e1, t):
        medium = make_bump_lattice(10.0, 0.1)
        problem = SlabProblem.build(medium, e1, t, h_max=0.1)
        solution = solve_corrector(problem, tol=1e-3)
        assert 0.9 * medium.qmin <= solution.alpha <= 1.1 * medium.qmax
        assert solution.width_osc >= 0.0


class TestNormalBound:
    def test_constant_is_exact(self, unit_medium, e1):
        report = verify_normal_bound(unit_medium, e1, [1.0, 2.0, 4.0, 8.0], h_max=0.1)
        assert report.exact
        assert math.isnan(report.exponent)
        assert list(report.table["t"]) == [1.0, 2.0, 4.0, 8.0]

    def test_laminar_normal_direction_is_exact(self, e1):
        medium = make_laminar(PROFILE, E1)
        report = verify_normal_bound(medium, e1, [1.0, 2.0, 4.0, 8.0], h_max=0.1)
        assert report.exact
        assert report.to_dict()["rows"][0]["deviation"] <= 1e-9 * report.table["alpha"].iloc[0]


class TestReversedColumns:
    def test_overshoot_against_previous_coefficient(self):
        moved = np.array([True, True, True, False])
        gradient = np.array([1.0, 0.9, 0.98, 0.5])
        q_before = np.ones(4)
        flagged = reversed_columns(moved, gradient, q_before, super_mode=True)
        np.testing.assert_array_equal(flagged, [False, True, False, False])

    def test_sub_mode_mirrors(self):
        moved = np.ones(3, dtype=bool)
        flagged = reversed_columns(moved, np.array([1.0, 1.1, 0.9]), np.ones(3), super_mode=False)
        np.testing.assert_array_equal(flagged, [False, True, False])
