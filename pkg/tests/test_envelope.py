"""
Tests for cone envelopes on the circle of directions.
"""

import logging
import math

import numpy as np
import pandas as pd
import pytest

from src.envelope import (
    DIRECTION_COLUMNS,
    DirectionFunction,
    DistanceMetric,
    build_Qm,
    build_Qm_lower,
    direction_function_frame,
    double_regularize,
    from_samples,
    inf_convolve_dir,
    inf_convolve_dir_brute,
    kernel_table,
    lipschitz_defect,
    monotone_lower,
    monotone_upper,
    read_direction_frame,
    sup_convolve_dir,
    sup_convolve_dir_brute,
)

N = 360


def _make_rough(seed=0, n=N):
    rng = np.random.default_rng(seed)
    return DirectionFunction(1.0 + rng.uniform(-0.5, 0.5, size=n))


class TestDirectionFunction:
    def test_samples_and_interpolation(self):
        f = DirectionFunction(np.arange(4, dtype=float))
        np.testing.assert_allclose(f.thetas, [0.0, math.pi / 2.0, math.pi, 1.5 * math.pi])
        assert f(math.pi / 4.0) == pytest.approx(0.5)
        # wraps from the last sample back to the first
        assert f(1.75 * math.pi) == pytest.approx(1.5)
        assert f.index_of(2.0 * math.pi - 1e-12) == 0

    def test_validation(self):
        with pytest.raises(ValueError, match="at least 3"):
            DirectionFunction(np.ones(2))
        with pytest.raises(ValueError, match="finite"):
            DirectionFunction(np.array([1.0, np.nan, 1.0]))

    def test_metric_parse(self):
        assert DistanceMetric.parse("arc") is DistanceMetric.ARC
        with pytest.raises(ValueError, match="Unknown metric"):
            DistanceMetric.parse("taxicab")

    def test_kernel_tables(self):
        chord = kernel_table(8, "chord")
        arc = kernel_table(8, DistanceMetric.ARC)
        assert chord[4] == pytest.approx(2.0)
        assert arc[4] == pytest.approx(math.pi)
        np.testing.assert_allclose(arc[1:], arc[1:][::-1])
        assert np.all(chord <= arc + 1e-12)


class TestConvolutions:
    """The sweep matches the quadratic reference exactly."""

    @pytest.mark.parametrize("metric", list(DistanceMetric))
    @pytest.mark.parametrize("n_lip", [0.3, 2.0, 25.0])
    def test_matches_brute_force(self, metric, n_lip):
        f = _make_rough(seed=1)
        np.testing.assert_allclose(
            inf_convolve_dir(f, n_lip, metric).values, inf_convolve_dir_brute(f, n_lip, metric).values, atol=1e-12,
        )
        np.testing.assert_allclose(
            sup_convolve_dir(f, n_lip, metric).values, sup_convolve_dir_brute(f, n_lip, metric).values, atol=1e-12,
        )

    def test_single_dip(self):
        values = np.ones(N)
        values[0] = 0.0
        out = inf_convolve_dir(DirectionFunction(values), 2.0)
        thetas = out.thetas
        expected = np.minimum(1.0, 2.0 * 2.0 * np.sin(thetas / 2.0))
        np.testing.assert_allclose(out.values, expected, atol=1e-12)

    @pytest.mark.parametrize("metric", list(DistanceMetric))
    def test_result_is_lipschitz(self, metric):
        f = _make_rough(seed=2)
        assert lipschitz_defect(f, 3.0, metric) > 0
        assert lipschitz_defect(inf_convolve_dir(f, 3.0, metric), 3.0, metric) <= 1e-12
        assert lipschitz_defect(sup_convolve_dir(f, 3.0, metric), 3.0, metric) <= 1e-12

    def test_idempotent(self):
        once = inf_convolve_dir(_make_rough(seed=3), 4.0)
        twice = inf_convolve_dir(once, 4.0)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_sandwich_and_monotone_in_slope(self):
        f = _make_rough(seed=4)
        low_1 = inf_convolve_dir(f, 1.0).values
        low_5 = inf_convolve_dir(f, 5.0).values
        high_5 = sup_convolve_dir(f, 5.0).values
        assert np.all(low_1 <= low_5 + 1e-12)
        assert np.all(low_5 <= f.values + 1e-12)
        assert np.all(f.values <= high_5 + 1e-12)

    def test_lipschitz_input_is_fixed(self):
        thetas = 2.0 * math.pi * np.arange(N) / N
        f = DirectionFunction(1.0 + 0.1 * np.cos(thetas))
        np.testing.assert_allclose(inf_convolve_dir(f, 1.0).values, f.values, atol=1e-12)

    def test_slope_must_be_positive(self):
        f = _make_rough()
        with pytest.raises(ValueError, match="n_lip"):
            inf_convolve_dir(f, 0.0)
        with pytest.raises(ValueError, match="n_lip"):
            sup_convolve_dir(f, -1.0)

    def test_monotone_helpers(self):
        f = _make_rough(seed=5)
        np.testing.assert_allclose(monotone_lower(f, 2.0).values, inf_convolve_dir(f, 2.0).values)
        np.testing.assert_allclose(monotone_upper(f, 2.0).values, sup_convolve_dir(f, 2.0).values)


class TestPinningApproximations:
    def test_build_Qm_restores_rational_values(self):
        q_star = DirectionFunction(np.full(N, 2.0))
        q_cont = _make_rough(seed=6)
        out = build_Qm(q_star, q_cont, [0.0, math.pi / 2.0], 5.0)
        envelope = inf_convolve_dir(q_cont, 5.0).values
        assert out.values[0] == 2.0 and out.values[90] == 2.0
        mask = np.ones(N, dtype=bool)
        mask[[0, 90]] = False
        np.testing.assert_allclose(out.values[mask], envelope[mask])

    def test_build_Qm_lower_mirrors(self):
        q_lower = DirectionFunction(np.full(N, 0.5))
        q_cont = _make_rough(seed=7)
        out = build_Qm_lower(q_lower, q_cont, [math.pi], 5.0)
        assert out.values[180] == 0.5
        assert out.values[1] == pytest.approx(sup_convolve_dir(q_cont, 5.0).values[1])

    def test_off_grid_angle_warns(self, caplog):
        q = DirectionFunction(np.ones(N))
        with caplog.at_level(logging.WARNING):
            build_Qm(q, q, [0.001], 5.0)
        assert "off the grid" in caplog.text

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="different grids"):
            build_Qm(DirectionFunction(np.ones(N)), DirectionFunction(np.ones(N // 2)), [], 1.0)

    @pytest.mark.parametrize("side", ["upper", "lower"])
    def test_double_regularize_is_lipschitz(self, side):
        q = _make_rough(seed=8)
        out = double_regularize(q, q, [0.0, math.pi], m=20.0, n_lip=2.0, side=side)
        assert lipschitz_defect(out, 2.0) <= 1e-12

    def test_double_regularize_side(self):
        q = _make_rough()
        with pytest.raises(ValueError, match="side"):
            double_regularize(q, q, [], 1.0, 1.0, side="middle")


class TestTables:
    def test_from_samples_skips_missing(self):
        f = from_samples([0.0, math.pi / 2.0, math.pi, 1.5 * math.pi], [1.0, np.nan, 1.0, 1.0], n=8)
        np.testing.assert_allclose(f.values, 1.0)

    def test_from_samples_needs_two(self):
        with pytest.raises(ValueError, match="two finite"):
            from_samples([0.0, 1.0], [1.0, np.nan], n=8)

    def test_frame_round_trip(self):
        f = _make_rough(seed=9, n=16)
        frame = direction_function_frame(f)
        assert list(frame.columns) == DIRECTION_COLUMNS
        back = read_direction_frame(frame, "value", n=16)
        np.testing.assert_allclose(back.values, f.values, atol=1e-12)

    def test_sweep_table_column(self):
        frame = pd.DataFrame({"theta": [0.0, math.pi], "q_upper": [1.2, 1.4]})
        f = read_direction_frame(frame, "q_upper", n=4)
        np.testing.assert_allclose(f.values, [1.2, 1.3, 1.4, 1.3])
        with pytest.raises(ValueError, match="columns theta and q_lower"):
            read_direction_frame(frame, "q_lower")
