"""
Tests for periodic media, directions and medium statistics.
"""

import math

import numpy as np
import pytest

from src.medium import (
    Direction,
    MediumKind,
    SineProfile,
    ball_extrema,
    ball_field,
    check_medium,
    load_custom_medium,
    make_bump_lattice,
    make_constant,
    make_laminar,
    medium_from_samples,
    rational_directions,
    write_custom_medium,
)
from src.utils.errors import MediumError


def _make_laminar(amplitude=0.5):
    return make_laminar(SineProfile(mean=1.0, amplitude=amplitude), Direction.from_lattice((1, 0)))


class TestDirection:
    """Tests for lattice and angle directions."""

    def test_from_lattice_reduces(self):
        d = Direction.from_lattice((2, 4))
        assert d.rational == (1, 2)
        assert d.lattice_norm == pytest.approx(math.sqrt(5.0))
        assert d.lattice_norm_sq == 5
        assert d.label() == "(1,2)"

    def test_unit_and_perp(self):
        d = Direction.from_lattice((1, 1))
        assert d.unit[0] == pytest.approx(1.0 / math.sqrt(2.0))
        assert np.dot(d.unit, d.perp) == pytest.approx(0.0)
        assert d.angle == pytest.approx(math.pi / 4.0)

    def test_from_angle_axis_is_rational(self):
        assert Direction.from_angle(math.pi / 2.0).rational == (0, 1)
        assert not Direction.from_angle(0.3).is_rational

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            Direction.from_lattice((0, 0))

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError, match="unit vector"):
            Direction(unit=(1.0, 1.0))

    def test_rational_directions_count_and_order(self):
        assert len(rational_directions(1)) == 8
        directions = rational_directions(2)
        assert len(directions) == 16
        angles = [d.angle for d in directions]
        assert angles == sorted(angles)

    def test_lattice_norm_requires_rational(self):
        with pytest.raises(ValueError, match="rational"):
            Direction.from_angle(0.3).lattice_norm

    def test_to_dict(self):
        d = Direction.from_lattice((0, 1)).to_dict()
        assert d["xi1"] == 0 and d["xi2"] == 1
        assert d["theta"] == pytest.approx(math.pi / 2.0)


class TestConstantMedium:
    def test_statistics(self):
        medium = make_constant(2.0)
        assert medium.kind is MediumKind.CONSTANT
        assert medium.qmin == medium.qmax == 2.0
        assert medium.rms == 2.0
        values = medium(np.zeros((3, 4, 2)))
        assert values.shape == (3, 4)
        assert np.all(values == 2.0)

    def test_nonpositive_rejected(self):
        with pytest.raises(MediumError, match="positive"):
            make_constant(0.0)

    def test_ball_extrema(self):
        assert ball_extrema(make_constant(1.5), (0.3, 0.2), 0.5) == (1.5, 1.5)


class TestLaminarMedium:
    def test_bounds_and_rms(self):
        medium = _make_laminar()
        assert medium.qmin == pytest.approx(0.5, abs=1e-8)
        assert medium.qmax == pytest.approx(1.5, abs=1e-8)
        assert medium.rms == pytest.approx(math.sqrt(1.125), abs=1e-6)

    def test_periodic(self, rng):
        medium = _make_laminar()
        points = rng.uniform(-2.0, 2.0, size=(50, 2))
        shifted = points + np.array([1.0, -3.0])
        np.testing.assert_allclose(medium(points), medium(shifted), atol=1e-12)

    def test_depends_on_first_coordinate_only(self):
        medium = _make_laminar()
        assert medium.at(0.25, 0.0) == pytest.approx(1.5)
        assert medium.at(0.25, 0.7) == pytest.approx(1.5)

    def test_irrational_axis_rejected(self):
        with pytest.raises(MediumError, match="rational"):
            make_laminar(SineProfile(), Direction.from_angle(0.3))

    def test_nonpositive_profile_rejected(self):
        with pytest.raises(MediumError, match="positive"):
            _make_laminar(amplitude=1.5)

    def test_ball_extrema_bracket_samples(self):
        medium = _make_laminar()
        inf, sup = ball_extrema(medium, (0.1, 0.1), 0.1)
        # the ball spans x1 in [0, 0.2]
        assert inf == pytest.approx(1.0, abs=1e-6)
        assert sup == pytest.approx(1.0 + 0.5 * math.sin(2.0 * math.pi * 0.2), abs=1e-6)

    def test_ball_extrema_delta_range(self):
        with pytest.raises(ValueError, match="delta"):
            ball_extrema(_make_laminar(), (0.0, 0.0), 1.5)

    def test_ball_field_shape(self):
        medium = _make_laminar()
        points = np.zeros((4, 3, 2))
        out = ball_field(medium, points, 0.2, kind="sup")
        assert out.shape == (4, 3)
        with pytest.raises(ValueError, match="kind"):
            ball_field(medium, points, 0.2, kind="mid")


class TestBumpLattice:
    def test_zero_amplitude_is_constant(self, rng):
        medium = make_bump_lattice(0.0, 0.5)
        assert medium.qmin == medium.qmax == 1.0
        points = rng.uniform(0.0, 1.0, size=(20, 2))
        np.testing.assert_allclose(medium(points), 1.0)

    def test_bump_peaks_at_lattice_points(self):
        medium = make_bump_lattice(10.0, 0.1)
        assert medium.at(0.0, 0.0) == pytest.approx(medium.qmax)
        assert medium.at(3.0, -2.0) == pytest.approx(medium.qmax)
        assert medium.at(0.5, 0.5) == pytest.approx(1.0)

    def test_delta_range(self):
        with pytest.raises(MediumError, match="delta"):
            make_bump_lattice(1.0, 1.5)

    def test_negative_amplitude(self):
        with pytest.raises(MediumError, match="nonnegative"):
            make_bump_lattice(-1.0, 0.5)


class TestCustomMedium:
    def test_samples_must_be_positive(self):
        values = np.ones((4, 4))
        values[1, 2] = -1.0
        with pytest.raises(MediumError, match="positive"):
            medium_from_samples(values)

    def test_write_then_load(self, tmp_path):
        source = _make_laminar()
        path = write_custom_medium(source, tmp_path / "laminar.txt", 16)
        loaded = load_custom_medium(path)
        assert loaded.kind is MediumKind.CUSTOM
        assert loaded.params["n"] == 16
        for i, j in [(0, 0), (4, 3), (12, 15)]:
            assert loaded.at(i / 16, j / 16) == pytest.approx(source.at(i / 16, j / 16), abs=1e-12)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not a medium\nn 2\n1 1 1 1\n")
        with pytest.raises(MediumError, match="header"):
            load_custom_medium(path)

    def test_wrong_sample_count(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("ac-medium v1\nn 2\n1 1 1\n")
        with pytest.raises(MediumError, match="expected 4 samples"):
            load_custom_medium(path)


class TestCheckMedium:
    def test_constant_passes(self):
        report = check_medium(make_constant(1.0), seed=0, n_points=20, sample_grid=32)
        assert report.passed
        assert report.rms_mean == pytest.approx(1.0)
