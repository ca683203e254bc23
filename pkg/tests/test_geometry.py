import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from leorouting import geometry
from leorouting.geometry import PointSet, SphericalPoint

R_E, R_S = 6371.0, 7371.0
angles = st.floats(0.0, math.pi)
azimuths = st.floats(0.0, 2 * math.pi)


def test_radial_and_antipodal_distances():
    assert geometry.euclidean_distance(SphericalPoint(R_E, 0, 0), SphericalPoint(R_S, 0, 0)) == pytest.approx(1000.0)
    assert geometry.euclidean_distance(SphericalPoint(R_S, 0, 0), SphericalPoint(R_S, math.pi, 0)) == pytest.approx(2 * R_S)


def test_distance_matches_cartesian_norm():
    a, b = SphericalPoint(R_E, math.pi / 4, 0), SphericalPoint(R_S, math.pi / 3, math.pi / 6)
    expected = np.linalg.norm(a.to_cartesian() - b.to_cartesian())
    assert geometry.euclidean_distance(a, b) == pytest.approx(expected, rel=1e-12)


@given(angles, azimuths, angles, azimuths)
def test_distance_property_vs_cartesian(t1, p1, t2, p2):
    a, b = SphericalPoint(R_E, t1, p1), SphericalPoint(R_S, t2, p2)
    expected = np.linalg.norm(a.to_cartesian() - b.to_cartesian())
    assert geometry.euclidean_distance(a, b) == pytest.approx(expected, rel=1e-9, abs=1e-6)
    assert geometry.euclidean_distance(a, b) == pytest.approx(geometry.euclidean_distance(b, a))


def test_central_angle_cases():
    a = SphericalPoint(1.0, 0.3, 1.0)
    assert geometry.central_angle(a, a) == pytest.approx(0.0, abs=1e-7)
    assert geometry.central_angle(SphericalPoint(1, 0), SphericalPoint(2, math.pi)) == pytest.approx(math.pi)
    assert geometry.central_angle(SphericalPoint(1, math.pi / 2, 0),
                                  SphericalPoint(1, math.pi / 2, math.pi / 2)) == pytest.approx(math.pi / 2)


def test_chords():
    assert geometry.chord_ground_sat(0.0, R_E, R_S) == pytest.approx(1000.0)
    assert geometry.chord_ground_sat(math.pi, R_E, R_S) == pytest.approx(R_E + R_S)
    assert geometry.angle_ground_sat(geometry.chord_ground_sat(0.3, R_E, R_S), R_E, R_S) == pytest.approx(0.3, abs=1e-12)
    assert geometry.chord_sat_sat(0.0, R_S) == 0.0
    assert geometry.chord_sat_sat(math.pi, R_S) == pytest.approx(2 * R_S)
    assert geometry.chord_sat_sat(math.pi / 3, R_S) == pytest.approx(R_S)


@given(angles)
def test_chord_inverses(theta):
    assert geometry.angle_sat_sat(geometry.chord_sat_sat(theta, R_S), R_S) == pytest.approx(theta, abs=1e-7)
    assert geometry.angle_ground_sat(geometry.chord_ground_sat(theta, R_E, R_S), R_E, R_S) == pytest.approx(theta, abs=1e-6)


def test_chord_rejects_bad_angle():
    with pytest.raises(ValueError):
        geometry.chord_sat_sat(-0.1, R_S)
    with pytest.raises(ValueError):
        geometry.angle_ground_sat(500.0, R_E, R_S)


def test_bpp_uniformity(rng):
    assert len(geometry.sample_bpp(0, R_S, rng)) == 0
    pts = geometry.sample_bpp(100_000, R_S, rng)
    assert abs(np.cos(pts.polar).mean()) < 0.01
    assert np.mean(pts.polar < math.pi / 3) == pytest.approx(0.25, abs=0.005)


def test_nearest_point_cases(rng):
    target = SphericalPoint(R_S, 1.0, 2.0)
    single = PointSet.from_points([SphericalPoint(R_S, 0.5, 0.1)])
    assert geometry.nearest_point(single, target)[0] == 0
    pts = geometry.sample_bpp(100, R_S, rng)
    with_target = PointSet(R_S, np.append(pts.polar, 1.0), np.append(pts.azimuth, 2.0))
    i, q = geometry.nearest_point(with_target, target)
    assert geometry.euclidean_distance(q, target) == pytest.approx(0.0, abs=1e-6)
    brute = min(range(len(pts)), key=lambda k: geometry.euclidean_distance(pts[k], target))
    assert geometry.nearest_point(pts, target)[0] == brute
    with pytest.raises(ValueError):
        geometry.nearest_point(PointSet(R_S, [], []), target)


def test_point_validation():
    with pytest.raises(ValueError):
        SphericalPoint(-1.0, 0.0)
    with pytest.raises(ValueError):
        SphericalPoint(1.0, 4.0)
    assert SphericalPoint(1.0, 0.1, 7.0).azimuth == pytest.approx(7.0 - 2 * math.pi)
