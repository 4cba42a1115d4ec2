import numpy as np
import pytest

from radonbv.geometry import (
    EmptySliceError,
    ball_volume,
    lift_to_sphere,
    lift_weight,
    orthonormal_frame,
    sample_hyperplane_slice,
    sample_unit_ball,
    sample_unit_sphere,
    sphere_area,
    unlift_from_sphere,
)


def test_ball_volumes_match_closed_forms():
    assert ball_volume(1) == pytest.approx(2.0)
    assert ball_volume(2) == pytest.approx(np.pi)
    assert ball_volume(3) == pytest.approx(4.0 * np.pi / 3.0)


def test_sphere_areas_match_closed_forms():
    # S^0 carries counting measure: two points
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2.0 * np.pi)
    assert sphere_area(3) == pytest.approx(4.0 * np.pi)


def test_sphere_samples_are_unit_and_symmetric():
    rng = np.random.default_rng(0)
    pts = sample_unit_sphere(3, 50000, rng)
    assert pts.shape == (50000, 3)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    # componentwise means vanish for the uniform measure
    assert np.max(np.abs(pts.mean(axis=0))) < 0.02


def test_ball_samples_inside_and_radius_law():
    rng = np.random.default_rng(1)
    pts = sample_unit_ball(2, 50000, rng)
    r = np.linalg.norm(pts, axis=1)
    assert np.all(r <= 1.0 + 1e-12)
    # P(r <= t) = t^2 in 2 dimensions
    assert np.mean(r <= 0.5) == pytest.approx(0.25, abs=0.01)


def test_lift_is_unit_and_roundtrips():
    rng = np.random.default_rng(2)
    w = sample_unit_sphere(4, 1000, rng)
    b = rng.uniform(-1, 1, 1000)
    v = lift_to_sphere(w, b)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)
    assert np.all(np.abs(v[:, -1]) <= 1.0 / np.sqrt(2.0) + 1e-12)
    w2, b2 = unlift_from_sphere(v)
    np.testing.assert_allclose(w2, w, atol=1e-12)
    np.testing.assert_allclose(b2, b, atol=1e-12)


def test_lift_weight_range():
    rng = np.random.default_rng(3)
    v = lift_to_sphere(sample_unit_sphere(3, 1000, rng), rng.uniform(-1, 1, 1000))
    h = lift_weight(v)
    assert np.all(h >= 1.0 - 1e-12)
    assert np.all(h <= np.sqrt(2.0) + 1e-12)


def test_single_point_lift_shape():
    v = lift_to_sphere(np.array([1.0, 0.0]), 1.0)
    assert v.shape == (3,)
    np.testing.assert_allclose(v, [1 / np.sqrt(2), 0, 1 / np.sqrt(2)], atol=1e-15)


def test_orthonormal_frame_properties():
    rng = np.random.default_rng(4)
    for _ in range(20):
        w = sample_unit_sphere(5, 1, rng)[0]
        fr = orthonormal_frame(w)
        assert fr.shape == (5, 4)
        np.testing.assert_allclose(fr.T @ fr, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(fr.T @ w, 0.0, atol=1e-12)


def test_slice_points_lie_on_plane_and_in_ball():
    rng = np.random.default_rng(5)
    w = np.array([0.0, 0.0, 1.0])
    pts = sample_hyperplane_slice(w, 0.4, 2000, rng)
    np.testing.assert_allclose(pts @ w, 0.4, atol=1e-12)
    assert np.all(np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12)


def test_tangent_slice_is_empty():
    with pytest.raises(EmptySliceError):
        sample_hyperplane_slice(np.array([1.0, 0.0]), 1.0, 10, np.random.default_rng(0))


def test_slice_needs_dim_two():
    with pytest.raises(ValueError):
        sample_hyperplane_slice(np.array([1.0]), 0.0, 10, np.random.default_rng(0))
