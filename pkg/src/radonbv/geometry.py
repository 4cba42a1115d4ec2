"""Samplers and coordinate maps on spheres, balls, and hyperplane slices.

All samplers take an explicit ``numpy.random.Generator`` (or a seed that
``numpy.random.default_rng`` accepts); there is no hidden global RNG state.
Points are returned as float64 arrays with one row per sample.
"""

import math

import numpy as np


class EmptySliceError(ValueError):
    """Raised when a requested hyperplane slice misses the open unit ball."""


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d (d = 0 gives 1)."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} in R^d; S^0 has measure 2."""
    if d < 1:
        raise ValueError("sphere_area requires d >= 1")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def sample_unit_sphere(d: int, n: int, rng) -> np.ndarray:
    """Uniform points on S^{d-1}, shape (n, d), via normalized Gaussians."""
    if d < 1:
        raise ValueError("sphere dimension must satisfy d >= 1")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(rng)
    x = rng.standard_normal((n, d))
    norms = np.linalg.norm(x, axis=1)
    # zero-norm draws are measure zero but would poison the division
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        x[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(x, axis=1)
    return x / norms[:, None]


def sample_unit_ball(d: int, n: int, rng) -> np.ndarray:
    """Uniform points in the closed unit ball of R^d, shape (n, d)."""
    if d < 1:
        raise ValueError("ball dimension must satisfy d >= 1")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(rng)
    dirs = sample_unit_sphere(d, n, rng)
    radii = rng.random(n) ** (1.0 / d)
    return dirs * radii[:, None]


def lift_to_sphere(w, b) -> np.ndarray:
    """Map cylinder points (w, b) in S^{d-1} x [-1, 1] onto the unit sphere S^d.

    v = (w, b) / sqrt(1 + b^2).  Accepts a single (d,) vector with scalar b,
    or batches (n, d) with (n,).
    """
    w = np.asarray(w, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = 1.0 / np.sqrt(1.0 + b * b)
    return np.concatenate([w * scale[..., None], (b * scale)[..., None]], axis=-1)


def unlift_from_sphere(v) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of lift_to_sphere: recover (w, b) from points on the lifted band."""
    v = np.asarray(v, dtype=float)
    last = v[..., -1]
    denom = np.sqrt(1.0 - last * last)
    if np.any(denom < 1e-12):
        raise ValueError("point lies outside the lifted band (|v_{d+1}| too close to 1)")
    return v[..., :-1] / denom[..., None], last / denom


def lift_weight(v) -> np.ndarray:
    """Change-of-variables weight h(v) = (1 - v_{d+1}^2)^{-1/2} on lifted points."""
    v = np.asarray(v, dtype=float)
    last = v[..., -1]
    return 1.0 / np.sqrt(1.0 - last * last)


def orthonormal_frame(w: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the hyperplane through 0 normal to w.

    Returns a (d, d-1) matrix whose columns are orthonormal and orthogonal
    to w.  The construction drops the canonical axis most aligned with w and
    Gram-Schmidts the rest in ascending index order, so the frame depends
    only on w (reproducible across platforms).
    """
    w = np.asarray(w, dtype=float)
    d = w.shape[0]
    nrm = np.linalg.norm(w)
    if nrm < 1e-12:
        raise ValueError("direction must be nonzero")
    u = w / nrm
    pivot = int(np.argmax(np.abs(u)))
    cols = []
    basis = [u]
    for j in range(d):
        if j == pivot:
            continue
        e = np.zeros(d)
        e[j] = 1.0
        for q in basis:
            e = e - np.dot(q, e) * q
        nm = np.linalg.norm(e)
        if nm < 1e-12:
            raise ValueError("degenerate frame construction")
        e = e / nm
        basis.append(e)
        cols.append(e)
    return np.column_stack(cols)


def sample_hyperplane_slice(w: np.ndarray, s: float, n: int, rng) -> np.ndarray:
    """Uniform points on {x : w.x = s} intersected with the unit ball.

    The slice is a (d-1)-ball of radius sqrt(1 - s^2) centered at s*w.
    Requires d >= 2 and |s| < 1.
    """
    w = np.asarray(w, dtype=float)
    d = w.shape[0]
    if d < 2:
        raise ValueError("hyperplane slices need ambient dimension >= 2")
    if abs(s) >= 1.0:
        raise EmptySliceError(f"offset {s} leaves an empty slice of the unit ball")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(rng)
    frame = orthonormal_frame(w)
    radius = math.sqrt(1.0 - s * s)
    y = sample_unit_ball(d - 1, n, rng) * radius
    return y @ frame.T + s * w
