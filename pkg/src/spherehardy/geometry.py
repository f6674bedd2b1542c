"""
Differential geometry of the unit sphere S^n in R^(n+1) in spherical coordinates.

Angles are ``theta = (theta_1, ..., theta_n)`` with theta_1..theta_{n-1} in
[0, pi] and theta_n in [0, 2 pi).  All functions are vectorised over leading
axes: an array of shape ``(..., n)`` of angles maps to ``(..., n + 1)`` of
embedded coordinates, and so on.

Scalar functions on the sphere are plain callables taking embedded points of
shape ``(..., n + 1)`` and returning ``(...)``; they never see the chart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

#: Default central-difference step for the FD operators.
FD_STEP = 1e-4

#: Scale factors below this are treated as a coordinate singularity.
SCALE_GUARD = 1e-12

SphereFunction = Callable[[np.ndarray], np.ndarray]


class CoordinateSingularityError(ValueError):
    """A chart scale factor vanished (theta_j at 0 or pi)."""


@dataclass(frozen=True)
class AngularPoint:
    """A point of S^n given by its n spherical angles."""

    theta: tuple

    def __post_init__(self):
        theta = tuple(float(t) for t in self.theta)
        object.__setattr__(self, "theta", theta)
        n = len(theta)
        if n < 2:
            raise ValueError(f"need at least 2 angles, got {n}")
        for j, t in enumerate(theta[:-1]):
            if not 0.0 <= t <= np.pi:
                raise ValueError(f"theta_{j + 1} = {t} outside [0, pi]")
        if not 0.0 <= theta[-1] < 2 * np.pi:
            raise ValueError(f"theta_{n} = {theta[-1]} outside [0, 2 pi)")

    @property
    def n(self) -> int:
        return len(self.theta)

    def as_array(self) -> np.ndarray:
        return np.array(self.theta)

    def embed(self) -> np.ndarray:
        return embed(self.as_array())

    @classmethod
    def from_embedded(cls, x) -> "AngularPoint":
        return cls(tuple(to_angles(np.asarray(x, dtype=float))))


def _angles(p) -> np.ndarray:
    if isinstance(p, AngularPoint):
        return p.as_array()
    return np.asarray(p, dtype=float)


def embed(theta) -> np.ndarray:
    """Map angles ``(..., n)`` to unit vectors ``(..., n + 1)``.

    x_1 = cos theta_1, x_m = sin theta_1 ... sin theta_{m-1} cos theta_m for
    2 <= m <= n, and x_{n+1} = sin theta_1 ... sin theta_n.
    """
    theta = _angles(theta)
    n = theta.shape[-1]
    x = np.empty(theta.shape[:-1] + (n + 1,))
    running = np.ones(theta.shape[:-1])
    for m in range(n):
        x[..., m] = running * np.cos(theta[..., m])
        running = running * np.sin(theta[..., m])
    x[..., n] = running
    return x


def to_angles(x) -> np.ndarray:
    """Inverse of :func:`embed` for unit vectors ``(..., n + 1)``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] - 1
    theta = np.empty(x.shape[:-1] + (n,))
    for m in range(n - 1):
        tail = np.linalg.norm(x[..., m + 1:], axis=-1)
        theta[..., m] = np.arctan2(tail, x[..., m])
    theta[..., n - 1] = np.mod(np.arctan2(x[..., n], x[..., n - 1]), 2 * np.pi)
    return theta


def ambient_distance(x, y) -> np.ndarray:
    """Great-circle distance between unit vectors along the last axis.

    Equal to arccos(<x, y>) clamped to [-1, 1], evaluated as
    2 atan2(|x - y|, |x + y|) so that it keeps full relative accuracy near
    0 and pi where arccos loses half the digits.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1))


def geodesic_distance(p, q) -> np.ndarray:
    """Geodesic distance between points given as angles or AngularPoints."""
    return ambient_distance(embed(p), embed(q))


def metric_scale_factors(theta, check: bool = False) -> np.ndarray:
    """Scale factors (1, sin t1, sin t1 sin t2, ..., prod_{j<n} sin t_j).

    With ``check=True`` a :class:`CoordinateSingularityError` is raised when
    any factor drops below :data:`SCALE_GUARD`.
    """
    theta = _angles(theta)
    n = theta.shape[-1]
    h = np.empty(theta.shape)
    running = np.ones(theta.shape[:-1])
    for k in range(n):
        h[..., k] = running
        running = running * np.sin(theta[..., k])
    if check and np.any(np.abs(h) < SCALE_GUARD):
        raise CoordinateSingularityError("scale factor below guard; point on a chart pole")
    return h


def tangent_frame(theta) -> np.ndarray:
    """Orthonormal frame (theta_hat_1, ..., theta_hat_n) as ``(..., n, n + 1)``.

    theta_hat_k is d x / d theta_k divided by its scale factor, written out
    without the division so it stays defined on chart poles.
    """
    theta = _angles(theta)
    n = theta.shape[-1]
    s = np.sin(theta)
    c = np.cos(theta)
    frame = np.zeros(theta.shape[:-1] + (n, n + 1))
    for k in range(n):
        frame[..., k, k] = -s[..., k]
        running = c[..., k]
        for m in range(k + 1, n):
            frame[..., k, m] = running * c[..., m]
            running = running * s[..., m]
        frame[..., k, n] = running
    return frame


def _shifted(theta: np.ndarray, k: int, step: float) -> np.ndarray:
    out = theta.copy()
    out[..., k] += step
    return out


def surface_gradient_fd(f: SphereFunction, theta, h: float = FD_STEP) -> np.ndarray:
    """Central-difference surface gradient in the frame {theta_hat_k}.

    Component k is (1 / h_k) d f / d theta_k.  Accurate to O(h^2).
    """
    theta = _angles(theta)
    scale = metric_scale_factors(theta, check=True)
    grad = np.empty(theta.shape)
    for k in range(theta.shape[-1]):
        fp = f(embed(_shifted(theta, k, h)))
        fm = f(embed(_shifted(theta, k, -h)))
        grad[..., k] = (fp - fm) / (2 * h) / scale[..., k]
    return grad


def laplace_beltrami_fd(f: SphereFunction, theta, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Laplace-Beltrami operator of S^n.

    Uses the nested divergence form with angle weights sin^(n-k) theta_k,
    expanded by the product rule:
    sum_k h_k^-2 [f_kk + (n - k) cot(theta_k) f_k].
    """
    theta = _angles(theta)
    n = theta.shape[-1]
    scale = metric_scale_factors(theta, check=True)
    f0 = f(embed(theta))
    total = np.zeros(theta.shape[:-1])
    for k in range(n):
        fp = f(embed(_shifted(theta, k, h)))
        fm = f(embed(_shifted(theta, k, -h)))
        second = (fp - 2 * f0 + fm) / h**2
        term = second
        weight_power = n - 1 - k
        if weight_power:
            first = (fp - fm) / (2 * h)
            term = term + weight_power * np.cos(theta[..., k]) / np.sin(theta[..., k]) * first
        total = total + term / scale[..., k] ** 2
    return total


def distance_gradient(y, center) -> np.ndarray:
    """Ambient representation of grad d(., center) at points ``y``.

    Unit tangent vectors pointing away from ``center``; undefined at +-center.
    """
    y = np.asarray(y, dtype=float)
    center = np.asarray(center, dtype=float)
    c = y @ center
    v = c[..., None] * y - center
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _check_interior(d):
    d = np.asarray(d, dtype=float)
    if np.any((d <= 0.0) | (d >= np.pi)):
        raise ValueError("radial operators need 0 < d < pi")
    return d


def radial_gradient_norm(g, d) -> np.ndarray:
    """|grad (g o d)| = |g'(d)|, since |grad d| = 1 away from +-center."""
    d = _check_interior(d)
    return np.abs(g.d1(d))


def radial_laplacian(g, n: int, d) -> np.ndarray:
    """Laplace-Beltrami of g o d on S^n: g'' + (n - 1) cot(d) g'."""
    d = _check_interior(d)
    return g.d2(d) + (n - 1) * np.cos(d) / np.sin(d) * g.d1(d)


def rotate_to_pole(phi) -> np.ndarray:
    """Orthogonal matrix R with R @ embed(phi) = (1, 0, ..., 0).

    ``phi`` is an AngularPoint or an array of angles.  Built from a single
    Householder reflection, composed with the reflection x_1 -> -x_1 when
    that avoids cancellation (phi in the northern half).
    """
    return householder_to_pole(embed(phi))


def householder_to_pole(x) -> np.ndarray:
    """:func:`rotate_to_pole` for an embedded unit vector ``x``."""
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    eye = np.eye(dim)
    if x[0] > 0:
        v = x.copy()
        v[0] += 1.0
        flip = eye.copy()
        flip[0, 0] = -1.0
        return flip @ (eye - 2.0 * np.outer(v, v) / (v @ v))
    v = x.copy()
    v[0] -= 1.0
    return eye - 2.0 * np.outer(v, v) / (v @ v)


def pnorm_convexity_check(x, y, p, rel_slack: float = 1e-12):
    """Check |x + y|^p >= |x|^p + p |x|^(p-2) <x, y> for p > 1.

    Vectorised over leading axes of ``x``/``y`` (``p`` broadcasts).  The
    middle term is taken as 0 when x = 0.  Returns a boolean (array).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 1):
        raise ValueError("need p > 1")
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    lhs = np.linalg.norm(x + y, axis=-1) ** p
    dot = np.sum(x * y, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        middle = np.where(nx > 0, p * nx ** (p - 2) * dot, 0.0)
    rhs = nx**p + middle
    scale = np.maximum.reduce([lhs, nx**p, np.abs(middle), ny**p])
    return lhs >= rhs - rel_slack * scale


def random_sphere_points(n: int, count: int, rng) -> np.ndarray:
    """Uniformly distributed unit vectors in R^(n+1), shape ``(count, n + 1)``."""
    g = rng.standard_normal((count, n + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_interior_angles(n, count, rng, center=None, min_scale=0.05, min_dist=0.0):
    """Random angles kept away from chart poles and, optionally, from +-center.

    Rejection sampling from the uniform distribution: every scale factor is
    at least ``min_scale`` and the distance to ``center`` stays in
    [min_dist, pi - min_dist].
    """
    out = []
    while sum(len(o) for o in out) < count:
        theta = to_angles(random_sphere_points(n, 4 * count, rng))
        ok = np.all(metric_scale_factors(theta) >= min_scale, axis=1)
        ok &= np.all(np.sin(theta[:, :-1]) >= min_scale, axis=1)
        if center is not None:
            d = ambient_distance(embed(theta), center)
            ok &= (d >= min_dist) & (d <= np.pi - min_dist)
        out.append(theta[ok])
    return np.concatenate(out)[:count]
