"""
Numerical checks of the geometric and integral identities behind the
inequalities.  Each check returns its worst observed error so callers can
compare against their own tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functionals import ibp_identity_I, ibp_identity_J
from .functions import radial_corpus
from .geometry import (FD_STEP, ambient_distance, embed, laplace_beltrami_fd, pnorm_convexity_check,
                       random_interior_angles, random_sphere_points, surface_gradient_fd)
from .quadrature import radial_grid

#: Parameter sets for the integration-by-parts checks.
I_PARAMS = ((3, 2.0), (4, 2.0), (4, 3.0), (5, 2.0))
J_PARAMS = (2, 3)


@dataclass
class CheckResult:
    name: str
    n: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.worst < self.tolerance)

    def row(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        n = "-" if self.n is None else str(self.n)
        return f"{self.name:<28} n={n:<3} worst={self.worst:.3e}  tol={self.tolerance:.0e}  {status}"


def _samples(n, rng, points, centers, min_scale=0.1, min_dist=0.1):
    """Yield (center, angles) pairs kept away from chart poles and +-center."""
    for phi in random_sphere_points(n, centers, rng):
        yield phi, random_interior_angles(n, points, rng, center=phi, min_scale=min_scale,
                                          min_dist=min_dist)


def distance_gradient_deviation(n, rng, points=100, centers=3, h=FD_STEP) -> float:
    """max | |grad d|_FD - 1 |."""
    worst = 0.0
    for phi, theta in _samples(n, rng, points, centers):
        g = surface_gradient_fd(lambda y: ambient_distance(y, phi), theta, h)
        worst = max(worst, float(np.max(np.abs(np.linalg.norm(g, axis=-1) - 1.0))))
    return worst


def distance_laplacian_error(n, rng, points=100, centers=3, h=FD_STEP) -> float:
    """max |Delta_FD d - (n - 1) cot d| / (1 + |cot d|)."""
    worst = 0.0
    for phi, theta in _samples(n, rng, points, centers):
        d = ambient_distance(embed(theta), phi)
        cot = np.cos(d) / np.sin(d)
        lap = laplace_beltrami_fd(lambda y: ambient_distance(y, phi), theta, h)
        worst = max(worst, float(np.max(np.abs(lap - (n - 1) * cot) / (1 + np.abs(cot)))))
    return worst


def sine_power_flux_error(n, rng, points=100, centers=3, h=FD_STEP) -> float:
    """<grad sin^(1-n) d, grad d> against -Delta d / sin^(n-1) d, both by FD.

    The error is measured relative to (1 + |cot d|) / sin^(n-1) d, the size
    of the right-hand side away from d = pi/2 where it vanishes.
    """
    worst = 0.0
    for phi, theta in _samples(n, rng, points, centers):
        dist = lambda y: ambient_distance(y, phi)
        d = dist(embed(theta))
        gd = surface_gradient_fd(dist, theta, h)
        gs = surface_gradient_fd(lambda y: np.sin(dist(y)) ** (1 - n), theta, h)
        lhs = np.sum(gs * gd, axis=-1)
        rhs = -laplace_beltrami_fd(dist, theta, h) / np.sin(d) ** (n - 1)
        scale = (1 + np.abs(np.cos(d) / np.sin(d))) / np.sin(d) ** (n - 1)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return worst


def pnorm_convexity_violations(rng, count=100_000, dim=3) -> int:
    """Violations of |x + y|^p >= |x|^p + p |x|^(p-2) <x, y> over random draws.

    Half of the exponents are uniform on (1, 6], the rest cluster near 1;
    |x| is spread over six decades relative to |y|.
    """
    x = rng.standard_normal((count, dim)) * 10.0 ** rng.uniform(-6, 0, (count, 1))
    y = rng.standard_normal((count, dim))
    half = count // 2
    p = np.concatenate([6.0 - 5.0 * rng.random(half), 1.0 + 10.0 ** rng.uniform(-6, -1, count - half)])
    return int(np.count_nonzero(~pnorm_convexity_check(x, y, p)))


def _relative(pair):
    direct, closed = pair
    return abs(direct - closed) / abs(closed)


def identity_I_error(n, p, profiles=None, grid=None) -> float:
    grid = radial_grid(n, graded=True, tail=True) if grid is None else grid
    profiles = radial_corpus() if profiles is None else profiles
    return max(_relative(ibp_identity_I(g, n, p, grid)) for g in profiles)


def identity_J_error(n, profiles=None, grid=None) -> float:
    grid = radial_grid(n, graded=True, tail=True) if grid is None else grid
    profiles = radial_corpus() if profiles is None else profiles
    return max(_relative(ibp_identity_J(g, n, grid)) for g in profiles)


def identity_suite(ns=(2, 3, 4, 5), seed=0, h=FD_STEP):
    """Run every check for the given dimensions; returns CheckResults."""
    rng = np.random.default_rng(seed)
    out = []
    for n in ns:
        out.append(CheckResult("distance gradient norm", n, distance_gradient_deviation(n, rng, h=h), 1e-6))
        out.append(CheckResult("distance laplacian", n, distance_laplacian_error(n, rng, h=h), 1e-5))
        out.append(CheckResult("sine power flux", n, sine_power_flux_error(n, rng, h=h), 1e-5))
        for m, p in I_PARAMS:
            if m == n:
                out.append(CheckResult(f"identity I (p={p:g})", n, identity_I_error(n, p), 1e-6))
        if n in J_PARAMS:
            out.append(CheckResult("identity J", n, identity_J_error(n), 1e-6))
    out.append(CheckResult("p-norm convexity violations", None, float(pnorm_convexity_violations(rng)), 0.5))
    return out
