"""
Quadrature on S^n and on the radial line (0, pi).

Two routes are provided and each is used as the other's oracle:

* tensor-product rules over the spherical angles (``SphereGrid``), with the
  chart's north pole placed on an arbitrary centre, and
* a one-dimensional rule in the geodesic distance d with weight
  area(S^(n-1)) sin^(n-1) d (``RadialGrid``) for functions of d alone.

Integrands in this package are singular, but integrable, at d = 0 and d = pi.
Every rule is open (no node on an endpoint).  Graded rules refine geometric
panels toward the singular endpoints; a rule built with ``tail=True`` carries
on in the variable s = -log d down to d = exp(-TAIL_S_MAX) and estimates the
remaining sliver by fitting c * log(e/sin d)^-beta to the integrand there.
That last step is what makes log-singular integrands (critical exponent)
accurate: their mass near d = 0 decays only like a power of log(1/d).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import embed, householder_to_pole

#: s = -log d at the deepest tail node.
TAIL_S_MAX = 690.0

#: Evaluate sphere integrands in blocks of about this many points.
CHUNK_POINTS = 1 << 17


class QuadratureError(ValueError):
    """Non-finite integrand value or a non-integrable endpoint."""


@dataclass(frozen=True)
class Grid1D:
    """Nodes and weights of a 1-D rule on the open interval (a, b).

    ``tail`` marks a rule whose deepest nodes reach exp(-TAIL_S_MAX) near
    ``a = 0``; integrators then add the log-power extrapolated remainder.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple
    tail: bool = False

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise ValueError("empty interval")
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes/weights length mismatch")

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@functools.lru_cache(maxsize=None)
def _legendre_reference(N: int):
    """Newton iteration for the roots of P_N on (-1, 1)."""
    i = np.arange(1, N + 1)
    x = np.cos(np.pi * (i - 0.25) / (N + 0.5))

    def legendre(x):
        # P_N and its derivative by the three-term recurrence
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(2, N + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        return p1, N * (x * p1 - p0) / (x**2 - 1)

    for _ in range(100):
        p, dp = legendre(x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = legendre(x)
    w = 2.0 / ((1 - x**2) * dp**2)
    order = np.argsort(x)
    return x[order], w[order]


def gauss_legendre(N: int, a: float = -1.0, b: float = 1.0) -> Grid1D:
    """N-point Gauss-Legendre rule on (a, b); exact to degree 2N - 1."""
    if N < 1:
        raise ValueError("need N >= 1")
    if not a < b:
        raise ValueError("need a < b")
    x, w = _legendre_reference(int(N))
    half = 0.5 * (b - a)
    return Grid1D(a + half * (x + 1.0), half * w, (a, b))


def periodic_rule(N: int, a: float = 0.0, b: float = 2 * np.pi) -> Grid1D:
    """Midpoint rule; exact for trigonometric polynomials of degree < N on a period."""
    h = (b - a) / N
    return Grid1D(a + h * (np.arange(N) + 0.5), np.full(N, h), (a, b))


def concatenate(rules, interval, tail: bool = False) -> Grid1D:
    nodes = np.concatenate([r.nodes for r in rules])
    weights = np.concatenate([r.weights for r in rules])
    order = np.argsort(nodes, kind="stable")
    return Grid1D(nodes[order], weights[order], interval, tail)


def sphere_area(n: int) -> float:
    """Area of the unit sphere S^n in R^(n+1): 2 pi^((n+1)/2) / Gamma((n+1)/2).

    S^0 is two points, of "area" 2.
    """
    if n < 0:
        raise ValueError("need n >= 0")
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def _graded_panels(a, b, levels, ratio, toward):
    """Breakpoints on [a, b] refined geometrically toward ``a`` or ``b``."""
    length = b - a
    cuts = [length * ratio**k for k in range(levels + 1)]
    if toward == "a":
        pts = sorted({a} | {a + c for c in cuts})
    else:
        pts = sorted({b} | {b - c for c in cuts})
    return list(zip(pts[:-1], pts[1:]))


def _tail_panels(delta: float, per_panel: int):
    """Rules in s = -log d covering (exp(-TAIL_S_MAX), delta), panel widths doubling."""
    s0 = -math.log(delta)
    edges = [s0]
    while edges[-1] < TAIL_S_MAX:
        edges.append(min(2 * edges[-1], TAIL_S_MAX))
    rules = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        g = gauss_legendre(per_panel, lo, hi)
        d = np.exp(-g.nodes)
        rules.append(Grid1D(d, g.weights * d, (math.exp(-hi), math.exp(-lo))))
    return rules


def _split_panel(lo, hi, per_panel, breaks=()):
    """Gauss rules on (lo, hi), cut at any breakpoints inside it."""
    pts = [lo] + sorted(x for x in breaks if lo < x < hi) + [hi]
    return [gauss_legendre(per_panel, a, b) for a, b in zip(pts[:-1], pts[1:])]


def graded_rule(a, b, levels=20, per_panel=16, ratio=0.5, toward="a", tail=False,
                breaks=()) -> Grid1D:
    """Composite Gauss rule refined toward one endpoint of (a, b).

    ``levels`` geometric panels of ratio ``ratio``, each with ``per_panel``
    nodes, plus the innermost panel.  With ``tail=True`` (only for
    ``a = 0, toward='a'``) the innermost panel is replaced by log-spaced
    panels reaching exp(-TAIL_S_MAX).  Panels containing one of ``breaks``
    are split there (for integrands with a kink, such as |u|^3 at a zero
    of u).
    """
    panels = _graded_panels(a, b, levels, ratio, toward)
    rules = []
    for lo, hi in panels:
        if tail and lo == a:
            if a != 0.0 or toward != "a":
                raise ValueError("tail panels only toward a = 0")
            rules.extend(_tail_panels(hi, per_panel))
        else:
            rules.extend(_split_panel(lo, hi, per_panel, breaks))
    return concatenate(rules, (a, b), tail)


def half_line_rule(levels=20, per_panel=16, mid_levels=8, tail=False, N=None, breaks=()) -> Grid1D:
    """Rule on (0, pi/2) for integrands in the distance to the nearer of +-centre.

    Graded toward 0 on (0, pi/4) and toward pi/2 on (pi/4, pi/2), where
    weights such as |cos d|^(p-2) are singular for non-integer p.  With
    ``levels=0, mid_levels=0`` and ``N`` given it is a plain N-point rule.
    """
    if N is not None and levels == 0 and mid_levels == 0 and not tail:
        return concatenate(_split_panel(0.0, np.pi / 2, N, breaks), (0.0, np.pi / 2))
    q = np.pi / 4
    left = graded_rule(0.0, q, levels, per_panel, toward="a", tail=tail, breaks=breaks)
    right = graded_rule(q, np.pi / 2, mid_levels, per_panel, toward="b", breaks=breaks)
    return concatenate([left, right], (0.0, np.pi / 2), tail)


def log_tail(G: Callable[[np.ndarray], np.ndarray], s_max: float = TAIL_S_MAX) -> np.ndarray:
    """Integral over d in (0, exp(-s_max)) from the s-density ``G``.

    ``G(s)`` is the integrand times d evaluated at d = exp(-s), i.e. the
    density in s = -log d; it may return an array of independent components
    along the last axis.  Each component is modelled as c L^-beta with
    L = 1 + s = log(e / sin d), fitted at s_max / 2 and s_max; the remainder
    is then c L^(1-beta) / (beta - 1).  Components that vanish, or decay
    faster than any power of L, contribute (essentially) nothing.
    """
    s = np.array([0.5 * s_max, s_max])
    g = np.asarray(G(s), dtype=float)
    La, Lb = 1.0 + s
    ga = np.atleast_1d(g[0])
    gb = np.atleast_1d(g[1])
    out = np.zeros(gb.shape)
    for i in range(gb.shape[0]):
        if gb[i] == 0.0:
            continue
        if np.sign(ga[i]) != np.sign(gb[i]):
            raise QuadratureError("tail model failed: integrand changes sign deep in the tail")
        beta = math.log(ga[i] / gb[i]) / math.log(Lb / La)
        if beta <= 1.0:
            raise QuadratureError(f"non-integrable endpoint: density ~ log^-{beta:.3f}")
        out[i] = gb[i] * Lb / (beta - 1.0)
    return out if np.ndim(g) > 1 else out[0]


# --------------------------------------------------------------------------- radial


@dataclass(frozen=True)
class RadialGrid:
    """Rule in d on (0, pi) for radial integrals over S^n.

    Built from a rule ``half`` on (0, pi/2) mirrored onto (pi/2, pi).
    ``weights`` include area(S^(n-1)) sin^(n-1) d.
    """

    n: int
    half: Grid1D
    meta: dict = field(default_factory=dict)

    @property
    def tail(self) -> bool:
        return self.half.tail

    @property
    def nodes(self) -> np.ndarray:
        t = self.half.nodes
        return np.concatenate([t, np.pi - t[::-1]])

    @property
    def weights(self) -> np.ndarray:
        w = self.half.weights * sphere_area(self.n - 1) * np.sin(self.half.nodes) ** (self.n - 1)
        return np.concatenate([w, w[::-1]])

    def log_measure(self) -> np.ndarray:
        """log of area(S^(n-1)) sin^(n-1) t w_t on the half rule (underflow-free)."""
        t = self.half.nodes
        return (math.log(sphere_area(self.n - 1)) + np.log(self.half.weights)
                + (self.n - 1) * np.log(np.sin(t)))

    def with_breaks(self, breaks) -> "RadialGrid":
        """Same rule with panels cut at the given points of (0, pi/2)."""
        breaks = [float(b) for b in breaks if 0.0 < b < np.pi / 2]
        if not breaks:
            return self
        m = self.meta
        if m.get("graded"):
            half = half_line_rule(m["levels"], m["per_panel"], m["mid_levels"], m["tail"], breaks=breaks)
        else:
            half = half_line_rule(0, 0, 0, False, N=max(1, m["N"] // 2), breaks=breaks)
        return RadialGrid(self.n, half, m)


def radial_grid(n, N=64, graded=False, levels=20, per_panel=16, mid_levels=8, tail=False) -> RadialGrid:
    """Radial rule on (0, pi).

    Plain: N Gauss nodes split evenly between (0, pi/2) and (pi/2, pi).
    Graded: geometric panels (ratio 1/2) toward 0, pi and pi/2, with the
    optional log tail at both ends.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if graded or tail:
        half = half_line_rule(levels, per_panel, mid_levels, tail)
        meta = {"graded": True, "levels": levels, "per_panel": per_panel,
                "mid_levels": mid_levels, "tail": tail}
    else:
        half = half_line_rule(0, 0, 0, False, N=max(1, N // 2))
        meta = {"graded": False, "N": N}
    return RadialGrid(n, half, meta)


def integrate_radial(g, n: int, grid: RadialGrid) -> float:
    """area(S^(n-1)) int_0^pi g(d) sin^(n-1) d dd.

    ``g`` is a callable of d, or a radial profile with ``reflected()``; a
    profile is evaluated on (pi/2, pi) through its reflection so that nodes
    next to pi keep full precision.  A plain callable sees pi - t, which
    rounds to pi once t < 1e-16, so it is only reliable for integrands that
    are regular at pi.  Tail grids extrapolate at both ends.
    """
    if grid.n != n:
        raise ValueError("grid built for a different dimension")
    t = grid.half.nodes
    if hasattr(g, "reflected"):
        sides = (g, g.reflected())
    else:
        sides = (g, lambda s: g(np.pi - s))
    log_w = grid.log_measure()
    log_area = math.log(sphere_area(n - 1))
    total = 0.0
    for side in sides:
        vals = np.asarray(side(t), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = t[~np.isfinite(vals)][0]
            raise QuadratureError(f"non-finite radial integrand near d = {bad!r}")
        total += float(np.sum(weighted(vals, log_w)))
        if grid.tail:
            def density(s, side=side):
                d = np.exp(-s)
                return weighted(side(d), log_area + (n - 1) * np.log(np.sin(d)) - s)
            total += float(log_tail(density))
    return total


def weighted(values, log_weight) -> np.ndarray:
    """values * exp(log_weight) without overflow/underflow in the weight alone."""
    values = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        mag = np.log(np.abs(values))
    return np.sign(values) * np.exp(mag + log_weight)


# --------------------------------------------------------------------------- sphere


@dataclass(frozen=True)
class SphereGrid:
    """Tensor-product rule over the angles of S^n.

    ``rules[0]`` is the rule for theta_1, which is the geodesic distance to
    ``center``; the chart is rotated so that its north pole sits at the
    centre.  ``rules[0]`` may cover only (0, pi/2) (a cap).  The surface
    density prod_j sin^(n-j) theta_j is applied by the integrators.
    """

    n: int
    rules: tuple
    center: np.ndarray = None

    def __post_init__(self):
        if len(self.rules) != self.n:
            raise ValueError(f"need {self.n} angle rules, got {len(self.rules)}")
        c = np.zeros(self.n + 1)
        c[0] = 1.0
        center = c if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", center / np.linalg.norm(center))

    @property
    def size(self) -> int:
        return int(np.prod([len(r) for r in self.rules]))

    @functools.cached_property
    def _pole_map(self) -> np.ndarray:
        # R with R @ center = e_1; nodes are R^T x, i.e. x @ R for row vectors
        return householder_to_pole(self.center)

    @functools.cached_property
    def _inner(self):
        """Unit vectors of S^(n-1) (angles theta_2..theta_n) and their weights."""
        inner = self.rules[1:]
        mesh = np.meshgrid(*[r.nodes for r in inner], indexing="ij")
        wmesh = np.meshgrid(*[r.weights for r in inner], indexing="ij")
        angles = np.stack([m.ravel() for m in mesh], axis=-1)
        w = np.ones(angles.shape[0])
        m = self.n - 1
        for j in range(m):
            w = w * wmesh[j].ravel() * np.sin(angles[:, j]) ** (m - 1 - j)
        return embed(angles), w

    def points(self, t) -> np.ndarray:
        """Embedded nodes for theta_1 = t: array ``(len(t), n_inner, n + 1)``."""
        t = np.asarray(t, dtype=float)
        xi, _ = self._inner
        x = np.empty((t.shape[0], xi.shape[0], self.n + 1))
        x[..., 0] = np.cos(t)[:, None]
        x[..., 1:] = np.sin(t)[:, None, None] * xi[None]
        return x @ self._pole_map

    @property
    def inner_weights(self) -> np.ndarray:
        return self._inner[1]

    def total_weight(self) -> float:
        """Sum of all combined weights (the grid's area), without forming the nodes."""
        r = self.rules[0]
        polar = float(np.sum(r.weights * np.sin(r.nodes) ** (self.n - 1)))
        inner = 1.0
        for j, rule in enumerate(self.rules[1:]):
            inner *= float(np.sum(rule.weights * np.sin(rule.nodes) ** (self.n - 2 - j)))
        return polar * inner

    def blocks(self):
        """Yield (t, points, log_weight) blocks in a fixed order over theta_1."""
        r = self.rules[0]
        w_in = self.inner_weights
        step = max(1, CHUNK_POINTS // max(1, w_in.shape[0]))
        log_in = np.log(w_in)
        for start in range(0, len(r), step):
            t = r.nodes[start:start + step]
            lw = np.log(r.weights[start:start + step]) + (self.n - 1) * np.log(np.sin(t))
            yield t, self.points(t), lw[:, None] + log_in[None, :]


def sphere_grid(n, N=None, center=None) -> SphereGrid:
    """Standard full-sphere grid: N Gauss nodes per polar angle, N midpoints in theta_n.

    Default N is 64 for n <= 3 and 32 for n in {4, 5}.
    """
    if N is None:
        N = 64 if n <= 3 else 32
    rules = [gauss_legendre(N, 0.0, np.pi) for _ in range(n - 1)]
    rules.append(periodic_rule(N))
    return SphereGrid(n, tuple(rules), center)


@dataclass(frozen=True)
class CappedSphereGrid:
    """S^n split into the two hemispherical caps about +centre and -centre.

    Both caps share the theta_1 rule ``radial`` on (0, pi/2), so the
    distance to the nearer singular point is always a grid coordinate.
    Integrands whose weights depend on d only through sin d, |cos d| are
    evaluated with that cap distance.
    """

    n: int
    center: np.ndarray
    radial: Grid1D
    inner: tuple
    meta: dict = field(default_factory=dict)

    def caps(self):
        c = np.asarray(self.center, dtype=float)
        rules = (self.radial,) + tuple(self.inner)
        return (SphereGrid(self.n, rules, c), SphereGrid(self.n, rules, -c))

    @property
    def tail(self) -> bool:
        return self.radial.tail

    @property
    def size(self) -> int:
        return 2 * len(self.radial) * int(np.prod([len(r) for r in self.inner]))


def capped_grid(n, center, inner_N=None, levels=8, per_panel=8, mid_levels=4, tail=False) -> CappedSphereGrid:
    """Cap grid with a graded theta_1 rule; inner angles use ``inner_N`` nodes."""
    if inner_N is None:
        inner_N = {2: 24, 3: 16, 4: 12}.get(n, 8)
    radial = half_line_rule(levels, per_panel, mid_levels, tail)
    inner = [gauss_legendre(inner_N, 0.0, np.pi) for _ in range(n - 2)]
    inner.append(periodic_rule(inner_N))
    meta = {"inner_N": inner_N, "levels": levels, "per_panel": per_panel,
            "mid_levels": mid_levels, "tail": tail}
    return CappedSphereGrid(n, np.asarray(center, dtype=float), radial, tuple(inner), meta)


def sum_terms(term_fn, grid: SphereGrid) -> np.ndarray:
    """Sum ``term_fn(t, points, log_w)`` over a sphere grid.

    ``term_fn`` returns values of shape ``(len(t), n_inner, K)`` with the
    quadrature weight already applied (it receives the log of the weight so
    that tiny weights can be combined with large integrand factors).
    Blocks are reduced in a fixed order; a tail rule adds the extrapolated
    remainder at theta_1 -> 0.
    """
    total = None
    for t, pts, lw in grid.blocks():
        vals = term_fn(t, pts, lw)
        if not np.all(np.isfinite(vals)):
            idx = np.argwhere(~np.isfinite(vals))[0]
            raise QuadratureError(
                f"non-finite integrand at node {pts[idx[0], idx[1]].tolist()} (theta_1 = {t[idx[0]]!r})")
        part = vals.reshape(-1, vals.shape[-1]).sum(axis=0)
        total = part if total is None else total + part
    if grid.rules[0].tail:
        w_in = grid.inner_weights
        log_in = np.log(w_in)

        def density(s):
            d = np.exp(-s)
            lw = (grid.n - 1) * np.log(np.sin(d))[:, None] + np.log(d)[:, None] + log_in[None, :]
            return term_fn(d, grid.points(d), lw).sum(axis=1)

        total = total + log_tail(density)
    return total


def integrate_sphere(f, grid) -> float:
    """Integral of ``f`` (a callable on embedded points) against the surface measure."""
    grids = grid.caps() if isinstance(grid, CappedSphereGrid) else (grid,)

    def term(t, pts, lw):
        shape = pts.shape[:-1]
        vals = np.asarray(f(pts.reshape(-1, pts.shape[-1])), dtype=float).reshape(shape)
        return (vals * np.exp(lw))[..., None]

    return float(sum(sum_terms(term, g)[0] for g in grids))
