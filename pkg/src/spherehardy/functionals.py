"""
Hardy-type functionals on S^n with singular point Phi.

Three inequality kinds, with lambda = (n - p)/p, mu = (n - 1)/n and
L = log(e / sin d):

subcritical (2 <= p < n)
    A + (p - 1) lambda^(p-1) B >= lambda^p C,
    B = int |u|^p / |tan d|^(p-2),  C = int |u|^p / |tan d|^p
critical (p = n >= 2)
    A + (n - 1) mu^(n-1) B >= mu^n C,
    B = int |u|^n / (|tan d|^(n-2) L^(n-1)),  C = int |u|^n / (|tan d|^n L^n)
claimed (1 < p < n; an open conjecture)
    A + lambda^(p-1) B >= lambda^p C,  B = int |u|^p / sin^(p-2) d

where A = int |grad u|^p.  All weights depend on d only through sin d and
|cos d|, so they are invariant under d -> pi - d; integrals are therefore
assembled from the two caps about +Phi and -Phi in the cap distance t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .functions import RadialProfile, compose_radial, log_power, log_weight, product, profile_roots
from .geometry import ambient_distance
from .quadrature import (CappedSphereGrid, QuadratureError, RadialGrid, log_tail,
                         sphere_area, sum_terms)

KINDS = ("subcritical", "critical", "claimed")


@dataclass(frozen=True)
class InequalityKind:
    kind: str
    n: int
    p: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        n = self.n
        if self.kind == "critical":
            if n < 2:
                raise ValueError("critical inequality needs n >= 2")
            if self.p is not None and float(self.p) != float(n):
                raise ValueError("critical inequality has p = n")
            object.__setattr__(self, "p", float(n))
            return
        if self.p is None:
            raise ValueError(f"{self.kind} inequality needs p")
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if n < 3 or not 1 < p < n:
            raise ValueError(f"{self.kind} inequality needs n >= 3 and 1 < p < n, got n={n}, p={p}")

    @property
    def lam(self) -> float:
        return (self.n - self.p) / self.p

    @property
    def mu(self) -> float:
        return (self.n - 1) / self.n

    @property
    def middle_coefficient(self) -> float:
        if self.kind == "subcritical":
            return (self.p - 1) * self.lam ** (self.p - 1)
        if self.kind == "critical":
            return (self.n - 1) * self.mu ** (self.n - 1)
        return self.lam ** (self.p - 1)

    @property
    def sharp_constant(self) -> float:
        """Coefficient of the singular term C."""
        if self.kind == "critical":
            return self.mu**self.n
        return self.lam**self.p

    @property
    def exploratory(self) -> bool:
        """True when the inequality is not a proven statement at these parameters."""
        return self.kind == "claimed" or (self.kind == "subcritical" and self.p < 2)

    def log_weights(self, t):
        """log of the B and C weights at cap distance t (without |u|^p)."""
        t = np.asarray(t, dtype=float)
        ls = np.log(np.sin(t))
        lc = np.log(np.abs(np.cos(t)))
        p, n = self.p, self.n
        if self.kind == "subcritical":
            return (p - 2) * (lc - ls), p * (lc - ls)
        if self.kind == "critical":
            lL = np.log(log_weight(t))
            return (n - 2) * (lc - ls) - (n - 1) * lL, n * (lc - ls) - n * lL
        return -(p - 2) * ls, p * (lc - ls)

    def terms(self, t, value, grad_norm, log_measure):
        """Integrand values (A, B, C) along the last axis, measure applied."""
        wB, wC = self.log_weights(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            lu = self.p * np.log(np.abs(value))
            lg = self.p * np.log(np.abs(grad_norm))
            out = np.stack([np.exp(lg + log_measure),
                            np.exp(lu + wB + log_measure),
                            np.exp(lu + wC + log_measure)], axis=-1)
        return out


@dataclass
class InequalityReport:
    kind: str
    n: int
    p: float
    A: float
    B: float
    C: float
    middle_coefficient: float
    constant: float
    grid: dict = field(default_factory=dict)
    u_spec: Optional[dict] = None
    exploratory: bool = False

    @property
    def lhs(self) -> float:
        return self.A + self.middle_coefficient * self.B

    @property
    def rhs(self) -> float:
        return self.constant * self.C

    @property
    def deficit(self) -> float:
        return self.lhs - self.rhs

    @property
    def scale(self) -> float:
        return self.A + self.B + self.C

    @property
    def quotient(self) -> Optional[float]:
        """(A + coefficient * B) / C, or None when C vanishes."""
        return self.lhs / self.C if self.C > 0 else None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "p": self.p,
            "terms": {"A": self.A, "B": self.B, "C": self.C},
            "coefficients": {"middle": self.middle_coefficient, "constant": self.constant},
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "quotient": self.quotient,
            "grid": self.grid,
            "u_spec": self.u_spec,
            "exploratory": self.exploratory,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InequalityReport":
        return cls(data["kind"], data["n"], data["p"], data["terms"]["A"], data["terms"]["B"],
                   data["terms"]["C"], data["coefficients"]["middle"],
                   data["coefficients"]["constant"], data["grid"], data["u_spec"],
                   data["exploratory"])


def _as_kind(kind, n=None, p=None) -> InequalityKind:
    if isinstance(kind, InequalityKind):
        return kind
    return InequalityKind(kind, n, p)


def _radial_terms(k: InequalityKind, u: RadialProfile, grid: RadialGrid) -> np.ndarray:
    log_area = math.log(sphere_area(k.n - 1))
    total = np.zeros(3)
    for side in (u, u.reflected()):
        g = grid.with_breaks(profile_roots(side))
        t = g.half.nodes
        vals = k.terms(t, side.value(t), side.d1(t), g.log_measure())
        if not np.all(np.isfinite(vals)):
            bad = t[~np.all(np.isfinite(vals), axis=-1)][0]
            raise QuadratureError(f"non-finite integrand for {side.spec} at cap distance {bad!r}")
        total += vals.sum(axis=0)
        if grid.tail:
            def density(s, side=side):
                d = np.exp(-s)
                return k.terms(d, side.value(d), side.d1(d),
                               log_area + (k.n - 1) * np.log(np.sin(d)) - s)
            total += log_tail(density)
    return total


def _sphere_terms(k: InequalityKind, u, grid) -> np.ndarray:
    caps = grid.caps() if isinstance(grid, CappedSphereGrid) else (grid,)

    def term(t, pts, lw):
        flat = pts.reshape(-1, pts.shape[-1])
        v, g = u.value_and_grad_norm(flat)
        shape = pts.shape[:-1]
        return k.terms(np.broadcast_to(t[:, None], shape), v.reshape(shape), g.reshape(shape), lw)

    return sum(sum_terms(term, cap) for cap in caps)


def evaluate(kind, u, grid, n=None, p=None, rhs_scale: float = 1.0,
             middle_scale: float = 1.0) -> InequalityReport:
    """Evaluate one inequality instance.

    ``grid`` is a RadialGrid (then ``u`` must be a RadialProfile), or a
    CappedSphereGrid / SphereGrid whose centre is the singular point Phi
    (then ``u`` is any function with ``value_and_grad_norm``; a bare profile
    is composed with the distance to the centre).  ``rhs_scale`` and
    ``middle_scale`` multiply the constant of the singular term and the
    coefficient of the middle term; the defaults give the inequality as
    stated, other values build failing fixtures or probe how far the middle
    coefficient can be lowered.
    """
    k = _as_kind(kind, n if n is not None else grid.n, p)
    if k.n != grid.n:
        raise ValueError("grid dimension does not match the inequality")
    if isinstance(grid, RadialGrid):
        if not isinstance(u, RadialProfile):
            raise TypeError("radial grids need a RadialProfile")
        A, B, C = _radial_terms(k, u, grid)
        meta = {"route": "radial", **grid.meta}
    else:
        if isinstance(u, RadialProfile):
            u = compose_radial(u, grid.center)
        A, B, C = _sphere_terms(k, u, grid)
        meta = {"route": "sphere", **getattr(grid, "meta", {})}
    return InequalityReport(k.kind, k.n, k.p, float(A), float(B), float(C),
                            middle_scale * k.middle_coefficient, rhs_scale * k.sharp_constant, meta,
                            getattr(u, "spec", None), k.exploratory)


# --------------------------------------------------------------------------- identities


def _signed_pow(x, a):
    """sign(x) |x|^a."""
    return np.sign(x) * np.abs(x) ** a


def _half_line(grid: RadialGrid, u: RadialProfile, integrand) -> float:
    """area(S^(n-1)) * sum over both sides of integrand(t, side) dt, plus tails."""
    area = sphere_area(grid.n - 1)
    total = 0.0
    for side in (u, u.reflected()):
        half = grid.with_breaks(profile_roots(side)).half
        vals = integrand(half.nodes, side)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"non-finite identity integrand for {side.spec}")
        total += area * float(np.dot(half.weights, vals))
        if grid.tail:
            def density(s, side=side):
                d = np.exp(-s)
                return area * integrand(d, side) * d
            total += float(log_tail(density))
    return total


def ibp_identity_I(u: RadialProfile, n: int, p: float, grid: RadialGrid):
    """Both sides of the integration by parts behind the subcritical inequality.

    direct = int |cos d|^(p-2) <grad sin^(2-n) d, grad(|u|^p sin^(n-p) d)>
    closed = -(n - 2)(p - 1) int |u|^p / |tan d|^(p-2)

    The radial inner product is odd times odd under d -> pi - d, so each half
    of (0, pi) is written in the distance t to the nearer pole.
    """
    if not (n >= 3 and 2 <= p < n):
        raise ValueError("identity I needs n >= 3 and 2 <= p < n")

    def direct(t, g):
        s, c = np.sin(t), np.cos(t)
        v, dv = g.value(t), g.d1(t)
        inner = p * _signed_pow(v, p - 1) * dv * s ** (n - p) + (n - p) * np.abs(v) ** p * s ** (n - p - 1) * c
        return (2 - n) * _signed_pow(c, p - 1) * inner

    def closed(t, g):
        return np.abs(g.value(t)) ** p * np.abs(np.cos(t)) ** (p - 2) * np.sin(t) ** (n - p + 1)

    return _half_line(grid, u, direct), -(n - 2) * (p - 1) * _half_line(grid, u, closed)


def ibp_identity_J(u: RadialProfile, n: int, grid: RadialGrid):
    """Both sides of the divergence-theorem identity behind the critical inequality.

    With psi = u / L^((n-1)/n):
    direct = int (|cos d|^(n-2) cos d / sin^(n-1) d) <grad d, grad |psi|^n>
    closed = (n - 1) int |u|^n / (L^(n-1) |tan d|^(n-2))

    The direct integrand behaves like 1/(d L^n) at the poles, so ``grid``
    should carry a log tail.  Agreement requires psi -> 0 at +-Phi, which
    holds for every bounded u.
    """
    if n < 2:
        raise ValueError("identity J needs n >= 2")

    def direct(t, g):
        s, c = np.sin(t), np.cos(t)
        v, dv = g.value(t), g.d1(t)
        L = log_weight(t)
        dpsi_n = (n * _signed_pow(v, n - 1) * dv * L ** (1 - n)
                  + (n - 1) * np.abs(v) ** n * L ** (-n) * c / s)
        return _signed_pow(c, n - 1) * dpsi_n

    def closed(t, g):
        return (np.abs(g.value(t)) ** n * log_weight(t) ** (1 - n)
                * np.abs(np.cos(t)) ** (n - 2) * np.sin(t))

    return _half_line(grid, u, direct), (n - 1) * _half_line(grid, u, closed)


def from_psi(psi: RadialProfile, n: int) -> RadialProfile:
    """u = psi * L^((n-1)/n), the critical-case decomposition read backwards."""
    return product(psi, log_power((n - 1) / n))


def pointwise_gradient_bound_check(n: int, p: float, psi: RadialProfile, sample, phi,
                           rel_slack: float = 1e-10) -> int:
    """Count sample points where the pointwise lower bound for |grad u|^p fails.

    u = phi_s^alpha psi with phi_s = sin d and alpha = -(n - p)/p; the bound
    is |alpha|^p phi_s^(alpha p - p) |psi|^p |grad phi_s|^p
    + alpha |alpha|^(p-2) / k |grad phi_s|^(p-2) <grad phi_s^k, grad |psi|^p>,
    k = alpha p - p + 2.  ``sample`` holds embedded points, ``phi`` the
    singular point (embedded).
    """
    if not (n >= 3 and 2 <= p < n):
        raise ValueError("needs n >= 3 and 2 <= p < n")
    d = ambient_distance(np.asarray(sample, dtype=float), np.asarray(phi, dtype=float))
    d = d[(d > 0) & (d < np.pi)]
    alpha = -(n - p) / p
    k = alpha * p - p + 2
    s, c = np.sin(d), np.cos(d)
    v, dv = psi.value(d), psi.d1(d)
    du = alpha * s ** (alpha - 1) * c * v + s**alpha * dv
    lhs = np.abs(du) ** p
    first = abs(alpha) ** p * s ** (alpha * p - p) * np.abs(v) ** p * np.abs(c) ** p
    inner = k * s ** (k - 1) * c * p * _signed_pow(v, p - 1) * dv
    second = alpha * abs(alpha) ** (p - 2) / k * np.abs(c) ** (p - 2) * inner
    rhs = first + second
    scale = lhs + np.abs(first) + np.abs(second)
    return int(np.count_nonzero(lhs < rhs - rel_slack * scale))
