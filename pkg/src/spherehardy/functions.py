"""
Test functions on S^n.

* ``RadialProfile``: a function g of the geodesic distance d with analytic
  first and second derivatives.  Profiles know their reflection
  g(pi - d), so integrals near d = pi can be taken in the variable pi - d
  without losing precision.
* ``SmoothTestFunction``: a polynomial in the embedding coordinates, hence
  smooth on the whole sphere whatever the chart.
* ``RadialFunction``: a profile composed with d(., center).

Every object carries a JSON-able ``spec`` from which :func:`from_spec`
rebuilds it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .geometry import ambient_distance, distance_gradient, embed, tangent_frame


def _as_array(d):
    return np.asarray(d, dtype=float)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """g(d) on (0, pi) with derivative oracles.

    ``endpoint`` is ``"finite"``, ``"power"`` or ``"log"`` and describes the
    behaviour as d -> 0 or pi; ``symmetric`` means g(pi - d) = g(d).
    """

    value: Callable
    d1: Callable
    d2: Callable
    spec: dict
    endpoint: str = "finite"
    symmetric: bool = False
    reflect: Optional[Callable] = field(default=None, repr=False)

    def __call__(self, d):
        return self.value(_as_array(d))

    def reflected(self) -> "RadialProfile":
        """The profile t -> g(pi - t)."""
        if self.symmetric:
            return self
        if self.reflect is not None:
            return self.reflect()
        g = self
        return RadialProfile(
            lambda t: g.value(np.pi - _as_array(t)),
            lambda t: -g.d1(np.pi - _as_array(t)),
            lambda t: g.d2(np.pi - _as_array(t)),
            {"kind": "reflected", "of": g.spec},
            g.endpoint,
            reflect=lambda: g,
        )

    def scaled(self, c: float) -> "RadialProfile":
        return product(constant(c), self)


def constant(c: float = 1.0) -> RadialProfile:
    c = float(c)
    zero = lambda d: np.zeros_like(_as_array(d))
    return RadialProfile(lambda d: np.full_like(_as_array(d), c), zero, zero,
                         {"kind": "constant", "c": c}, symmetric=True)


def poly_cos(coeffs) -> RadialProfile:
    """sum_k c_k cos^k d."""
    c = np.asarray(coeffs, dtype=float)
    P = np.polynomial.Polynomial(c)
    dP, ddP = P.deriv(), P.deriv(2)

    def d1(d):
        d = _as_array(d)
        return -np.sin(d) * dP(np.cos(d))

    def d2(d):
        d = _as_array(d)
        return np.sin(d) ** 2 * ddP(np.cos(d)) - np.cos(d) * dP(np.cos(d))

    flipped = c * (-1.0) ** np.arange(len(c))
    symmetric = bool(np.all(c[1::2] == 0))
    return RadialProfile(lambda d: P(np.cos(_as_array(d))), d1, d2,
                         {"kind": "poly_cos", "coeffs": c.tolist()},
                         symmetric=symmetric, reflect=lambda: poly_cos(flipped))


def sin_poly_cos(coeffs) -> RadialProfile:
    """sin d * sum_k c_k cos^k d; vanishes at both poles."""
    c = np.asarray(coeffs, dtype=float)
    P = np.polynomial.Polynomial(c)
    dP, ddP = P.deriv(), P.deriv(2)

    def val(d):
        d = _as_array(d)
        return np.sin(d) * P(np.cos(d))

    def d1(d):
        d = _as_array(d)
        s, co = np.sin(d), np.cos(d)
        return co * P(co) - s**2 * dP(co)

    def d2(d):
        d = _as_array(d)
        s, co = np.sin(d), np.cos(d)
        return -s * P(co) - 3 * s * co * dP(co) + s**3 * ddP(co)

    flipped = c * (-1.0) ** np.arange(len(c))
    symmetric = bool(np.all(c[1::2] == 0))
    return RadialProfile(val, d1, d2, {"kind": "sin_poly_cos", "coeffs": c.tolist()},
                         symmetric=symmetric, reflect=lambda: sin_poly_cos(flipped))


def exp_cos(a: float = 1.0) -> RadialProfile:
    """exp(a cos d)."""
    a = float(a)

    def val(d):
        return np.exp(a * np.cos(_as_array(d)))

    def d1(d):
        d = _as_array(d)
        return -a * np.sin(d) * val(d)

    def d2(d):
        d = _as_array(d)
        return (a**2 * np.sin(d) ** 2 - a * np.cos(d)) * val(d)

    return RadialProfile(val, d1, d2, {"kind": "exp_cos", "a": a}, symmetric=(a == 0),
                         reflect=lambda: exp_cos(-a))


def sin_power(k: float) -> RadialProfile:
    """sin^k d (power-singular at the poles when k < 0)."""
    k = float(k)

    def val(d):
        return np.sin(_as_array(d)) ** k

    def d1(d):
        d = _as_array(d)
        return k * np.sin(d) ** (k - 1) * np.cos(d)

    def d2(d):
        d = _as_array(d)
        s = np.sin(d)
        return k * (k - 1) * s ** (k - 2) * np.cos(d) ** 2 - k * s**k

    return RadialProfile(val, d1, d2, {"kind": "sin_power", "k": k},
                         "finite" if k >= 0 else "power", symmetric=True)


def shifted_sin_power(eps: float, a: float) -> RadialProfile:
    """(sin d + eps)^a."""
    eps, a = float(eps), float(a)

    def val(d):
        return (np.sin(_as_array(d)) + eps) ** a

    def d1(d):
        d = _as_array(d)
        return a * (np.sin(d) + eps) ** (a - 1) * np.cos(d)

    def d2(d):
        d = _as_array(d)
        b = np.sin(d) + eps
        return a * (a - 1) * b ** (a - 2) * np.cos(d) ** 2 - a * b ** (a - 1) * np.sin(d)

    return RadialProfile(val, d1, d2, {"kind": "shifted_sin_power", "eps": eps, "a": a},
                         "finite", symmetric=True)


def log_weight(d):
    """L = log(e / sin d)."""
    return 1.0 - np.log(np.sin(_as_array(d)))


def log_power(a: float) -> RadialProfile:
    """log(e / sin d)^a.  L' = -cot d, L'' = 1 / sin^2 d."""
    a = float(a)

    def val(d):
        return log_weight(d) ** a

    def d1(d):
        d = _as_array(d)
        return -a * log_weight(d) ** (a - 1) * np.cos(d) / np.sin(d)

    def d2(d):
        d = _as_array(d)
        L = log_weight(d)
        cot = np.cos(d) / np.sin(d)
        return a * (a - 1) * L ** (a - 2) * cot**2 + a * L ** (a - 1) / np.sin(d) ** 2

    return RadialProfile(val, d1, d2, {"kind": "log_power", "a": a},
                         "log" if a > 0 else "finite", symmetric=True)


def product(f: RadialProfile, g: RadialProfile) -> RadialProfile:
    """Pointwise product, derivatives by the Leibniz rule."""

    def val(d):
        return f.value(d) * g.value(d)

    def d1(d):
        return f.d1(d) * g.value(d) + f.value(d) * g.d1(d)

    def d2(d):
        return f.d2(d) * g.value(d) + 2 * f.d1(d) * g.d1(d) + f.value(d) * g.d2(d)

    order = {"finite": 0, "power": 1, "log": 2}
    endpoint = max(f.endpoint, g.endpoint, key=order.get)
    sym = f.symmetric and g.symmetric
    return RadialProfile(val, d1, d2, {"kind": "product", "factors": [f.spec, g.spec]},
                         endpoint, symmetric=sym,
                         reflect=None if sym else (lambda: product(f.reflected(), g.reflected())))


# --------------------------------------------------------------------------- families


def profile_roots(g: RadialProfile, a: float = 0.0, b: float = np.pi / 2, samples: int = 512):
    """Sign changes of g on (a, b), located by bracketing and refined with brentq."""
    x = np.linspace(a, b, samples + 2)[1:-1]
    v = g.value(x)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    return [brentq(g.value, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps) for i in idx]


def subcritical_family(n: int, p: float, eps: float) -> RadialProfile:
    """u_eps(d) = (sin d + eps)^(-(n - p) / p), bounded for every eps > 0."""
    if not (n >= 3 and 2 <= p < n):
        raise ValueError(f"subcritical family needs n >= 3 and 2 <= p < n, got n={n}, p={p}")
    if not 0 < eps <= 1:
        raise ValueError(f"need 0 < eps <= 1, got {eps}")
    prof = shifted_sin_power(eps, -(n - p) / p)
    spec = {"kind": "subcritical_family", "n": n, "p": float(p), "eps": float(eps)}
    return RadialProfile(prof.value, prof.d1, prof.d2, spec, "finite", symmetric=True)


def critical_family(n: int, eps: float) -> RadialProfile:
    """u_eps(d) = log(e / sin d)^((n - 1)/n - eps); unbounded, finite n-energy."""
    if n < 2:
        raise ValueError(f"critical family needs n >= 2, got {n}")
    if not 0 < eps <= 1:
        raise ValueError(f"need 0 < eps <= 1, got {eps}")
    prof = log_power((n - 1) / n - eps)
    spec = {"kind": "critical_family", "n": n, "eps": float(eps)}
    return RadialProfile(prof.value, prof.d1, prof.d2, spec, prof.endpoint, symmetric=True)


def radial_corpus():
    """Ten smooth radial profiles used by the consistency and identity checks."""
    return [
        constant(1.0),
        poly_cos([0.0, 1.0]),
        poly_cos([1.0, 1.0]),
        poly_cos([0.0, 0.0, 1.0]),
        poly_cos([0.5, -1.0, 0.0, 2.0]),
        sin_power(2.0),
        sin_poly_cos([1.0]),
        sin_poly_cos([0.3, 1.0]),
        exp_cos(1.0),
        exp_cos(-0.7),
    ]


# --------------------------------------------------------------------------- polynomials


def _monomials(n_vars: int, degree: int):
    exps = []
    for k in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), k):
            e = [0] * n_vars
            for v in combo:
                e[v] += 1
            exps.append(tuple(e))
    return exps


@dataclass(frozen=True, eq=False)
class SmoothTestFunction:
    """Polynomial sum_j c_j x^(e_j) in the embedding coordinates, restricted to S^n."""

    n: int
    exponents: tuple
    coeffs: np.ndarray
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        exps = np.array(self.exponents, dtype=int).reshape(-1, self.n + 1)
        degree = int(exps.sum(axis=1).max()) if len(exps) else 0
        basis = _monomials(self.n + 1, degree)
        index = {e: i for i, e in enumerate(basis)}
        full = np.zeros(len(basis))
        for e, c in zip(map(tuple, exps), self.coeffs):
            full[index[e]] += c
        # gradient coefficients in the basis of degree <= degree - 1
        lower = len(_monomials(self.n + 1, max(degree - 1, 0))) if degree else 1
        grad = np.zeros((lower, self.n + 1))
        for e, c in zip(basis, full):
            for m in range(self.n + 1):
                if e[m]:
                    f = list(e)
                    f[m] -= 1
                    grad[index[tuple(f)], m] += c * e[m]
        # each monomial is a parent monomial times one coordinate
        parents = [(-1, -1)]
        for e in basis[1:]:
            m = next(i for i, k in enumerate(e) if k)
            f = list(e)
            f[m] -= 1
            parents.append((index[tuple(f)], m))
        object.__setattr__(self, "_basis", basis)
        object.__setattr__(self, "_full", full)
        object.__setattr__(self, "_grad", grad)
        object.__setattr__(self, "_parents", parents)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._basis), default=0)

    def _design(self, y: np.ndarray) -> np.ndarray:
        M = np.empty(y.shape[:-1] + (len(self._basis),))
        M[..., 0] = 1.0
        for j, (parent, m) in enumerate(self._parents[1:], start=1):
            M[..., j] = M[..., parent] * y[..., m]
        return M

    def value(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self._design(y) @ self._full

    def ambient_gradient(self, y) -> np.ndarray:
        """Euclidean gradient of the polynomial extension, ``(..., n + 1)``."""
        y = np.asarray(y, dtype=float)
        M = self._design(y)
        return M[..., : self._grad.shape[0]] @ self._grad

    def value_and_gradient(self, y):
        """Value and tangential (surface) gradient in ambient coordinates."""
        y = np.asarray(y, dtype=float)
        M = self._design(y)
        v = M @ self._full
        G = M[..., : self._grad.shape[0]] @ self._grad
        G = G - np.sum(G * y, axis=-1, keepdims=True) * y
        return v, G

    def surface_gradient(self, y) -> np.ndarray:
        return self.value_and_gradient(y)[1]

    def grad_norm(self, y) -> np.ndarray:
        return np.linalg.norm(self.surface_gradient(y), axis=-1)

    def value_and_grad_norm(self, y):
        v, G = self.value_and_gradient(y)
        return v, np.linalg.norm(G, axis=-1)

    def angular_partials(self, theta) -> np.ndarray:
        """d f / d theta_k = h_k <grad F, theta_hat_k>, shape ``(..., n)``."""
        from .geometry import metric_scale_factors

        theta = np.asarray(theta, dtype=float)
        G = self.ambient_gradient(embed(theta))
        frame = tangent_frame(theta)
        return metric_scale_factors(theta) * np.einsum("...km,...m->...k", frame, G)

    def frame_gradient(self, theta) -> np.ndarray:
        """Surface gradient components in the orthonormal frame {theta_hat_k}."""
        theta = np.asarray(theta, dtype=float)
        G = self.ambient_gradient(embed(theta))
        return np.einsum("...km,...m->...k", tangent_frame(theta), G)

    def scaled(self, c: float) -> "SmoothTestFunction":
        spec = {"kind": "scaled", "c": float(c), "of": self.spec}
        return SmoothTestFunction(self.n, self.exponents, c * self.coeffs, spec)

    def __call__(self, y):
        return self.value(y)


def polynomial(n: int, exponents, coeffs) -> SmoothTestFunction:
    exps = tuple(tuple(int(k) for k in e) for e in exponents)
    coeffs = np.asarray(coeffs, dtype=float)
    spec = {"kind": "polynomial", "n": n, "exponents": [list(e) for e in exps],
            "coeffs": coeffs.tolist()}
    return SmoothTestFunction(n, exps, coeffs, spec)


def random_smooth(n: int, degree: int, seed: int) -> SmoothTestFunction:
    """Random polynomial of total degree <= ``degree`` in x_1..x_{n+1}.

    Coefficients are Uniform(-1, 1) from ``numpy.random.default_rng(seed)``;
    ``degree = 0`` gives a constant.
    """
    if not 0 <= degree <= 4:
        raise ValueError("degree must be in 0..4")
    exps = tuple(_monomials(n + 1, degree))
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, len(exps))
    spec = {"kind": "random_smooth", "n": n, "degree": degree, "seed": seed}
    return SmoothTestFunction(n, exps, coeffs, spec)


def smooth_corpus(n: int, size: int = 50, seed: int = 0, max_degree: int = 3):
    """``size`` random_smooth draws cycling through degrees 1..max_degree, plus a constant first."""
    out = [polynomial(n, [[0] * (n + 1)], [1.0])]
    for i in range(size - 1):
        out.append(random_smooth(n, 1 + i % max_degree, seed * 100003 + i))
    return out


# --------------------------------------------------------------------------- radial


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """u(y) = g(d(y, center)) as a function on S^n."""

    profile: RadialProfile
    center: np.ndarray

    @property
    def n(self) -> int:
        return len(self.center) - 1

    @property
    def spec(self):
        return {"kind": "radial", "profile": self.profile.spec,
                "center": np.asarray(self.center).tolist()}

    def distance(self, y):
        d = ambient_distance(y, self.center)
        if self.profile.endpoint != "finite" and np.any((d == 0) | (d == np.pi)):
            raise ValueError("singular profile evaluated at +-center")
        return d

    def value(self, y):
        return self.profile.value(self.distance(y))

    def grad_norm(self, y):
        return np.abs(self.profile.d1(self.distance(y)))

    def value_and_grad_norm(self, y):
        d = self.distance(y)
        return self.profile.value(d), np.abs(self.profile.d1(d))

    def surface_gradient(self, y):
        y = np.asarray(y, dtype=float)
        d = self.distance(y)
        return self.profile.d1(d)[..., None] * distance_gradient(y, self.center)

    def scaled(self, c):
        return RadialFunction(self.profile.scaled(c), self.center)

    def __call__(self, y):
        return self.value(y)


def compose_radial(g: RadialProfile, phi) -> RadialFunction:
    """Theta -> g(d(Theta, phi)); ``phi`` is an AngularPoint, angles, or a unit vector."""
    from .geometry import AngularPoint

    if isinstance(phi, AngularPoint):
        center = phi.embed()
    else:
        center = np.asarray(phi, dtype=float)
    return RadialFunction(g, center)


# --------------------------------------------------------------------------- specs


def from_spec(spec: dict):
    """Rebuild a profile or test function from its ``spec``."""
    kind = spec["kind"]
    if kind == "constant":
        return constant(spec["c"])
    if kind == "poly_cos":
        return poly_cos(spec["coeffs"])
    if kind == "sin_poly_cos":
        return sin_poly_cos(spec["coeffs"])
    if kind == "exp_cos":
        return exp_cos(spec["a"])
    if kind == "sin_power":
        return sin_power(spec["k"])
    if kind == "shifted_sin_power":
        return shifted_sin_power(spec["eps"], spec["a"])
    if kind == "log_power":
        return log_power(spec["a"])
    if kind == "product":
        f, g = (from_spec(s) for s in spec["factors"])
        return product(f, g)
    if kind == "reflected":
        return from_spec(spec["of"]).reflected()
    if kind == "subcritical_family":
        return subcritical_family(spec["n"], spec["p"], spec["eps"])
    if kind == "critical_family":
        return critical_family(spec["n"], spec["eps"])
    if kind == "random_smooth":
        return random_smooth(spec["n"], spec["degree"], spec["seed"])
    if kind == "polynomial":
        return polynomial(spec["n"], spec["exponents"], spec["coeffs"])
    if kind == "scaled":
        return from_spec(spec["of"]).scaled(spec["c"])
    if kind == "radial":
        return RadialFunction(from_spec(spec["profile"]), np.asarray(spec["center"]))
    raise ValueError(f"unknown function kind {kind!r}")
