"""
Probing the sharp constants.

Family sweeps drive the quotient Q = (A + coefficient * B) / C toward the
constant of the singular term; a golden-section search looks for the best
family parameter; a random-restart descent over smooth polynomials looks
for negative deficits of the claimed inequality.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import InequalityKind, evaluate
from .functions import critical_family, polynomial, random_smooth, subcritical_family
from .quadrature import capped_grid, radial_grid

#: Acceptance band: final swept quotient at most this multiple of the target.
BAND = 1.3
#: Slack for the quotient lower bound.
LOWER_SLACK = 1e-7
#: Relative deficit below which a search result is flagged.
CANDIDATE_THRESHOLD = -1e-5
#: Descent steps per restart of the counterexample search.
RESTART_STEPS = 50

DEFAULT_EPS = {
    "subcritical": (1.0, 0.3, 0.1, 0.03, 0.01),
    "critical": (0.4, 0.2, 0.1, 0.05),
}


def family(kind: str, n: int, p, eps: float):
    if kind == "subcritical":
        return subcritical_family(n, p, eps)
    if kind == "critical":
        return critical_family(n, eps)
    raise ValueError(f"no optimizing family for kind {kind!r}")


def default_grid(n: int):
    """Graded radial rule with log tails; fine enough for both families."""
    return radial_grid(n, graded=True, tail=True)


def to_json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def two_column_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for a, b in rows:
        w.writerow([repr(a), repr(b)])
    return buf.getvalue()


@dataclass
class SweepResult:
    kind: str
    n: int
    p: float
    eps: list
    quotients: list
    target: float

    @property
    def best(self) -> float:
        return min(self.quotients)

    @property
    def monotone(self) -> bool:
        """Q nonincreasing along the (decreasing) eps list."""
        q = self.quotients
        return all(b <= a for a, b in zip(q, q[1:]))

    @property
    def within_band(self) -> bool:
        return self.quotients[-1] <= BAND * self.target

    @property
    def above_target(self) -> bool:
        return all(q >= self.target - LOWER_SLACK for q in self.quotients)

    @property
    def passed(self) -> bool:
        return self.monotone and self.within_band and self.above_target

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "p": self.p, "eps": list(self.eps),
                "quotients": list(self.quotients), "target": self.target, "best": self.best,
                "monotone": self.monotone, "within_band": self.within_band,
                "above_target": self.above_target}

    @classmethod
    def from_dict(cls, data: dict) -> "SweepResult":
        return cls(data["kind"], data["n"], data["p"], data["eps"], data["quotients"], data["target"])

    def to_csv(self) -> str:
        return two_column_csv(("eps", "quotient"), zip(self.eps, self.quotients))


def sweep(kind: str, n: int, p=None, eps_list=None, grid=None, middle_scale: float = 1.0) -> SweepResult:
    """Quotients of the optimizing family at each eps (expected decreasing).

    ``middle_scale`` lowers or raises the middle coefficient inside Q; the
    default probes the constant of the singular term only.
    """
    if kind not in DEFAULT_EPS:
        raise ValueError("sweeps are defined for subcritical and critical kinds")
    k = InequalityKind(kind, n, p)
    eps_list = list(DEFAULT_EPS[kind] if eps_list is None else eps_list)
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps values must be strictly decreasing")
    grid = default_grid(n) if grid is None else grid
    quotients = []
    for eps in eps_list:
        try:
            rep = evaluate(k, family(kind, n, k.p, eps), grid, middle_scale=middle_scale)
        except Exception as exc:
            raise type(exc)(f"eps = {eps!r}: {exc}") from exc
        quotients.append(rep.quotient)
    return SweepResult(kind, n, k.p, [float(e) for e in eps_list], quotients, k.sharp_constant)


def minimize_quotient(kind: str, n: int, p=None, eps_bounds=(1e-3, 1.0), grid=None, rtol=1e-3):
    """Golden-section search for min Q(u_eps) over log eps.

    Stops once the bracket is narrower than ``rtol`` in log eps (relative
    width in eps); the bracket ends are evaluated too and the best point
    seen is returned as (eps, Q).
    """
    lo, hi = map(float, eps_bounds)
    if not 0 < lo < hi:
        raise ValueError("need 0 < eps_lo < eps_hi")
    k = InequalityKind(kind, n, p)
    grid = default_grid(n) if grid is None else grid
    seen = {}

    def q(x):
        if x not in seen:
            seen[x] = evaluate(k, family(kind, n, k.p, math.exp(x)), grid).quotient
        return seen[x]

    a, b = math.log(lo), math.log(hi)
    q(a), q(b)
    inv_phi = (math.sqrt(5) - 1) / 2
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    while b - a > rtol:
        if q(c) <= q(d):
            b, d = d, c
            c = b - inv_phi * (b - a)
        else:
            a, c = c, d
            d = a + inv_phi * (b - a)
    x = min(seen, key=lambda t: (seen[t], t))
    return math.exp(x), seen[x]


@dataclass
class SearchResult:
    n: int
    p: float
    seed: int
    iterations: int
    degree: int
    trace: list
    argmin: dict
    baseline: dict
    grid: dict = field(default_factory=dict)

    @property
    def min_deficit(self) -> float:
        """Smallest relative deficit (deficit / (A + B + C)) proposed."""
        return min(self.trace)

    @property
    def candidate(self) -> bool:
        return self.min_deficit < CANDIDATE_THRESHOLD

    def to_dict(self) -> dict:
        out = asdict(self)
        out["min_deficit"] = self.min_deficit
        out["candidate"] = self.candidate
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SearchResult":
        keys = ("n", "p", "seed", "iterations", "degree", "trace", "argmin", "baseline", "grid")
        return cls(**{k: data[k] for k in keys})

    def to_csv(self) -> str:
        return two_column_csv(("iteration", "relative_deficit"), enumerate(self.trace))


def _unit(c: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(c)
    return c / norm if norm > 0 else c


def counterexample_search(n: int, p: float, iterations: int = 200, seed: int = 0, grid=None,
                          degree: int = 3, step: float = 0.5) -> SearchResult:
    """Random-restart descent on the relative deficit of the claimed inequality.

    The first restart starts from the constant function, later ones from a
    random polynomial of the given degree.  Each restart then proposes
    Gaussian perturbations of its (unit-normalized) coefficient vector,
    keeping improvements and halving the step on failure.  Every proposal
    counts as one iteration; a new restart begins every RESTART_STEPS
    proposals, seeded from (seed, restart index).  The singular point is
    the north pole.
    """
    k = InequalityKind("claimed", n, p)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pole = np.zeros(n + 1)
    pole[0] = 1.0
    grid = capped_grid(n, pole) if grid is None else grid

    def score(u):
        rep = evaluate(k, u, grid)
        return rep.deficit / rep.scale, rep

    base = polynomial(n, [[0] * (n + 1)], [1.0])
    base_rel, base_rep = score(base)
    baseline = {"u_spec": base.spec, "deficit": base_rep.deficit, "relative_deficit": base_rel}

    trace = []
    best = (math.inf, None)
    restart = 0
    while len(trace) < iterations:
        rng = np.random.default_rng([seed, restart])
        start = random_smooth(n, degree, int(rng.integers(2**31)))
        exps = start.exponents
        if restart == 0:
            # the constant function is the first member of the restart pool
            coeffs = np.zeros(len(exps))
            coeffs[0] = 1.0
        else:
            coeffs = _unit(np.asarray(start.coeffs, dtype=float))
        current = None
        sigma = step
        for j in range(RESTART_STEPS):
            if len(trace) >= iterations:
                break
            cand = coeffs if current is None else _unit(coeffs + sigma * rng.standard_normal(coeffs.shape))
            u = polynomial(n, exps, cand)
            rel, rep = score(u)
            trace.append(rel)
            if current is None or rel < current:
                coeffs, current = cand, rel
            else:
                sigma *= 0.5
            if rel < best[0]:
                best = (rel, {"iteration": len(trace) - 1, "restart": restart, "step": j,
                              "u_spec": u.spec,
                              "deficit": rep.deficit, "scale": rep.scale, "relative_deficit": rel})
        restart += 1
    meta = dict(getattr(grid, "meta", {}))
    return SearchResult(n, k.p, seed, iterations, degree, trace, best[1], baseline, meta)
