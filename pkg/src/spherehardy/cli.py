"""
Command-line front end.

    spherehardy verify-identities [--n N] [--h H] [--seed S]
    spherehardy verify-inequality --kind K --n N [--p P] [--corpus-size M] ...
    spherehardy sharpness --kind K --n N [--p P] [--eps E ...] ...
    spherehardy search --n N --p P [--iters I] [--seed S] ...

Exit codes: 0 success, 1 a check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .functionals import InequalityKind, evaluate
from .functions import smooth_corpus
from .geometry import FD_STEP, random_sphere_points
from .quadrature import QuadratureError, capped_grid, radial_grid
from .sharpness import (BAND, CANDIDATE_THRESHOLD, DEFAULT_EPS, counterexample_search, family,
                        minimize_quotient, sweep, to_json, two_column_csv)
from .verification import identity_suite

#: Deficits above -DEFICIT_TOL * (A + B + C) count as satisfied.
DEFICIT_TOL = 1e-7

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    kind: str = None
    n: int = None
    p: float = None
    grid_n: int = None
    graded: bool = True
    seed: int = 0
    eps: list = None
    eps_min: float = None
    eps_max: float = None
    eps_steps: int = None
    iters: int = 200
    out: str = None
    format: str = "json"
    corpus_size: int = 50
    corpus: str = "smooth"
    rhs_scale: float = 1.0
    middle_scale: float = 1.0
    minimize: bool = False
    degree: int = 3
    h: float = FD_STEP

    def eps_list(self):
        if self.eps is not None:
            if any(x is not None for x in (self.eps_min, self.eps_max, self.eps_steps)):
                raise ConfigError("give either --eps or --eps-min/--eps-max/--eps-steps")
            return list(self.eps)
        if self.eps_min is None and self.eps_max is None and self.eps_steps is None:
            return None
        if None in (self.eps_min, self.eps_max, self.eps_steps):
            raise ConfigError("--eps-min, --eps-max and --eps-steps go together")
        if not 0 < self.eps_min < self.eps_max or self.eps_steps < 2:
            raise ConfigError("need 0 < eps-min < eps-max and eps-steps >= 2")
        return list(np.geomspace(self.eps_max, self.eps_min, self.eps_steps))


def _write(cfg: RunConfig, data: dict, csv_text: str):
    if cfg.out is None:
        return
    text = to_json(data) if cfg.format == "json" else csv_text
    with open(cfg.out, "w") as fh:
        fh.write(text)


def _kind(cfg: RunConfig) -> InequalityKind:
    try:
        return InequalityKind(cfg.kind, cfg.n, cfg.p)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_verify_identities(cfg: RunConfig) -> int:
    ns = (2, 3, 4, 5) if cfg.n is None else (cfg.n,)
    if any(n < 2 for n in ns):
        raise ConfigError("need n >= 2")
    if not cfg.h > 0:
        raise ConfigError("need h > 0")
    results = identity_suite(ns, seed=cfg.seed, h=cfg.h)
    for r in results:
        print(r.row())
    ok = all(r.passed for r in results)
    data = {"command": cfg.command, "seed": cfg.seed, "h": cfg.h, "passed": ok,
            "checks": [{"name": r.name, "n": r.n, "worst": r.worst, "tolerance": r.tolerance,
                        "passed": r.passed} for r in results]}
    rows = [(f"{r.name} n={r.n}", r.worst) for r in results]
    _write(cfg, data, two_column_csv(("check", "worst"), rows))
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_inequality(cfg: RunConfig) -> int:
    k = _kind(cfg)
    if cfg.corpus_size < 1:
        raise ConfigError("corpus size must be >= 1")
    if cfg.grid_n is not None and cfg.grid_n < 2:
        raise ConfigError("--grid-n must be >= 2")
    phi = random_sphere_points(k.n, 1, np.random.default_rng(cfg.seed))[0]
    if cfg.corpus == "family":
        # optimizing-family members, integrated on the radial rule
        if k.kind not in DEFAULT_EPS or (k.kind == "subcritical" and k.p < 2):
            raise ConfigError("the family corpus needs subcritical (p >= 2) or critical")
        grid = radial_grid(k.n, graded=True, tail=True)
        corpus = [family(k.kind, k.n, k.p, e) for e in (cfg.eps_list() or DEFAULT_EPS[k.kind])]
    else:
        grid = capped_grid(k.n, phi, inner_N=cfg.grid_n, tail=k.kind == "critical")
        corpus = smooth_corpus(k.n, cfg.corpus_size, seed=cfg.seed)
    records = []
    worst = np.inf
    for i, u in enumerate(corpus):
        rep = evaluate(k, u, grid, rhs_scale=cfg.rhs_scale, middle_scale=cfg.middle_scale)
        rel = rep.deficit / rep.scale
        worst = min(worst, rel)
        records.append(rep.to_dict())
        print(f"{i:4d}  deficit={rep.deficit: .6e}  relative={rel: .3e}  Q={rep.quotient}")
    violated = worst < -DEFICIT_TOL
    data = {"command": cfg.command, "kind": k.kind, "n": k.n, "p": k.p, "seed": cfg.seed,
            "corpus": cfg.corpus, "center": phi.tolist(), "rhs_scale": cfg.rhs_scale, "middle_scale": cfg.middle_scale,
            "exploratory": k.exploratory, "min_relative_deficit": worst, "records": records}
    rows = [(i, r["deficit"]) for i, r in enumerate(records)]
    _write(cfg, data, two_column_csv(("index", "deficit"), rows))
    print(f"minimum relative deficit {worst:.3e}")
    if k.kind == "claimed":
        print("claimed inequality: exploratory, no pass/fail")
        return EXIT_OK
    if violated:
        print(f"deficit below -{DEFICIT_TOL:g} * (A + B + C): FAILED")
        return EXIT_FAIL
    return EXIT_OK


def cmd_sharpness(cfg: RunConfig) -> int:
    if cfg.kind not in DEFAULT_EPS:
        raise ConfigError("sharpness needs --kind subcritical or critical")
    k = _kind(cfg)
    if k.kind == "subcritical" and k.p < 2:
        raise ConfigError("the subcritical family needs p >= 2")
    eps = cfg.eps_list()
    if eps is not None:
        if any(e <= 0 or e > 1 for e in eps):
            raise ConfigError("eps values must lie in (0, 1]")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps values must be strictly decreasing")
    if cfg.graded:
        grid = radial_grid(k.n, graded=True, tail=True)
    else:
        grid = radial_grid(k.n, N=cfg.grid_n or 512)
    res = sweep(k.kind, k.n, k.p, eps, grid, middle_scale=cfg.middle_scale)
    for e, q in zip(res.eps, res.quotients):
        print(f"eps={e:<10.4g} Q={q:.10f}")
    print(f"target {res.target:.10f}  band {BAND * res.target:.10f}  monotone={res.monotone}  "
          f"within_band={res.within_band}  above_target={res.above_target}")
    data = {"command": cfg.command, "sweep": res.to_dict(), "middle_scale": cfg.middle_scale,
            "grid": grid.meta}
    if cfg.minimize:
        lo, hi = (cfg.eps_min or 1e-3), (cfg.eps_max or 1.0)
        e_star, q_star = minimize_quotient(k.kind, k.n, k.p, (lo, hi), grid)
        data["minimum"] = {"eps": e_star, "quotient": q_star, "bounds": [lo, hi]}
        print(f"golden-section minimum on [{lo:g}, {hi:g}]: eps={e_star:.6g} Q={q_star:.10f}")
    _write(cfg, data, res.to_csv())
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_search_counterexample(cfg: RunConfig) -> int:
    if cfg.n is None or cfg.p is None:
        raise ConfigError("search needs --n and --p")
    if not (cfg.n >= 3 and 1 < cfg.p < cfg.n):
        raise ConfigError("search needs n >= 3 and 1 < p < n")
    if cfg.iters < 1:
        raise ConfigError("--iters must be >= 1")
    if not 0 <= cfg.degree <= 4:
        raise ConfigError("--degree must be in 0..4")
    res = counterexample_search(cfg.n, cfg.p, cfg.iters, cfg.seed, degree=cfg.degree)
    print(f"baseline (constant u): deficit={res.baseline['deficit']:.10f}  "
          f"relative={res.baseline['relative_deficit']:.6e}")
    print(f"{res.iterations} proposals, minimum relative deficit {res.min_deficit:.6e} "
          f"at iteration {res.argmin['iteration']}")
    if res.candidate:
        print(f"*** CANDIDATE COUNTEREXAMPLE (relative deficit < {CANDIDATE_THRESHOLD:g}) ***")
        print(to_json(res.argmin), end="")
    data = {"command": cfg.command, "search": res.to_dict()}
    _write(cfg, data, res.to_csv())
    return EXIT_OK


COMMANDS = {
    "verify-identities": cmd_verify_identities,
    "verify-inequality": cmd_verify_inequality,
    "sharpness": cmd_sharpness,
    "search": cmd_search_counterexample,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spherehardy",
                                 description="Numerical checks of Hardy inequalities on S^n.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--kind", choices=("subcritical", "critical", "claimed"))
    ap.add_argument("--n", type=int)
    ap.add_argument("--p", type=float)
    ap.add_argument("--grid-n", type=int, help="points per angle (inner angles or plain radial rule)")
    ap.add_argument("--graded", action=argparse.BooleanOptionalAction, default=True,
                    help="graded radial rule with log tails (default on)")
    ap.add_argument("--eps", type=float, nargs="+")
    ap.add_argument("--eps-min", type=float)
    ap.add_argument("--eps-max", type=float)
    ap.add_argument("--eps-steps", type=int)
    ap.add_argument("--minimize", action="store_true", help="also run the golden-section search")
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--corpus-size", type=int, default=50)
    ap.add_argument("--corpus", choices=("smooth", "family"), default="smooth",
                    help="random smooth polynomials, or optimizing-family members")
    ap.add_argument("--h", type=float, default=FD_STEP, help="finite-difference step")
    ap.add_argument("--rhs-scale", type=float, default=1.0,
                    help="multiply the constant of the singular term (failing fixtures)")
    ap.add_argument("--middle-scale", type=float, default=1.0,
                    help="multiply the middle coefficient")
    ap.add_argument("--out")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)  # exits with status 2 on malformed flags
    cfg = RunConfig(**{k: v for k, v in vars(ns).items()})
    try:
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"spherehardy: configuration error: {exc}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"spherehardy: quadrature failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
