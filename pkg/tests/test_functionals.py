import json
import math

import numpy as np
import pytest

from spherehardy import functions as fn
from spherehardy.functionals import (InequalityKind, InequalityReport, evaluate, from_psi,
                                     ibp_identity_I, ibp_identity_J, pointwise_gradient_bound_check)
from spherehardy.geometry import random_sphere_points
from spherehardy.quadrature import capped_grid, radial_grid, sphere_grid

PI2 = math.pi**2


@pytest.fixture(scope="module")
def g3():
    return radial_grid(3, graded=True, tail=True)


def test_kind_validation():
    assert InequalityKind("critical", 3).p == 3
    assert InequalityKind("subcritical", 4, 3).lam == pytest.approx(1 / 3)
    assert InequalityKind("critical", 2).sharp_constant == pytest.approx(0.25)
    assert InequalityKind("claimed", 3, 1.5).exploratory
    assert InequalityKind("subcritical", 3, 1.5).exploratory
    assert not InequalityKind("subcritical", 3, 2).exploratory
    for bad in [("subcritical", 2, 1.5), ("subcritical", 3, 3), ("subcritical", 3, 1.0),
                ("critical", 3, 2), ("other", 3, 2), ("claimed", 3, None)]:
        with pytest.raises((ValueError, TypeError)):
            InequalityKind(*bad)


def test_sine_closed_form(g3):
    rep = evaluate("subcritical", fn.sin_power(1.0), g3, p=2)
    assert rep.A == pytest.approx(PI2 / 2, rel=1e-10)
    assert rep.B == pytest.approx(1.5 * PI2, rel=1e-10)
    assert rep.C == pytest.approx(PI2 / 2, rel=1e-10)
    assert rep.deficit == pytest.approx(9 * PI2 / 8, rel=1e-10)
    assert rep.quotient == pytest.approx(2.5, rel=1e-10)


def test_sine_closed_form_on_sphere_grid():
    phi = random_sphere_points(3, 1, np.random.default_rng(4))[0]
    u = fn.compose_radial(fn.sin_power(1.0), phi)
    rep = evaluate("subcritical", u, capped_grid(3, phi), p=2)
    np.testing.assert_allclose([rep.A, rep.B, rep.C], [PI2 / 2, 1.5 * PI2, PI2 / 2], rtol=1e-9)


def test_claimed_constant(g3):
    rep = evaluate("claimed", fn.constant(1.0), g3, p=2)
    assert rep.A == 0
    assert rep.B == pytest.approx(2 * PI2, rel=1e-10)
    assert rep.C == pytest.approx(2 * PI2, rel=1e-10)
    assert rep.deficit == pytest.approx(PI2 / 2, rel=1e-10)
    assert rep.exploratory


def test_critical_constant():
    rep = evaluate("critical", fn.constant(1.0), radial_grid(2, graded=True, tail=True))
    assert rep.A == 0
    assert 0 < rep.B < np.inf and 0 < rep.C < np.inf
    assert rep.deficit > 0
    ref = evaluate("critical", fn.constant(1.0), radial_grid(2, graded=True, levels=30, tail=True))
    assert rep.C == pytest.approx(ref.C, rel=1e-9)


def test_zero_function_has_no_quotient(g3):
    rep = evaluate("subcritical", fn.constant(0.0), g3, p=2)
    assert rep.C == 0 and rep.quotient is None and rep.deficit == 0


def test_report_json_roundtrip(g3):
    rep = evaluate("critical", fn.critical_family(3, 0.2), radial_grid(3, graded=True, tail=True))
    text = json.dumps(rep.to_dict(), sort_keys=True)
    back = InequalityReport.from_dict(json.loads(text))
    assert back == rep
    assert json.dumps(back.to_dict(), sort_keys=True) == text


@pytest.mark.parametrize("kind, n, p", [("subcritical", 3, 2), ("subcritical", 4, 3),
                                        ("critical", 2, None), ("claimed", 3, 1.5)])
@pytest.mark.parametrize("c", [2.0, -3.0, 1e-4])
def test_homogeneity(kind, n, p, c):
    g = radial_grid(n, graded=True, tail=True)
    u = fn.product(fn.exp_cos(0.7), fn.poly_cos([1.0, 0.4]))
    q = evaluate(kind, u, g, p=p).quotient
    assert evaluate(kind, u.scaled(c), g, p=p).quotient == pytest.approx(q, rel=1e-10)


@pytest.mark.parametrize("c", [2.0, -3.0, 1e-4])
def test_homogeneity_smooth(c):
    u = fn.random_smooth(3, 3, 11)
    grid = capped_grid(3, random_sphere_points(3, 1, np.random.default_rng(0))[0])
    q = evaluate("subcritical", u, grid, p=2).quotient
    assert evaluate("subcritical", u.scaled(c), grid, p=2).quotient == pytest.approx(q, rel=1e-10)


@pytest.mark.parametrize("kind, n, p", [("subcritical", 3, 2), ("critical", 2, None)])
def test_center_invariance(kind, n, p):
    rng = np.random.default_rng(21)
    prof = fn.product(fn.exp_cos(-0.6), fn.sin_power(1.0))
    reps = []
    for phi in random_sphere_points(n, 2, rng):
        grid = capped_grid(n, phi, tail=kind == "critical")
        reps.append(evaluate(kind, fn.compose_radial(prof, phi), grid, p=p))
    np.testing.assert_allclose([reps[0].A, reps[0].B, reps[0].C],
                               [reps[1].A, reps[1].B, reps[1].C], rtol=1e-7)


def test_radial_and_product_grid_agree():
    phi = random_sphere_points(2, 1, np.random.default_rng(2))[0]
    prof = fn.poly_cos([0.2, 1.0, 0.5])
    a = evaluate("critical", prof, radial_grid(2, graded=True, tail=True))
    b = evaluate("critical", prof, sphere_grid(2, 64, center=phi))
    # the product grid has no log tail, so only the smooth A term is compared tightly
    assert b.A == pytest.approx(a.A, rel=1e-10)


def test_bare_profile_on_sphere_grid_uses_center():
    phi = random_sphere_points(3, 1, np.random.default_rng(8))[0]
    prof = fn.exp_cos(0.3)
    a = evaluate("subcritical", prof, capped_grid(3, phi), p=2)
    b = evaluate("subcritical", fn.compose_radial(prof, phi), capped_grid(3, phi), p=2)
    assert a.deficit == pytest.approx(b.deficit, rel=1e-12)


def test_subcritical_family_quotients_match_reference(g3):
    # reference values computed once with mpmath.quad at 30 digits
    ref = {1.0: 0.3959948662, 0.3: 0.339834191, 0.1: 0.3073522859, 0.03: 0.2884131029,
           0.01: 0.2789647488}
    for eps, q in ref.items():
        assert evaluate("subcritical", fn.subcritical_family(3, 2, eps), g3, p=2).quotient == \
            pytest.approx(q, rel=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_critical_family_closed_form(n):
    # for this family A = (mu - eps)^n C and B = n eps C, so Q has a closed form
    g = radial_grid(n, graded=True, tail=True)
    mu = (n - 1) / n
    for eps in (0.4, 0.1, 0.01):
        q = evaluate("critical", fn.critical_family(n, eps), g).quotient
        assert q == pytest.approx((mu - eps) ** n + n * eps * mu ** (n - 1), rel=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("kind, n, p", [("subcritical", 3, 2.5), ("subcritical", 5, 3),
                                        ("critical", 4, None)])
def test_quotient_lower_bound_extra_params(kind, n, p):
    k = InequalityKind(kind, n, p if p else n)
    phi = random_sphere_points(n, 1, np.random.default_rng(1))[0]
    grid = capped_grid(n, phi, inner_N=8 if n > 3 else None, tail=kind == "critical")
    for u in fn.smooth_corpus(n, 6, seed=5):
        rep = evaluate(k, u, grid)
        assert rep.deficit >= -1e-7 * rep.scale
        assert rep.quotient >= k.sharp_constant - 1e-7


def test_identity_I_examples():
    g = radial_grid(3, graded=True, tail=True)
    direct, closed = ibp_identity_I(fn.constant(1.0), 3, 2, g)
    assert closed == pytest.approx(-2 * PI2, rel=1e-12)
    assert direct == pytest.approx(closed, rel=1e-6)
    direct, closed = ibp_identity_I(fn.sin_power(1.0), 3, 2, g)
    assert closed == pytest.approx(-1.5 * PI2, rel=1e-12)
    assert direct == pytest.approx(closed, rel=1e-6)
    direct, closed = ibp_identity_I(fn.sin_power(1.0), 4, 2, radial_grid(4, graded=True, tail=True))
    assert direct == pytest.approx(closed, rel=1e-6)
    with pytest.raises(ValueError):
        ibp_identity_I(fn.constant(1.0), 3, 3, g)


def test_identity_J_examples():
    g2 = radial_grid(2, graded=True, tail=True)
    # psi constant: zero gradient on the left, and the right side is exactly
    # the pole flux area(S^(n-1)) * 2 that psi = 1 leaves behind
    for n, flux in ((2, 4 * math.pi), (3, 8 * math.pi)):
        u = fn.log_power((n - 1) / n)
        direct, closed = ibp_identity_J(u, n, radial_grid(n, graded=True, tail=True))
        assert abs(direct) < 1e-12
        assert closed == pytest.approx(flux, rel=1e-9)
    direct, closed = ibp_identity_J(from_psi(fn.sin_power(1.0), 2), 2, g2)
    assert direct == pytest.approx(closed, rel=1e-6)


def test_identity_J_boundary_flux():
    # psi = cos d does not vanish at the poles: the two sides differ by the
    # flux -area(S^2) (|psi(0)|^3 + |psi(pi)|^3) = -8 pi
    g = radial_grid(3, graded=True, tail=True)
    direct, closed = ibp_identity_J(from_psi(fn.poly_cos([0.0, 1.0]), 3), 3, g)
    assert direct == pytest.approx(-4.8 * math.pi, rel=1e-8)
    assert closed == pytest.approx(3.2 * math.pi, rel=1e-8)
    assert direct - closed == pytest.approx(-8 * math.pi, rel=1e-8)


@pytest.mark.parametrize("n, p, psi", [
    (3, 2, fn.constant(1.0)),
    (3, 2, fn.sin_power(1.0)),
    (4, 3, fn.poly_cos([1.0, 1.0])),
    (5, 2, fn.exp_cos(-1.2)),
    (4, 2.5, fn.poly_cos([0.3, -1.0, 0.7])),
])
def test_pointwise_bound_no_violations(n, p, psi):
    rng = np.random.default_rng(n)
    phi, = random_sphere_points(n, 1, rng)
    assert pointwise_gradient_bound_check(n, p, psi, random_sphere_points(n, 1000, rng), phi) == 0


def test_pointwise_bound_equality_case_is_tight():
    # constant psi gives equality, so any negative slack flags every point
    rng = np.random.default_rng(0)
    phi, = random_sphere_points(3, 1, rng)
    pts = random_sphere_points(3, 200, rng)
    assert pointwise_gradient_bound_check(3, 2, fn.constant(1.0), pts, phi, rel_slack=-1e-6) == 200


def test_middle_scale_and_rhs_scale(g3):
    u = fn.sin_power(1.0)
    base = evaluate("subcritical", u, g3, p=2)
    rep = evaluate("subcritical", u, g3, p=2, rhs_scale=2.0, middle_scale=0.0)
    assert rep.constant == pytest.approx(2 * base.constant)
    assert rep.middle_coefficient == 0
    assert rep.deficit == pytest.approx(base.A - 2 * base.constant * base.C, rel=1e-12)
