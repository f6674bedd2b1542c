import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherehardy import functions as fn
from spherehardy.geometry import random_sphere_points
from spherehardy.quadrature import (QuadratureError, capped_grid, gauss_legendre, graded_rule,
                                    half_line_rule, integrate_radial, integrate_sphere, log_tail,
                                    periodic_rule, radial_grid, sphere_area, sphere_grid)


def test_gauss_legendre_small_rules():
    g = gauss_legendre(1)
    np.testing.assert_allclose(g.nodes, [0.0], atol=1e-16)
    np.testing.assert_allclose(g.weights, [2.0])
    g = gauss_legendre(2)
    np.testing.assert_allclose(g.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(g.weights, [1.0, 1.0], atol=1e-15)
    assert gauss_legendre(3).integrate(gauss_legendre(3).nodes ** 4) == pytest.approx(0.4, abs=1e-14)


@pytest.mark.parametrize("N", [5, 16, 64, 128])
def test_gauss_legendre_matches_numpy(N):
    x, w = np.polynomial.legendre.leggauss(N)
    g = gauss_legendre(N)
    np.testing.assert_allclose(g.nodes, x, atol=2e-15)
    np.testing.assert_allclose(g.weights, w, atol=2e-15)
    assert np.all(np.diff(g.nodes) > 0) and np.all(g.weights > 0)
    assert g.weights.sum() == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.floats(-3, 3), st.floats(0.1, 5), st.integers(0, 2**32 - 1))
def test_gauss_legendre_exactness(N, a, width, seed):
    b = a + width
    coeffs = np.random.default_rng(seed).uniform(-1, 1, 2 * N)
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(b) - poly.integ()(a)
    g = gauss_legendre(N, a, b)
    assert g.integrate(poly(g.nodes)) == pytest.approx(exact, rel=1e-12, abs=1e-12 * 5**(2 * N))


def test_gauss_legendre_errors():
    with pytest.raises(ValueError):
        gauss_legendre(0)
    with pytest.raises(ValueError):
        gauss_legendre(3, 1.0, 1.0)


def test_periodic_rule_exact_for_trig():
    r = periodic_rule(8)
    for k in range(1, 8):
        assert r.integrate(np.cos(k * r.nodes)) == pytest.approx(0, abs=1e-13)
    assert r.weights.sum() == pytest.approx(2 * math.pi)


def test_sphere_area_examples():
    assert sphere_area(2) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2, rel=1e-15)
    assert sphere_area(4) == pytest.approx(8 * math.pi**2 / 3, rel=1e-15)
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(0) == pytest.approx(2.0)


def test_graded_rule_weights_sum():
    g = graded_rule(0.0, 1.0, levels=20)
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert g.nodes[0] > 0 and g.nodes[-1] < 1 and np.all(np.diff(g.nodes) > 0)
    # x^-1/2 on (0, 1): the innermost panel of width h leaves an O(sqrt h) error
    g = graded_rule(0.0, 1.0, levels=40)
    assert g.integrate(g.nodes**-0.5) == pytest.approx(2.0, rel=1e-6)


def test_half_line_rule_with_breaks():
    kink = 0.7
    plain = half_line_rule()
    cut = half_line_rule(breaks=[kink])
    f = lambda t: np.abs(t - kink) ** 3
    exact = (kink**4 + (math.pi / 2 - kink) ** 4) / 4
    assert cut.integrate(f(cut.nodes)) == pytest.approx(exact, rel=1e-14)
    assert abs(plain.integrate(f(plain.nodes)) - exact) > abs(cut.integrate(f(cut.nodes)) - exact)


def test_integrate_sphere_examples(rng=np.random.default_rng(7)):
    g = sphere_grid(2, 32)
    assert integrate_sphere(lambda y: np.ones(y.shape[:-1]), g) == pytest.approx(4 * math.pi, abs=1e-10)
    for n in (2, 3):
        phi = random_sphere_points(n, 1, rng)[0]
        grid = sphere_grid(n, 32)
        assert integrate_sphere(lambda y: y @ phi, grid) == pytest.approx(0, abs=1e-8)
    phi = random_sphere_points(2, 1, rng)[0]
    assert integrate_sphere(lambda y: (y @ phi) ** 2, sphere_grid(2)) == pytest.approx(4 * math.pi / 3, abs=1e-8)


def test_integrate_sphere_non_finite_reports_node():
    with np.errstate(divide="ignore", invalid="ignore"), \
            pytest.raises(QuadratureError, match="non-finite integrand at node"):
        integrate_sphere(lambda y: 1 / (y[..., 0] - y[..., 0]), sphere_grid(2, 8))


def test_integrate_radial_examples():
    g = radial_grid(3, graded=True)
    assert integrate_radial(fn.constant(1.0), 3, g) == pytest.approx(2 * math.pi**2, abs=1e-10)
    cot2 = lambda d: (np.cos(d) / np.sin(d)) ** 2
    assert integrate_radial(cot2, 3, g) == pytest.approx(2 * math.pi**2, abs=1e-8)
    assert integrate_radial(fn.sin_power(2), 3, g) == pytest.approx(1.5 * math.pi**2, abs=1e-10)
    with pytest.raises(ValueError):
        integrate_radial(fn.constant(1.0), 2, g)


def test_radial_weights_sum_to_area():
    for n in (2, 3, 4, 5):
        for grid in (radial_grid(n, 64), radial_grid(n, graded=True)):
            assert grid.weights.sum() == pytest.approx(sphere_area(n), rel=1e-10)


def test_log_tail_power_law():
    # density (1 + s)^-3 in s: remainder from s_max is (1 + s_max)^-2 / 2
    got = log_tail(lambda s: (1 + s) ** -3.0, 100.0)
    assert got == pytest.approx(101.0**-2 / 2, rel=1e-12)
    with pytest.raises(QuadratureError):
        log_tail(lambda s: 1 / (1 + s), 100.0)
    with pytest.raises(QuadratureError):
        log_tail(lambda s: np.array([1.0, -1.0]), 100.0)


def test_tail_grid_on_log_singular_integrand():
    # on S^1 (weight 2, no sine factor): int 1 / (sin d L^2) = 4 int_0^{pi/2} dt / (sin t L^2),
    # L = log(e / sin d); the mass near 0 decays like 1 / log(1 / d)
    from scipy.integrate import quad

    def density(s):
        # integrand times t at t = exp(-s); sin(t) / t -> 1 once t underflows
        t = math.exp(-s)
        ratio = math.sin(t) / t if t > 0 else 1.0
        return 1 / (ratio * (1 + s - math.log(ratio)) ** 2)

    ref = 4 * quad(density, -math.log(math.pi / 2), np.inf, limit=400, epsabs=0,
                             epsrel=1e-13)[0]
    g = radial_grid(1, graded=True, tail=True)
    # symmetric under d -> pi - d, so the profile is its own reflection and the
    # nodes next to pi are evaluated at full precision
    prof = fn.RadialProfile(lambda d: 1 / (np.sin(d) * fn.log_weight(d) ** 2), None, None,
                            {"kind": "test"}, symmetric=True)
    assert integrate_radial(prof, 1, g) == pytest.approx(ref, rel=1e-9)


def test_refinement_convergence():
    # smooth integrand about an off-centre point on a plain grid: error drops fast with N
    g = fn.exp_cos(1.3)
    ref = integrate_radial(g, 3, radial_grid(3, 512))
    errs = [abs(integrate_radial(g, 3, radial_grid(3, N)) - ref) for N in (4, 8, 16)]
    assert errs[1] <= errs[0] / 4 and errs[2] <= max(errs[1] / 4, 1e-14)


def test_exactness_of_sphere_polynomials():
    # int_{S^2} x_1^2 x_2^2 x_3^4 = 4 pi * 1 * 1 * 3 / (3 * 5 * 7 * 9) ...
    # closed form: int_{S^n} x^a = 2 prod Gamma((a_i + 1) / 2) / Gamma(sum (a_i + 1) / 2)
    def monomial_integral(a):
        return 2 * np.prod([math.gamma((k + 1) / 2) for k in a]) / math.gamma(sum(k + 1 for k in a) / 2)

    for n, a in [(2, (2, 2, 4)), (3, (4, 0, 2, 2)), (2, (8, 0, 0)), (3, (0, 2, 0, 6))]:
        got = integrate_sphere(lambda y: np.prod(y ** np.array(a), axis=-1), sphere_grid(n, 32))
        assert got == pytest.approx(monomial_integral(a), rel=1e-12)


def test_rotation_invariance():
    rng = np.random.default_rng(11)
    f = lambda y: np.exp(y[..., 0] - 0.5 * y[..., 2]) * (1 + y[..., 1] ** 2)
    for n in (2, 3):
        base = integrate_sphere(f, sphere_grid(n, 32))
        c = random_sphere_points(n, 1, rng)[0]
        assert integrate_sphere(f, sphere_grid(n, 32, center=c)) == pytest.approx(base, rel=1e-7)


def test_capped_grid_covers_sphere():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        c = random_sphere_points(n, 1, rng)[0]
        g = capped_grid(n, c)
        assert integrate_sphere(lambda y: np.ones(y.shape[:-1]), g) == pytest.approx(sphere_area(n), rel=1e-12)
