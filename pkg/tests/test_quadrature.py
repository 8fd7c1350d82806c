import math

import numpy as np
import pytest
from scipy.special import gamma, roots_genlaguerre

from phasemoments import quadrature as q
from phasemoments.quadrature import QuadratureError, Region, integrate_plane, integrate_region


@pytest.mark.parametrize("n", [4, 10, 30])
def test_gauss_hermite_exactness(n):
    rule = q.gauss_hermite(n)
    assert np.all(rule.weights > 0)
    for j in range(2 * n):
        exact = 0.0 if j % 2 else gamma((j + 1) / 2)
        got = math.fsum(rule.weights * rule.nodes**j)
        assert got == pytest.approx(exact, rel=1e-12, abs=1e-12 * max(1.0, gamma((j + 1) / 2)))


@pytest.mark.parametrize("n,alpha", [(5, 0.0), (12, 0.5), (20, 2.0)])
def test_gauss_laguerre_exactness(n, alpha):
    rule = q.gauss_laguerre(n, alpha)
    assert np.all(rule.weights > 0)
    for j in range(2 * n):
        exact = gamma(j + alpha + 1)
        got = math.fsum(rule.weights * rule.nodes**j)
        assert got == pytest.approx(exact, rel=1e-12)


def test_nodes_match_reference_tables():
    for n in (8, 40, 120):
        x, w = np.polynomial.hermite.hermgauss(n)
        rule = q.gauss_hermite(n)
        np.testing.assert_allclose(rule.nodes, x, atol=1e-13)
        np.testing.assert_allclose(rule.weights, w, rtol=1e-12)
        x, w = roots_genlaguerre(n, 1.5)
        rule = q.gauss_laguerre(n, 1.5)
        np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
        np.testing.assert_allclose(rule.weights, w, rtol=1e-10)


def test_angle_rule_exact_fourier_modes():
    n_theta = 32
    scheme = q.radial_angular(4, n_theta)
    thetas = np.angle(scheme.nodes[:n_theta])
    w = np.full(n_theta, 2 * math.pi / n_theta)
    for m in range(-n_theta + 1, n_theta):
        got = np.sum(w * np.exp(1j * m * thetas))
        assert abs(got - (2 * math.pi if m == 0 else 0.0)) < 1e-12


def test_integrate_plane_examples():
    s = q.radial_angular(40, 64)
    assert integrate_plane(lambda z: np.exp(-np.abs(z) ** 2), s) == pytest.approx(math.pi, abs=1e-10)
    assert integrate_plane(lambda z: 0.0, s) == 0
    got = integrate_plane(lambda z: np.exp(-np.abs(z) ** 2) * np.abs(z) ** 2 / math.pi, s)
    assert got == pytest.approx(1.0, abs=1e-10)


def test_integrate_plane_reports_bad_node():
    with pytest.raises(QuadratureError, match="node"):
        integrate_plane(lambda z: np.where(np.abs(z) > 1, np.nan, 1.0), q.radial_angular(10, 8))


def test_grid_scheme_gaussian():
    s = q.grid_2d(0.1, 8.0)
    assert integrate_plane(lambda z: np.exp(-np.abs(z) ** 2), s).real == pytest.approx(math.pi, abs=1e-12)


def test_region_examples():
    f = lambda z: np.exp(-np.abs(z) ** 2) / math.pi
    assert integrate_region(f, Region.disk(0, 1.0)).real == pytest.approx(1 - math.exp(-1), abs=1e-9)
    assert integrate_region(f, Region.annulus_sector(1.0, 1.0, 0, 1)) == 0
    assert integrate_region(lambda z: np.ones(z.shape), Region.rectangle(0, 2, 0, 3)).real == pytest.approx(6.0, abs=1e-12)
    assert integrate_region(f, Region.full_plane()).real == pytest.approx(1.0, abs=1e-12)


def test_half_plane_and_offset_disk():
    f = lambda z: np.exp(-np.abs(z) ** 2) / math.pi
    assert integrate_region(f, Region.half_plane(0.3, 0.0)).real == pytest.approx(0.5, abs=1e-12)
    # P(Re z >= 1) for a N(0, 1/2) coordinate
    assert integrate_region(f, Region.half_plane(0.0, 1.0)).real == pytest.approx(0.5 * math.erfc(1.0), abs=1e-12)
    g = lambda z: np.ones(z.shape)
    assert integrate_region(g, Region.disk(1 + 2j, 0.5)).real == pytest.approx(math.pi * 0.25, abs=1e-12)


def test_region_additivity():
    f = lambda z: np.exp(-np.abs(z - 0.3) ** 2) * (1 + z.real**2) / math.pi
    whole = integrate_region(f, Region.disk(0, 2.0))
    edges = [0.0, 0.7, 2.5, 4.0, 2 * math.pi]
    pieces = sum(
        integrate_region(f, Region.annulus_sector(r0, r1, t0, t1))
        for r0, r1 in ((0.0, 1.1), (1.1, 2.0))
        for t0, t1 in zip(edges[:-1], edges[1:])
    )
    assert abs(pieces - whole) < 1e-9


def test_region_validation_and_parse():
    with pytest.raises(ValueError):
        Region.annulus_sector(2, 1)
    with pytest.raises(ValueError):
        Region.disk(0, -1)
    with pytest.raises(ValueError):
        Region.annulus_sector(0, 1, 0, 7)
    for text in ("full", "disk:0.0,1.0,2.0", "rect:0.0,1.0,-1.0,1.0", "sector:0.0,inf,0.0,3.0", "halfplane:0.5,1.0"):
        r = Region.parse(text)
        assert Region.parse(r.to_string()) == r
    with pytest.raises(ValueError):
        Region.parse("blob:1")


def test_contains():
    r = Region.annulus_sector(1, 2, 0, math.pi)
    assert r.contains(1.5j) and not r.contains(-1.5j) and not r.contains(0.5)


def test_gaussian_exp_moment_against_closed_form():
    # a = 0 reduces to Gamma((n+1)/2) / 2
    for n in range(12):
        assert q.gaussian_exp_moment(n, 0.0) == pytest.approx(0.5 * gamma((n + 1) / 2), rel=1e-13)
    # n = 0: int_0^inf e^{ax - x^2} = sqrt(pi)/2 e^{a^2/4} erfc(-a/2)
    for a in (0.5, 1.0, 3.0):
        exact = 0.5 * math.sqrt(math.pi) * math.exp(a * a / 4) * math.erfc(-a / 2)
        assert q.gaussian_exp_moment(0, a) == pytest.approx(exact, rel=1e-13)


def test_refinement_consistency_of_densities():
    from phasemoments.povm import diagonal_density

    for s in range(0, 9, 2):
        for k in range(0, 9, 2):
            f = lambda z: diagonal_density(s, k, z)
            a = integrate_plane(f, q.radial_angular(40, 64))
            b = integrate_plane(f, q.radial_angular(80, 128))
            assert abs(a - b) < 1e-10


def test_summation_order_is_fixed():
    s = q.radial_angular(30, 32)
    f = lambda z: np.exp(-np.abs(z) ** 2) * (1 + z)
    assert integrate_plane(f, s) == integrate_plane(f, s)


def test_partial_turn_sector_odd_radial_power():
    # int_{r>0, 0<t<pi} |z| e^{-|z|^2} dA = pi * Gamma(3/2) / 2
    f = lambda z: np.abs(z) * np.exp(-np.abs(z) ** 2)
    got = integrate_region(f, Region.annulus_sector(0.0, math.inf, 0.0, math.pi))
    assert got.real == pytest.approx(math.pi * math.gamma(1.5) / 2, abs=1e-12)
    got = integrate_region(f, Region.annulus_sector(0.5, math.inf, 1.0, 2.0))
    exact = 1.0 * 0.5 * (math.gamma(1.5) * math.erfc(0.5) + 0.5 * math.exp(-0.25))
    assert got.real == pytest.approx(exact, abs=1e-12)
