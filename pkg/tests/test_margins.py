import math

import numpy as np
import pytest
from scipy import integrate

from phasemoments import margins
from phasemoments.margins import (
    FockBasisRequiredError,
    NonCompactSupportError,
    WavefunctionRep,
    angular_margin_element,
    envelope_bound,
    polar_moment_element,
    position_moment,
    radial_margin_element,
    unsharp_momentum_density,
    unsharp_position_density,
    unsharp_position_prob,
)
from phasemoments.povm import FockVector, pair_density
from phasemoments.specfun import hermite_functions

F0 = WavefunctionRep.from_fock([1.0])
F1 = WavefunctionRep.from_fock([0.0, 1.0])


def test_gaussian_example():
    x = np.linspace(-6, 6, 61)
    np.testing.assert_allclose(unsharp_position_density(0, F0, x), np.exp(-x * x / 2) / math.sqrt(2 * math.pi), atol=1e-12)
    assert unsharp_position_density(0, F0, 0.0) == pytest.approx(0.3989423, abs=1e-7)


@pytest.mark.parametrize("s", range(5))
def test_normalization_f1(s):
    assert position_moment(s, F1, 0) == pytest.approx(1.0, abs=1e-8)
    assert unsharp_position_prob(s, F1, [(-math.inf, math.inf)]) == pytest.approx(1.0, abs=1e-8)
    assert position_moment(s, F1, 0, momentum=True) == pytest.approx(1.0, abs=1e-8)


def test_even_symmetry():
    x = np.linspace(0, 7, 36)
    np.testing.assert_allclose(unsharp_position_density(2, F0, x), unsharp_position_density(2, F0, -x), rtol=1e-13)


def test_prob_examples():
    assert unsharp_position_prob(0, F0, [(-math.inf, math.inf)]) == pytest.approx(1.0, abs=1e-12)
    assert unsharp_position_prob(0, F0, [(-math.inf, 0.0)]) == pytest.approx(0.5, abs=1e-9)
    assert unsharp_position_prob(0, F0, []) == 0.0
    assert unsharp_position_prob(0, F0, [(1.0, 1.0)]) == 0.0
    # N(0,1): P(|x| <= 1)
    assert unsharp_position_prob(0, F0, [(-1.0, 1.0)]) == pytest.approx(math.erf(1 / math.sqrt(2)), abs=1e-12)
    two = unsharp_position_prob(1, F1, [(-3.0, -1.0), (0.5, 2.0)])
    one = unsharp_position_prob(1, F1, [(-3.0, -1.0)]) + unsharp_position_prob(1, F1, [(0.5, 2.0)])
    assert two == pytest.approx(one, abs=1e-14)


def test_momentum_examples():
    p = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(unsharp_momentum_density(0, F0, p), unsharp_position_density(0, F0, p), atol=1e-15)
    phi = WavefunctionRep.from_fock(np.array([1.0, 1.0]) / math.sqrt(2))
    rot = WavefunctionRep.from_fock(np.array([1.0, -1j]) / math.sqrt(2))
    for s in range(3):
        np.testing.assert_array_equal(unsharp_momentum_density(s, phi, p), unsharp_position_density(s, rot, p))


def test_momentum_against_numerical_fourier():
    # independent route: Fourier transform the wavefunction numerically, then convolve on a grid
    coeffs = np.array([0.5, 0.5j, -0.5, 0.5])
    phi = WavefunctionRep.from_fock(coeffs)
    x = np.linspace(-12, 12, 1201)
    dx = x[1] - x[0]
    psi = coeffs @ hermite_functions(3, x)
    p = x
    kernel = np.exp(-1j * np.outer(p, x)) / math.sqrt(2 * math.pi)
    psi_p = kernel @ psi * dx
    grid = WavefunctionRep.from_grid(p[0], dx, psi_p)
    pts = np.linspace(-4, 4, 17)
    for s in range(3):
        np.testing.assert_allclose(unsharp_momentum_density(s, phi, pts), unsharp_position_density(s, grid, pts), atol=1e-9)


def test_grid_and_fock_paths_agree():
    x = np.linspace(-14, 14, 2801)
    dx = x[1] - x[0]
    vals = hermite_functions(2, x)[2]
    grid = WavefunctionRep.from_grid(x[0], dx, vals)
    assert grid.norm() == pytest.approx(1.0, abs=1e-10)
    fock = WavefunctionRep.from_fock([0, 0, 1.0])
    pts = np.linspace(-5, 5, 21)
    for s in range(3):
        np.testing.assert_allclose(unsharp_position_density(s, grid, pts), unsharp_position_density(s, fock, pts), atol=1e-10)


def test_wavefunction_rep():
    assert WavefunctionRep.from_fock(FockVector([0.6, 0.8])).norm() == pytest.approx(1.0)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(F1(x), hermite_functions(1, x)[1])
    b = WavefunctionRep.bump(-1.0, 1.0, 401)
    assert b.norm() == pytest.approx(1.0, abs=1e-12)
    lo, hi = b.support()
    assert -1.0 - b.dx <= lo < -1.0 + b.dx and 1.0 - b.dx < hi <= 1.0 + b.dx
    with pytest.raises(NonCompactSupportError):
        F0.support()
    with pytest.raises(NonCompactSupportError):
        WavefunctionRep.from_grid(0, 1, [1.0, 0.0, 0.0]).support()
    with pytest.raises(FockBasisRequiredError):
        unsharp_momentum_density(0, b, 0.0)
    with pytest.raises(NonCompactSupportError):
        envelope_bound(0, F0, 0.0)


@pytest.mark.parametrize("s", range(4))
def test_envelope_dominates(s):
    b = WavefunctionRep.bump(-1.0, 1.0, 401)
    x = np.linspace(-10, 10, 2001)
    assert np.all(envelope_bound(s, b, x) >= unsharp_position_density(s, b, x))
    off = WavefunctionRep.bump(0.5, 2.0, 301)
    assert np.all(envelope_bound(s, off, x) >= unsharp_position_density(s, off, x))


def test_envelope_exp_bounded():
    b = WavefunctionRep.bump(-1.0, 1.0, 401)
    for s in range(4):
        for a in (1.0, 2.0):
            f = lambda x: math.exp(a * abs(x)) * envelope_bound(s, b, x)
            v1 = 2 * integrate.quad(f, 0, 30, limit=200)[0]
            v2 = 2 * integrate.quad(f, 0, 60, limit=400)[0]
            assert math.isfinite(v1) and v2 == pytest.approx(v1, rel=1e-10)


def test_envelope_center():
    b = WavefunctionRep.bump(-1.0, 1.0, 401)
    a, c = b.support()
    m = float(np.max(np.abs(b.values) ** 2))
    expect = m * (1 / math.sqrt(math.pi)) * (c - a)
    assert envelope_bound(0, b, 0.0) == pytest.approx(expect, rel=1e-14)
    assert envelope_bound(0, b, 0.0) >= unsharp_position_density(0, b, 0.0)


def test_radial_examples():
    assert radial_margin_element(0, 0, 0, (0.0, 1.0)).real == pytest.approx(1 - math.exp(-1), abs=1e-8)
    assert abs(radial_margin_element(1, 0, 2, (0.5, 2.0))) < 1e-10
    for k in range(3):
        for l in range(3):
            assert radial_margin_element(2, k, l, (0.0, math.inf)) == pytest.approx(float(k == l), abs=1e-12)
    with pytest.raises(ValueError):
        radial_margin_element(0, 3, 0, (0, 1), d=3)


def test_angular_examples():
    for s in range(3):
        for k in range(4):
            assert angular_margin_element(s, k, k, (0.3, 0.3 + math.pi)).real == pytest.approx(0.5, abs=1e-9)
        for k in range(3):
            for l in range(3):
                assert angular_margin_element(s, k, l, (0.0, 2 * math.pi)) == pytest.approx(float(k == l), abs=1e-12)


def test_angular_off_diagonal_vs_2d_quadrature():
    got = angular_margin_element(0, 0, 1, (0.0, math.pi))
    f = lambda part: lambda y, x: part(pair_density(0, 0, 1, complex(x, y)))
    re = integrate.dblquad(f(np.real), -10, 10, 0, 10, epsabs=1e-12)[0]
    im = integrate.dblquad(f(np.imag), -10, 10, 0, 10, epsabs=1e-12)[0]
    assert abs(got - complex(re, im)) < 1e-8
    assert abs(got) > 0.1


def test_polar_moment_examples():
    for s in range(3):
        for k in range(3):
            assert polar_moment_element(s, 0, 0, k, k) == pytest.approx(1.0, abs=1e-12)
    assert polar_moment_element(0, 0, 1, 0, 0) == pytest.approx(math.pi, abs=1e-8)
    assert polar_moment_element(0, 2, 0, 0, 0) == pytest.approx(1.0, abs=1e-8)
    # odd radial power: E r = Gamma(3/2) for the Gaussian
    assert polar_moment_element(0, 1, 0, 0, 0).real == pytest.approx(math.gamma(1.5), abs=1e-10)
    with pytest.raises(ValueError):
        polar_moment_element(0, -1, 0, 0, 0)


def test_angular_moment_bound():
    for s in range(3):
        for k in range(3):
            for m in range(1, 7):
                assert abs(polar_moment_element(s, 0, m, k, k)) <= (2 * math.pi) ** m


def test_window_constants_are_positive():
    assert margins._density_window(3, F1) > 0
