import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from phasemoments import povm
from phasemoments.povm import (
    FockVector,
    PolynomialFitError,
    TruncatedOperator,
    diagonal_density,
    exp_bound_closed_form,
    fit_diagonal_polynomial,
    moment_matrix_element,
    moment_operator,
    normal_ordered_operator,
    pair_density,
    polarization_reconstruct,
    povm_element,
    sample_outcomes,
)
from phasemoments.quadrature import Region, integrate_region
from phasemoments.specfun import FactorialOverflowError, ladder_matrices


def test_pair_density_examples():
    assert pair_density(0, 0, 0, 0j) == pytest.approx(1 / math.pi, abs=1e-15)
    for s in range(3):
        for k in range(3):
            for l in range(3):
                expect = (k == s and l == s) / math.pi
                assert pair_density(s, k, l, 0j) == pytest.approx(expect, abs=1e-15)
    assert pair_density(1, 0, 0, np.exp(0.4j)).real == pytest.approx(math.exp(-1) / math.pi, abs=1e-12)
    assert math.exp(-1) / math.pi == pytest.approx(0.117099, abs=1e-6)


@given(s=st.integers(0, 7), k=st.integers(0, 7), l=st.integers(0, 7), x=st.floats(-3, 3), y=st.floats(-3, 3))
@settings(max_examples=80, deadline=None)
def test_pair_density_matches_expansion(s, k, l, x, y):
    z = complex(x, y)
    assert abs(pair_density(s, k, l, z) - povm.pair_density_expansion(s, k, l, z)) < 1e-10


def test_diagonal_density_examples():
    for z in (0j, 0.3 + 0.2j, -1.5j):
        assert diagonal_density(0, 0, z) == pytest.approx(math.exp(-abs(z) ** 2) / math.pi, abs=1e-15)
    assert diagonal_density(0, 0, 0) == pytest.approx(1 / math.pi)
    r = 1.3
    vals = [diagonal_density(1, 1, r * np.exp(1j * t)) for t in np.linspace(0, 6, 7)]
    assert max(vals) - min(vals) < 1e-15
    for s, k in ((0, 0), (2, 3), (5, 1)):
        assert integrate_region(lambda z: diagonal_density(s, k, z), Region.full_plane()) == pytest.approx(1.0, abs=1e-12)
        z = np.array([0.4 + 1j, -2 + 0.1j])
        np.testing.assert_allclose(diagonal_density(s, k, z), pair_density(s, k, k, z).real, atol=1e-15)


def test_povm_element_examples():
    el = povm_element(0, Region.disk(0, 1.0), 4)
    assert el.entries[0, 0].real == pytest.approx(1 - math.exp(-1), abs=1e-8)
    assert abs(el.entries[0, 1]) < 1e-10
    assert el.hermitian
    np.testing.assert_allclose(el.entries, el.entries.conj().T, atol=1e-12)
    for s in range(5):
        full = povm_element(s, Region.full_plane(), 12).entries
        assert np.max(np.abs(full - np.eye(12))) < 1e-9


def test_povm_element_vs_radial_oracle():
    # <k|A(disk R)|k> for s=0 is the regularized incomplete gamma P(k+1, R^2)
    from scipy.special import gammainc

    el = povm_element(0, Region.disk(0, 1.7), 6).entries
    for k in range(6):
        assert el[k, k].real == pytest.approx(gammainc(k + 1, 1.7**2), abs=1e-10)


def test_povm_psd_random_regions():
    rng = np.random.default_rng(5)
    for _ in range(5):
        c = complex(*rng.normal(size=2))
        region = Region.disk(c, float(rng.uniform(0.2, 2.0)))
        for s in (0, 2):
            ev = np.linalg.eigvalsh(povm_element(s, region, 10).entries)
            assert ev.min() >= -1e-10 and ev.max() <= 1 + 1e-10


def test_moment_matrix_element_examples():
    assert moment_matrix_element(0, 1, 1, 0, 0) == 1
    assert moment_matrix_element(1, 1, 1, 1, 1) == 3
    for s in range(5):
        assert moment_matrix_element(s, 1, 0, 0, 2) == 0


def test_selection_rule_up_to_ten():
    for s in range(11):
        for m in range(11):
            for n in range(11):
                for k in range(11):
                    for l in range(11):
                        if k + m != l + n:
                            assert moment_matrix_element(s, m, n, k, l) == 0


def test_overflow_guard():
    with pytest.raises(FactorialOverflowError):
        moment_matrix_element(0, 171, 171, 0, 0)


def test_adjoint_symmetry_exact():
    for s in range(4):
        for m in range(4):
            for n in range(4):
                a = moment_operator(s, m, n, 10).entries
                b = moment_operator(s, n, m, 10).entries
                assert np.array_equal(a, b.conj().T)


def test_moment_operator_examples():
    for s in range(4):
        assert np.array_equal(moment_operator(s, 0, 0, 7).entries, np.eye(7))
    for s in range(9):
        op = moment_operator(s, 1, 1, 21).entries
        assert np.array_equal(op, np.diag(np.arange(21) + s + 1.0))


def test_normal_ordered_examples():
    no = normal_ordered_operator(1, 1, 6)
    assert np.allclose(np.diag(no.entries)[no.mask.diagonal()], np.arange(6)[no.mask.diagonal()] + 1)
    assert np.array_equal(normal_ordered_operator(0, 0, 5).entries, np.eye(5))
    no = normal_ordered_operator(2, 0, 8)
    for k in range(6):
        assert no.entries[k, k + 2] == pytest.approx(math.sqrt((k + 1) * (k + 2)), rel=1e-14)


def test_normal_order_mask_is_exact_region():
    # the mask marks entries where the truncated product equals a bigger truncation
    d = 10
    for m in range(4):
        for n in range(4):
            small = normal_ordered_operator(m, n, d)
            big = normal_ordered_operator(m, n, d + m + n + 2).entries[:d, :d]
            assert np.allclose(small.entries[small.mask], big[small.mask], atol=1e-12)
            # every unmasked stripe entry is actually damaged by truncation
            for l in range(d - n, d):
                k = l + n - m
                if 0 <= k < d:
                    assert abs(small.entries[k, l] - big[k, l]) > 1e-6


def test_normal_order_with_ladder_product():
    d = 12
    lt = ladder_matrices(d)
    for m in range(3):
        for n in range(3):
            prod = np.linalg.matrix_power(lt.a_mat, m) @ np.linalg.matrix_power(lt.a_dag_mat, n)
            no = normal_ordered_operator(m, n, d)
            np.testing.assert_allclose(no.entries, prod, atol=1e-12)
            closed = moment_operator(0, m, n, d).entries
            np.testing.assert_allclose(closed[no.mask], prod[no.mask], rtol=1e-12)


def test_fit_examples():
    assert fit_diagonal_polynomial(0, 1, 10).coeffs == (1, 1)
    assert str(fit_diagonal_polynomial(0, 1, 10)) == "k + 1"
    assert str(fit_diagonal_polynomial(1, 1, 10)) == "k + 2"
    for s in range(4):
        assert fit_diagonal_polynomial(s, 0, 5).coeffs == (1,)
    p = fit_diagonal_polynomial(0, 2, 12)
    assert [p(k) for k in range(5)] == [(k + 1) * (k + 2) for k in range(5)]
    with pytest.raises(ValueError):
        fit_diagonal_polynomial(0, 3, 3)


def test_number_polynomial_table():
    assert povm.fit_number_polynomial_table(1) == [[1, 1], [0, 1]]
    table = povm.fit_number_polynomial_table(2)
    assert table == [[1, 3, 2], [0, 4, 3], [0, 0, 1]]
    for n in (3, 4):
        t = povm.fit_number_polynomial_table(n)
        for s in range(6):
            for k in range(8):
                val = sum(t[i][j] * s ** (n - j) * k**i for i in range(n + 1) for j in range(n + 1))
                assert val == moment_matrix_element(s, n, n, k, k)


def test_fit_rejects_non_polynomial(monkeypatch):
    monkeypatch.setattr(povm, "_exact_diagonal", lambda s, n, k: Fraction(2**k))
    with pytest.raises(PolynomialFitError):
        fit_diagonal_polynomial(0, 1, 5)


def test_exp_bound_examples():
    for s in range(4):
        for k in range(4):
            assert exp_bound_closed_form(s, k, 0.0) == 1.0
    ref, _ = integrate.quad(lambda r: math.exp(r - r * r) * 2 * r, 0, 40, epsabs=0, epsrel=1e-13)
    assert exp_bound_closed_form(0, 0, 1.0) == pytest.approx(ref, abs=1e-8)
    assert exp_bound_closed_form(1, 1, 2.0) > exp_bound_closed_form(1, 1, 1.0)
    with pytest.raises(ValueError):
        exp_bound_closed_form(0, 0, -1.0)


def test_polarization_examples():
    diag = povm.vector_measure(0)
    phi = FockVector([0.6, 0.8j])
    disk = Region.disk(0.2, 1.5)
    rec = polarization_reconstruct(diag, phi, phi)
    assert rec(disk) == pytest.approx(diag(phi)(disk), abs=1e-13)
    zero = polarization_reconstruct(lambda v: (lambda region: 0.0), phi, phi)
    assert zero(disk) == 0
    psi, phi = FockVector.number_state(0), FockVector.number_state(1)
    got = polarization_reconstruct(diag, psi, phi)(Region.disk(0, 2.0))
    ref = integrate_region(lambda z: pair_density(0, 0, 1, z), Region.disk(0, 2.0))
    assert abs(got - ref) < 1e-8


def test_polarization_off_center_matches_element():
    psi, phi = FockVector([0.3, 1.0, 0.2j]), FockVector([1.0, -0.5j, 0.4])
    region = Region.disk(0.7 - 0.4j, 1.2)
    el = povm_element(1, region, 3).entries
    got = polarization_reconstruct(povm.vector_measure(1), psi, phi)(region)
    assert abs(got - psi.coeffs.conj() @ el @ phi.coeffs) < 1e-10


def test_state_density_is_quadratic_form():
    phi = FockVector([0.5, 0.5j, -0.5, 0.5]).normalized()
    z = np.array([0.3 + 0.4j, -1.1 + 0.2j])
    ref = sum(np.conj(phi.coeffs[k]) * phi.coeffs[l] * pair_density(2, k, l, z) for k in range(4) for l in range(4))
    np.testing.assert_allclose(povm.state_density(2, phi, z), ref.real, atol=1e-14)


def test_sampler_determinism_and_shape():
    a = sample_outcomes(0, FockVector([1.0]), 1000, 7)
    b = sample_outcomes(0, FockVector([1.0]), 1000, 7)
    c = sample_outcomes(0, FockVector([1.0]), 1000, 8)
    assert a.shape == (1000,) and a.tobytes() == b.tobytes() and a.tobytes() != c.tobytes()
    with pytest.raises(ValueError):
        sample_outcomes(0, FockVector([1.0, 1.0]), 10, 1)
    with pytest.raises(ValueError):
        sample_outcomes(0, FockVector([1.0]), 0, 1)


def test_sampler_low_order_moments():
    phi = FockVector([0.8, 0.6])
    count = 200_000
    pts = sample_outcomes(1, phi, count, 11)
    c = np.zeros(4, dtype=complex)
    c[:2] = phi.coeffs
    for m, n in ((1, 0), (0, 1), (1, 1), (2, 0), (0, 2)):
        ref = c.conj() @ moment_operator(1, m, n, 4).entries @ c
        vals = pts**m * np.conj(pts) ** n
        for part in (np.real, np.imag):
            se = part(vals).std(ddof=1) / math.sqrt(count)
            assert abs(part(vals).mean() - part(ref)) <= 5 * se + 1e-12


def test_sampler_rate():
    # standard error of the |z|^2 mean scales like 1/sqrt(count)
    errs = []
    for count in (2_000, 200_000):
        pts = sample_outcomes(0, FockVector([1.0]), count, 3)
        errs.append(np.abs(pts) ** 2)
    se = [e.std(ddof=1) / math.sqrt(e.size) for e in errs]
    assert se[0] / se[1] == pytest.approx(10.0, rel=0.1)


def test_truncated_operator_json():
    op = povm_element(1, Region.disk(0.5j, 1.0), 4)
    data = json.loads(op.dumps())
    assert set(data) == {"dim", "re", "im"}
    back = TruncatedOperator.from_json(data)
    assert np.array_equal(back.entries, op.entries) and back.hermitian
    with pytest.raises(ValueError):
        TruncatedOperator.from_json({"dim": 3, "re": [[1.0]], "im": [[0.0]]})


def test_fock_vector_ops():
    v = FockVector.number_state(2, 4)
    assert v.dim == 4 and v.is_normalized() and v.mean_number() == 2
    w = v + 1j * FockVector([1.0])
    assert w.dim == 4 and w.norm() == pytest.approx(math.sqrt(2))
    assert w.normalized().is_normalized()
