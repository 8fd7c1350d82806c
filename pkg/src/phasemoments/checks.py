"""Invariant suites shared by ``phasemoments verify`` and the test-suite.

Each suite returns a list of :class:`Check` rows: what was compared, the
measured error and the tolerance it was held to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import margins, moments, povm
from .quadrature import TWO_PI, Region, radial_angular
from .specfun import displacement_column


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    params: dict
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        args = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{status} {self.suite}/{self.name}({args}) error={self.error:.3e} tol={self.tol:.1e}"


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def selection(tol=0.0, s_max=6, mn_max=6, kl_max=12):
    """<k|A[m,n]|l> is exactly zero off the stripe k + m = l + n."""
    worst, where = 0.0, {}
    for s in range(s_max + 1):
        for m in range(mn_max + 1):
            for n in range(mn_max + 1):
                for k in range(kl_max + 1):
                    for l in range(kl_max + 1):
                        if k + m == l + n:
                            continue
                        v = abs(povm.moment_matrix_element(s, m, n, k, l))
                        if v > worst:
                            worst, where = v, {"s": s, "m": m, "n": n, "k": k, "l": l}
    return [Check("selection", "off_stripe_zero", where or {"s_max": s_max, "kl_max": kl_max}, worst, tol)]


def normal_order(tol=1e-9, mn_max=4, d=24):
    """A^{|0>}[m,n] equals a^m (a*)^n on the truncation-free entries."""
    out = []
    for m in range(mn_max + 1):
        for n in range(mn_max + 1):
            closed = povm.moment_operator(0, m, n, d).entries
            ladder = povm.normal_ordered_operator(m, n, d)
            diff = np.abs(closed - ladder.entries) / np.maximum(1.0, np.abs(ladder.entries))
            err = float(np.max(np.where(ladder.mask, diff, 0.0)))
            out.append(Check("normal_order", "a^m a*^n", {"m": m, "n": n, "d": d}, err, tol))
    return out


def quadrature(tol=1e-7, order=6, smax=5, n_r=80, n_theta=128):
    """Plane quadrature of z^m conj(z)^n times the pair density vs the closed form."""
    scheme = radial_angular(n_r, n_theta)
    z, w = scheme.nodes, scheme.weights
    d = smax + 1
    out = []
    for s in range(smax + 1):
        v = displacement_column(s, d, z)
        for m in range(order + 1):
            for n in range(order + 1 - m):
                quad = (v * (w * z**m * np.conj(z) ** n)[None, :]) @ v.conj().T / math.pi
                worst, at = 0.0, {}
                for k in range(d):
                    for l in range(d):
                        err = abs(quad[k, l] - povm.moment_matrix_element(s, m, n, k, l))
                        if err >= worst:
                            worst, at = err, {"s": s, "m": m, "n": n, "k": k, "l": l}
                out.append(Check("quadrature", "moment_vs_closed_form", at, worst, tol))
    return out


def normalization(tol=1e-9, psd_tol=1e-10, s_max=4, d=16):
    """Full-plane POVM element is the identity; disk elements are PSD."""
    out = []
    for s in range(s_max + 1):
        full = povm.povm_element(s, Region.full_plane(), d).entries
        out.append(Check("normalization", "full_plane_identity", {"s": s, "d": d}, float(np.max(np.abs(full - np.eye(d)))), tol))
        disk = povm.povm_element(s, Region.disk(0, 1.0), d).entries
        min_eig = float(np.min(np.linalg.eigvalsh(disk)))
        out.append(Check("normalization", "disk_psd", {"s": s, "d": d}, max(0.0, -min_eig), psd_tol))
    return out


def polynomial(tol=1e-6, n_max=4, s_max=6, k_max=20):
    """<k|A[n,n]|k> is a degree-n polynomial in k with integer coefficients."""
    out = []
    for n in range(n_max + 1):
        for s in range(s_max + 1):
            vals = np.array([povm.moment_matrix_element(s, n, n, k, k) for k in range(k_max + 1)])
            diff = np.diff(vals, n + 1)
            err = float(np.max(np.abs(diff) / np.maximum(1.0, np.abs(vals[: diff.size])))) if diff.size else 0.0
            out.append(Check("polynomial", "finite_difference", {"n": n, "s": s}, err, tol))
            try:
                povm.fit_diagonal_polynomial(s, n, k_max)
                fit_err = 0.0
            except povm.PolynomialFitError:
                fit_err = math.inf
            out.append(Check("polynomial", "integer_fit", {"n": n, "s": s}, fit_err, 0.0))
        if n == 1:
            for s in range(s_max + 1):
                p = povm.fit_diagonal_polynomial(s, 1, k_max)
                err = 0.0 if p.coeffs == (s + 1, 1) else math.inf
                out.append(Check("polynomial", "k+s+1", {"s": s}, err, 0.0))
    return out


def _exp_bound_oracle(s, k, a):
    # radial density from the displacement element, integrated adaptively
    def f(r):
        return math.exp(a * r) * abs(complex(povm.pair_density(s, k, k, complex(r, 0.0)))) * 2.0 * math.pi * r

    hi = 0.5 * a + math.sqrt(2.0 * (s + k) + 2.0) + 15.0
    val, _ = integrate.quad(f, 0.0, hi, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def exp_bound(tol=1e-6, sk_max=6, a_values=(0.5, 1.0, 2.0)):
    """Completed-square exponential bound vs adaptive quadrature; determinacy verdicts."""
    out = []
    for s in range(sk_max + 1):
        for k in range(sk_max + 1):
            for a in a_values:
                val = povm.exp_bound_closed_form(s, k, a)
                ref = _exp_bound_oracle(s, k, a)
                err = abs(val - ref) / ref if math.isfinite(val) else math.inf
                out.append(Check("exp_bound", "closed_vs_adaptive", {"s": s, "k": k, "a": a}, err, tol))
            report = moments.determinacy_report(moments.MeasureRep.number_state(s, k))
            out.append(Check("exp_bound", "determinate", {"s": s, "k": k}, 0.0 if report.determinate_verdict else math.inf, 0.0))
    return out


def translation(max_order=12):
    """Exact shift identities on integer atoms."""
    out = []
    for t in (-3, 0, 2, 5):
        for a in (-5, -1, 1, 4):
            c = moments.MomentSequence.from_measure(moments.MeasureRep.atomic([(t,)], [1]), max_order)
            back = moments.translate_moments(moments.translate_moments(c, a, "inverse"), a, "forward")
            err = 0.0 if back.as_list() == c.as_list() else math.inf
            out.append(Check("translation", "roundtrip", {"t": t, "a": a}, err, 0.0))
            shifted = moments.MomentSequence.from_measure(moments.MeasureRep.atomic([(t + a,)], [1]), max_order)
            err = 0.0 if moments.translate_moments(c, a).as_list() == shifted.as_list() else math.inf
            out.append(Check("translation", "delta_shift", {"t": t, "a": a}, err, 0.0))
    return out


def _joint_real_moment(s, vec, j, momentum=False):
    # sqrt(2)^j E[Re z^j] (or Im z) from closed-form complex moments
    d = vec.dim + j + 1
    c = np.zeros(d, dtype=complex)
    c[: vec.dim] = vec.coeffs
    total = 0j
    for i in range(j + 1):
        op = povm.moment_operator(s, i, j - i, d).entries
        term = math.comb(j, i) * (c.conj() @ op @ c)
        if momentum:
            term *= (-1j) ** j * (-1) ** (j - i)
        total += term
    return (total / 2**j * 2 ** (j / 2)).real


def cartesian(tol=1e-8, moment_tol=1e-6, s_max=3, j_max=4):
    """Unsharp position/momentum marginals against closed forms."""
    out = []
    f0 = margins.WavefunctionRep.from_fock([1.0])
    x = np.linspace(-8, 8, 321)
    g = margins.unsharp_position_density(0, f0, x)
    err = float(np.max(np.abs(g - np.exp(-x * x / 2) / math.sqrt(2 * math.pi))))
    out.append(Check("margins", "gaussian_position", {"s": 0}, err, tol))
    vec = povm.FockVector([0.6, 0.48 + 0.32j, 0.3j, -0.2]).normalized()
    phi = margins.WavefunctionRep.from_fock(vec)
    for s in range(s_max + 1):
        for j in range(j_max + 1):
            for momentum in (False, True):
                got = margins.position_moment(s, phi, j, momentum)
                ref = _joint_real_moment(s, vec, j, momentum)
                name = "momentum_moment" if momentum else "position_moment"
                out.append(Check("margins", name, {"s": s, "j": j}, _rel(got, ref), moment_tol))
    bump = margins.WavefunctionRep.bump(-1.0, 1.0, 401)
    for s in range(s_max + 1):
        dens = margins.unsharp_position_density(s, bump, x)
        env = margins.envelope_bound(s, bump, x)
        out.append(Check("margins", "envelope_dominates", {"s": s}, float(max(0.0, np.max(dens - env))), 0.0))
    return out


def polar(tol=1e-9, partition_tol=1e-8, s_max=3, d=6, m_max=6):
    """Angular/radial margins and angular moment bounds."""
    out = []
    for s in range(s_max + 1):
        for k in range(d):
            for t0, t1 in ((0.0, math.pi), (0.5, 2.0), (1.0, TWO_PI)):
                v = margins.angular_margin_element(s, k, k, (t0, t1))
                out.append(Check("polar", "angular_diagonal", {"s": s, "k": k, "X": f"[{t0:g},{t1:g})"}, abs(v - (t1 - t0) / TWO_PI), tol))
        radii = (0.0, 0.8, 1.7, 3.0, math.inf)
        angles = (0.0, 1.3, math.pi, TWO_PI)
        total = np.zeros((d, d), dtype=complex)
        for r0, r1 in zip(radii[:-1], radii[1:]):
            for t0, t1 in zip(angles[:-1], angles[1:]):
                total += povm.povm_element(s, Region.annulus_sector(r0, r1, t0, t1), d).entries
        out.append(Check("polar", "partition_identity", {"s": s, "d": d}, float(np.max(np.abs(total - np.eye(d)))), partition_tol))
        for k in range(3):
            for m in range(m_max + 1):
                v = abs(margins.polar_moment_element(s, 0, m, k, k))
                # m = 0 is an equality, so allow rounding slack
                out.append(Check("polar", "angular_moment_bound", {"s": s, "k": k, "m": m}, max(0.0, v / TWO_PI**m - 1.0), 1e-12))
    return out


def margins_suite(tol=None):
    kw = {} if tol is None else {"tol": tol, "moment_tol": tol}
    pw = {} if tol is None else {"tol": tol, "partition_tol": tol}
    return cartesian(**kw) + polar(**pw)


def sampler(count=10**6, seed=20260101, sigmas=5.0):
    """Empirical <|z|^2> against the closed form, plus seed determinism."""
    out = []
    for s, phi in ((0, povm.FockVector([1.0])), (1, povm.FockVector([1.0]))):
        pts = povm.sample_outcomes(s, phi, count, seed)
        r2 = np.abs(pts) ** 2
        ref = povm.moment_matrix_element(s, 1, 1, 0, 0)
        se = float(r2.std(ddof=1) / math.sqrt(count))
        out.append(Check("sampler", "mean_abs2_in_se", {"s": s, "count": count}, abs(float(r2.mean()) - ref) / se, sigmas))
        again = povm.sample_outcomes(s, phi, count, seed)
        same = again.tobytes() == pts.tobytes()
        out.append(Check("sampler", "deterministic", {"s": s}, 0.0 if same else math.inf, 0.0))
    return out


SUITES = {
    "selection": selection,
    "normal_order": normal_order,
    "quadrature": quadrature,
    "normalization": normalization,
    "polynomial": polynomial,
    "exp_bound": exp_bound,
    "translation": translation,
    "margins": margins_suite,
    "sampler": sampler,
}


def run_suite(name: str, tol: float | None = None) -> list[Check]:
    fn = SUITES[name]
    if tol is None or name in ("translation", "sampler"):
        return fn()
    return fn(tol=tol)
