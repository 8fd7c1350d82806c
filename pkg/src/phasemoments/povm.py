"""The phase space observable generated by a number state |s>.

Matrix elements are taken in the number basis. Two computational paths are
kept apart on purpose: closed forms built from the coefficients a(s, k, r),
and quadrature over the plane. Tests compare one against the other.

Only the dense span of number states is represented; domain questions for
the unbounded moment operators cannot be decided in a truncation and are not
addressed here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .quadrature import Region, gaussian_exp_moment, region_rule, integrate_region
from .specfun import (
    FactorialOverflowError,
    diagonal_radial_coefficients,
    disp_coeff,
    disp_coeff_squared_ratio,
    displacement_column,
    displacement_element,
    ladder_matrices,
    FACTORIAL_LIMIT,
)


class EnvelopeViolationError(RuntimeError):
    """A rejection-sampling proposal exceeded the envelope bound."""


class PolynomialFitError(ArithmeticError):
    """A fitted diagonal polynomial failed verification."""


@dataclass(frozen=True)
class FockVector:
    """Finite vector of number-basis coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).ravel())

    @classmethod
    def number_state(cls, n: int, d: int | None = None) -> "FockVector":
        d = n + 1 if d is None else d
        c = np.zeros(d, dtype=complex)
        c[n] = 1.0
        return cls(c)

    @property
    def dim(self) -> int:
        return self.coeffs.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_normalized(self, tol=1e-12) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "FockVector":
        return FockVector(self.coeffs / self.norm())

    def mean_number(self) -> float:
        p = np.abs(self.coeffs) ** 2
        return float(np.dot(np.arange(self.dim), p) / p.sum())

    def __add__(self, other: "FockVector") -> "FockVector":
        d = max(self.dim, other.dim)
        a = np.zeros(d, dtype=complex)
        a[: self.dim] += self.coeffs
        a[: other.dim] += other.coeffs
        return FockVector(a)

    def __rmul__(self, c) -> "FockVector":
        return FockVector(c * self.coeffs)


@dataclass(frozen=True)
class TruncatedOperator:
    """A d x d number-basis matrix, optionally with a validity mask.

    ``mask[k, l]`` is True where the entry carries no truncation error.
    """

    entries: np.ndarray
    hermitian: bool = False
    mask: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedOperator":
        m = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if m.shape != (data["dim"], data["dim"]):
            raise ValueError("entries do not match dim")
        return cls(m, hermitian=bool(np.allclose(m, m.conj().T, atol=1e-12)))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


# --- densities -------------------------------------------------------------


def pair_density(s: int, k: int, l: int, z):
    """(1/pi) <k|D_z|s> conj(<l|D_z|s>), the density of <k|A(.)|l>."""
    val = displacement_element(k, s, z) * np.conjugate(displacement_element(l, s, z)) / math.pi
    return val if np.ndim(val) else complex(val)


def pair_density_expansion(s: int, k: int, l: int, z):
    """Same density from the double sum over a(s,k,r) a(s,l,r')."""
    z = np.asarray(z, dtype=complex)
    zc = z.conjugate()
    total = np.zeros_like(z)
    for r in range(min(k, s) + 1):
        for rp in range(min(l, s) + 1):
            e = s - r - rp
            total = total + disp_coeff(s, k, r) * disp_coeff(s, l, rp) * z ** (e + k) * zc ** (e + l)
    val = np.exp(-(z * zc).real) * total / (math.pi * math.factorial(s))
    return val if np.ndim(val) else complex(val)


def diagonal_density(s: int, k: int, z):
    """Density of the probability measure <k|A(.)|k>; depends on |z| only."""
    coeffs = [float(c) for c in diagonal_radial_coefficients(s, k)]
    x = np.abs(np.asarray(z, dtype=complex)) ** 2
    val = np.exp(-x) * np.polynomial.polynomial.polyval(x, coeffs) / math.pi
    return val if np.ndim(val) else float(val)


def state_density(s: int, phi: FockVector, z):
    """(1/pi) |<phi|D_z|s>|^2, the outcome density for the state phi."""
    z = np.asarray(z, dtype=complex)
    col = displacement_column(s, phi.dim, z)
    amp = np.tensordot(phi.coeffs.conj(), col, axes=1)
    return np.abs(amp) ** 2 / math.pi


# --- POVM elements ---------------------------------------------------------


def povm_element(s: int, region: Region, d: int, n_r: int = 64, n_theta: int = 128, **hints) -> TruncatedOperator:
    """Truncated matrix of A(Z) = (1/pi) int_Z D_z |s><s| D_z* dlambda(z)."""
    if d < 1:
        raise ValueError("d must be at least 1")
    nodes, weights = region_rule(region, n_r, n_theta, **hints)
    if nodes.size == 0:
        return TruncatedOperator(np.zeros((d, d), dtype=complex), hermitian=True)
    v = displacement_column(s, d, nodes)
    if not np.all(np.isfinite(v)):
        raise FloatingPointError("displacement elements not finite on the quadrature nodes")
    m = (v * weights[None, :]) @ v.conj().T / math.pi
    m = 0.5 * (m + m.conj().T)
    return TruncatedOperator(m, hermitian=True)


def region_matrix_element(s: int, k: int, l: int, region: Region, n_r=64, n_theta=128, **hints) -> complex:
    """<k|A(Z)|l> as a single quadrature."""
    return integrate_region(lambda z: pair_density(s, k, l, z), region, n_r, n_theta, **hints)


# --- moment operators ------------------------------------------------------


def _moment_sum(s, m, n, k, l) -> Fraction:
    # sum_{r,r'} a(s,k,r) a(s,l,r') (m+s+k-r-r')! / (s! sqrt(k! l!))
    total = Fraction(0)
    for r in range(min(k, s) + 1):
        for rp in range(min(l, s) + 1):
            total += disp_coeff_squared_ratio(s, k, l, r, rp) * math.factorial(m + s + k - r - rp)
    return total / math.factorial(s)


def moment_matrix_element(s: int, m: int, n: int, k: int, l: int) -> float:
    """<k| A[m, n] |l> in closed form; exactly 0.0 when k + m != l + n."""
    if min(s, m, n, k, l) < 0:
        raise ValueError("all indices must be nonnegative")
    if k + m != l + n:
        return 0.0
    top = m + s + k
    if max(top, k, l, s) > FACTORIAL_LIMIT:
        raise FactorialOverflowError(f"({top})! exceeds the exact range")
    total = _moment_sum(s, m, n, k, l)
    lo, hi = min(k, l), max(k, l)
    if lo == hi:
        return float(total * math.factorial(k))
    # sqrt(k! l!) = lo! * sqrt(hi!/lo!)
    return float(total * math.factorial(lo)) * math.sqrt(math.factorial(hi) // math.factorial(lo))


def moment_operator(s: int, m: int, n: int, d: int) -> TruncatedOperator:
    """Truncation of A[m, n]; only the stripe l = k + m - n is nonzero."""
    out = np.zeros((d, d), dtype=complex)
    for k in range(d):
        l = k + m - n
        if 0 <= l < d:
            out[k, l] = moment_matrix_element(s, m, n, k, l)
    return TruncatedOperator(out, hermitian=(m == n))


def normal_ordered_operator(m: int, n: int, d: int) -> TruncatedOperator:
    """a^m (a*)^n from truncated ladder matrices, with a validity mask.

    Column l is truncation-free iff l + n <= d - 1, since (a*)^n is the only
    factor that leaves the truncated space.
    """
    lt = ladder_matrices(d)
    prod = np.linalg.matrix_power(lt.a_mat, m) @ np.linalg.matrix_power(lt.a_dag_mat, n)
    cols = np.arange(d)
    mask = np.broadcast_to(cols[None, :] + n <= d - 1, (d, d)).copy()
    return TruncatedOperator(prod, hermitian=(m == n), mask=mask)


@dataclass(frozen=True)
class DiagonalPolynomial:
    """Integer polynomial p(k) = sum_i coeffs[i] k^i."""

    coeffs: tuple
    s: int
    n: int

    def __call__(self, k):
        return sum(c * k**i for i, c in enumerate(self.coeffs))

    def __str__(self):
        terms = []
        for i in reversed(range(len(self.coeffs))):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("k" if i == 1 else f"k^{i}")
            if i == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms) if terms else "0"


def _exact_diagonal(s, n, k) -> Fraction:
    return _moment_sum(s, n, n, k, k) * math.factorial(k)


def _interpolate(points) -> list[Fraction]:
    # monomial coefficients of the interpolating polynomial through (x, y)
    size = len(points)
    a = [[Fraction(x) ** j for j in range(size)] for x, _ in points]
    b = [Fraction(y) for _, y in points]
    for col in range(size):
        piv = next(r for r in range(col, size) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] -= f * b[col]
    return [b[i] / a[i][i] for i in range(size)]


def fit_diagonal_polynomial(s: int, n: int, k_max: int) -> DiagonalPolynomial:
    """Recover the degree-n polynomial p(k) = <k|A[n, n]|k> at fixed s.

    Fits through k = 0..n, then checks every k up to ``k_max``.
    """
    if k_max < n + 1:
        raise ValueError("k_max must be at least n + 1")
    coeffs = _interpolate([(k, _exact_diagonal(s, n, k)) for k in range(n + 1)])
    for k in range(n + 1, k_max + 1):
        got = sum(c * k**i for i, c in enumerate(coeffs))
        want = _exact_diagonal(s, n, k)
        if got != want:
            raise PolynomialFitError(f"p({k}) = {got} but <{k}|A[{n},{n}]|{k}> = {want} (s={s})")
    if any(c.denominator != 1 for c in coeffs):
        raise PolynomialFitError(f"non-integer coefficients {coeffs} (s={s}, n={n})")
    return DiagonalPolynomial(tuple(int(c) for c in coeffs), s, n)


def fit_number_polynomial_table(n: int) -> list[list[int]]:
    """Integer table t[i][j] with A[n, n] = sum_{i,j} t[i][j] s^(n-j) N^i.

    Each k-coefficient of the fitted diagonal polynomial is itself fitted as a
    polynomial in s of degree <= n.
    """
    per_s = [fit_diagonal_polynomial(s, n, n + 2).coeffs for s in range(n + 2)]
    table = []
    for i in range(n + 1):
        s_coeffs = _interpolate([(s, per_s[s][i] if i < len(per_s[s]) else 0) for s in range(n + 1)])
        check = sum(c * (n + 1) ** p for p, c in enumerate(s_coeffs))
        want = per_s[n + 1][i] if i < len(per_s[n + 1]) else 0
        if check != want or any(c.denominator != 1 for c in s_coeffs):
            raise PolynomialFitError(f"coefficient of N^{i} is not an integer polynomial in s")
        table.append([int(s_coeffs[n - j]) for j in range(n + 1)])
    return table


# --- exponential bounds ----------------------------------------------------


def exp_bound_closed_form(s: int, k: int, a: float) -> float:
    """int exp(a|z|) d<k|A(z)|k> assembled from completed-square radial integrals.

    At ``a == 0`` the exact rational total mass is returned.
    """
    if a < 0:
        raise ValueError("a must be nonnegative")
    coeffs = diagonal_radial_coefficients(s, k)
    if a == 0:
        return float(sum(c * math.factorial(j) for j, c in enumerate(coeffs)))
    terms = [float(c) * 2.0 * gaussian_exp_moment(2 * j + 1, a) for j, c in enumerate(coeffs)]
    return math.fsum(terms)


# --- polarization ----------------------------------------------------------


def vector_measure(s: int, n_r: int = 64, n_theta: int = 128):
    """Map a vector v to the set function Z -> <v|A(Z)|v> (v need not be normalized)."""

    def diag(v: FockVector):
        def measure(region: Region) -> float:
            nodes, weights = region_rule(region, n_r, n_theta)
            if nodes.size == 0:
                return 0.0
            return float(math.fsum(weights * state_density(s, v, nodes)))

        return measure

    return diag


def polarization_reconstruct(diag, psi: FockVector, phi: FockVector):
    """Z -> (1/4) sum_r i^r diag(phi + i^r psi)(Z), which equals <psi|E(Z)|phi>."""
    measures = [(1j**r, diag(phi + (1j**r) * psi)) for r in range(4)]

    def value(region: Region) -> complex:
        return 0.25 * sum(c * mu(region) for c, mu in measures)

    return value


# --- sampling --------------------------------------------------------------


def _envelope(s, phi):
    var = s + phi.mean_number() + 2.0
    r = np.linspace(0.0, 6.0 * math.sqrt(var), 241)
    t = 2 * math.pi * np.arange(96) / 96
    z = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
    q = np.exp(-np.abs(z) ** 2 / var) / (math.pi * var)
    ratio = state_density(s, phi, z) / q
    return var, 1.25 * float(ratio.max())


def sample_outcomes(s: int, phi: FockVector, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` i.i.d. points from (1/pi)|<phi|D_z|s>|^2 by rejection.

    The proposal is a circular complex Gaussian with E|z|^2 = s + <N> + 2; the
    envelope constant is 1.25 times the density ratio maximum over a polar
    grid. Deterministic for a fixed seed.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if not phi.is_normalized():
        raise ValueError("phi must be normalized")
    var, bound = _envelope(s, phi)
    rng = np.random.default_rng(seed)
    out = []
    have = 0
    batch = max(1024, int(1.2 * bound * count))
    while have < count:
        z = rng.normal(scale=math.sqrt(var / 2), size=(batch, 2)) @ np.array([1.0, 1j])
        u = rng.random(batch)
        q = np.exp(-np.abs(z) ** 2 / var) / (math.pi * var)
        ratio = state_density(s, phi, z) / q
        if np.any(ratio > bound):
            raise EnvelopeViolationError(f"density ratio {ratio.max():.6g} exceeds envelope {bound:.6g}")
        keep = z[u * bound < ratio]
        out.append(keep)
        have += keep.size
    return np.concatenate(out)[:count]
