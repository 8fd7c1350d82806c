"""Exact combinatorics and special functions in the number basis.

Everything here is a pure function of its arguments. Factorials are kept as
Python integers for as long as possible and only converted to floating point
at the last step, so that small-order results are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: Largest n for which n! is representable as a finite double.
FACTORIAL_LIMIT = 170

_RESCALE = 1e150


class FactorialOverflowError(OverflowError):
    """Raised when an exact factorial would leave the double range."""


def _check_factorial(n: int) -> None:
    if n > FACTORIAL_LIMIT:
        raise FactorialOverflowError(f"{n}! exceeds the exact range (limit {FACTORIAL_LIMIT}!)")


def log_factorial(n: int) -> float:
    """log(n!), exact below the guard and via log-gamma above it."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n <= FACTORIAL_LIMIT:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1.0)


def hermite_polynomial(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence.

    Raises
    ------
    OverflowError
        If any value leaves the floating range.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, n):
            h_prev, h = h, 2.0 * x * h - 2.0 * j * h_prev
    if not np.all(np.isfinite(h)):
        raise OverflowError(f"H_{n}(x) overflows the floating range")
    return h if h.ndim else float(h)


def hermite_coefficients(n: int) -> list[int]:
    """Integer monomial coefficients of H_n, lowest degree first."""
    prev, cur = [1], [0, 2]
    if n == 0:
        return prev
    for j in range(1, n):
        nxt = [0] * (j + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= 2 * j * c
        prev, cur = cur, nxt
    return cur


def hermite_normalization(n: int) -> float:
    """N_n = (sqrt(pi) 2^n n!)^(-1/2)."""
    return math.exp(-0.5 * (0.5 * math.log(math.pi) + n * math.log(2.0) + log_factorial(n)))


def hermite_functions(n_max: int, x) -> np.ndarray:
    """All Hermite functions f_0..f_{n_max} at ``x``; shape ``(n_max + 1, *x.shape)``.

    The recurrence runs on the functions themselves with the Gaussian weight
    folded in, and a running power-of-ten scale keeps intermediate values
    finite even where ``exp(-x**2 / 2)`` alone would underflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, *x.shape))
    log_scale = -0.5 * x * x
    p_prev = np.zeros_like(x)
    p = np.full_like(x, math.pi ** -0.25)
    out[0] = p * np.exp(log_scale)
    for j in range(n_max):
        p_next = math.sqrt(2.0 / (j + 1)) * x * p - math.sqrt(j / (j + 1)) * p_prev
        p_prev, p = p, p_next
        big = np.abs(p) > _RESCALE
        if np.any(big):
            p = np.where(big, p / _RESCALE, p)
            p_prev = np.where(big, p_prev / _RESCALE, p_prev)
            log_scale = np.where(big, log_scale + math.log(_RESCALE), log_scale)
        out[j + 1] = p * np.exp(log_scale)
    return out


def hermite_function(n: int, x):
    """The n-th Hermite function f_n(x) = N_n exp(-x^2/2) H_n(x)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    val = hermite_functions(n, x)[n]
    return val if val.ndim else float(val)


def laguerre(n: int, alpha: float, x):
    """Generalized Laguerre polynomial L_n^(alpha)(x) by its three-term recurrence."""
    x = np.asarray(x, dtype=float)
    l_prev = np.ones_like(x)
    if n == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    l = 1.0 + alpha - x
    for j in range(1, n):
        l_prev, l = l, ((2 * j + 1 + alpha - x) * l - (j + alpha) * l_prev) / (j + 1)
    return l if l.ndim else float(l)


def disp_coeff(s: int, k: int, r: int) -> float:
    """a(s, k, r) = (-1)^(s-r) C(s, r) sqrt(k!) / (k-r)!.

    Valid for ``0 <= r <= min(k, s)``.
    """
    if s < 0 or k < 0:
        raise ValueError("s and k must be nonnegative")
    if r < 0 or r > min(k, s):
        raise ValueError(f"r={r} outside [0, min(k, s)] = [0, {min(k, s)}]")
    _check_factorial(k)
    sign = -1.0 if (s - r) % 2 else 1.0
    return sign * math.comb(s, r) * math.sqrt(math.factorial(k)) / math.factorial(k - r)


def disp_coeff_squared_ratio(s: int, k: int, l: int, r: int, rp: int) -> Fraction:
    """a(s,k,r) a(s,l,r') / sqrt(k! l!) as an exact rational."""
    sign = -1 if (2 * s - r - rp) % 2 else 1
    return Fraction(
        sign * math.comb(s, r) * math.comb(s, rp),
        math.factorial(k - r) * math.factorial(l - rp),
    )


def diagonal_radial_coefficients(s: int, k: int) -> list[Fraction]:
    """Exact coefficients c_j with pi * density(z) = exp(-|z|^2) * sum_j c_j |z|^(2j).

    ``c_j = (1/s!) sum_{r + r' = s + k - j} a(s,k,r) a(s,k,r')``; the products
    of two coefficients are rational because sqrt(k!)^2 = k!.
    """
    _check_factorial(max(s, k))
    top = s + k
    coeffs = [Fraction(0)] * (top + 1)
    m = min(k, s)
    for r in range(m + 1):
        for rp in range(m + 1):
            coeffs[top - r - rp] += disp_coeff_squared_ratio(s, k, k, r, rp) * math.factorial(k)
    return [c / math.factorial(s) for c in coeffs]


def _sqrt_factorial_ratio(small: int, large: int) -> float:
    # sqrt(small! / large!) for small <= large
    _check_factorial(large)
    return 1.0 / math.sqrt(math.factorial(large) // math.factorial(small))


def displacement_element(k: int, s: int, z):
    """<k| D_z |s> with D_z = exp(z a* - conj(z) a), vectorized over ``z``."""
    if k < 0 or s < 0:
        raise ValueError("k and s must be nonnegative")
    z = np.asarray(z, dtype=complex)
    x = (z * z.conjugate()).real
    gauss = np.exp(-0.5 * x)
    if k >= s:
        val = _sqrt_factorial_ratio(s, k) * z ** (k - s) * gauss * laguerre(s, k - s, x)
    else:
        val = _sqrt_factorial_ratio(k, s) * (-z.conjugate()) ** (s - k) * gauss * laguerre(k, s - k, x)
    return val if np.ndim(val) else complex(val)


def displacement_column(s: int, d: int, z) -> np.ndarray:
    """Rows k = 0..d-1 of <k|D_z|s>; shape ``(d, *z.shape)``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((d, *z.shape), dtype=complex)
    for k in range(d):
        out[k] = displacement_element(k, s, z)
    return out


def displacement_element_sum(k: int, s: int, z):
    """Same matrix element from the finite sum over a(s, k, r).

    ``<k|D_z|s> = exp(-|z|^2/2) / sqrt(s!) * sum_r a(s,k,r) z^(k-r) conj(z)^(s-r)``.
    """
    z = np.asarray(z, dtype=complex)
    zc = z.conjugate()
    total = np.zeros_like(z)
    for r in range(min(k, s) + 1):
        total = total + disp_coeff(s, k, r) * z ** (k - r) * zc ** (s - r)
    val = np.exp(-0.5 * (z * zc).real) * total / math.sqrt(math.factorial(s))
    return val if np.ndim(val) else complex(val)


@dataclass(frozen=True)
class LadderTriple:
    """Truncated lowering, raising and number operators in dimension ``dim``."""

    a_mat: np.ndarray
    a_dag_mat: np.ndarray
    n_mat: np.ndarray
    dim: int


def ladder_matrices(d: int) -> LadderTriple:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)
    a_dag = a.conj().T.copy()
    n = np.diag(np.arange(d, dtype=float)).astype(complex)
    for arr in (a, a_dag, n):
        arr.setflags(write=False)
    return LadderTriple(a_mat=a, a_dag_mat=a_dag, n_mat=n, dim=d)
