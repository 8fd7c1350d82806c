"""Cartesian and polar marginal measures of the number-state observable.

Coordinates follow z = (q + ip)/sqrt(2): the position marginal lives on
q = sqrt(2) Re z and the momentum marginal on p = sqrt(2) Im z. Momentum
densities use the Fourier eigenvalue (-i)^n of the Hermite functions instead
of a numerical transform, so they need a Fock-basis state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .povm import FockVector, pair_density
from .quadrature import TWO_PI, Region, composite_legendre, gauss_hermite, gauss_legendre, integrate_region, unweighted_laguerre, weighted_sum
from .specfun import hermite_coefficients, hermite_functions, hermite_normalization


class FockBasisRequiredError(ValueError):
    """Operation needs a Fock-basis wavefunction."""


class NonCompactSupportError(ValueError):
    """Operation needs a wavefunction with compact support inside its grid."""


@dataclass(frozen=True)
class WavefunctionRep:
    """A state in L^2(R), either as Fock coefficients or sampled on a grid.

    Grid values are read as cell midpoints: ``values[j]`` is phi on the cell
    of width ``dx`` centred at ``x0 + j*dx``.
    """

    basis: str
    fock: FockVector | None = None
    x0: float = 0.0
    dx: float = 0.0
    values: np.ndarray | None = None

    @classmethod
    def from_fock(cls, coeffs) -> "WavefunctionRep":
        vec = coeffs if isinstance(coeffs, FockVector) else FockVector(coeffs)
        return cls("fock", fock=vec)

    @classmethod
    def from_grid(cls, x0: float, dx: float, values) -> "WavefunctionRep":
        return cls("grid", x0=float(x0), dx=float(dx), values=np.asarray(values, dtype=complex))

    @classmethod
    def bump(cls, a: float, b: float, n: int = 2001) -> "WavefunctionRep":
        """Normalized smooth bump supported on (a, b), sampled with padding cells."""
        dx = (b - a) / (n - 1)
        x = a + dx * np.arange(-2, n + 2)
        t = (2.0 * x - (a + b)) / (b - a)
        inside = np.abs(t) < 1
        vals = np.zeros_like(x)
        vals[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        vals /= math.sqrt(np.sum(vals**2) * dx)
        return cls.from_grid(x[0], dx, vals)

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    def __call__(self, x):
        """phi(x); grid states are piecewise constant on their cells."""
        x = np.asarray(x, dtype=float)
        if self.basis == "fock":
            f = hermite_functions(self.fock.dim - 1, x)
            return np.tensordot(self.fock.coeffs, f, axes=1)
        idx = np.rint((x - self.x0) / self.dx).astype(int)
        ok = (idx >= 0) & (idx < self.values.size)
        out = np.zeros(x.shape, dtype=complex)
        out[ok] = self.values[idx[ok]]
        return out

    def norm(self) -> float:
        if self.basis == "fock":
            return self.fock.norm()
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.dx)

    def support(self) -> tuple[float, float]:
        """Smallest union of cells containing all nonzero values."""
        if self.basis != "grid":
            raise NonCompactSupportError("Fock-basis states are not compactly supported")
        nz = np.flatnonzero(np.abs(self.values) > 0)
        if nz.size == 0:
            raise NonCompactSupportError("wavefunction is zero")
        if nz[0] == 0 or nz[-1] == self.values.size - 1:
            raise NonCompactSupportError("nonzero values reach the grid edge")
        x = self.grid
        return x[nz[0]] - 0.5 * self.dx, x[nz[-1]] + 0.5 * self.dx

    def extent(self) -> float:
        """Half-width beyond which |phi|^2 is negligible."""
        if self.basis == "fock":
            return math.sqrt(2.0 * self.fock.dim + 1.0) + 9.0
        a, b = self.support()
        return max(abs(a), abs(b))


def _fock_phase_rotated(vec: FockVector) -> FockVector:
    return FockVector(vec.coeffs * (-1j) ** np.arange(vec.dim))


def unsharp_position_density(s: int, phi: WavefunctionRep, x):
    """g(x) = int |f_s(x - q)|^2 |phi(q)|^2 dq.

    For Fock states the two Gaussians combine into exp(-2(q - x/2)^2), and a
    Gauss-Hermite rule in u = sqrt(2)(q - x/2) integrates the polynomial
    remainder exactly. Grid states use the midpoint sum over their cells.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if phi.basis == "fock":
        rule = gauss_hermite(s + phi.fock.dim + 8)
        u, w = rule.nodes, rule.weights
        q = x[:, None] / 2.0 + u[None, :] / math.sqrt(2.0)
        fs = hermite_functions(s, x[:, None] - q)[s]
        ph = np.abs(phi(q)) ** 2
        g = np.sum(w * np.exp(u * u) * fs**2 * ph, axis=1) / math.sqrt(2.0)
    else:
        q = phi.grid
        dens = np.abs(phi.values) ** 2
        fs = hermite_functions(s, x[:, None] - q[None, :])[s]
        g = (fs**2 @ dens) * phi.dx
    return float(g[0]) if scalar else g


def unsharp_momentum_density(s: int, phi: WavefunctionRep, p):
    """Momentum marginal density; the state is moved to momentum space by (-i)^n."""
    if phi.basis != "fock":
        raise FockBasisRequiredError("momentum densities need a Fock-basis state")
    return unsharp_position_density(s, WavefunctionRep.from_fock(_fock_phase_rotated(phi.fock)), p)


def _density_window(s, phi):
    return phi.extent() + math.sqrt(2.0 * s + 1.0) + 9.0


def unsharp_position_prob(s: int, phi: WavefunctionRep, intervals, momentum: bool = False) -> float:
    """Probability of a finite union of intervals ``[(lo, hi), ...]``; ends may be infinite."""
    dens = unsharp_momentum_density if momentum else unsharp_position_density
    window = _density_window(s, phi)
    total = 0.0
    for lo, hi in intervals:
        lo, hi = max(lo, -window), min(hi, window)
        if hi <= lo:
            continue
        panels = max(4, int(math.ceil((hi - lo) / 0.5)))
        x, w = composite_legendre(lo, hi, panels, n=16)
        total += math.fsum(w * dens(s, phi, x))
    return min(max(total, 0.0), 1.0)


def position_moment(s: int, phi: WavefunctionRep, j: int, momentum: bool = False) -> float:
    """j-th moment of the unsharp position (or momentum) density."""
    dens = unsharp_momentum_density if momentum else unsharp_position_density
    window = _density_window(s, phi)
    x, w = composite_legendre(-window, window, int(math.ceil(2 * window / 0.5)), n=16)
    return math.fsum(w * x**j * dens(s, phi, x))


def envelope_polynomial(s: int, c_bound: float, length: float, x):
    """p_2s(x) = length * (sum_j |h_j| (|x| + C)^j)^2 with h_j the coefficients of H_s."""
    h = np.abs(np.asarray(hermite_coefficients(s), dtype=float))
    ax = np.abs(np.asarray(x, dtype=float)) + c_bound
    return length * np.polynomial.polynomial.polyval(ax, h) ** 2


def envelope_bound(s: int, phi: WavefunctionRep, x):
    """M N_s^2 exp(-x^2) exp(2C|x|) p_2s(x), an upper bound on the position density.

    M is the maximum of |phi|^2 and C bounds |q| on the support [a, b].
    Uses exp(-q^2) <= 1, exp(2qx) <= exp(2C|x|) and
    H_s(x - q)^2 <= (sum_j |h_j| (|x| + C)^j)^2.
    """
    if phi.basis != "grid":
        raise NonCompactSupportError("envelope bound needs a compactly supported grid state")
    a, b = phi.support()
    c_bound = max(abs(a), abs(b))
    m = float(np.max(np.abs(phi.values) ** 2))
    x = np.asarray(x, dtype=float)
    n2 = hermite_normalization(s) ** 2
    with np.errstate(over="ignore"):
        val = m * n2 * np.exp(-x * x + 2.0 * c_bound * np.abs(x)) * envelope_polynomial(s, c_bound, b - a, x)
    return val if val.ndim else float(val)


# --- polar margins ---------------------------------------------------------


def _check_indices(k, l, d):
    if d is not None and not (0 <= k < d and 0 <= l < d):
        raise ValueError(f"indices ({k}, {l}) outside truncation {d}")


def radial_margin_element(s: int, k: int, l: int, interval, d: int | None = None, n_r=64, n_theta=128) -> complex:
    """<k| A(R x [0, 2pi)) |l> for a radial interval R = (r0, r1)."""
    _check_indices(k, l, d)
    r0, r1 = interval
    region = Region.annulus_sector(r0, r1, 0.0, TWO_PI)
    return integrate_region(lambda z: pair_density(s, k, l, z), region, n_r, n_theta)


def angular_margin_element(s: int, k: int, l: int, interval, d: int | None = None, n_r=64, n_theta=128) -> complex:
    """<k| A([0, inf) x X) |l> for an angular interval X = (t0, t1) in [0, 2pi]."""
    _check_indices(k, l, d)
    t0, t1 = interval
    region = Region.annulus_sector(0.0, math.inf, t0, t1)
    return integrate_region(lambda z: pair_density(s, k, l, z), region, n_r, n_theta)


def polar_moment_element(s: int, n_r: int, m_theta: int, k: int, l: int, radial_nodes=80, angular_nodes=64) -> complex:
    """int_0^inf int_0^2pi r^n theta^m d<k|A(r e^{i theta})|l>, quadrature only.

    The radial rule is generalized Gauss-Laguerre in u = r^2 with exponent
    n/2, so odd radial powers are integrated as accurately as even ones.
    """
    if min(s, n_r, m_theta, k, l) < 0:
        raise ValueError("arguments must be nonnegative")
    u, wu = unweighted_laguerre(radial_nodes, alpha=0.5 * n_r)
    th = gauss_legendre(angular_nodes, 0.0, TWO_PI)
    z = np.sqrt(u)[:, None] * np.exp(1j * th.nodes)[None, :]
    # r^n r dr dtheta = (1/2) u^{n/2} du dtheta
    weights = 0.5 * wu[:, None] * (th.weights * th.nodes**m_theta)[None, :]
    return weighted_sum(weights.ravel(), pair_density(s, k, l, z.ravel()))
