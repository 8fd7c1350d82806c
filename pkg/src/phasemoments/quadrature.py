"""Gauss rules and plane/region integration.

Nodes come from the Golub-Welsch eigenproblem, are polished with Newton steps
on the orthonormal recurrence, and the weights are recomputed from the
Christoffel sum so that very small weights keep full relative accuracy.
Weights are carried in log form until the caller needs them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

TWO_PI = 2.0 * math.pi
_RESCALE = 1e100


class QuadratureError(ArithmeticError):
    """A node evaluation was not finite."""


def _jacobi_hermite(n):
    return np.zeros(n), np.sqrt(np.arange(1, n + 1) / 2.0), math.log(math.sqrt(math.pi))


def _jacobi_laguerre(n, alpha):
    j = np.arange(n + 1, dtype=float)
    return 2.0 * j[:n] + alpha + 1.0, np.sqrt(j[1:] * (j[1:] + alpha)), math.lgamma(alpha + 1.0)


def _jacobi_legendre(n):
    j = np.arange(1, n + 1, dtype=float)
    return np.zeros(n), j / np.sqrt(4.0 * j * j - 1.0), math.log(2.0)


def _orthonormal_eval(x, diag, off, log_mu0, n):
    """Evaluate p_n, p_n' and log(sum_{j<n} p_j^2) at x (orthonormal family)."""
    log_scale = np.full_like(x, -0.5 * log_mu0)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    dp_prev, dp = np.zeros_like(x), np.zeros_like(x)
    acc = np.zeros_like(x)
    for j in range(n):
        acc = acc + p * p
        b_prev = off[j - 1] if j > 0 else 0.0
        p_next = ((x - diag[j]) * p - b_prev * p_prev) / off[j]
        dp_next = (p + (x - diag[j]) * dp - b_prev * dp_prev) / off[j]
        p_prev, p, dp_prev, dp = p, p_next, dp, dp_next
        big = np.abs(p) > _RESCALE
        if np.any(big):
            f = np.where(big, _RESCALE, 1.0)
            p, p_prev, dp, dp_prev = p / f, p_prev / f, dp / f, dp_prev / f
            acc = acc / (f * f)
            log_scale = log_scale + np.log(f)
    return p, dp, np.log(acc) + 2.0 * log_scale


def golub_welsch(diag, off, log_mu0, polish=2):
    """Nodes and log-weights of the n-point Gauss rule of a Jacobi matrix.

    ``off`` must have length n (the n-th entry is only used for polishing).
    """
    n = len(diag)
    x = eigh_tridiagonal(diag, off[: n - 1], eigvals_only=True)
    for _ in range(polish):
        p, dp, _ = _orthonormal_eval(x, diag, off, log_mu0, n)
        x = x - p / dp
    _, _, log_sum = _orthonormal_eval(x, diag, off, log_mu0, n)
    return x, -log_sum


@dataclass(frozen=True)
class QuadratureScheme:
    """A fixed rule: ``integral ~= sum(weights * f(nodes))``.

    For the 1D Gauss kinds the weight function is implicit (``exp(-x^2)`` for
    Hermite, ``x^alpha exp(-x)`` for Laguerre). For the plane kinds the nodes
    are complex points and the weights already include the area element, so
    the sum approximates ``integral f dlambda`` directly.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(self.weights > 0):
            raise ValueError(f"{self.kind} rule has non-positive weights")

    def __len__(self):
        return len(self.nodes)


def gauss_hermite(n: int) -> QuadratureScheme:
    x, lw = golub_welsch(*_jacobi_hermite(n))
    return QuadratureScheme("gauss_hermite", x, np.exp(lw), {"n": n})


def gauss_laguerre(n: int, alpha: float = 0.0) -> QuadratureScheme:
    x, lw = golub_welsch(*_jacobi_laguerre(n, alpha))
    return QuadratureScheme("gauss_laguerre", x, np.exp(lw), {"n": n, "alpha": alpha, "log_weights": lw})


def gauss_legendre(n: int, lo: float = -1.0, hi: float = 1.0) -> QuadratureScheme:
    x, lw = golub_welsch(*_jacobi_legendre(n))
    half = 0.5 * (hi - lo)
    return QuadratureScheme("gauss_legendre", lo + half * (x + 1.0), half * np.exp(lw), {"n": n, "lo": lo, "hi": hi})


def composite_legendre(lo: float, hi: float, panels: int, n: int = 16):
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on [lo, hi]."""
    base = gauss_legendre(n)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base.nodes[None, :]).ravel()
    weights = (half[:, None] * base.weights[None, :]).ravel()
    return nodes, weights


def unweighted_laguerre(n: int, alpha: float = 0.0):
    """Nodes u_i and weights W_i with sum W_i g(u_i) ~= int_0^inf u^alpha g(u) du.

    ``W_i = w_i exp(u_i)`` is formed from log-weights so it stays finite for
    large n.
    """
    x, lw = golub_welsch(*_jacobi_laguerre(n, alpha))
    return x, np.exp(lw + x)


def radial_angular(n_r: int, n_theta: int) -> QuadratureScheme:
    """Plane rule: Gauss-Laguerre in u = r^2 times an equispaced angle rule."""
    u, w_u = unweighted_laguerre(n_r)
    theta = TWO_PI * np.arange(n_theta) / n_theta
    r = np.sqrt(u)
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    # dlambda = r dr dtheta = (1/2) du dtheta
    weights = (0.5 * w_u[:, None] * np.full(n_theta, TWO_PI / n_theta)[None, :]).ravel()
    return QuadratureScheme("radial_angular", nodes, weights, {"n_r": n_r, "n_theta": n_theta})


def grid_2d(spacing: float, extent: float) -> QuadratureScheme:
    """Uniform square grid on [-extent, extent]^2 with trapezoid weights."""
    m = int(round(extent / spacing))
    ax = spacing * np.arange(-m, m + 1)
    w1 = np.full(ax.size, spacing)
    w1[0] = w1[-1] = 0.5 * spacing
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    nodes = (xx + 1j * yy).ravel()
    weights = np.outer(w1, w1).ravel()
    return QuadratureScheme("grid_2d", nodes, weights, {"spacing": spacing, "extent": extent})


def _evaluate(f, nodes):
    vals = np.asarray(f(nodes), dtype=complex)
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise QuadratureError(f"integrand is not finite at node {i} (z={nodes[i]!r})")
    return vals


def weighted_sum(weights, vals) -> complex:
    """Fixed-order compensated sum of ``weights * vals``."""
    prod = weights * vals
    return complex(math.fsum(prod.real), math.fsum(prod.imag))


def integrate_plane(f, scheme: QuadratureScheme | None = None) -> complex:
    """Integral of ``f`` over the plane with respect to Lebesgue measure.

    ``f`` must accept an array of complex points.
    """
    scheme = scheme or radial_angular(64, 128)
    if scheme.kind not in ("radial_angular", "grid_2d"):
        raise ValueError(f"{scheme.kind} is not a plane rule")
    return weighted_sum(scheme.weights, _evaluate(f, scheme.nodes))


@dataclass(frozen=True)
class Region:
    """A computable subset of the plane.

    ``shape`` is one of ``full_plane``, ``rectangle``, ``disk``,
    ``annulus_sector``, ``half_plane``; ``params`` holds the shape's numbers.
    Annulus sectors are centered at the origin with angles in [0, 2pi].
    A half plane is ``{z : Re(z exp(-i*normal_angle)) >= offset}``.
    """

    shape: str
    params: tuple = ()

    def __post_init__(self):
        p = self.params
        if self.shape == "full_plane":
            return
        if self.shape == "rectangle":
            x0, x1, y0, y1 = p
            if x1 < x0 or y1 < y0:
                raise ValueError("rectangle extents must be ordered")
        elif self.shape == "disk":
            _, radius = p
            if radius < 0:
                raise ValueError("disk radius must be nonnegative")
        elif self.shape == "annulus_sector":
            r0, r1, t0, t1 = p
            if not 0 <= r0 <= r1:
                raise ValueError("annulus needs 0 <= r0 <= r1")
            if not 0 <= t0 <= t1 <= TWO_PI + 1e-12:
                raise ValueError("angles must satisfy 0 <= theta0 <= theta1 <= 2pi")
        elif self.shape == "half_plane":
            if len(p) != 2:
                raise ValueError("half_plane takes (normal_angle, offset)")
        else:
            raise ValueError(f"unknown region shape {self.shape!r}")

    @classmethod
    def full_plane(cls):
        return cls("full_plane")

    @classmethod
    def rectangle(cls, x0, x1, y0, y1):
        return cls("rectangle", (float(x0), float(x1), float(y0), float(y1)))

    @classmethod
    def disk(cls, center, radius):
        return cls("disk", (complex(center), float(radius)))

    @classmethod
    def annulus_sector(cls, r0, r1, theta0=0.0, theta1=TWO_PI):
        return cls("annulus_sector", (float(r0), float(r1), float(theta0), float(theta1)))

    @classmethod
    def half_plane(cls, normal_angle, offset):
        return cls("half_plane", (float(normal_angle), float(offset)))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.shape == "full_plane":
            return np.ones(z.shape, dtype=bool)
        if self.shape == "rectangle":
            return (z.real >= p[0]) & (z.real <= p[1]) & (z.imag >= p[2]) & (z.imag <= p[3])
        if self.shape == "disk":
            return np.abs(z - p[0]) <= p[1]
        if self.shape == "annulus_sector":
            r, t = np.abs(z), np.mod(np.angle(z), TWO_PI)
            return (r >= p[0]) & (r <= p[1]) & (t >= p[2]) & (t < p[3])
        return (z * np.exp(-1j * p[0])).real >= p[1]

    def to_string(self) -> str:
        if self.shape == "full_plane":
            return "full"
        if self.shape == "disk":
            c, r = self.params
            return f"disk:{c.real!r},{c.imag!r},{r!r}"
        tag = {"rectangle": "rect", "annulus_sector": "sector", "half_plane": "halfplane"}[self.shape]
        return tag + ":" + ",".join(repr(v) for v in self.params)

    @classmethod
    def parse(cls, text: str) -> "Region":
        """Parse ``full``, ``disk:cx,cy,R``, ``rect:x0,x1,y0,y1``,
        ``sector:r0,r1,t0,t1`` (r1 may be ``inf``) or ``halfplane:angle,offset``."""
        tag, _, rest = text.partition(":")
        vals = [float(v) for v in rest.split(",")] if rest else []
        try:
            if tag == "full":
                return cls.full_plane()
            if tag == "disk":
                return cls.disk(complex(vals[0], vals[1]), vals[2])
            if tag == "rect":
                return cls.rectangle(*vals)
            if tag == "sector":
                return cls.annulus_sector(*vals)
            if tag == "halfplane":
                return cls.half_plane(*vals)
        except (TypeError, IndexError) as exc:
            raise ValueError(f"bad region {text!r}") from exc
        raise ValueError(f"unknown region {text!r}")


def _angle_rule(t0, t1, n_theta):
    if abs((t1 - t0) - TWO_PI) < 1e-12:
        return t0 + TWO_PI * np.arange(n_theta) / n_theta, np.full(n_theta, TWO_PI / n_theta)
    rule = gauss_legendre(n_theta, t0, t1)
    return rule.nodes, rule.weights


def _radial_rule(r0, r1, n_r, full_turn=True, extent=12.0, panels=8):
    # returns r nodes and weights for int g(r) r dr
    if math.isinf(r1) and full_turn:
        t, w = unweighted_laguerre(n_r)
        return np.sqrt(r0 * r0 + t), 0.5 * w
    if math.isinf(r1):
        # odd powers of r survive a partial turn, so u = r^2 would leave sqrt(u) terms
        r, w = composite_legendre(r0, r0 + extent, max(panels, int(math.ceil(extent / 0.75))), n=16)
        return r, w * r
    rule = gauss_legendre(n_r, r0, r1)
    return rule.nodes, rule.weights * rule.nodes


def region_rule(region: Region, n_r: int = 64, n_theta: int = 128, extent: float = 12.0, panels: int = 8):
    """Nodes and area weights for integrating over ``region``.

    Half planes, and sectors of less than a full turn that reach r = inf, are
    cut at ``extent`` (beyond ``r0`` for sectors); the integrand is assumed to
    be negligible there. Full-turn sectors use Laguerre nodes in u = r^2.
    """
    shape, p = region.shape, region.params
    if shape == "full_plane":
        s = radial_angular(n_r, n_theta)
        return s.nodes, s.weights
    if shape == "rectangle":
        x0, x1, y0, y1 = p
        if x0 == x1 or y0 == y1:
            return np.zeros(0, dtype=complex), np.zeros(0)
        xs, wx = composite_legendre(x0, x1, panels)
        ys, wy = composite_legendre(y0, y1, panels)
        return (xs[:, None] + 1j * ys[None, :]).ravel(), np.outer(wx, wy).ravel()
    if shape == "disk":
        c, radius = p
        r, wr = _radial_rule(0.0, radius, n_r)
        t, wt = _angle_rule(0.0, TWO_PI, n_theta)
        return (c + r[:, None] * np.exp(1j * t)[None, :]).ravel(), np.outer(wr, wt).ravel()
    if shape == "annulus_sector":
        r0, r1, t0, t1 = p
        if r0 == r1 or t0 == t1:
            return np.zeros(0, dtype=complex), np.zeros(0)
        full_turn = abs((t1 - t0) - TWO_PI) < 1e-12
        r, wr = _radial_rule(r0, r1, n_r, full_turn, extent, panels)
        t, wt = _angle_rule(t0, t1, n_theta)
        return (r[:, None] * np.exp(1j * t)[None, :]).ravel(), np.outer(wr, wt).ravel()
    angle, offset = p
    hi = max(offset, 0.0) + extent
    if hi <= offset:
        return np.zeros(0, dtype=complex), np.zeros(0)
    ts, wt = composite_legendre(offset, hi, panels)
    ys, wy = composite_legendre(-extent, extent, 2 * panels)
    local = ts[:, None] + 1j * ys[None, :]
    return (np.exp(1j * angle) * local).ravel(), np.outer(wt, wy).ravel()


def integrate_region(f, region: Region, n_r: int = 64, n_theta: int = 128, **hints) -> complex:
    """Integral of ``f`` over ``region`` (Lebesgue measure)."""
    nodes, weights = region_rule(region, n_r, n_theta, **hints)
    if nodes.size == 0:
        return 0j
    return weighted_sum(weights, _evaluate(f, nodes))


def gaussian_exp_moment(n: int, a: float) -> float:
    """int_0^inf x^n exp(a x - x^2) dx via the completed square.

    Evaluated as ``exp(a^2/4) * int_0^inf exp(-(x - a/2)^2) x^n dx`` with
    Gauss-Legendre panels on a window around the peak of the shifted
    Gaussian; the tail beyond the window is below 1e-80 of the peak.
    """
    c = 0.5 * a
    peak = 0.5 * c + math.sqrt(0.25 * c * c + 0.5 * n)
    hi = peak + 14.0
    panels = max(8, int(math.ceil(hi / 1.0)))
    x, w = composite_legendre(0.0, hi, panels, n=20)
    with np.errstate(divide="ignore"):
        log_f = -((x - c) ** 2) + n * np.log(x) + c * c
    return math.fsum(w * np.exp(log_f))
