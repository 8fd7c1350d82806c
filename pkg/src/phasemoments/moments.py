"""Multidimensional moment sequences and exponential-boundedness diagnostics.

Measures are positive and finite. The determinacy verdict is a sufficient
condition only: every axis marginal must be exponentially bounded (or live on
a compact set). A negative verdict means "not established".
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from numbers import Integral, Rational

import numpy as np

from .povm import exp_bound_closed_form
from .quadrature import gaussian_exp_moment
from .specfun import diagonal_radial_coefficients

DEFAULT_MAX_ORDER = 16
DEFAULT_A_MIN = 2.0**-20


class MomentOrderError(ValueError):
    """Requested moment order exceeds the configured limit."""


class UndecidableTailError(ValueError):
    """A grid density has no declared tail envelope, so divergence cannot be decided."""


# --- axis sets -------------------------------------------------------------


@dataclass(frozen=True)
class AxisSet:
    """One factor K_i of a product support: real line, half-line or compact interval."""

    kind: str = "real"  # real | lower | upper | compact
    lo: float = -math.inf
    hi: float = math.inf

    @classmethod
    def parse(cls, text: str) -> "AxisSet":
        t = text.replace(" ", "")
        if t in ("R", "real", "(-inf,inf)"):
            return cls()
        lo_s, hi_s = t[1:-1].split(",")
        lo, hi = float(lo_s), float(hi_s)
        if math.isinf(hi) and not math.isinf(lo):
            return cls("lower", lo, math.inf)
        if math.isinf(lo) and not math.isinf(hi):
            return cls("upper", -math.inf, hi)
        if not (math.isinf(lo) or math.isinf(hi)):
            return cls("compact", lo, hi)
        return cls()

    def __str__(self):
        if self.kind == "real":
            return "R"
        if self.kind == "lower":
            return f"[{self.lo!r},inf)"
        if self.kind == "upper":
            return f"(-inf,{self.hi!r}]"
        return f"[{self.lo!r},{self.hi!r}]"

    def reduction(self) -> str:
        """How this axis maps onto [0, inf) (or is handled directly)."""
        if self.kind == "lower":
            return f"translate x -> x - ({self.lo!r}) onto [0,inf)"
        if self.kind == "upper":
            return f"reflect x -> -x onto [{-self.hi!r},inf), then translate onto [0,inf)"
        if self.kind == "compact":
            return "compact support"
        return "whole line"

    def contains(self, x) -> bool:
        return bool(np.all((np.asarray(x) >= self.lo) & (np.asarray(x) <= self.hi)))


# --- measures --------------------------------------------------------------


@dataclass(frozen=True)
class MeasureRep:
    """A finite positive measure on R^dim.

    ``kind`` is ``atomic`` (payload: points, weights), ``grid_density``
    (payload: x0, dx, values, tails) or ``closed_form`` (payload: family and
    its parameters). ``support`` lists one :class:`AxisSet` per axis.
    """

    dim: int
    kind: str
    payload: dict
    support: tuple = ()

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if not self.support:
            object.__setattr__(self, "support", tuple(AxisSet() for _ in range(self.dim)))
        if len(self.support) != self.dim:
            raise ValueError("support needs one axis set per dimension")

    # constructors

    @classmethod
    def atomic(cls, points, weights, support=()):
        pts = [tuple(p) if isinstance(p, (tuple, list)) else (p,) for p in points]
        if not pts:
            raise ValueError("atomic measure needs at least one atom")
        dim = len(pts[0])
        if any(w <= 0 for w in weights):
            raise ValueError("atom weights must be positive")
        support = tuple(AxisSet.parse(a) if isinstance(a, str) else a for a in support)
        rep = cls(dim, "atomic", {"points": pts, "weights": list(weights)}, support)
        for i, ax in enumerate(rep.support):
            if not ax.contains([p[i] for p in pts]):
                raise ValueError(f"atom outside declared support {ax} on axis {i}")
        return rep

    @classmethod
    def grid(cls, x0, dx, values, tails=None, support=()):
        """Density sampled on a uniform grid (row-major for 2D).

        ``tails`` gives per axis ``None``, ``{"kind": "gaussian", "beta": b}``
        or ``{"kind": "power", "p": p}``.
        """
        values = np.asarray(values, dtype=float)
        dim = values.ndim
        x0 = tuple(np.atleast_1d(x0).astype(float))
        dx = tuple(np.atleast_1d(dx).astype(float))
        if np.any(values < 0):
            raise ValueError("grid density values must be nonnegative")
        tails = tuple(tails) if tails is not None else (None,) * dim
        support = tuple(AxisSet.parse(a) if isinstance(a, str) else a for a in support)
        return cls(dim, "grid_density", {"x0": x0, "dx": dx, "values": values, "tails": tails}, support)

    @classmethod
    def number_state(cls, s: int, k: int):
        """Outcome distribution <k|A(.)|k> of the observable generated by |s>, on R^2."""
        return cls(2, "closed_form", {"family": "number_state", "s": int(s), "k": int(k)})

    # helpers

    def grid_axes(self):
        p = self.payload
        return [p["x0"][i] + p["dx"][i] * np.arange(p["values"].shape[i]) for i in range(self.dim)]

    def radial_coefficients(self):
        return diagonal_radial_coefficients(self.payload["s"], self.payload["k"])

    def density(self, z):
        """Closed-form density at complex points z = x + iy."""
        coeffs = [float(c) for c in self.radial_coefficients()]
        x = np.abs(np.asarray(z, dtype=complex)) ** 2
        return np.exp(-x) * np.polynomial.polynomial.polyval(x, coeffs) / math.pi

    def total_mass(self):
        return moment(self, (0,) * self.dim)

    # serialization

    def to_json(self) -> dict:
        p = dict(self.payload)
        if self.kind == "grid_density":
            p = {"x0": list(p["x0"]), "dx": list(p["dx"]), "values": p["values"].tolist(), "tails": list(p["tails"])}
        elif self.kind == "atomic":
            p = {"points": [list(q) for q in p["points"]], "weights": list(p["weights"])}
        return {"dim": self.dim, "kind": self.kind, "payload": p, "support": [str(a) for a in self.support]}

    @classmethod
    def from_json(cls, data: dict) -> "MeasureRep":
        kind, p = data["kind"], data["payload"]
        support = tuple(AxisSet.parse(a) for a in data.get("support", ()))
        if kind == "atomic":
            rep = cls.atomic(p["points"], p["weights"], support)
        elif kind == "grid_density":
            rep = cls.grid(p["x0"], p["dx"], p["values"], p.get("tails"), support)
        elif kind == "closed_form":
            if p.get("family") != "number_state":
                raise ValueError(f"unknown closed-form family {p.get('family')!r}")
            rep = cls(2, "closed_form", {"family": "number_state", "s": int(p["s"]), "k": int(p["k"])}, support)
        else:
            raise ValueError(f"unknown measure kind {kind!r}")
        if rep.dim != data.get("dim", rep.dim):
            raise ValueError("declared dim does not match payload")
        return rep

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _is_exact(x) -> bool:
    return isinstance(x, (Integral, Rational)) or (isinstance(x, float) and x.is_integer())


def _exact(x):
    return int(x) if isinstance(x, float) else x


def _angular_monomial(p: int, q: int) -> float:
    # int_0^{2pi} cos^p sin^q dtheta
    if p % 2 or q % 2:
        return 0.0
    return 2.0 * math.exp(math.lgamma((p + 1) / 2) + math.lgamma((q + 1) / 2) - math.lgamma((p + q + 2) / 2))


def moment(mu: MeasureRep, k, max_order: int = DEFAULT_MAX_ORDER):
    """c_k(mu) = int x_1^k_1 ... x_n^k_n dmu.

    Atomic measures with integer or rational atoms and weights give exact
    integer/Fraction results.
    """
    k = tuple(int(v) for v in np.atleast_1d(k))
    if len(k) != mu.dim:
        raise ValueError(f"multi-index {k} has wrong length for dim {mu.dim}")
    if any(v < 0 for v in k):
        raise ValueError("multi-index entries must be nonnegative")
    if sum(k) > max_order:
        raise MomentOrderError(f"order {sum(k)} exceeds max_order {max_order}")
    if mu.kind == "atomic":
        pts, wts = mu.payload["points"], mu.payload["weights"]
        if all(_is_exact(w) for w in wts) and all(_is_exact(x) for p in pts for x in p):
            return sum(_exact(w) * math.prod(_exact(x) ** e for x, e in zip(p, k)) for p, w in zip(pts, wts))
        return math.fsum(w * math.prod(float(x) ** e for x, e in zip(p, k)) for p, w in zip(pts, wts))
    if mu.kind == "grid_density":
        axes = mu.grid_axes()
        vals = mu.payload["values"]
        cell = math.prod(mu.payload["dx"])
        mono = np.ones_like(vals)
        for i, ax in enumerate(axes):
            shape = [1] * mu.dim
            shape[i] = ax.size
            mono = mono * (ax**k[i]).reshape(shape)
        return math.fsum((mono * vals).ravel()) * cell
    # closed form on R^2 in (x, y): radial gamma integrals times angular integrals
    p, q = k
    ang = _angular_monomial(p, q)
    if ang == 0.0:
        return 0.0
    rad = math.fsum(
        float(c) * 0.5 * math.gamma((p + q + 2 + 2 * j) / 2) for j, c in enumerate(mu.radial_coefficients())
    )
    return rad * ang / math.pi


def _multi_indices(dim: int, max_order: int):
    for k in itertools.product(range(max_order + 1), repeat=dim):
        if sum(k) <= max_order:
            yield k


@dataclass(frozen=True)
class MomentSequence:
    """Moments c_k keyed by multi-index, for all |k| <= max_order."""

    dim: int
    entries: dict
    max_order: int

    @classmethod
    def from_measure(cls, mu: MeasureRep, max_order: int = DEFAULT_MAX_ORDER) -> "MomentSequence":
        return cls(mu.dim, {k: moment(mu, k, max_order) for k in _multi_indices(mu.dim, max_order)}, max_order)

    @classmethod
    def from_list(cls, values) -> "MomentSequence":
        """One-dimensional sequence from c_0, c_1, ..."""
        return cls(1, {(i,): v for i, v in enumerate(values)}, len(values) - 1)

    def __getitem__(self, k):
        return self.entries[tuple(np.atleast_1d(k).tolist())]

    def as_list(self) -> list:
        if self.dim != 1:
            raise ValueError("as_list only applies to one-dimensional sequences")
        return [self.entries[(i,)] for i in range(self.max_order + 1)]


def translate_moments(c: MomentSequence, a, direction: str = "forward") -> MomentSequence:
    """Moments under the shift x -> x + a of a one-dimensional measure.

    ``forward`` maps the moments of the measure on [0, inf) to those of its
    translate by ``a``; ``inverse`` undoes it. Exact for integer/rational input.
    """
    if c.dim != 1:
        raise ValueError("translation acts on one-dimensional sequences")
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    vals = c.as_list()
    sign = 1 if direction == "forward" else -1
    out = []
    for k in range(len(vals)):
        out.append(sum(math.comb(k, i) * (sign * a) ** (k - i) * vals[i] for i in range(k + 1)))
    return MomentSequence.from_list(out)


def reflect_moments(c: MomentSequence) -> MomentSequence:
    """Moments of the image under x -> -x (one dimension)."""
    return MomentSequence.from_list([(-1) ** k * v for k, v in enumerate(c.as_list())])


def marginal_moments(c: MomentSequence, axis: int) -> MomentSequence:
    """Moments of the projection onto ``axis``; no new integration needed."""
    if not 0 <= axis < c.dim:
        raise ValueError(f"axis {axis} out of range for dim {c.dim}")
    vals = []
    for j in range(c.max_order + 1):
        idx = [0] * c.dim
        idx[axis] = j
        vals.append(c.entries[tuple(idx)])
    return MomentSequence.from_list(vals)


# --- complex <-> real bridge ----------------------------------------------


def complex_moments(c: MomentSequence) -> dict:
    """int z^m conj(z)^n from real moments int x^p y^q, with z = x + iy."""
    if c.dim != 2:
        raise ValueError("needs a two-dimensional sequence")
    out = {}
    for m, n in _multi_indices(2, c.max_order):
        total = 0j
        for i in range(m + 1):
            for j in range(n + 1):
                coef = math.comb(m, i) * math.comb(n, j) * (1j) ** (m - i) * (-1j) ** (n - j)
                total += coef * c.entries[(i + j, m + n - i - j)]
        out[(m, n)] = total
    return out


def real_moments_from_complex(cm: dict, max_order: int) -> MomentSequence:
    """Inverse of :func:`complex_moments` using x = (z + z*)/2, y = (z - z*)/2i."""
    entries = {}
    for p, q in _multi_indices(2, max_order):
        total = 0j
        for a in range(p + 1):
            for b in range(q + 1):
                coef = math.comb(p, a) * math.comb(q, b) * (-1) ** (q - b)
                total += coef * cm[(a + b, p - a + q - b)]
        entries[(p, q)] = (total / (2**p * (2j) ** q)).real
    return MomentSequence(2, entries, max_order)


# --- exponential bounds and determinacy -----------------------------------


@dataclass(frozen=True)
class ExpBound:
    finite: bool
    value: float | None = None


def _tail_verdict(tail) -> bool:
    if tail is None:
        raise UndecidableTailError("grid density without a declared tail envelope")
    kind = tail.get("kind")
    if kind == "gaussian":
        return True
    if kind == "power":
        return False
    raise ValueError(f"unknown tail kind {kind!r}")


def _closed_form_axis_bound(mu: MeasureRep, a: float) -> float:
    # 1D marginal density is (1/pi) e^{-x^2} sum_j c_j sum_i C(j,i) Gamma(i+1/2) x^{2(j-i)}
    poly = {}
    for j, c in enumerate(mu.radial_coefficients()):
        for i in range(j + 1):
            deg = 2 * (j - i)
            poly[deg] = poly.get(deg, 0.0) + float(c) * math.comb(j, i) * math.gamma(i + 0.5)
    return 2.0 * math.fsum(v * gaussian_exp_moment(deg, a) for deg, v in poly.items()) / math.pi


def exp_bound_integral(mu: MeasureRep, a: float, axis: int | None = None) -> ExpBound:
    """int exp(a ||x||) dmu, or int exp(a |x_axis|) dmu when ``axis`` is given.

    Grid densities are summed on the grid and classified by their declared
    tails: Gaussian tails are finite, power tails divergent.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if mu.kind == "atomic":
        pts, wts = mu.payload["points"], mu.payload["weights"]
        norms = [math.hypot(*map(float, p)) if axis is None else abs(float(p[axis])) for p in pts]
        return ExpBound(True, math.fsum(w * math.exp(a * r) for r, w in zip(norms, wts)))
    if mu.kind == "grid_density":
        tails = mu.payload["tails"]
        used = range(mu.dim) if axis is None else [axis]
        if not all(_tail_verdict(tails[i]) for i in used):
            return ExpBound(False)
        axes = mu.grid_axes()
        mesh = np.meshgrid(*axes, indexing="ij")
        r = np.sqrt(sum(m * m for m in mesh)) if axis is None else np.abs(mesh[axis])
        val = math.fsum((np.exp(a * r) * mu.payload["values"]).ravel()) * math.prod(mu.payload["dx"])
        return ExpBound(True, val)
    if axis is None:
        return ExpBound(True, exp_bound_closed_form(mu.payload["s"], mu.payload["k"], a))
    return ExpBound(True, _closed_form_axis_bound(mu, a))


@dataclass(frozen=True)
class AxisVerdict:
    axis: int
    support: str
    reduction: str
    exp_bounded: bool
    witness: float | None


@dataclass(frozen=True)
class DeterminacyReport:
    per_axis: list = field(default_factory=list)
    determinate_verdict: bool = False

    def to_json(self) -> dict:
        return {
            "per_axis": [vars(v) for v in self.per_axis],
            "determinate_verdict": self.determinate_verdict,
        }


def determinacy_report(mu: MeasureRep, a_start: float = 1.0, a_min: float = DEFAULT_A_MIN) -> DeterminacyReport:
    """Check the marginal exponential-boundedness criterion axis by axis.

    For each axis the witness search tries a = a_start, a_start/2, ... down to
    ``a_min``. A True verdict proves determinacy; False means not established.
    """
    verdicts = []
    for i, ax in enumerate(mu.support):
        if ax.kind == "compact":
            verdicts.append(AxisVerdict(i, str(ax), ax.reduction(), True, None))
            continue
        a, witness = a_start, None
        while a >= a_min:
            if exp_bound_integral(mu, a, axis=i).finite:
                witness = a
                break
            a /= 2.0
        verdicts.append(AxisVerdict(i, str(ax), ax.reduction(), witness is not None, witness))
    return DeterminacyReport(verdicts, all(v.exp_bounded for v in verdicts))


def moment_match(mu: MeasureRep, nu: MeasureRep, max_order: int, tol: float) -> bool:
    """True iff all moments up to ``max_order`` agree within tol * max(1, |c_k(mu)|)."""
    if mu.dim != nu.dim:
        raise ValueError("measures must have the same dimension")
    for k in _multi_indices(mu.dim, max_order):
        cm, cn = moment(mu, k, max_order), moment(nu, k, max_order)
        if abs(cm - cn) > tol * max(1.0, abs(cm)):
            return False
    return True
