"""Magnetically twisted Kasteleyn matrix of the fundamental domain.

Rows are the white vertices of the 2n x 2n domain (white at the weights'
time parity), columns the black ones, both in lexicographic order.  An edge
contributes ``wt * z^a`` when horizontal and ``i * wt * w^b`` when vertical,
where ``a`` (``b``) is the horizontal (vertical) index of the translate
holding the black endpoint minus that of the white endpoint; only edges
crossing the domain seam get a non-zero exponent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .laurent import LaurentPoly2, newton_polygon
from .weights import PeriodicWeights, spider_step


class InterpolationError(ArithmeticError):
    """The evaluation grid could not reproduce det K to the required accuracy."""


class InvariantViolation(ArithmeticError):
    """A property guaranteed by the theory failed numerically (signals a bug)."""


@dataclass(frozen=True, eq=False)
class KasteleynEvaluator:
    weights: PeriodicWeights
    whites: list = field(init=False)
    blacks: list = field(init=False)
    parts: dict = field(init=False)  # exponent key -> coefficient matrix

    def __post_init__(self):
        w = self.weights
        m = w.period
        p = w.time_parity
        verts = [(x, y) for x in range(m) for y in range(m)]
        whites = [v for v in verts if (v[0] + v[1] - p) % 2 == 0]
        blacks = [v for v in verts if (v[0] + v[1] - p) % 2 == 1]
        wi = {v: r for r, v in enumerate(whites)}
        bi = {v: c for c, v in enumerate(blacks)}
        size = len(whites)
        parts = {key: np.zeros((size, size), dtype=complex) for key in ("1", "z", "1/z", "w", "1/w")}
        for x in range(m):
            for y in range(m):
                # horizontal edge (x, y)-(x+1, y)
                u, v = (x, y), ((x + 1) % m, y)
                wt = w.hor[x, y]
                crosses = x + 1 == m
                if u in wi:
                    white, black, a = u, v, (1 if crosses else 0)
                else:
                    white, black, a = v, u, (-1 if crosses else 0)
                key = {0: "1", 1: "z", -1: "1/z"}[a]
                parts[key][wi[white], bi[black]] += wt
                # vertical edge (x, y)-(x, y+1)
                u, v = (x, y), (x, (y + 1) % m)
                wt = w.ver[x, y]
                crosses = y + 1 == m
                if u in wi:
                    white, black, b = u, v, (1 if crosses else 0)
                else:
                    white, black, b = v, u, (-1 if crosses else 0)
                key = {0: "1", 1: "w", -1: "1/w"}[b]
                parts[key][wi[white], bi[black]] += 1j * wt
        object.__setattr__(self, "whites", whites)
        object.__setattr__(self, "blacks", blacks)
        object.__setattr__(self, "parts", parts)

    @property
    def size(self):
        return len(self.whites)

    def white_index(self, v):
        return self.whites.index((v[0] % self.weights.period, v[1] % self.weights.period))

    def black_index(self, v):
        return self.blacks.index((v[0] % self.weights.period, v[1] % self.weights.period))

    def __call__(self, z, w):
        """K(z, w) for (broadcastable) arrays of z and w; shape (..., size, size)."""
        z = np.asarray(z, dtype=complex)[..., None, None]
        w = np.asarray(w, dtype=complex)[..., None, None]
        p = self.parts
        return p["1"] + z * p["z"] + p["1/z"] / z + w * p["w"] + p["1/w"] / w

    def det(self, z, w):
        return np.linalg.det(self(z, w))


def _probe_points(count=50):
    """Deterministic off-grid points on and near the unit torus."""
    t = np.arange(count)
    th = 2 * np.pi * ((t * 0.6180339887498949) % 1.0) + 0.1234
    ph = 2 * np.pi * ((t * 0.7548776662466927) % 1.0) + 0.4321
    r1 = np.exp(0.3 * np.sin(1.7 * t))
    r2 = np.exp(0.3 * np.cos(2.3 * t))
    return r1 * np.exp(1j * th), r2 * np.exp(1j * ph)


def characteristic_polynomial(w, degree=None, refit_tol=1e-9):
    """P(z, w) = det K(z, w) recovered by evaluation on roots of unity and an FFT.

    ``degree`` bounds the exponents in each variable (default n).  The fit is
    checked at 50 off-grid points; a relative residual above ``refit_tol``
    raises :class:`InterpolationError`.
    """
    ev = KasteleynEvaluator(w)
    d = w.n if degree is None else int(degree)
    G = 2 * d + 1
    roots = np.exp(2j * np.pi * np.arange(G) / G)
    Z, W = np.meshgrid(roots, roots, indexing="ij")
    vals = np.linalg.det(ev(Z, W))
    # vals[a, b] = sum_{j,k} c[j,k] omega^(a j + b k)  =>  c = fft2(vals)/G^2
    c = np.fft.fft2(vals) / G**2
    idx = np.arange(-d, d + 1) % G
    dense = c[np.ix_(idx, idx)]
    P = LaurentPoly2.from_array(dense, -d, -d)
    zs, ws = _probe_points()
    direct = np.linalg.det(ev(zs, ws))
    resid = np.max(np.abs(P(zs, ws) - direct)) / max(np.max(np.abs(direct)), 1e-300)
    if not resid <= refit_tol:
        raise InterpolationError(
            f"refit residual {resid:.3e} exceeds {refit_tol:.1e} with degree bound {d}"
        )
    return P


def charpoly_ratio(w, tol=1e-8, significant=1e-6):
    """``(c, deviation)`` with P_{spider_step(w)} = c * P_w.

    ``deviation`` is the largest relative deviation of the coefficient-wise
    ratios from ``c`` over coefficients larger than ``significant`` times the
    largest one (smaller ones only carry interpolation round-off); above
    ``tol`` an :class:`InvariantViolation` is raised.
    """
    P0 = characteristic_polynomial(w).pruned(1e-10)
    P1 = characteristic_polynomial(spider_step(w)).pruned(1e-10)
    if set(P0.support) != set(P1.support):
        raise InvariantViolation("supports differ before and after the weight update")
    big = significant * P0.max_abs()
    keys = [k for k in P0.support if abs(P0.coeffs[k]) >= big]
    ratios = np.array([P1.coeffs[k] / P0.coeffs[k] for k in keys])
    mags = np.array([abs(P0.coeffs[k]) for k in keys])
    c = complex(np.sum(ratios * mags) / np.sum(mags))
    dev = float(np.max(np.abs(ratios - c)) / abs(c))
    if dev > tol:
        raise InvariantViolation(f"coefficient ratios spread by {dev:.3e}")
    if abs(c.imag) <= 1e-12 * abs(c):
        c = c.real
    return c, dev


__all__ = [
    "KasteleynEvaluator",
    "characteristic_polynomial",
    "charpoly_ratio",
    "newton_polygon",
    "InterpolationError",
    "InvariantViolation",
]
