"""Bivariate Laurent polynomials with complex coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class LaurentPoly2:
    """``sum c[j, k] z^j w^k`` over a finite support of integer pairs."""

    coeffs: dict

    def __post_init__(self):
        clean = {(int(j), int(k)): complex(c) for (j, k), c in self.coeffs.items()}
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_array(cls, arr, jmin, kmin, rel_prune=1e-12):
        """Build from a dense array with ``arr[a, b]`` the coefficient of z^(jmin+a) w^(kmin+b)."""
        arr = np.asarray(arr, dtype=complex)
        scale = np.abs(arr).max() if arr.size else 0.0
        out = {}
        for (a, b), c in np.ndenumerate(arr):
            if scale > 0 and abs(c) > rel_prune * scale:
                out[(jmin + a, kmin + b)] = c
        return cls(out)

    # basic queries ---------------------------------------------------------
    @property
    def support(self):
        return sorted(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def max_abs(self):
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def pruned(self, rel=1e-12):
        s = self.max_abs()
        return LaurentPoly2({e: c for e, c in self.coeffs.items() if abs(c) > rel * s})

    def z_range(self):
        js = [j for j, _ in self.coeffs]
        return min(js), max(js)

    def w_range(self):
        ks = [k for _, k in self.coeffs]
        return min(ks), max(ks)

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out = np.zeros(np.broadcast(z, w).shape, dtype=complex)
        for (j, k), c in self.coeffs.items():
            out = out + c * z**j * w**k
        return out

    def scale(self, c):
        return LaurentPoly2({e: c * v for e, v in self.coeffs.items()})

    def swap(self):
        """The polynomial with the roles of z and w exchanged."""
        return LaurentPoly2({(k, j): c for (j, k), c in self.coeffs.items()})

    def dz(self):
        return LaurentPoly2({(j - 1, k): j * c for (j, k), c in self.coeffs.items() if j != 0})

    def dw(self):
        return LaurentPoly2({(j, k - 1): k * c for (j, k), c in self.coeffs.items() if k != 0})

    def z_coefficients(self, w):
        """Coefficients of P as a polynomial in z for each value of w.

        Returns ``(C, jmin)`` with ``C[..., d]`` the coefficient of
        ``z^(jmin + d)``, so ``P(z, w) = z^jmin * sum_d C[..., d] z^d``.
        """
        w = np.asarray(w, dtype=complex)
        jmin, jmax = self.z_range()
        C = np.zeros(w.shape + (jmax - jmin + 1,), dtype=complex)
        for (j, k), c in self.coeffs.items():
            C[..., j - jmin] += c * w**k
        return C, jmin

    # text format -----------------------------------------------------------
    def to_lines(self):
        return [f"{j} {k} {c.real!r} {c.imag!r}" for (j, k), c in sorted(self.coeffs.items())]

    @classmethod
    def from_lines(cls, lines):
        out = {}
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            j, k, re, im = line.split()
            out[(int(j), int(k))] = complex(float(re), float(im))
        return cls(out)

    def __repr__(self):
        return f"LaurentPoly2({len(self.coeffs)} terms)"


@dataclass(frozen=True)
class NewtonPolygon:
    """Convex hull of an integer point set, vertices counter-clockwise."""

    vertices: tuple

    def __contains__(self, point):
        return self.contains(point)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def _side_values(self, point):
        x, y = point
        vals = []
        for (x1, y1), (x2, y2) in self.edges():
            vals.append((x2 - x1) * (y - y1) - (y2 - y1) * (x - x1))
        return vals

    def contains(self, point, tol=0.0):
        """Closed membership."""
        if len(self.vertices) < 3:
            return _degenerate_contains(self.vertices, point, tol)
        return all(s >= -tol for s in self._side_values(point))

    def interior_contains(self, point, tol=0.0):
        if len(self.vertices) < 3:
            return False
        return all(s > tol for s in self._side_values(point))

    def on_boundary(self, point, tol=1e-12):
        return self.contains(point, tol) and not self.interior_contains(point, tol)

    def boundary_distance(self, point):
        """Euclidean distance to the boundary (positive inside)."""
        if len(self.vertices) < 3:
            return 0.0
        x, y = point
        d = np.inf
        for (x1, y1), (x2, y2) in self.edges():
            L = np.hypot(x2 - x1, y2 - y1)
            d = min(d, ((x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)) / L)
        return float(d)

    def interior_lattice_points(self):
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return [
            (a, b)
            for a in range(min(xs), max(xs) + 1)
            for b in range(min(ys), max(ys) + 1)
            if self.interior_contains((a, b))
        ]


def _degenerate_contains(vertices, point, tol):
    if len(vertices) == 1:
        return abs(point[0] - vertices[0][0]) <= tol and abs(point[1] - vertices[0][1]) <= tol
    (x1, y1), (x2, y2) = vertices
    x, y = point
    cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
    dot = (x - x1) * (x2 - x1) + (y - y1) * (y2 - y1)
    return abs(cross) <= tol and -tol <= dot <= (x2 - x1) ** 2 + (y2 - y1) ** 2 + tol


def convex_hull(points):
    """Exact integer convex hull (monotone chain), counter-clockwise, no collinear points."""
    pts = sorted(set((int(a), int(b)) for a, b in points))
    if len(pts) <= 2:
        return tuple(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


def newton_polygon(P):
    """Newton polygon of the pruned support of ``P``."""
    if P.is_zero():
        raise ValueError("Newton polygon of the zero polynomial is undefined")
    return NewtonPolygon(convex_hull(P.pruned().support))
