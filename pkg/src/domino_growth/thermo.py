"""Ronkin function, surface tension, phase classification and edge probabilities.

Frames
------
``ronkin_gradient(P, B)`` is the gradient of R with respect to the torus
log-radii ``B = (B1, B2)`` of ``(z, w)``.  The average height slope of the
Gibbs measure selected by ``B`` is the rotated vector
``rho = (dR/dB2, -dR/dB1)`` (see :func:`slope_from_gradient`), which is the
frame used for every public ``rho`` argument.  Newton polygons of the
characteristic polynomials met here are invariant under this rotation.

Quadrature
----------
For fixed ``w`` the average of ``log|P|`` over ``|z| = e^B1`` is exact by
Jensen's formula (roots of P in z).  The remaining one-dimensional integral
over arg w is done by Gauss-Legendre panels whose endpoints include every
angle at which a root meets the circle ``|z| = e^B1`` (the only places where
the integrand is not analytic), with geometric grading toward them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .kasteleyn import KasteleynEvaluator, characteristic_polynomial
from .laurent import LaurentPoly2, newton_polygon


class ThermoError(ArithmeticError):
    """Base class for numerical failures in this module."""


class QuadratureError(ThermoError):
    pass


class NotConverged(ThermoError):
    def __init__(self, message, last_B=None):
        super().__init__(message)
        self.last_B = last_B


class Indeterminate(ThermoError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


ROUGH, SMOOTH, BOUNDARY = "Rough", "Smooth", "BoundaryOrCorner"

TWO_PI = 2.0 * math.pi


def slope_from_gradient(grad):
    """Height slope selected by a Ronkin gradient."""
    return np.array([grad[1], -grad[0]], dtype=float)


def gradient_from_slope(rho):
    """Ronkin gradient corresponding to a height slope."""
    return np.array([-rho[1], rho[0]], dtype=float)


# ---------------------------------------------------------------------------
# roots in one variable


def _roots_from_coefficients(C):
    """Roots of sum_d C[..., d] x^d for a batch (ascending coefficients)."""
    C = np.asarray(C, dtype=complex)
    D = C.shape[-1] - 1
    lead = C[..., -1]
    if np.any(np.abs(lead) == 0):
        raise ThermoError("leading coefficient vanishes")
    comp = np.zeros(C.shape[:-1] + (D, D), dtype=complex)
    comp[..., 0, :] = -C[..., -2::-1] / lead[..., None]
    if D > 1:
        comp[..., np.arange(1, D), np.arange(D - 1)] = 1.0
    return np.linalg.eigvals(comp)


class _Slice:
    """P as a polynomial in z along the torus |w| = e^B2, probed at |z| = e^B1."""

    def __init__(self, P, B1, B2):
        self.P = P
        self.B1 = float(B1)
        self.B2 = float(B2)
        self.jmin, jmax = P.z_range()

    def w_of(self, phi):
        return np.exp(self.B2 + 1j * np.asarray(phi, dtype=float))

    def roots(self, phi):
        C, _ = self.P.z_coefficients(self.w_of(phi))
        return _roots_from_coefficients(C), C[..., -1]

    def shifted_logmod(self, phi):
        r, lead = self.roots(phi)
        return np.log(np.abs(r)) - self.B1, lead

    def distance(self, phi):
        s, _ = self.shifted_logmod(phi)
        return np.min(np.abs(s), axis=-1)


def _breakpoints(sl, grid=256, thresh=0.1):
    """Angles where a root meets (or nearly meets) the circle |z| = e^B1.

    Returns ``(breaks, gap)`` where ``gap`` is the minimum over angles of the
    log-distance between the roots and the circle.
    """
    phis = TWO_PI * np.arange(grid) / grid
    f = sl.distance(phis)
    fl, fr = np.roll(f, 1), np.roll(f, -1)
    cand = np.nonzero((f <= fl) & (f <= fr) & (f < thresh))[0]
    h = TWO_PI / grid
    breaks = []
    gap = float(f.min())

    def fs(p):
        return float(sl.distance(np.array([p]))[0])

    for i in cand:
        res = minimize_scalar(fs, bounds=(phis[i] - h, phis[i] + h), method="bounded",
                              options={"xatol": 1e-13, "maxiter": 200})
        p, val = float(res.x), float(res.fun)
        if val > f[i]:
            p, val = float(phis[i]), float(f[i])
        gap = min(gap, val)
        breaks.append(p % TWO_PI)
    breaks = sorted(breaks)
    dedup = []
    for b in breaks:
        if not dedup or b - dedup[-1] > 1e-9:
            dedup.append(b)
    if len(dedup) > 1 and dedup[0] + TWO_PI - dedup[-1] <= 1e-9:
        dedup.pop()
    return dedup, gap


def _pieces(breaks):
    if not breaks:
        return [(0.0, TWO_PI)]
    b = list(breaks)
    out = [(b[i], b[i + 1]) for i in range(len(b) - 1)]
    out.append((b[-1], b[0] + TWO_PI))
    return out


_GL_CACHE = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def _panel_nodes(pieces, order, panel_max=math.pi / 8, grading=4.0, min_width=1e-7):
    """Gauss-Legendre nodes/weights over pieces, graded geometrically toward piece ends."""
    x, wts = _gauss_legendre(order)
    nodes, weights, piece_id = [], [], []
    for pid, (L, R) in enumerate(pieces):
        width = R - L
        if width <= 0:
            continue
        cuts = {L, R}
        d = min(panel_max, width / 2)
        t = d
        while t > min_width and t > width * 1e-12:
            cuts.add(L + t)
            cuts.add(R - t)
            t /= grading
        cuts = sorted(cuts)
        full = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            nsub = max(1, int(math.ceil((b - a) / panel_max)))
            edges = np.linspace(a, b, nsub + 1)
            full.extend(zip(edges[:-1], edges[1:]))
        for a, b in full:
            if b - a <= 0:
                continue
            mid, half = (a + b) / 2, (b - a) / 2
            nodes.append(mid + half * x)
            weights.append(half * wts)
            piece_id.append(np.full(order, pid))
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(piece_id)


# ---------------------------------------------------------------------------
# Ronkin function


@dataclass(frozen=True)
class RonkinResult:
    value: float
    gradient: np.ndarray
    error: float
    gap: float  # log-distance between the torus and the zero set in the z-direction


def _jensen_mean(sl, phis):
    """Average over arg z of log|P| at the given arg w values."""
    s, lead = sl.shifted_logmod(phis)
    return (
        np.log(np.abs(lead))
        + sl.jmin * sl.B1
        + np.sum(np.maximum(s, 0.0), axis=-1)
        + s.shape[-1] * sl.B1
    )


def _count_inside(sl, phis):
    s, _ = sl.shifted_logmod(phis)
    return np.sum(s < 0, axis=-1)


def _directional(P, B1, B2, grid, order, want_value=True):
    sl = _Slice(P, B1, B2)
    breaks, gap = _breakpoints(sl, grid)
    pieces = _pieces(breaks)
    mids = np.array([(a + b) / 2 for a, b in pieces])
    counts = _count_inside(sl, mids)
    widths = np.array([b - a for a, b in pieces])
    dR = sl.jmin + float(np.sum(widths * counts)) / TWO_PI
    if not want_value:
        return None, dR, 0.0, gap
    nodes, wts, _ = _panel_nodes(pieces, order)
    val = float(np.sum(wts * _jensen_mean(sl, nodes))) / TWO_PI
    nodes2, wts2, _ = _panel_nodes(pieces, max(6, order // 2 + 2))
    val2 = float(np.sum(wts2 * _jensen_mean(sl, nodes2))) / TWO_PI
    return val, dR, abs(val - val2), gap


def ronkin_full(P, B, grid=256, order=20):
    """Value, exact gradient, quadrature error estimate and torus gap of R at B."""
    B1, B2 = float(B[0]), float(B[1])
    val, d1, err, gap1 = _directional(P, B1, B2, grid, order)
    _, d2, _, gap2 = _directional(P.swap(), B2, B1, grid, order, want_value=False)
    return RonkinResult(val, np.array([d1, d2]), err, min(gap1, gap2))


def ronkin(P, B, tol=1e-6, grid=256, order=20):
    """R(B): average of log|P| over the torus |z| = e^B1, |w| = e^B2."""
    res = ronkin_full(P, B, grid, order)
    if not res.error <= tol:
        raise QuadratureError(f"Ronkin quadrature error estimate {res.error:.2e} exceeds {tol:.1e}")
    return res.value


def ronkin_gradient(P, B, grid=256):
    """Exact gradient of R: average number of zeros inside the circle, minus the pole order."""
    B1, B2 = float(B[0]), float(B[1])
    _, d1, _, _ = _directional(P, B1, B2, grid, 0, want_value=False)
    _, d2, _, _ = _directional(P.swap(), B2, B1, grid, 0, want_value=False)
    return np.array([d1, d2])


def ronkin_hessian(P, B, h=1e-5):
    B = np.asarray(B, dtype=float)
    H = np.zeros((2, 2))
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        H[:, a] = (ronkin_gradient(P, B + e) - ronkin_gradient(P, B - e)) / (2 * h)
    return (H + H.T) / 2


def torus_gap(P, B, grid=256):
    """Smallest log-distance between the torus at B and the zero set of P (0 if they meet)."""
    B1, B2 = float(B[0]), float(B[1])
    _, gap1 = _breakpoints(_Slice(P, B1, B2), grid)
    _, gap2 = _breakpoints(_Slice(P.swap(), B2, B1), grid)
    return min(gap1, gap2)


# ---------------------------------------------------------------------------
# surface tension


@dataclass(frozen=True)
class SurfaceTension:
    sigma: float
    B: np.ndarray
    mismatch: float
    iterations: int


def _check_slope(P, rho, poly=None):
    poly = poly or newton_polygon(P)
    g = gradient_from_slope(rho)
    if not poly.contains(tuple(g), tol=1e-12):
        raise ValueError(f"slope {tuple(rho)} lies outside the Newton polygon")
    if poly.on_boundary(tuple(g), tol=1e-12):
        raise ValueError(f"slope {tuple(rho)} lies on the boundary of the Newton polygon")
    return g


def surface_tension(P, rho, B0=(0.0, 0.0), tol=1e-10, max_iter=200, B_max=40.0, max_step=1.0):
    """Maximise ``-R(B) + g.B`` with g the Ronkin gradient of slope ``rho``.

    Uses Levenberg-Marquardt steps on the exact gradient of R with a
    finite-difference Hessian.  Returns the maximiser B and sigma(rho).
    """
    g = _check_slope(P, rho)
    B = np.array(B0, dtype=float)
    lam = 1e-3
    grad = ronkin_gradient(P, B)
    mis = g - grad
    f = f_next = None
    it = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(mis) <= tol:
            break
        H = ronkin_hessian(P, B)
        accepted = False
        for _ in range(40):
            step = np.linalg.solve(H + lam * np.eye(2), mis)
            norm = np.linalg.norm(step)
            if not np.isfinite(norm):
                lam *= 4
                continue
            if norm > max_step:
                step *= max_step / norm
            Bn = B + step
            gn = ronkin_gradient(P, Bn)
            misn = g - gn
            better = np.linalg.norm(misn) < np.linalg.norm(mis)
            if not better:
                # flat stretches of R (amoeba holes) leave the mismatch unchanged;
                # fall back on the convex objective R - g.B itself
                if f is None:
                    f = ronkin_full(P, B).value - float(g @ B)
                fn = ronkin_full(P, Bn).value - float(g @ Bn)
                better = fn < f - 1e-12 * (1 + abs(f))
                if better:
                    f_next = fn
            if better:
                B, grad, mis = Bn, gn, misn
                f = f_next
                f_next = None
                lam = max(lam / 4, 1e-12)
                accepted = True
                break
            lam *= 4
        if not accepted:
            break
        if np.linalg.norm(B) > B_max:
            raise NotConverged(f"maximiser diverges (|B| > {B_max}); slope too close to the boundary", B)
    mismatch = float(np.linalg.norm(mis))
    if mismatch > max(tol, 1e-6):
        raise NotConverged(f"gradient mismatch {mismatch:.2e} after {it} iterations", B)
    R = ronkin(P, B)
    sigma = -R + float(g @ B)
    return SurfaceTension(sigma, B, mismatch, it)


def legendre_dual_ronkin(P, B, rhos):
    """max over the given slopes of (g(rho).B - sigma(rho)); approximates R(B) from below."""
    best = -np.inf
    for rho in rhos:
        st = surface_tension(P, rho)
        best = max(best, float(gradient_from_slope(rho) @ np.asarray(B)) - st.sigma)
    return best


# ---------------------------------------------------------------------------
# classification


def _sunflower(count):
    k = np.arange(count) + 0.5
    r = np.sqrt(k / count)
    a = k * math.pi * (3 - math.sqrt(5))
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=1)


@dataclass(frozen=True)
class Classification:
    label: str
    B: object
    gap: float
    diagnostics: dict


def classify_slope_detail(P, rho, facet_radius=0.2, samples=25, facet_tol=1e-3, gap_tol=1e-6):
    poly = newton_polygon(P)
    g = gradient_from_slope(rho)
    if not poly.contains(tuple(g), tol=1e-12):
        raise ValueError(f"slope {tuple(rho)} lies outside the Newton polygon")
    if poly.on_boundary(tuple(g), tol=1e-12):
        return Classification(BOUNDARY, None, 0.0, {})
    if not np.allclose(g, np.round(g), atol=1e-12):
        return Classification(ROUGH, None, 0.0, {"reason": "non-integer slope"})
    try:
        st = surface_tension(P, rho)
    except NotConverged as exc:
        raise Indeterminate(f"surface tension did not converge: {exc}", {"last_B": exc.last_B}) from exc
    B = st.B
    gap = torus_gap(P, B)
    pattern = _sunflower(samples)
    diag = {"B": B.tolist(), "gap": gap, "mismatch": st.mismatch}
    if gap > gap_tol:
        r = min(facet_radius, 0.5 * gap)
        grads = [ronkin_gradient(P, B + r * p) for p in pattern]
        worst = max(float(np.linalg.norm(gr - g)) for gr in grads)
        diag["local_radius"] = r
        diag["local_worst"] = worst
        if worst < facet_tol:
            return Classification(SMOOTH, B, gap, diag)
        raise Indeterminate("torus is zero-free but the Ronkin gradient is not locally constant", diag)
    # the maximiser sits on the amoeba: look for a nearby hole with the same gradient
    r = facet_radius
    while r >= 1e-4:
        for p in pattern:
            Bp = B + r * p
            gr = ronkin_gradient(P, Bp)
            if np.linalg.norm(gr - g) < facet_tol:
                gp = torus_gap(P, Bp)
                if gp > gap_tol:
                    diag["hole_point"] = Bp.tolist()
                    diag["hole_gap"] = gp
                    return Classification(SMOOTH, Bp, gp, diag)
        r /= 2
    return Classification(ROUGH, B, gap, diag)


def classify_slope(P, rho, **kw):
    """``'Rough'``, ``'Smooth'`` or ``'BoundaryOrCorner'`` for the slope ``rho``."""
    return classify_slope_detail(P, rho, **kw).label


def smooth_slopes(P, **kw):
    """Integer interior slopes classified as smooth."""
    poly = newton_polygon(P)
    out = set()
    for gpt in poly.interior_lattice_points():
        rho = tuple(int(v) for v in slope_from_gradient(gpt))
        if classify_slope(P, rho, **kw) == SMOOTH:
            out.add(rho)
    return out


# ---------------------------------------------------------------------------
# edge probabilities


@dataclass(frozen=True)
class EdgeSpec:
    """Row/column of K and Fourier exponents for one lattice edge."""

    row: int
    col: int
    a: int
    b: int
    coefficient: complex


def edge_spec(ev, edge):
    """Locate ``edge = (x, y, 'h'|'v')`` (from (x, y) to the right or up) in K."""
    x, y, orient = edge
    m = ev.weights.period
    p = ev.weights.time_parity
    if orient == "h":
        u, v = (x, y), (x + 1, y)
        wt = ev.weights.hor[x % m, y % m]
        coef = complex(wt)
    elif orient == "v":
        u, v = (x, y), (x, y + 1)
        wt = ev.weights.ver[x % m, y % m]
        coef = 1j * wt
    else:
        raise ValueError("orientation must be 'h' or 'v'")
    if (u[0] + u[1] - p) % 2 == 0:
        white, black = u, v
    else:
        white, black = v, u
    mw = (white[0] // m, white[1] // m)
    mb = (black[0] // m, black[1] // m)
    return EdgeSpec(ev.white_index(white), ev.black_index(black), mb[0] - mw[0], mb[1] - mw[1], coef)


@dataclass(frozen=True)
class EdgeProbabilities:
    values: np.ndarray
    imag_residue: float
    error: float
    smooth_flag: bool


def _cofactors(K, row, col):
    """Signed cofactor C[row, col] of a batch of square matrices."""
    n = K.shape[-1]
    sign = -1.0 if (row + col) % 2 else 1.0
    if n == 1:
        return np.full(K.shape[:-2], sign, dtype=complex)
    rows = [r for r in range(n) if r != row]
    cols = [c for c in range(n) if c != col]
    minor = K[..., rows, :][..., :, cols]
    return sign * np.linalg.det(minor)


def _inverse(K):
    """Batched matrix inverse with a closed form for the 2 x 2 case."""
    if K.shape[-1] != 2:
        return np.linalg.inv(K)
    a, b, c, d = K[..., 0, 0], K[..., 0, 1], K[..., 1, 0], K[..., 1, 1]
    det = a * d - b * c
    out = np.empty_like(K)
    out[..., 0, 0] = d / det
    out[..., 0, 1] = -b / det
    out[..., 1, 0] = -c / det
    out[..., 1, 1] = a / det
    return out


def _shift_choice(srt):
    """Log-radius (relative to B1) of an integration circle in a wide root-free annulus."""
    levels = np.concatenate([[-np.inf], srt, [np.inf]])
    gaps = []
    for lo, hi in zip(levels[:-1], levels[1:]):
        if np.isinf(lo) and np.isinf(hi):
            gaps.append((0.0, 1.0))
        elif np.isinf(lo):
            gaps.append((hi - 1.0, 1.0))
        elif np.isinf(hi):
            gaps.append((lo + 1.0, 1.0))
        else:
            gaps.append(((lo + hi) / 2, (hi - lo) / 2))
    home = int(np.searchsorted(srt, 0.0))
    if gaps[home][1] >= 0.25:
        best = home
    else:
        choices = [c for c in (home - 1, home, home + 1) if 0 <= c < len(gaps)]
        best = max(choices, key=lambda c: gaps[c][1])
    return gaps[best][0], min(gaps[best][1], 1.0)


class FieldQuadrature:
    """Quadrature for torus integrals of entries of K(z, w)^-1 at a fixed field B.

    The outer integral over arg w uses Gauss-Legendre panels split at the
    angles where a root of P in z meets |z| = e^B1.  For each outer node the
    inner integral is moved to a circle inside a root-free annulus (where the
    trapezoid rule converges geometrically) and the residues of the roots
    crossed on the way are added back.  Only the zero set of P enters the
    construction, so one instance serves every weighting whose
    characteristic polynomial is a scalar multiple of ``P``.
    """

    def __init__(self, P, B, order=24, min_points=32, max_points=2048):
        self.B = (float(B[0]), float(B[1]))
        self.order = order
        sl = _Slice(P, *self.B)
        self.breaks, self.gap = _breakpoints(sl)
        nodes, wts, _ = _panel_nodes(_pieces(self.breaks), order)
        self.nodes, self.weights = nodes, wts
        self.w = sl.w_of(nodes)
        s, _ = sl.shifted_logmod(nodes)
        roots, _ = sl.roots(nodes)
        srt = np.sort(s, axis=-1)
        t = np.empty(len(nodes))
        half = np.empty(len(nodes))
        for q in range(len(nodes)):
            t[q], half[q] = _shift_choice(srt[q])
        M = int(min(max_points, max(min_points, math.ceil(40.0 / max(half.min(), 1e-3)))))
        self.points = M
        theta = TWO_PI * np.arange(M) / M
        self.z = np.exp(self.B[0] + t[:, None]) * np.exp(1j * theta)[None, :]
        res = []
        for q in range(len(nodes)):
            for r, sv in zip(roots[q], s[q]):
                if t[q] < sv < 0.0:
                    res.append((q, r, 1.0))
                elif 0.0 < sv < t[q]:
                    res.append((q, r, -1.0))
        self.residues = res

    def integrals(self, w, specs, P=None):
        """Torus averages of [K^-1]_{col,row} z^a w^b for each edge, under weights ``w``."""
        ev = KasteleynEvaluator(w)
        if P is None:
            P = characteristic_polynomial(w)
        Pz = P.dz()
        Kinv = _inverse(ev(self.z, self.w[:, None]))
        inner = np.zeros((len(specs), len(self.nodes)), dtype=complex)
        for e, sp in enumerate(specs):
            inner[e] = (Kinv[..., sp.col, sp.row] * self.z ** sp.a).mean(axis=-1)
        for q, r, sign in self.residues:
            Kr = ev(r, self.w[q])
            dP = Pz(r, self.w[q])
            for e, sp in enumerate(specs):
                inner[e, q] += sign * _cofactors(Kr, sp.row, sp.col) * r ** (sp.a - 1) / dP
        out = np.empty(len(specs), dtype=complex)
        for e, sp in enumerate(specs):
            out[e] = np.sum(self.weights * inner[e] * self.w ** sp.b) / TWO_PI
        return out


class EdgeProbabilityEngine:
    """Edge probabilities at a fixed field for any weighting sharing the zero set of ``P``."""

    def __init__(self, P, B, order=24, tol=1e-4, imag_tol=1e-6):
        self.fine = FieldQuadrature(P, B, order)
        self.coarse = FieldQuadrature(P, B, max(8, order // 2 + 4))
        self.tol = tol
        self.imag_tol = imag_tol

    @property
    def smooth_flag(self):
        return self.fine.gap > 1e-6

    def __call__(self, w, edges, P=None):
        ev = KasteleynEvaluator(w)
        if P is None:
            P = characteristic_polynomial(w)
        specs = [edge_spec(ev, e) for e in edges]
        coef = np.array([sp.coefficient for sp in specs])
        p1 = coef * self.fine.integrals(w, specs, P)
        p2 = coef * self.coarse.integrals(w, specs, P)
        err = float(np.max(np.abs(p1 - p2))) if specs else 0.0
        if err > self.tol:
            raise QuadratureError(f"edge-probability quadrature error estimate {err:.2e} exceeds {self.tol:.1e}")
        imag = float(np.max(np.abs(p1.imag))) if specs else 0.0
        if imag > self.imag_tol:
            raise QuadratureError(f"edge probability has imaginary residue {imag:.2e}")
        return EdgeProbabilities(p1.real, imag, err, self.smooth_flag)


def edge_probabilities_at_field(w, B, edges, order=24, tol=1e-4, imag_tol=1e-6, P=None):
    """Occupation probabilities of lattice edges under the Gibbs measure selected by ``B``.

    ``edges`` are ``(x, y, 'h'|'v')`` triples; weights are read periodically
    and colours from ``w.time_parity``.
    """
    if P is None:
        P = characteristic_polynomial(w)
    return EdgeProbabilityEngine(P, B, order, tol, imag_tol)(w, edges, P)


def edge_probabilities(w, rho, edges, **kw):
    """Edge probabilities at slope ``rho`` (the torus field is found by :func:`surface_tension`)."""
    P = characteristic_polynomial(w)
    st = surface_tension(P, rho)
    return edge_probabilities_at_field(w, st.B, edges, P=P, **kw)


def edge_probability(w, rho, edge):
    """Probability that ``edge`` is occupied under the slope-``rho`` Gibbs measure of ``w``."""
    return float(edge_probabilities(w, rho, [edge]).values[0])


def vertex_edges(x, y):
    """The four edges at vertex (x, y) as edge triples (E, N, W, S)."""
    return [(x, y, "h"), (x, y, "v"), (x - 1, y, "h"), (x, y - 1, "v")]


def mean_slope_from_edges(w, B, P=None):
    """Average height change per fundamental-domain translate, from edge probabilities.

    This is the slope in the units of the Newton polygon; it should equal
    :func:`slope_from_gradient` of the Ronkin gradient at ``B``.
    """
    m = w.period
    p = w.time_parity
    edges = []
    for i in range(m):
        for j in range(m):
            edges.append((i + 1, j, "v"))  # crossed going east from face (i, j)
            edges.append((i, j + 1, "h"))  # crossed going north
    probs = edge_probabilities_at_field(w, B, edges, P=P).values
    sx = sy = 0.0
    for idx, (i, j) in enumerate((i, j) for i in range(m) for j in range(m)):
        pe = probs[2 * idx]
        pn = probs[2 * idx + 1]
        sig_e = 1 if (i + 1 + j - p) % 2 == 0 else -1
        sig_n = 1 if (i + 1 + j + 1 - p) % 2 == 0 else -1
        sx += sig_e * (pe - 0.25)
        sy += sig_n * (pn - 0.25)
    return np.array([sx, sy]) / m
