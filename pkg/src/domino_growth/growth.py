"""Growth speed, limit shapes and height fluctuations of the shuffle dynamics.

Two independent routes to the speed v(rho):

* :func:`speed_kasteleyn` averages the expected height change at a fixed
  face along the weight dynamics, each term being a combination of edge
  probabilities of the slope-rho Gibbs measure;
* :func:`speed_limit_shape` reads v off a sampled Aztec limit shape as
  ``psi(x) - x.rho`` at the point where the gradient of the shape is rho.

Conventions: a face (i, j) of A_N sits at rescaled position
``x = (i, j) / (2 n N)`` and carries the rescaled height ``h / N``, so the
rescaled square is ``Q = {|x1| + |x2| <= 1/(2n)}`` and the gradients live in
the Newton polygon ``{|r1| + |r2| <= n}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .kasteleyn import characteristic_polynomial
from .shuffle import grow_aztec_batch, sample_aztec_batch
from .thermo import (
    SMOOTH,
    EdgeProbabilityEngine,
    classify_slope,
    ThermoError,
    gradient_from_slope,
    surface_tension,
)
from .laurent import newton_polygon
from .weights import gauge_invariants, gauge_normalize, spider_step


class SmoothSlopeError(ThermoError):
    """The Kasteleyn-sum speed is only defined here for rough slopes."""


class StencilError(ValueError):
    """The finite-difference stencil leaves the rough region."""


class NotResolved(ArithmeticError):
    """No interior cell of the empirical shape has the requested gradient."""


KASTELEYN_SUM = "KasteleynSum"
LIMIT_SHAPE = "LimitShape"

# edges of face (0, 0): top, bottom (horizontal) then left, right (vertical)
FACE_EDGES = [(0, 1, "h"), (0, 0, "h"), (0, 0, "v"), (1, 0, "v")]


@dataclass
class SpeedEstimate:
    rho: tuple
    v: float
    method: str
    truncation: dict
    error_bar: float
    x: tuple | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.error_bar >= 0:
            raise ValueError("error_bar must be non-negative")

    def to_dict(self):
        out = {
            "rho": [float(r) for r in self.rho],
            "v": float(self.v),
            "method": self.method,
            "truncation": self.truncation,
            "error_bar": float(self.error_bar),
        }
        if self.x is not None:
            out["x"] = [float(t) for t in self.x]
        return out


# ---------------------------------------------------------------------------
# Kasteleyn-sum speed


def bump_weights(K):
    """Smooth averaging weights exp(-1/(t(1-t))) at the midpoints t = (j + 1/2)/K."""
    t = (np.arange(K) + 0.5) / K
    g = np.exp(-1.0 / (t * (1.0 - t)))
    return g / g.sum()


def _gauge_key(w, digits=10):
    inv = gauge_invariants(w)
    return (w.time_parity, tuple(np.round(np.log(inv.face_weights).ravel(), digits)))


class SpeedTerms:
    """Expected height-change terms ``a_j = E_{rho, w_j}[H - V]`` at face (0, 0).

    The weights ``w_j`` follow the spider dynamics from ``w0`` relabelled to
    time parity 0.  Because the characteristic polynomial only picks up a
    scalar factor along the dynamics, the field ``B(rho)`` and the quadrature
    built on it serve every j.  Terms are cached per gauge class, so periodic
    trajectories (uniform weights) cost a single quadrature.
    """

    def __init__(self, w0, rho, order=24, tol=1e-4, P=None):
        self.w0 = gauge_normalize(w0.at_parity(0))
        self.rho = (float(rho[0]), float(rho[1]))
        self.P = characteristic_polynomial(self.w0) if P is None else P
        self.B = surface_tension(self.P, self.rho).B
        self.engine = EdgeProbabilityEngine(self.P, self.B, order=order, tol=tol)
        if self.engine.smooth_flag:
            raise SmoothSlopeError(
                f"slope {self.rho} is not rough (torus gap {self.engine.fine.gap:.2e}); "
                "use the limit-shape estimator"
            )
        self._weights = [self.w0]
        self._terms = []
        self._errors = []
        self._cache = {}

    def weights(self, j):
        while len(self._weights) <= j:
            self._weights.append(gauge_normalize(spider_step(self._weights[-1])))
        return self._weights[j]

    def compute(self, K):
        """Arrays ``(a, err)`` of the first K terms and their quadrature error estimates."""
        while len(self._terms) < K:
            w = self.weights(len(self._terms))
            key = _gauge_key(w)
            if key not in self._cache:
                res = self.engine(w, FACE_EDGES)
                p = res.values
                self._cache[key] = (p[0] + p[1] - p[2] - p[3], 4 * res.error)
            a, e = self._cache[key]
            self._terms.append(a)
            self._errors.append(e)
        return np.array(self._terms[:K]), np.array(self._errors[:K])


def _cesaro(a, K):
    return float(np.sum(a[:K])) / (4 * K)


def _weighted(a, K):
    return float(np.sum(bump_weights(K) * a[:K])) / 4


def speed_from_terms(a, err, average="cesaro"):
    """Speed and error bar from the terms a_0..a_{K-1}.

    ``"cesaro"``: plain average; the error bar is the largest deviation of the
    partial averages over the last half of the run plus quadrature error.
    ``"weighted"``: average with smooth bump weights, which converges much
    faster along quasi-periodic weight trajectories; the error bar is its
    change from K/2 to K plus quadrature error.
    """
    K = len(a)
    if K < 2:
        raise ValueError("need at least two terms")
    qerr = float(np.max(err)) / 4
    if average == "cesaro":
        v = _cesaro(a, K)
        tail = max(abs(_cesaro(a, k) - v) for k in range(max(1, K // 2), K + 1))
        return v, tail + qerr
    if average == "weighted":
        v = _weighted(a, K)
        return v, abs(_weighted(a, max(2, K // 2)) - v) + qerr
    raise ValueError(f"unknown average {average!r}")


def speed_kasteleyn(w0, rho, k_max=64, average="cesaro", terms=None, **kw):
    """Speed v(rho) from the time average of expected height changes.

    ``v = (1 / (4 k_max)) * sum_{j < k_max} E_{rho, w_j}[H - V]`` at face (0, 0),
    or its smoothly weighted counterpart with ``average="weighted"``.
    """
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    terms = terms or SpeedTerms(w0, rho, **kw)
    a, err = terms.compute(k_max)
    v, eb = speed_from_terms(a, err, average)
    return SpeedEstimate(
        tuple(terms.rho), v, KASTELEYN_SUM, {"k_max": int(k_max), "average": average}, eb,
        details={"B": terms.B.tolist(), "terms": a.tolist()},
    )


def _stencil(rho, h):
    r1, r2 = rho
    return {(da, db): (r1 + da * h, r2 + db * h) for da in (-1, 0, 1) for db in (-1, 0, 1)}


def hessian_from_stencil(values, errors, h):
    """Symmetric 2 x 2 Hessian, its determinant and propagated errors from a 9-point stencil.

    ``values`` and ``errors`` map offsets ``(da, db)`` in {-1, 0, 1}^2 to
    function values and their error bars.
    """
    f, e = values, errors
    h2 = h * h
    d11 = (f[1, 0] - 2 * f[0, 0] + f[-1, 0]) / h2
    d22 = (f[0, 1] - 2 * f[0, 0] + f[0, -1]) / h2
    d12 = (f[1, 1] - f[1, -1] - f[-1, 1] + f[-1, -1]) / (4 * h2)
    e11 = (e[1, 0] + 2 * e[0, 0] + e[-1, 0]) / h2
    e22 = (e[0, 1] + 2 * e[0, 0] + e[0, -1]) / h2
    e12 = (e[1, 1] + e[1, -1] + e[-1, 1] + e[-1, -1]) / (4 * h2)
    D = np.array([[d11, d12], [d12, d22]])
    det = d11 * d22 - d12 * d12
    det_err = abs(d22) * e11 + abs(d11) * e22 + 2 * abs(d12) * e12 + e11 * e22 + e12 * e12
    return D, float(det), float(det_err), np.array([[e11, e12], [e12, e22]])


@dataclass
class SpeedHessian:
    rho: tuple
    h: float
    matrix: np.ndarray
    det: float
    det_error: float
    entry_errors: np.ndarray
    speeds: dict

    @property
    def negative(self):
        """det < 0 with a margin larger than the propagated error."""
        return self.det + self.det_error < 0


def speed_hessian(w0, rho, h=0.1, k_max=64, average="weighted", **kw):
    """Second differences of :func:`speed_kasteleyn` on the 9-point stencil of step h."""
    w = gauge_normalize(w0.at_parity(0))
    P = characteristic_polynomial(w)
    poly = newton_polygon(P)
    for off, r in _stencil(rho, 2 * h).items():
        if not poly.interior_contains(tuple(gradient_from_slope(r)), tol=1e-12):
            raise StencilError(f"stencil point {r} leaves the Newton polygon")
    # the rough region is the open polygon minus the smooth integer slopes
    reach = 2 * h * math.sqrt(2)
    for a in range(math.floor(rho[0] - reach), math.ceil(rho[0] + reach) + 1):
        for b in range(math.floor(rho[1] - reach), math.ceil(rho[1] + reach) + 1):
            if math.hypot(a - rho[0], b - rho[1]) > reach:
                continue
            if not poly.interior_contains(tuple(gradient_from_slope((a, b))), tol=1e-12):
                continue
            if classify_slope(P, (a, b)) == SMOOTH:
                raise StencilError(f"smooth slope {(a, b)} lies within the stencil ball around {tuple(rho)}")
    values, errors, speeds = {}, {}, {}
    for off, r in _stencil(rho, h).items():
        est = speed_kasteleyn(w, r, k_max, average, P=P, **kw)
        values[off], errors[off], speeds[off] = est.v, est.error_bar, est
    D, det, det_err, E = hessian_from_stencil(values, errors, h)
    return SpeedHessian(tuple(float(t) for t in rho), h, D, det, det_err, E, speeds)


def corner_extrapolation(w0, corner, ts=(0.8, 0.85, 0.9, 0.95), k_max=64, average="cesaro", degree=2):
    """Speeds at ``t * corner`` and their polynomial extrapolation to t = 1.

    Returns ``(v_at_1, speeds)``; at a corner slope the whole face is frozen
    and the average height change per step is -1/4.
    """
    w = gauge_normalize(w0.at_parity(0))
    P = characteristic_polynomial(w)
    speeds = []
    for t in ts:
        r = (t * corner[0], t * corner[1])
        speeds.append(speed_kasteleyn(w, r, k_max, average, P=P))
    vs = np.array([s.v for s in speeds])
    coef = np.polyfit(1.0 - np.asarray(ts), vs, min(degree, len(ts) - 1))
    return float(np.polyval(coef, 0.0)), speeds


# ---------------------------------------------------------------------------
# envelopes and boundary data


def _check_in_Q(x, n, tol=1e-12):
    if abs(x[0]) + abs(x[1]) > 1.0 / (2 * n) + tol:
        raise ValueError(f"point {tuple(x)} lies outside the rescaled square for n={n}")


def boundary_profile(x, n):
    """Boundary height of the rescaled Aztec diamond: (n/2)(|x1| - |x2|)."""
    return 0.5 * n * (abs(x[0]) - abs(x[1]))


def envelopes(x, n):
    """``(psi_minus, psi_plus) = (n|x1| - 1/4, -n|x2| + 1/4)``."""
    _check_in_Q(x, n)
    return n * abs(x[0]) - 0.25, -n * abs(x[1]) + 0.25


def corner_profile(x, rho, n):
    """Height of the frozen region with corner slope rho: rho.x + (|rho2| - |rho1|)/(4n)."""
    return rho[0] * x[0] + rho[1] * x[1] + (abs(rho[1]) - abs(rho[0])) / (4 * n)


# ---------------------------------------------------------------------------
# empirical limit shape


@dataclass
class EmpiricalShape:
    """Sample-averaged rescaled heights of A_N on cells of 2n x 2n faces.

    ``psi[a, b]`` is the mean of h/N over the faces of cell (a, b) and over
    samples, ``psi_se`` its standard error across samples, ``x1``/``x2``
    the rescaled cell centres and ``grad`` the central-difference gradient
    at a spacing of ``spacing`` cells (NaN where undefined).  ``face_psi``
    keeps the face-level mean for boundary checks.
    """

    n: int
    N: int
    samples: int
    seed: int
    cell: int
    spacing: int
    x1: np.ndarray
    x2: np.ndarray
    psi: np.ndarray
    psi_se: np.ndarray
    grad: np.ndarray
    face_psi: np.ndarray
    weights_sha256: str = ""

    def positions(self):
        X1, X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        return X1, X2

    def valid(self):
        return np.isfinite(self.psi)

    def gradient_valid(self):
        return np.all(np.isfinite(self.grad), axis=-1)

    def face_positions(self):
        idx = np.arange(-self.N, self.N + 1) / (2 * self.n * self.N)
        return np.meshgrid(idx, idx, indexing="ij")

    def envelope_violation(self):
        """Largest amount by which a face mean leaves [psi_minus, psi_plus]."""
        X1, X2 = self.face_positions()
        m = np.isfinite(self.face_psi)
        lo = self.n * np.abs(X1) - 0.25
        hi = -self.n * np.abs(X2) + 0.25
        below = np.where(m, lo - self.face_psi, -np.inf).max()
        above = np.where(m, self.face_psi - hi, -np.inf).max()
        return float(max(below, above, 0.0))

    def boundary_deviation(self):
        """Largest gap between boundary-face means and the boundary profile."""
        X1, X2 = self.face_positions()
        I, J = np.meshgrid(np.arange(-self.N, self.N + 1), np.arange(-self.N, self.N + 1), indexing="ij")
        ring = np.abs(I) + np.abs(J) == self.N
        prof = 0.5 * self.n * (np.abs(X1) - np.abs(X2))
        return float(np.max(np.abs(self.face_psi[ring] - prof[ring])))


def _cell_layout(N, n):
    c = 2 * n
    lo = math.ceil((-N + n) / c)
    hi = math.floor((N - n + 1) / c)
    starts = np.array([c * a - n for a in range(lo, hi + 1)])
    return c, starts


def shape_from_heights(batches, N, n, spacing=4, seed=0, weights_sha256=""):
    """Assemble an :class:`EmpiricalShape` from batches of height arrays (quarters).

    Each batch has shape ``(B, 2N+2, 2N+2)`` indexed by face lower-left
    corner with offset -N; faces outside ``|i| + |j| <= N`` are ignored.
    """
    c, starts = _cell_layout(N, n)
    size = 2 * N + 1
    I, J = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1), indexing="ij")
    inside = np.abs(I) + np.abs(J) <= N
    na = len(starts)
    s1 = np.zeros((na, na))
    s2 = np.zeros((na, na))
    face_sum = np.zeros((size, size))
    count = 0
    # cell membership: all faces of the cell inside the diamond
    full = np.zeros((na, na), dtype=bool)
    for a, ia in enumerate(starts):
        for b, jb in enumerate(starts):
            full[a, b] = inside[ia + N: ia + N + c, jb + N: jb + N + c].all()
    for hts in batches:
        h = np.asarray(hts)[:, :size, :size].astype(float) / (4.0 * N)
        face_sum += h.sum(axis=0)
        count += h.shape[0]
        # block means over c x c faces
        first = starts[0] + N
        span = c * na
        blk = h[:, first: first + span, first: first + span]
        blk = blk.reshape(h.shape[0], na, c, na, c).mean(axis=(2, 4))
        s1 += blk.sum(axis=0)
        s2 += (blk**2).sum(axis=0)
    if count == 0:
        raise ValueError("no samples")
    mean = s1 / count
    var = np.maximum(s2 / count - mean**2, 0.0) * count / max(count - 1, 1)
    se = np.sqrt(var / count)
    psi = np.where(full, mean, np.nan)
    psi_se = np.where(full, se, np.nan)
    face_psi = np.where(inside, face_sum / count, np.nan)
    centers = (starts + (c - 1) / 2.0) / (2 * n * N)
    grad = _gradient(psi, spacing, c / (2 * n * N))
    return EmpiricalShape(n, N, count, seed, c, spacing, centers, centers.copy(), psi, psi_se, grad,
                          face_psi, weights_sha256)


def _gradient(psi, s, dx):
    g = np.full(psi.shape + (2,), np.nan)
    g[s:-s, :, 0] = (psi[2 * s:, :] - psi[: -2 * s, :]) / (2 * s * dx)
    g[:, s:-s, 1] = (psi[:, 2 * s:] - psi[:, : -2 * s]) / (2 * s * dx)
    return g


def empirical_limit_shape(w0, N, samples, seed, spacing=4, chunk=None):
    """Average rescaled heights of ``samples`` exact samples of A_N with weights w0.

    Sample b uses seed ``seed + b``.
    """
    if N < 32:
        raise ValueError("N must be at least 32")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if chunk is None:
        chunk = max(1, min(samples, int(4e7 // (2 * N + 2) ** 2)))

    def batches():
        for start in range(0, samples, chunk):
            seeds = [seed + b for b in range(start, min(samples, start + chunk))]
            _, _, heights = sample_aztec_batch(N, w0, seeds)
            yield heights

    return shape_from_heights(batches(), N, w0.n, spacing, seed, w0.sha256())


def _match_field(shape, rho):
    mis = np.linalg.norm(shape.grad - np.asarray(rho, dtype=float), axis=-1)
    return np.where(shape.gradient_valid(), mis, np.inf)


def _quadratic_fit(X, Y, F):
    A = np.column_stack([np.ones_like(X), X, Y, X * X / 2, X * Y, Y * Y / 2])
    coef, *_ = np.linalg.lstsq(A, F, rcond=None)
    resid = F - A @ coef
    return coef, float(np.sqrt(np.mean(resid**2)))


def speed_limit_shape(shape, rho, tol=0.05, fit_radius=None, reference=None):
    """Speed ``psi(x) - x.rho`` at the point where the empirical gradient equals rho.

    The matching cell is the interior minimiser of ``|grad psi - rho|``; a
    quadratic fit of ``psi - x.rho`` around it locates the stationary point.
    The error bar adds the sample standard error, the fit residual and, when
    a ``reference`` shape at a different N is given, the change of the
    estimate between the two shapes.  All cells within ``tol`` are returned
    in ``details["matches"]`` (several well-separated ones indicate a facet).
    """
    rho = (float(rho[0]), float(rho[1]))
    mis = _match_field(shape, rho)
    idx = np.unravel_index(np.argmin(mis), mis.shape)
    best = float(mis[idx])
    if not best < tol:
        raise NotResolved(f"no interior cell has gradient within {tol} of {rho} (best {best:.3f})")
    X1, X2 = shape.positions()
    f = shape.psi - rho[0] * X1 - rho[1] * X2
    r = fit_radius or 2 * shape.spacing
    a, b = idx
    sl = (slice(max(0, a - r), a + r + 1), slice(max(0, b - r), b + r + 1))
    win = np.isfinite(f[sl])
    x0 = np.array([X1[idx], X2[idx]])
    dX = X1[sl][win] - x0[0]
    dY = X2[sl][win] - x0[1]
    coef, resid = _quadratic_fit(dX, dY, f[sl][win])
    g = coef[1:3]
    H = np.array([[coef[3], coef[4]], [coef[4], coef[5]]])
    cell_dx = shape.cell / (2 * shape.n * shape.N)
    step = None
    if np.linalg.cond(H) < 1e8:
        step = -np.linalg.solve(H, g)
    if step is None or np.linalg.norm(step) > r * cell_dx:
        # flat (facet) or ill-conditioned fit: stay at the best cell
        step = np.zeros(2)
    xs = x0 + step
    v = float(coef[0] + g @ step + 0.5 * step @ H @ step)
    se = float(shape.psi_se[idx])
    err = se + resid
    details = {"best_mismatch": best, "fit_residual": resid, "standard_error": se, "cell": (int(a), int(b)),
               "psi_hessian": H.tolist()}
    if reference is not None:
        ref = speed_limit_shape(reference, rho, tol, fit_radius)
        details["reference_v"] = ref.v
        err += abs(ref.v - v)
    good = np.argwhere(mis < tol)
    details["matches"] = [
        {"x": (float(X1[i, j]), float(X2[i, j])), "v": float(f[i, j]), "mismatch": float(mis[i, j])}
        for i, j in good
    ]
    return SpeedEstimate(rho, v, LIMIT_SHAPE, {"N": shape.N, "samples": shape.samples}, err,
                         x=(float(xs[0]), float(xs[1])), details=details)


def limit_shape_hessian(shape, rho, **kw):
    """Hessian of v at rho from the shape: ``D v = -x(rho)`` gives ``D^2 v = -(D^2 psi)^-1``.

    Returns ``(matrix, det)``; the curvature of psi comes from the local
    quadratic fit of :func:`speed_limit_shape`.
    """
    est = speed_limit_shape(shape, rho, **kw)
    H = np.array(est.details["psi_hessian"])
    D = -np.linalg.inv(H)
    D = (D + D.T) / 2
    return D, float(np.linalg.det(D))


@dataclass
class Facet:
    rho: tuple
    cells: np.ndarray  # (k, 2) cell indices
    positions: np.ndarray  # (k, 2) rescaled centres
    diameter: float  # in cells
    v_values: np.ndarray  # psi - x.rho per cell

    @property
    def v_spread(self):
        return float(self.v_values.max() - self.v_values.min())

    @property
    def x_spread(self):
        return float(np.max(np.linalg.norm(self.positions - self.positions.mean(axis=0), axis=1)))


def facets(shape, rho, tol=0.05, min_cells=2):
    """Connected sets of cells whose gradient is within ``tol`` of rho, largest first."""
    rho = (float(rho[0]), float(rho[1]))
    mis = _match_field(shape, rho)
    labels, count = ndimage.label(mis < tol)
    X1, X2 = shape.positions()
    f = shape.psi - rho[0] * X1 - rho[1] * X2
    out = []
    for lab in range(1, count + 1):
        cells = np.argwhere(labels == lab)
        if len(cells) < min_cells:
            continue
        diff = cells[:, None, :] - cells[None, :, :]
        diam = float(np.sqrt((diff**2).sum(-1)).max())
        pos = np.column_stack([X1[labels == lab], X2[labels == lab]])
        out.append(Facet(rho, cells, pos, diam, f[labels == lab]))
    out.sort(key=lambda F: -len(F.cells))
    return out


def corner_identity_residual(shape, corner, tol=0.05):
    """Largest |psi - corner_profile| over cells whose gradient is within tol of a corner slope."""
    mis = _match_field(shape, corner)
    X1, X2 = shape.positions()
    sel = mis < tol
    if not sel.any():
        return None
    prof = corner[0] * X1 + corner[1] * X2 + (abs(corner[1]) - abs(corner[0])) / (4 * shape.n)
    return float(np.max(np.abs(shape.psi[sel] - prof[sel])))


# ---------------------------------------------------------------------------
# fluctuations


@dataclass
class FluctuationStats:
    x: tuple
    times: np.ndarray
    variance: np.ndarray
    mean: np.ndarray
    runs: int
    sse: dict  # model -> residual sum of squares over the fit window
    scale: dict  # model -> fitted constant
    fit_window: tuple

    @property
    def model(self):
        """Better-fitting model among constant and logarithmic growth."""
        return "log" if self.sse["log"] < self.sse["const"] else "const"


def _one_parameter_fit(basis, y):
    c = float(basis @ y / (basis @ basis))
    return c, float(np.sum((y - c * basis) ** 2))


def fit_growth_models(times, var, window=(16, None)):
    """Least-squares fits of Var(k) to c, c log k and c k over the window."""
    k = np.asarray(times, dtype=float)
    lo, hi = window
    sel = (k >= lo) & ((k <= hi) if hi is not None else True)
    kk, y = k[sel], np.asarray(var, dtype=float)[sel]
    sse, scale = {}, {}
    for name, basis in (("const", np.ones_like(kk)), ("log", np.log(kk)), ("linear", kk)):
        scale[name], sse[name] = _one_parameter_fit(basis, y)
    return sse, scale


def _block_faces(i, j, m, k):
    """Faces of the fundamental-domain block containing face (i, j) that lie in D_k."""
    i0, j0 = m * (i // m), m * (j // m)
    I, J = np.meshgrid(np.arange(i0, i0 + m), np.arange(j0, j0 + m), indexing="ij")
    keep = np.abs(I) + np.abs(J) <= k
    return I[keep], J[keep]


def fluctuation_stats(w0, x, N, runs, seed, window=(16, None), chunk=50, block=True):
    """Variance of the height at rescaled position ``x`` along Aztec growth.

    At time k the tracked face is ``round(x * 2 n k)``.  With ``block`` the
    height is averaged over the 2n x 2n fundamental-domain block containing
    that face, which removes the period-scale variation between faces of the
    domain (the tracked face moves through the domain as k grows).  Runs use
    seeds ``seed + r`` and the forward weight dynamics from w0.
    """
    if runs < 50:
        raise ValueError("need at least 50 runs for a usable variance estimate")
    n = w0.n
    m = 2 * n
    x = (float(x[0]), float(x[1]))
    _check_in_Q(x, n)
    series = np.zeros((runs, N + 1))
    for start in range(0, runs, chunk):
        seeds = [seed + r for r in range(start, min(runs, start + chunk))]
        rows = np.zeros((len(seeds), N + 1))

        def record(k, hor, ver, heights, rows=rows):
            i = int(round(x[0] * m * k))
            j = int(round(x[1] * m * k))
            while abs(i) + abs(j) > k:  # only for the first few steps
                i -= int(np.sign(i))
            if block:
                I, J = _block_faces(i, j, m, k)
                rows[:, k] = heights[:, I + N, J + N].mean(axis=1) / 4.0
            else:
                rows[:, k] = heights[:, i + N, j + N] / 4.0

        grow_aztec_batch(N, w0, seeds, callback=record)
        series[start: start + len(seeds)] = rows
    times = np.arange(N + 1)
    var = series.var(axis=0, ddof=1)
    sse, scale = fit_growth_models(times, var, window)
    return FluctuationStats(x, times, var, series.mean(axis=0), runs, sse, scale,
                            (window[0], window[1] if window[1] is not None else N))


__all__ = [
    "SpeedEstimate",
    "SpeedTerms",
    "SpeedHessian",
    "SmoothSlopeError",
    "StencilError",
    "NotResolved",
    "speed_kasteleyn",
    "speed_from_terms",
    "speed_hessian",
    "hessian_from_stencil",
    "corner_extrapolation",
    "envelopes",
    "boundary_profile",
    "corner_profile",
    "EmpiricalShape",
    "empirical_limit_shape",
    "shape_from_heights",
    "speed_limit_shape",
    "limit_shape_hessian",
    "facets",
    "Facet",
    "corner_identity_residual",
    "FluctuationStats",
    "fluctuation_stats",
    "fit_growth_models",
]
