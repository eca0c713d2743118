"""Periodic edge weights and their deterministic evolution under the shuffle.

A :class:`PeriodicWeights` stores one positive weight per edge of the
2n x 2n fundamental domain (``hor[x, y]`` for the edge ``(x, y)-(x+1, y)``,
``ver[x, y]`` for ``(x, y)-(x, y+1)``, indices mod 2n) together with the
time parity.  The per-face view used by the shuffle is the tuple
``(a, b, c, d) = (top, right, bottom, left)`` around each face that is even
at that parity; these faces tile the edge set, so both views carry the same
data.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class WeightError(ValueError):
    """Invalid weight data (non-positive, non-finite or malformed)."""


@dataclass(frozen=True, eq=False)
class PeriodicWeights:
    n: int
    time_parity: int
    hor: np.ndarray
    ver: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise WeightError("n must be a positive integer")
        m = 2 * n
        hor = np.array(self.hor, dtype=float)
        ver = np.array(self.ver, dtype=float)
        if hor.shape != (m, m) or ver.shape != (m, m):
            raise WeightError(f"edge arrays must have shape {(m, m)}")
        if not (np.all(np.isfinite(hor)) and np.all(np.isfinite(ver))):
            raise WeightError("weights must be finite")
        if np.any(hor <= 0) or np.any(ver <= 0):
            raise WeightError("weights must be strictly positive")
        hor.setflags(write=False)
        ver.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "time_parity", int(self.time_parity) % 2)
        object.__setattr__(self, "hor", hor)
        object.__setattr__(self, "ver", ver)

    @property
    def period(self):
        return 2 * self.n

    def __eq__(self, other):
        if not isinstance(other, PeriodicWeights):
            return NotImplemented
        return (
            self.n == other.n
            and self.time_parity == other.time_parity
            and np.array_equal(self.hor, other.hor)
            and np.array_equal(self.ver, other.ver)
        )

    def __hash__(self):
        return hash((self.n, self.time_parity, self.hor.tobytes(), self.ver.tobytes()))

    # construction ---------------------------------------------------------
    @classmethod
    def uniform(cls, n, value=1.0, time_parity=0):
        m = 2 * n
        return cls(n, time_parity, np.full((m, m), float(value)), np.full((m, m), float(value)))

    @classmethod
    def random(cls, n, rng, low=0.3, high=3.0, time_parity=0):
        """Independent uniform weights on every edge of the fundamental domain."""
        m = 2 * n
        return cls(n, time_parity, rng.uniform(low, high, (m, m)), rng.uniform(low, high, (m, m)))

    @classmethod
    def from_face_tuples(cls, n, time_parity, tuples):
        """Build from ``{(i, j): (a, b, c, d)}`` over the faces even at ``time_parity``."""
        m = 2 * n
        hor = np.full((m, m), np.nan)
        ver = np.full((m, m), np.nan)
        expected = {(i, j) for i in range(m) for j in range(m) if (i + j - time_parity) % 2 == 0}
        keys = {(int(i) % m, int(j) % m) for i, j in tuples}
        if keys != expected or len(tuples) != len(expected):
            raise WeightError("face tuples must cover exactly the even faces of the domain")
        for (i, j), (a, b, c, d) in tuples.items():
            i, j = int(i) % m, int(j) % m
            hor[i, (j + 1) % m] = a
            ver[(i + 1) % m, j] = b
            hor[i, j] = c
            ver[i, j] = d
        return cls(n, time_parity, hor, ver)

    def at_parity(self, parity):
        """Same edge weights viewed at another time parity."""
        return PeriodicWeights(self.n, parity, self.hor, self.ver)

    # face view --------------------------------------------------------------
    def even_faces(self):
        m = self.period
        return [(i, j) for i in range(m) for j in range(m) if (i + j - self.time_parity) % 2 == 0]

    def face_tuple(self, face):
        """``(a, b, c, d)`` around ``face``; the face must be even at ``time_parity``."""
        i, j = int(face[0]), int(face[1])
        if (i + j - self.time_parity) % 2:
            raise WeightError(f"face {face} is odd at parity {self.time_parity}")
        m = self.period
        i, j = i % m, j % m
        return (
            float(self.hor[i, (j + 1) % m]),
            float(self.ver[(i + 1) % m, j]),
            float(self.hor[i, j]),
            float(self.ver[i, j]),
        )

    def face_tuples(self):
        return {f: self.face_tuple(f) for f in self.even_faces()}

    def tuple_arrays(self):
        """Arrays ``a, b, c, d`` indexed by face (i, j) of the domain (all faces)."""
        h, v = self.hor, self.ver
        a = np.roll(h, -1, axis=1)
        b = np.roll(v, -1, axis=0)
        return a, b, h, v

    @cached_property
    def vertical_probability_table(self):
        """``b*d/(a*c + b*d)`` for every face of the domain (meaningful at even faces)."""
        a, b, c, d = self.tuple_arrays()
        bd = b * d
        return bd / (a * c + bd)

    # serialisation ----------------------------------------------------------
    def to_dict(self):
        faces = []
        for (i, j), (a, b, c, d) in sorted(self.face_tuples().items()):
            faces.append({"i": i, "j": j, "a": a, "b": b, "c": c, "d": d})
        return {"n": self.n, "time_parity": self.time_parity, "faces": faces}

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])
            parity = int(data["time_parity"])
            tuples = {
                (int(f["i"]), int(f["j"])): (float(f["a"]), float(f["b"]), float(f["c"]), float(f["d"]))
                for f in data["faces"]
            }
        except (KeyError, TypeError) as exc:
            raise WeightError(f"malformed weight data: {exc}") from exc
        return cls.from_face_tuples(n, parity, tuples)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def sha256(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def load_weights(path):
    with open(path) as fh:
        return PeriodicWeights.from_json(fh.read())


def save_weights(w, path):
    with open(path, "w") as fh:
        fh.write(w.to_json())
        fh.write("\n")


# ---------------------------------------------------------------------------
# dynamics


def _face_delta(w):
    a, b, c, d = w.tuple_arrays()
    return a, b, c, d, a * c + b * d


def spider_step(w):
    """Weights at the next time step.

    Every edge of an even face g receives the weight of the opposite edge of g
    divided by ``a*c + b*d`` of g; the time parity flips.
    """
    a, b, c, d, delta = _face_delta(w)
    m = w.period
    I, J = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    even = (I + J - w.time_parity) % 2 == 0
    hor = np.empty((m, m))
    ver = np.empty((m, m))
    # edges of face g=(i,j): top hor[i,j+1], right ver[i+1,j], bottom hor[i,j], left ver[i,j]
    top_new = np.where(even, c / delta, np.nan)
    bottom_new = np.where(even, a / delta, np.nan)
    right_new = np.where(even, d / delta, np.nan)
    left_new = np.where(even, b / delta, np.nan)
    hor_from_top = np.roll(top_new, 1, axis=1)  # hor[i, j] = top of face (i, j-1)
    ver_from_right = np.roll(right_new, 1, axis=0)  # ver[i, j] = right of face (i-1, j)
    hor = np.where(even, bottom_new, hor_from_top)
    ver = np.where(even, left_new, ver_from_right)
    return PeriodicWeights(w.n, 1 - w.time_parity, hor, ver)


def spider_step_inverse(w):
    """Inverse of :func:`spider_step`.

    The face update is an involution on a fixed face set, so the inverse is
    the same update applied at the faces that were even one step earlier.
    """
    back = spider_step(w.at_parity(1 - w.time_parity))
    return back.at_parity(1 - w.time_parity)


def creation_probabilities(w, face):
    """``(p_horizontal, p_vertical)`` for creating a pair at an even face."""
    a, b, c, d = w.face_tuple(face)
    delta = a * c + b * d
    return a * c / delta, b * d / delta


# ---------------------------------------------------------------------------
# gauge


@dataclass(frozen=True)
class GaugeInvariants:
    face_weights: np.ndarray  # (2n, 2n) indexed by face
    W1: float
    W2: float

    def close_to(self, other, rtol=1e-10):
        return (
            np.allclose(self.face_weights, other.face_weights, rtol=rtol, atol=0)
            and abs(self.W1 / other.W1 - 1) <= rtol
            and abs(self.W2 / other.W2 - 1) <= rtol
        )


def _edge_sign_white_first(w):
    """+1 for edges whose left/bottom endpoint is white at ``time_parity``, else -1."""
    m = w.period
    X, Y = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return np.where((X + Y - w.time_parity) % 2 == 0, 1.0, -1.0)


def gauge_invariants(w):
    """Face weights and magnetic coordinates of ``w``.

    Face weight: product around the face, counter-clockwise, of edge weights
    traversed white-to-black divided by those traversed black-to-white.

    Magnetic coordinates: the alternating product along a horizontal
    (vertical) cycle with white-to-black edges in the numerator.  A single
    straight cycle is not preserved by the weight dynamics, but the
    geometric mean over the 2n parallel straight cycles is, and that mean is
    what ``W1`` (``W2``) reports.
    """
    lh, lv = np.log(w.hor), np.log(w.ver)
    s = _edge_sign_white_first(w)
    a, b, c, d = (np.log(t) for t in w.tuple_arrays())
    m = w.period
    I, J = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    even = (I + J - w.time_parity) % 2 == 0
    lf = np.where(even, 1.0, -1.0) * (a + c - b - d)
    # row y: product over x of hor[x, y]^{s}; column x: product over y of ver[x, y]^{s}
    W1 = float(np.exp(np.sum(s * lh) / m))
    W2 = float(np.exp(np.sum(s * lv) / m))
    return GaugeInvariants(np.exp(lf), W1, W2)


def _incidence(m):
    """Edge-vertex incidence of the 2n-torus; edges ordered hor (x, y) then ver (x, y)."""
    ne = 2 * m * m
    inc = np.zeros((ne, m * m))
    idx = np.arange(m * m).reshape(m, m)
    X, Y = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    rows = np.arange(m * m)
    inc[rows, idx[X, Y].ravel()] = 1
    inc[rows, idx[(X + 1) % m, Y].ravel()] += 1
    inc[m * m + rows, idx[X, Y].ravel()] = 1
    inc[m * m + rows, idx[X, (Y + 1) % m].ravel()] += 1
    return inc


_PROJECTORS = {}


def _gauge_projector(m):
    """Orthogonal projector onto the complement of the gauge directions (log scale)."""
    if m not in _PROJECTORS:
        E = _incidence(m)
        pinv = np.linalg.pinv(E)
        _PROJECTORS[m] = np.eye(E.shape[0]) - E @ pinv
    return _PROJECTORS[m]


def gauge_normalize(w):
    """Gauge representative whose weights have geometric mean 1 at every vertex."""
    m = w.period
    x = np.concatenate([np.log(w.hor).ravel(), np.log(w.ver).ravel()])
    y = _gauge_projector(m) @ x
    hor = np.exp(y[: m * m]).reshape(m, m)
    ver = np.exp(y[m * m:]).reshape(m, m)
    return PeriodicWeights(w.n, w.time_parity, hor, ver)


def gauge_transform(w, vertex_factors):
    """Multiply every edge weight by the factors of its two endpoints."""
    f = np.asarray(vertex_factors, dtype=float)
    hor = w.hor * f * np.roll(f, -1, axis=0)
    ver = w.ver * f * np.roll(f, -1, axis=1)
    return PeriodicWeights(w.n, w.time_parity, hor, ver)


def trajectory(w0, steps, normalize=True):
    """List ``[w_0, ..., w_steps]`` of weights along the spider dynamics."""
    out = [gauge_normalize(w0) if normalize else w0]
    for _ in range(steps):
        nxt = spider_step(out[-1])
        out.append(gauge_normalize(nxt) if normalize else nxt)
    return out
