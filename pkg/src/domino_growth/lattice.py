"""Square-lattice geometry, dimer configurations and height functions.

Conventions
-----------
* Vertices are integer points ``(x, y)``.  A vertex is white at time ``k``
  when ``x + y = k (mod 2)``; colours are never stored.
* Face ``(i, j)`` is the unit square with lower-left corner ``(i, j)``.  It is
  even at time ``k`` when ``i + j = k (mod 2)``.
* Edges are stored in two boolean arrays over a rectangular vertex box:
  ``hor[x, y]`` is the edge ``(x, y)-(x+1, y)`` and ``ver[x, y]`` the edge
  ``(x, y)-(x, y+1)`` (indices relative to the box origin).
* Heights live on faces and are stored as integers in units of 1/4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

# Match directions used by the per-vertex view and the dump format.
NONE, NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3, 4
DIRECTION_CHARS = ".NESW"

REGION_KINDS = ("aztec", "window", "torus")


def is_white(x, y, k):
    """True where vertex (x, y) is white at time k (vectorised)."""
    return (np.asarray(x) + np.asarray(y) - k) % 2 == 0


def face_is_even(i, j, k):
    """True where face (i, j) is even at time k (vectorised)."""
    return (np.asarray(i) + np.asarray(j) - k) % 2 == 0


@dataclass(frozen=True)
class Region:
    """A region descriptor with its boundary-behaviour tag.

    ``aztec``  : Aztec diamond A_size, vertices with |x-1/2|+|y-1/2| <= size.
    ``window`` : faces within l1-distance ``size`` of ``center``; only the
                 edges of faces at distance <= size-1 are meaningful.
    ``torus``  : periodic square of side ``size`` (must be even).
    """

    kind: str
    size: int
    center: tuple = (0, 0)

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.size < 0:
            raise ValueError("region size must be non-negative")
        if self.kind == "torus" and (self.size == 0 or self.size % 2):
            raise ValueError("torus side must be a positive even integer")
        object.__setattr__(self, "center", (int(self.center[0]), int(self.center[1])))

    # vertex box -----------------------------------------------------------
    @property
    def origin(self):
        """Lower-left vertex of the storage box."""
        if self.kind == "aztec":
            return (-self.size, -self.size)
        if self.kind == "window":
            return (self.center[0] - self.size, self.center[1] - self.size)
        return (0, 0)

    @property
    def shape(self):
        """Shape of the vertex box (and of the edge arrays)."""
        s = 2 * self.size + 2 if self.kind != "torus" else self.size
        return (s, s)

    def vertex_coords(self):
        x0, y0 = self.origin
        nx, ny = self.shape
        return np.meshgrid(np.arange(x0, x0 + nx), np.arange(y0, y0 + ny), indexing="ij")

    # faces ----------------------------------------------------------------
    def face_mask(self):
        """Mask over the face box (same indexing as the vertex box) of region faces."""
        x0, y0 = self.origin
        X, Y = self.vertex_coords()
        if self.kind == "torus":
            return np.ones(self.shape, dtype=bool)
        cx, cy = self.center
        return np.abs(X - cx) + np.abs(Y - cy) <= self.size

    def contains_face(self, face):
        i, j = face
        if self.kind == "torus":
            return 0 <= i < self.size and 0 <= j < self.size
        return abs(i - self.center[0]) + abs(j - self.center[1]) <= self.size

    def vertex_mask(self):
        """Vertices that must be matched (all region vertices, or interior ones for windows)."""
        X, Y = self.vertex_coords()
        if self.kind == "torus":
            return np.ones(self.shape, dtype=bool)
        if self.kind == "aztec":
            return np.abs(2 * X - 1) + np.abs(2 * Y - 1) <= 2 * self.size
        # window: a vertex is interior when its four surrounding faces are in the region
        cx, cy = self.center
        inside = np.ones(self.shape, dtype=bool)
        for di in (-1, 0):
            for dj in (-1, 0):
                inside &= np.abs(X + di - cx) + np.abs(Y + dj - cy) <= self.size
        return inside

    def edge_masks(self):
        """Masks of the edges that may be occupied in this region."""
        X, Y = self.vertex_coords()
        if self.kind == "torus":
            m = np.ones(self.shape, dtype=bool)
            return m, m.copy()
        if self.kind == "aztec":
            vm = self.vertex_mask()
            hm = np.zeros_like(vm)
            hm[:-1, :] = vm[:-1, :] & vm[1:, :]
            vv = np.zeros_like(vm)
            vv[:, :-1] = vm[:, :-1] & vm[:, 1:]
            return hm, vv
        # window: edges of faces at distance <= size-1
        cx, cy = self.center
        r = self.size - 1
        d = np.abs(X - cx) + np.abs(Y - cy)  # distance of face with lower-left corner (X, Y)
        fm = d <= r
        hm = fm.copy()  # bottom edge of face (X, Y) is hor[X, Y]
        hm[:, 1:] |= fm[:, :-1]  # top edge of face (X, Y-1)
        vv = fm.copy()  # left edge of face (X, Y) is ver[X, Y]
        vv[1:, :] |= fm[:-1, :]  # right edge of face (X-1, Y)
        return hm, vv


def aztec(N):
    return Region("aztec", int(N))


def window(M, center=(0, 0)):
    return Region("window", int(M), tuple(center))


def torus(side):
    return Region("torus", int(side))


@dataclass(frozen=True, eq=False)
class DimerConfig:
    """A dimer configuration on a region at a given time (colour parity)."""

    region: Region
    time: int
    hor: np.ndarray
    ver: np.ndarray

    def __post_init__(self):
        hor = np.array(self.hor, dtype=bool)
        ver = np.array(self.ver, dtype=bool)
        if hor.shape != self.region.shape or ver.shape != self.region.shape:
            raise ValueError(
                f"edge arrays have shape {hor.shape}/{ver.shape}, region needs {self.region.shape}"
            )
        hor.setflags(write=False)
        ver.setflags(write=False)
        object.__setattr__(self, "hor", hor)
        object.__setattr__(self, "ver", ver)

    def __eq__(self, other):
        if not isinstance(other, DimerConfig):
            return NotImplemented
        return (
            self.region == other.region
            and self.time == other.time
            and np.array_equal(self.hor, other.hor)
            and np.array_equal(self.ver, other.ver)
        )

    def __hash__(self):
        return hash((self.region, self.time, self.hor.tobytes(), self.ver.tobytes()))

    @property
    def dimer_count(self):
        return int(self.hor.sum() + self.ver.sum())

    def directions(self):
        """Per-vertex match direction array (NONE/NORTH/EAST/SOUTH/WEST)."""
        d = np.zeros(self.region.shape, dtype=np.int8)
        wrap = self.region.kind == "torus"
        h, v = self.hor, self.ver
        d[h] = EAST
        d[v] = NORTH
        west = np.roll(h, 1, axis=0)
        south = np.roll(v, 1, axis=1)
        if not wrap:
            west[0, :] = False
            south[:, 0] = False
        d[west] = WEST
        d[south] = SOUTH
        return d

    @classmethod
    def from_directions(cls, region, time, dirs):
        """Build a configuration from per-vertex directions; requires reciprocity."""
        dirs = np.asarray(dirs)
        if dirs.shape != region.shape:
            raise ValueError("direction array does not match region box")
        wrap = region.kind == "torus"
        east = dirs == EAST
        north = dirs == NORTH
        west_next = np.roll(dirs == WEST, -1, axis=0)
        south_next = np.roll(dirs == SOUTH, -1, axis=1)
        if not wrap:
            west_next[-1, :] = False
            south_next[:, -1] = False
        if not (np.array_equal(east, west_next) and np.array_equal(north, south_next)):
            raise ValueError("match directions are not reciprocal")
        return cls(region, time, east, north)

    def dimers(self):
        """List of dimers as ((x1, y1), (x2, y2)) in absolute coordinates."""
        x0, y0 = self.region.origin
        s = self.region.size
        wrap = self.region.kind == "torus"
        out = []
        for x, y in zip(*np.nonzero(self.hor)):
            x2 = (x + 1) % s if wrap else x + 1
            out.append(((int(x + x0), int(y + y0)), (int(x2 + x0), int(y + y0))))
        for x, y in zip(*np.nonzero(self.ver)):
            y2 = (y + 1) % s if wrap else y + 1
            out.append(((int(x + x0), int(y + y0)), (int(x + x0), int(y2 + y0))))
        return out


def vertex_degrees(config):
    """Number of occupied edges at each vertex of the box."""
    h = config.hor.astype(np.int8)
    v = config.ver.astype(np.int8)
    deg = h + v
    if config.region.kind == "torus":
        deg = deg + np.roll(h, 1, axis=0) + np.roll(v, 1, axis=1)
    else:
        deg[1:, :] += h[:-1, :]
        deg[:, 1:] += v[:, :-1]
    return deg


def validate_matching(config):
    """True iff ``config`` is a perfect matching of its region (interior for windows)."""
    region = config.region
    hm, vm = region.edge_masks()
    if np.any(config.hor & ~hm) or np.any(config.ver & ~vm):
        return False
    if region.kind != "torus":
        # edges leaving the box would have been stored in the last row/column
        if config.hor[-1, :].any() or config.ver[:, -1].any():
            return False
    deg = vertex_degrees(config)
    need = region.vertex_mask()
    if np.any(deg > 1):
        return False
    return bool(np.all(deg[need] == 1))


# ---------------------------------------------------------------------------
# heights


def height_increments(hor, ver, origin, k, wrap=False):
    """Height differences (quarters) between neighbouring faces.

    Returns ``(dx, dy)`` over the face box: ``dx[i, j] = h(i+1, j) - h(i, j)``
    (crossing the vertical edge at x = i+1) and ``dy[i, j] = h(i, j+1) - h(i, j)``
    (crossing the horizontal edge at y = j+1).  The crossing sign is +1 when
    the vertex on the right of the direction of travel is white at time k.
    Entries whose crossing edge lies outside the box are 0.
    """
    x0, y0 = origin
    nx, ny = hor.shape
    X, Y = np.meshgrid(np.arange(x0, x0 + nx), np.arange(y0, y0 + ny), indexing="ij")
    occ_v = np.roll(ver, -1, axis=0).astype(np.int64)  # ver[i+1, j]
    occ_h = np.roll(hor, -1, axis=1).astype(np.int64)  # hor[i, j+1]
    sig_x = np.where(is_white(X + 1, Y, k), 1, -1)
    sig_y = np.where(is_white(X + 1, Y + 1, k), 1, -1)
    dx = sig_x * (4 * occ_v - 1)
    dy = sig_y * (4 * occ_h - 1)
    if not wrap:
        dx[-1, :] = 0
        dy[:, -1] = 0
    return dx, dy


def _to_quarters(value):
    q = Fraction(value) * 4
    if q.denominator != 1:
        raise ValueError(f"height {value} is not a multiple of 1/4")
    return int(q)


@dataclass(frozen=True, eq=False)
class HeightField:
    """Face heights in quarter units over a region's face box."""

    region: Region
    time: int
    quarters: np.ndarray  # int64 over the face box; undefined entries are 0
    mask: np.ndarray  # faces where the height is defined
    anchor: tuple
    anchor_value: Fraction

    def __post_init__(self):
        q = np.array(self.quarters, dtype=np.int64)
        m = np.array(self.mask, dtype=bool)
        q.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "quarters", q)
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "anchor_value", Fraction(self.anchor_value))

    def index(self, face):
        x0, y0 = self.region.origin
        i, j = face[0] - x0, face[1] - y0
        if not (0 <= i < self.mask.shape[0] and 0 <= j < self.mask.shape[1]) or not self.mask[i, j]:
            raise KeyError(f"face {tuple(face)} outside the height field")
        return i, j

    def quarter(self, face):
        return int(self.quarters[self.index(face)])

    def __getitem__(self, face):
        return Fraction(self.quarter(face), 4)

    def faces(self):
        x0, y0 = self.region.origin
        I, J = np.nonzero(self.mask)
        return I + x0, J + y0

    def values(self):
        """Heights as floats (NaN outside the region)."""
        out = self.quarters.astype(float) / 4.0
        out[~self.mask] = np.nan
        return out


def integrate_increments(dx, dy, mask, start):
    """Integrate face increments over a row/column-convex face set.

    ``start`` is a box index lying in ``mask`` whose row (fixed second index)
    meets every column of the set.  Returns quarters relative to ``start``.
    """
    si, sj = start
    nx, ny = mask.shape
    h = np.zeros(mask.shape, dtype=np.int64)
    row = np.zeros(nx, dtype=np.int64)
    # along the start row
    row[si + 1:] = np.cumsum(dx[si:nx - 1, sj])
    row[:si] = -np.cumsum(dx[:si, sj][::-1])[::-1]
    h[:, sj] = row
    # up and down each column
    up = np.cumsum(dy[:, sj:ny - 1], axis=1)
    h[:, sj + 1:] = row[:, None] + up
    down = np.cumsum(dy[:, :sj][:, ::-1], axis=1)[:, ::-1]
    h[:, :sj] = row[:, None] - down
    h[~mask] = 0
    return h


def height_field(config, anchor, anchor_value=0):
    """Height function of ``config`` with ``h(anchor) = anchor_value``."""
    region = config.region
    anchor = (int(anchor[0]), int(anchor[1]))
    if not region.contains_face(anchor):
        raise ValueError(f"anchor face {anchor} outside region")
    aq = _to_quarters(anchor_value)
    x0, y0 = region.origin
    wrap = region.kind == "torus"
    dx, dy = height_increments(config.hor, config.ver, region.origin, config.time, wrap=wrap)
    mask = region.face_mask()
    if region.kind == "torus":
        mask = np.ones(region.shape, dtype=bool)
        dx = dx.copy()
        dy = dy.copy()
        dx[-1, :] = 0
        dy[:, -1] = 0
        start = (0, 0)
    else:
        start = (region.center[0] - x0, region.center[1] - y0)
    h = integrate_increments(dx, dy, mask, start)
    ai, aj = anchor[0] - x0, anchor[1] - y0
    h = h - h[ai, aj] + aq
    h[~mask] = 0
    return HeightField(region, config.time, h, mask, anchor, Fraction(aq, 4))


def height_order(hA, hB):
    """Pointwise comparison of two height fields: '==', '<=', '>=' or 'incomparable'."""
    if hA.region != hB.region or not np.array_equal(hA.mask, hB.mask):
        raise ValueError("height fields live on different regions")
    if hA.time % 2 != hB.time % 2:
        raise ValueError("height fields use different colour conventions")
    a = hA.quarters[hA.mask]
    b = hB.quarters[hB.mask]
    le = bool(np.all(a <= b))
    ge = bool(np.all(a >= b))
    if le and ge:
        return "=="
    if le:
        return "<="
    if ge:
        return ">="
    return "incomparable"


# ---------------------------------------------------------------------------
# simple constructors used by tests and tools


def brickwork(region, time=0, orientation="horizontal"):
    """Brickwork tiling of the full box, restricted to the region's edges.

    For windows this gives a configuration matching every interior vertex.
    Aztec diamonds are not tileable by brickwork; use the shuffle instead.
    """
    if region.kind == "aztec":
        raise ValueError("brickwork does not tile an Aztec diamond")
    hor = np.zeros(region.shape, dtype=bool)
    ver = np.zeros(region.shape, dtype=bool)
    x0, y0 = region.origin
    if orientation == "horizontal":
        hor[0::2, :] = True
    elif orientation == "vertical":
        ver[:, 0::2] = True
    else:
        raise ValueError("orientation must be 'horizontal' or 'vertical'")
    hm, vm = region.edge_masks()
    return DimerConfig(region, time, hor & hm, ver & vm)


def flip_moves(hor, ver, wrap=False):
    """Faces of the box carrying a parallel pair: (horizontal pair mask, vertical pair mask).

    Face masks are indexed by lower-left corner; faces touching the last
    row/column of a non-periodic box are excluded.
    """
    top = np.roll(hor, -1, axis=1)
    right = np.roll(ver, -1, axis=0)
    hpair = hor & top
    vpair = ver & right
    if not wrap:
        hpair[:, -1] = False
        hpair[-1, :] = False
        vpair[-1, :] = False
        vpair[:, -1] = False
    return hpair, vpair


def apply_flips(hor, ver, faces, wrap=False):
    """Rotate the parallel pair on every face in the boolean mask ``faces`` (in place).

    Selected faces must carry a parallel pair and must not share edges.
    """
    hpair, vpair = flip_moves(hor, ver, wrap)
    hsel = faces & hpair
    vsel = faces & vpair
    if np.any(faces & ~(hpair | vpair)):
        raise ValueError("selected face has no parallel pair")
    # horizontal pair -> vertical pair
    hor[hsel] = False
    hor[np.roll(hsel, 1, axis=1)] = False
    ver[hsel] = True
    ver[np.roll(hsel, 1, axis=0)] = True
    # vertical pair -> horizontal pair (computed from the pre-flip selection)
    ver[vsel] = False
    ver[np.roll(vsel, 1, axis=0)] = False
    hor[vsel] = True
    hor[np.roll(vsel, 1, axis=1)] = True


def random_box_tiling(shape, rng, sweeps=50, start="horizontal"):
    """Random tiling of a rectangular vertex box by random flips from brickwork.

    Each sweep visits the two face sublattices and flips every flippable face
    with probability 1/2.  Returns ``(hor, ver)``.
    """
    nx, ny = shape
    hor = np.zeros(shape, dtype=bool)
    ver = np.zeros(shape, dtype=bool)
    if start == "horizontal":
        hor[0:nx - 1:2, :] = True
    else:
        ver[:, 0:ny - 1:2] = True
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    for _ in range(sweeps):
        for par in (0, 1):
            hpair, vpair = flip_moves(hor, ver)
            sel = ((I + J) % 2 == par) & (hpair | vpair) & (rng.random(shape) < 0.5)
            apply_flips(hor, ver, sel)
    return hor, ver
