"""The domino shuffle: deletion, sliding, creation and colour interchange.

Two modes share one vectorised sweep kernel:

* Aztec growth: a configuration on A_k at time k becomes one on A_{k+1};
  starting from the empty A_0 this is the classical exact sampler.
* Window mode: a configuration known on the faces within distance M of a
  centre evolves for up to M-1 steps; after each step the region of exactly
  determined edges shrinks by one, so no boundary rule is ever invented.

Heights are tracked in quarter units: odd faces keep their height and an even
face changes by (H_before + H_after - V_before - V_after)/4, where H (V)
counts occupied horizontal (vertical) edges of the face.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import DimerConfig, HeightField, Region, aztec, window
from .rng import BatchTickets, CouplingTicket
from .weights import PeriodicWeights, gauge_normalize, spider_step, spider_step_inverse


class ShuffleError(RuntimeError):
    """A shuffle invariant was violated or a request exceeds what can be computed exactly."""


class LocalityError(ShuffleError):
    """Window evolution asked for more steps than the window supports."""


# ---------------------------------------------------------------------------
# kernel


def _sublattice(lo, hi, parity):
    start = lo + ((parity - lo) % 2)
    return np.arange(start, hi + 1, 2)


def sweep(hor, ver, origin, k, center, radius, pv_table, tickets, heights=None, check=True):
    """Apply one shuffle step in place to the even faces within ``radius`` of ``center``.

    ``hor``/``ver`` are edge arrays over a vertex box with lower-left vertex
    ``origin``; ``heights`` (optional) is an int64 array of quarter heights
    indexed like the face box.  ``pv_table`` gives the vertical creation
    probability by face position modulo its size.  Faces processed in one call
    are pairwise edge-disjoint, so the result does not depend on order.

    Arrays may carry leading batch axes (one configuration per batch entry);
    the tickets must then return draws with the same leading axes.
    """
    if radius < 0:
        return
    x0, y0 = origin
    cx, cy = center
    m = pv_table.shape[0]
    for ipar in (0, 1):
        I = _sublattice(cx - radius, cx + radius, ipar)
        J = _sublattice(cy - radius, cy + radius, k - ipar)
        if I.size == 0 or J.size == 0:
            continue
        mask = (np.abs(I - cx)[:, None] + np.abs(J - cy)[None, :]) <= radius
        i0, i1 = I[0] - x0, I[-1] - x0
        j0, j1 = J[0] - y0, J[-1] - y0
        if i0 < 0 or j0 < 0 or i1 + 1 >= hor.shape[-2] or j1 + 1 >= hor.shape[-1]:
            raise ShuffleError("sweep reaches outside the storage box")
        si, sj = slice(i0, i1 + 1, 2), slice(j0, j1 + 1, 2)
        si1, sj1 = slice(i0 + 1, i1 + 2, 2), slice(j0 + 1, j1 + 2, 2)
        bottom = hor[..., si, sj].copy()
        top = hor[..., si, sj1].copy()
        left = ver[..., si, sj].copy()
        right = ver[..., si1, sj].copy()
        cnt = top.astype(np.int8) + bottom + left + right
        if check:
            bad = mask & ((cnt > 2) | ((cnt == 2) & ~((top & bottom) | (left & right))))
            if np.any(bad):
                raise ShuffleError("even face with non-parallel or excess dimers: invalid configuration")
        one = cnt == 1
        empty = (cnt == 0) & mask
        u = tickets.draws(I[:, None], J[None, :], k)
        vert = u < pv_table[np.ix_(I % m, J % m)]
        horiz = empty & ~vert
        vert &= empty
        new_top = np.where(mask, (one & bottom) | horiz, top)
        new_bottom = np.where(mask, (one & top) | horiz, bottom)
        new_left = np.where(mask, (one & right) | vert, left)
        new_right = np.where(mask, (one & left) | vert, right)
        hor[..., si, sj] = new_bottom
        hor[..., si, sj1] = new_top
        ver[..., si, sj] = new_left
        ver[..., si1, sj] = new_right
        if heights is not None:
            hb = top.astype(np.int64) + bottom
            vb = left.astype(np.int64) + right
            ha = new_top.astype(np.int64) + new_bottom
            va = new_left.astype(np.int64) + new_right
            heights[..., si, sj] += np.where(mask, hb + ha - vb - va, 0)


def _ring(r):
    """Faces with |i| + |j| == r, as index arrays."""
    if r == 0:
        return np.array([0]), np.array([0])
    t = np.arange(r)
    i = np.concatenate([r - t, -t, -r + t, t])
    j = np.concatenate([t, r - t, -t, -r + t])
    return i, j


def extend_ring_heights(hor, ver, origin, heights, r, time, center=(0, 0)):
    """Fill heights on the ring |i-ci|+|j-cj| = r from inner neighbours (time colouring)."""
    x0, y0 = origin
    cx, cy = center
    I, J = _ring(r)

    def white(x, y):
        return (x + y - time) % 2 == 0

    out = np.empty(heights.shape[:-2] + I.shape, dtype=np.int64)
    pos = I > 0
    neg = I < 0
    zp = (I == 0) & (J > 0)
    zn = (I == 0) & (J < 0)
    I = I + cx
    J = J + cy
    # from (i-1, j) crossing ver[i, j]
    i, j = I[pos], J[pos]
    occ = ver[..., i - x0, j - y0].astype(np.int64)
    sig = np.where(white(i, j), 1, -1)
    out[..., pos] = heights[..., i - 1 - x0, j - y0] + sig * (4 * occ - 1)
    # from (i+1, j) crossing ver[i+1, j]
    i, j = I[neg], J[neg]
    occ = ver[..., i + 1 - x0, j - y0].astype(np.int64)
    sig = np.where(white(i + 1, j), 1, -1)
    out[..., neg] = heights[..., i + 1 - x0, j - y0] - sig * (4 * occ - 1)
    # from (i, j-1) crossing hor[i, j]
    i, j = I[zp], J[zp]
    occ = hor[..., i - x0, j - y0].astype(np.int64)
    sig = np.where(white(i + 1, j), 1, -1)
    out[..., zp] = heights[..., i - x0, j - 1 - y0] + sig * (4 * occ - 1)
    # from (i, j+1) crossing hor[i, j+1]
    i, j = I[zn], J[zn]
    occ = hor[..., i - x0, j + 1 - y0].astype(np.int64)
    sig = np.where(white(i + 1, j + 1), 1, -1)
    out[..., zn] = heights[..., i - x0, j + 1 - y0] - sig * (4 * occ - 1)
    heights[..., I - x0, J - y0] = out


# ---------------------------------------------------------------------------
# state-level API


@dataclass(frozen=True)
class ShuffleState:
    time: int
    config: DimerConfig
    weights: PeriodicWeights
    seed: int

    def __post_init__(self):
        if self.config.time != self.time:
            raise ShuffleError("configuration time does not match state time")
        if self.weights.time_parity != self.time % 2:
            raise ShuffleError("weights parity does not match the time index")
        region = self.config.region
        if region.kind == "aztec" and (region.size - self.time) % 2:
            raise ShuffleError("Aztec size and time must have equal parity")
        if region.kind == "torus":
            raise ShuffleError("the shuffle is not defined on the torus")

    @property
    def region(self):
        return self.config.region


def _embed(arr, new_shape, offset):
    out = np.zeros(new_shape, dtype=arr.dtype)
    out[offset: offset + arr.shape[0], offset: offset + arr.shape[1]] = arr
    return out


def shuffle_step(state, tickets=None, normalize=True):
    """One step of the shuffle; Aztec regions grow by one, windows shrink by one."""
    if tickets is None:
        tickets = CouplingTicket(state.seed)
    cfg = state.config
    region = cfg.region
    k = state.time
    pv = state.weights.vertical_probability_table
    if region.kind == "aztec":
        N = region.size
        new_region = aztec(N + 1)
        hor = _embed(np.array(cfg.hor), new_region.shape, 1)
        ver = _embed(np.array(cfg.ver), new_region.shape, 1)
        sweep(hor, ver, new_region.origin, k, (0, 0), N, pv, tickets)
    else:
        M = region.size
        if M < 1:
            raise LocalityError("window exhausted: no exactly determined faces remain")
        new_region = window(M - 1, region.center)
        hor = np.array(cfg.hor)
        ver = np.array(cfg.ver)
        sweep(hor, ver, region.origin, k, region.center, M - 1, pv, tickets)
        hor, ver = hor[1:-1, 1:-1], ver[1:-1, 1:-1]
        hm, vm = new_region.edge_masks()
        hor &= hm
        ver &= vm
    nxt = spider_step(state.weights)
    if normalize:
        nxt = gauge_normalize(nxt)
    return ShuffleState(k + 1, DimerConfig(new_region, k + 1, hor, ver), nxt, state.seed)


def _face_counts(config, faces_i, faces_j):
    x0, y0 = config.region.origin
    i, j = faces_i - x0, faces_j - y0
    top = config.hor[i, j + 1].astype(np.int64)
    bottom = config.hor[i, j].astype(np.int64)
    left = config.ver[i, j].astype(np.int64)
    right = config.ver[i + 1, j].astype(np.int64)
    return top, bottom, left, right


def update_height(h, before, after, k):
    """Heights after the step k -> k+1 given the configurations on both sides.

    Odd faces keep their height; even faces change by
    (H_before + H_after - V_before - V_after)/4.  The outermost ring of the
    new region (the fresh Aztec boundary, or the last trusted window ring) is
    filled in from its inner neighbours.
    """
    if before.time != k or after.time != k + 1 or h.time != k:
        raise ShuffleError("inconsistent configs: times do not match k")
    rb, ra = before.region, after.region
    if rb.kind != ra.kind or rb.kind == "torus" or h.region != rb:
        raise ShuffleError("inconsistent configs: regions do not match")
    if rb.kind == "aztec":
        if ra.size != rb.size + 1:
            raise ShuffleError("inconsistent configs: Aztec regions must grow by one")
        radius, center = rb.size, (0, 0)
    else:
        if ra.size != rb.size - 1 or ra.center != rb.center:
            raise ShuffleError("inconsistent configs: window must shrink by one")
        radius, center = rb.size - 2, rb.center
    I, J = np.meshgrid(
        np.arange(center[0] - radius, center[0] + radius + 1),
        np.arange(center[1] - radius, center[1] + radius + 1),
        indexing="ij",
    )
    sel = ((I + J - k) % 2 == 0) & (np.abs(I - center[0]) + np.abs(J - center[1]) <= radius)
    fi, fj = I[sel], J[sel]
    tb, bb, lb, rb_ = _face_counts(before, fi, fj)
    ta, ba, la, ra_ = _face_counts(after, fi, fj)
    cb = tb + bb + lb + rb_
    ca = ta + ba + la + ra_
    slid = (ta == bb) & (ba == tb) & (la == rb_) & (ra_ == lb)
    created = ((ta == 1) & (ba == 1) & (ca == 2)) | ((la == 1) & (ra_ == 1) & (ca == 2))
    ok = np.where(cb == 2, ca == 0, np.where(cb == 1, slid & (ca == 1), (cb == 0) & created))
    if not np.all(ok):
        raise ShuffleError("inconsistent configs: 'after' is not a shuffle image of 'before'")
    delta = (tb + bb) + (ta + ba) - (lb + rb_) - (la + ra_)
    hx0, hy0 = rb.origin
    q = np.array(h.quarters)
    q[fi - hx0, fj - hy0] += delta
    if rb.kind == "aztec":
        q = _embed(q, ra.shape, 1)
    else:
        q = q[1:-1, 1:-1]
    extend_ring_heights(after.hor, after.ver, ra.origin, q, ra.size, k + 1, ra.center)
    mask = ra.face_mask()
    q[~mask] = 0
    anchor = h.anchor if ra.contains_face(h.anchor) else center
    x0, y0 = ra.origin
    return HeightField(ra, k + 1, q, mask, anchor, Fraction(int(q[anchor[0] - x0, anchor[1] - y0]), 4))


# ---------------------------------------------------------------------------
# Aztec sampling


@dataclass(frozen=True)
class AztecSample:
    config: DimerConfig
    heights: HeightField
    weights: PeriodicWeights  # weights at time N (after the last step)
    seed: int


def _grow(schedule, seed, track_heights=True, callback=None, check=False, batch=None):
    """Grow from the empty A_0 using ``schedule[k]`` as the weights at time k.

    With ``batch`` a sequence of seeds, all configurations are grown together
    and the arrays carry a leading batch axis.
    """
    N = len(schedule)
    region = aztec(N)
    origin = region.origin
    if batch is None:
        tickets = CouplingTicket(seed)
        shape = region.shape
    else:
        tickets = BatchTickets(batch)
        shape = (len(tickets),) + region.shape
    hor = np.zeros(shape, dtype=bool)
    ver = np.zeros(shape, dtype=bool)
    heights = np.zeros(shape, dtype=np.int64) if track_heights else None
    for k, w in enumerate(schedule):
        if w.time_parity != k % 2:
            raise ShuffleError("weight schedule parity mismatch")
        sweep(hor, ver, origin, k, (0, 0), k, w.vertical_probability_table, tickets, heights, check=check)
        if track_heights:
            extend_ring_heights(hor, ver, origin, heights, k + 1, k + 1)
        if callback is not None:
            callback(k + 1, hor, ver, heights)
    return hor, ver, heights


def aztec_schedule_forward(w0, N):
    """Weights w_0, ..., w_N obtained by iterating the dynamics from w0 (relabelled to parity 0)."""
    w = gauge_normalize(w0.at_parity(0))
    out = [w]
    for _ in range(N):
        w = gauge_normalize(spider_step(w))
        out.append(w)
    return out


def aztec_schedule_exact(w0, N):
    """Weights u_0, ..., u_N with u_N gauge-equivalent to w0 (at parity N).

    Growing from A_0 with u_0, ..., u_{N-1} samples the diamond with
    probability proportional to the product of w0-weights of its dimers.
    """
    u = gauge_normalize(w0.at_parity(N % 2))
    back = [u]
    for _ in range(N):
        u = gauge_normalize(spider_step_inverse(u))
        back.append(u)
    back.reverse()
    back[-1] = gauge_normalize(spider_step(back[-2])) if N > 0 else back[-1]
    return back


def _finish(N, hor, ver, heights, final_weights, seed):
    region = aztec(N)
    config = DimerConfig(region, N, hor, ver)
    mask = region.face_mask()
    anchor = (-N, 0)
    x0, y0 = region.origin
    hf = HeightField(region, N, heights, mask, anchor, Fraction(int(heights[anchor[0] - x0, 0 - y0]), 4))
    return AztecSample(config, hf, final_weights, seed)


def sample_aztec(N, w0, seed, callback=None):
    """Exact sample of the Aztec diamond A_N with probability proportional to the w0-weight.

    Returns an :class:`AztecSample` (configuration at time N, heights with the
    growth convention, audit weights gauge-equivalent to w0).
    """
    N = int(N)
    if N < 0:
        raise ValueError("N must be non-negative")
    if N > 20000:
        raise ShuffleError("N too large: memory grows like N^2 and work like N^3")
    sched = aztec_schedule_exact(w0, N)
    hor, ver, heights = _grow(sched[:N], seed, callback=callback)
    return _finish(N, hor, ver, heights, sched[N], seed)


def sample_aztec_batch(N, w0, seeds, track_heights=True, callback=None):
    """Grow one exact A_N sample per seed in a single vectorised pass.

    Returns ``(hor, ver, heights)`` with a leading batch axis; entry b is
    identical to ``sample_aztec(N, w0, seeds[b])``.
    """
    sched = aztec_schedule_exact(w0, int(N))
    return _grow(sched[: int(N)], None, track_heights=track_heights, callback=callback, batch=list(seeds))


def grow_aztec_batch(N, w0, seeds, track_heights=True, callback=None):
    """Batched :func:`grow_aztec`; ``callback(k, hor, ver, heights)`` runs after every step."""
    sched = aztec_schedule_forward(w0, int(N))
    return _grow(sched[: int(N)], None, track_heights=track_heights, callback=callback, batch=list(seeds))


def grow_aztec(N, w0, seed, callback=None):
    """Grow A_N from A_0 with the forward weight dynamics started at w0.

    The returned configuration is distributed proportionally to the weights
    reported in the result (time N), not to w0.
    """
    N = int(N)
    if N < 0:
        raise ValueError("N must be non-negative")
    sched = aztec_schedule_forward(w0, N)
    hor, ver, heights = _grow(sched[:N], seed, callback=callback)
    return _finish(N, hor, ver, heights, sched[N], seed)


# ---------------------------------------------------------------------------
# window mode


@dataclass(frozen=True)
class WindowRun:
    center_heights: list  # Fractions, times 0..k_max
    fields: list  # HeightField per time when recorded, else empty
    final: ShuffleState


def window_evolve(initial, w0, k_max, seed, anchor_value=0, record_fields=False, tickets=None):
    """Evolve a window configuration and report the centre height at each time.

    ``initial`` must live on a window region of radius M and ``k_max <= M-1``.
    The centre height at time 0 is ``anchor_value``.
    """
    from .lattice import height_field

    region = initial.region
    if region.kind != "window":
        raise ShuffleError("window_evolve needs a window region")
    M = region.size
    if k_max > M - 1:
        raise LocalityError(f"k_max={k_max} exceeds the locality budget M-1={M - 1}")
    if tickets is None:
        tickets = CouplingTicket(seed)
    w = w0.at_parity(initial.time % 2)
    state = ShuffleState(initial.time, initial, w, seed)
    h = height_field(initial, region.center, anchor_value)
    centers = [h[region.center]]
    fields = [h] if record_fields else []
    for _ in range(k_max):
        nxt = shuffle_step(state, tickets)
        h = update_height(h, state.config, nxt.config, state.time)
        state = nxt
        centers.append(h[region.center])
        if record_fields:
            fields.append(h)
    return WindowRun(centers, fields, state)
