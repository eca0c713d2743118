"""Counter-based random draws keyed by (seed, face, time).

numpy's bit generators are stream based; the shuffle coupling needs the draw
at face (i, j) and time k to be a pure function of its key, so we hash the
key with a vectorised splitmix64 finaliser instead.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_u64(a):
    return np.asarray(a, dtype=np.int64).astype(np.uint64)


class CouplingTicket:
    """Uniform draws in [0, 1) that depend only on ``(seed, i, j, k)``."""

    def __init__(self, seed):
        if seed is None:
            raise ValueError("a seed is required")
        self.seed = int(seed) & _MASK
        with np.errstate(over="ignore"):
            self._key = _mix(np.uint64(self.seed) + _GOLDEN)

    def draws(self, i, j, k):
        i, j, k = np.broadcast_arrays(_as_u64(i), _as_u64(j), _as_u64(k))
        with np.errstate(over="ignore"):
            h = _mix(self._key ^ (i * _GOLDEN))
            h = _mix(h ^ (j * _M1))
            h = _mix(h ^ (k * _M2))
        return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def draw(self, i, j, k):
        return float(self.draws(i, j, k))

    def __repr__(self):
        return f"CouplingTicket(seed={self.seed})"


class BatchTickets:
    """Independent tickets for a batch of seeds; draws gain a leading batch axis.

    Entry ``b`` of every draw equals ``CouplingTicket(seeds[b]).draws(...)``.
    """

    def __init__(self, seeds):
        seeds = np.asarray(seeds, dtype=object)
        self.seeds = [int(s) & _MASK for s in seeds.ravel()]
        with np.errstate(over="ignore"):
            self._key = _mix(np.array(self.seeds, dtype=np.uint64) + _GOLDEN)

    def __len__(self):
        return len(self.seeds)

    def draws(self, i, j, k):
        i, j, k = np.broadcast_arrays(_as_u64(i), _as_u64(j), _as_u64(k))
        key = self._key.reshape((-1,) + (1,) * i.ndim)
        with np.errstate(over="ignore"):
            h = _mix(key ^ (i * _GOLDEN))
            h = _mix(h ^ (j * _M1))
            h = _mix(h ^ (k * _M2))
        return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


class FixedTickets:
    """Tickets given by an explicit function of (i, j, k); used to enumerate branches."""

    def __init__(self, func):
        self.func = func

    def draws(self, i, j, k):
        i, j, k = np.broadcast_arrays(np.asarray(i), np.asarray(j), np.asarray(k))
        return np.asarray(self.func(i, j, k), dtype=float)
