"""Uniform-bin grid index over axis-aligned integer rectangles.

Rectangles are stored as an ``(n, 4)`` int64 array of ``x_lo, y_lo, x_hi, y_hi``.
Bins are closed on both ends, so rectangles that merely touch are reported as
candidates; callers apply their own exact predicate afterwards.
"""

from __future__ import annotations

import itertools

import numpy as np

_KEY_STRIDE = np.int64(1 << 31)


def as_rect_array(rects) -> np.ndarray:
    if isinstance(rects, (list, tuple)) and rects and not isinstance(rects[0], (int, np.integer)):
        # flattening by hand is several times faster than asarray on tuples
        arr = np.fromiter(itertools.chain.from_iterable(rects), dtype=np.int64)
    else:
        arr = np.asarray(rects, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 4), dtype=np.int64)
    return arr.reshape(-1, 4)


def _expand_ranges(starts: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For ranges ``[starts[i], starts[i] + lengths[i])`` return (owner, value) pairs."""
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    owner = np.repeat(np.arange(len(lengths), dtype=np.int64), lengths)
    offsets = np.cumsum(lengths) - lengths
    local = np.arange(total, dtype=np.int64) - np.repeat(offsets, lengths)
    return owner, np.repeat(starts, lengths) + local


class GridIndex:
    def __init__(self, rects, cell: int = 2000):
        if cell <= 0:
            raise ValueError("cell must be positive")
        self.rects = as_rect_array(rects)
        self.cell = int(cell)
        n = len(self.rects)
        if n == 0:
            self._keys = np.zeros(0, dtype=np.int64)
            self._ids = np.zeros(0, dtype=np.int64)
            self._origin = (0, 0)
            self._nbins = (1, 1)
            return
        self._origin = (int(self.rects[:, 0].min()), int(self.rects[:, 1].min()))
        bx0, by0, bx1, by1 = self._bins(self.rects)
        self._nbins = (int(bx1.max()) + 1, int(by1.max()) + 1)
        owner, keys = self._cell_keys(bx0, by0, bx1, by1)
        order = np.lexsort((owner, keys))
        self._keys = keys[order]
        self._ids = owner[order]

    def __len__(self) -> int:
        return len(self.rects)

    def _bins(self, rects: np.ndarray, margin: int = 0):
        ox, oy = self._origin
        c = self.cell
        bx0 = (rects[:, 0] - margin - ox) // c
        by0 = (rects[:, 1] - margin - oy) // c
        bx1 = (rects[:, 2] + margin - ox) // c
        by1 = (rects[:, 3] + margin - oy) // c
        return bx0, by0, bx1, by1

    @staticmethod
    def _cell_keys(bx0, by0, bx1, by1):
        nx = bx1 - bx0 + 1
        ny = by1 - by0 + 1
        owner, flat = _expand_ranges(np.zeros(len(nx), dtype=np.int64), nx * ny)
        if len(owner) == 0:
            return owner, flat
        w = nx[owner]
        bx = bx0[owner] + flat % w
        by = by0[owner] + flat // w
        return owner, by * _KEY_STRIDE + bx

    def query(self, queries, margin: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Pairs ``(qi, ri)`` whose boxes intersect once the query grows by ``margin``.

        Intersection is closed (touching counts). Output is sorted by (qi, ri)
        and free of duplicates.
        """
        q = as_rect_array(queries)
        empty = (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        if len(q) == 0 or len(self.rects) == 0:
            return empty
        bx0, by0, bx1, by1 = self._bins(q, margin)
        nbx, nby = self._nbins
        bx0 = np.clip(bx0, 0, nbx - 1)
        bx1 = np.clip(bx1, 0, nbx - 1)
        by0 = np.clip(by0, 0, nby - 1)
        by1 = np.clip(by1, 0, nby - 1)
        # queries entirely outside the populated bin range
        outside = (
            ((q[:, 2] + margin) < self._origin[0])
            | ((q[:, 3] + margin) < self._origin[1])
        )
        bx1 = np.where(outside, bx0 - 1, bx1)
        keep = bx1 >= bx0
        idx = np.nonzero(keep)[0]
        if len(idx) == 0:
            return empty
        owner, keys = self._cell_keys(bx0[idx], by0[idx], bx1[idx], by1[idx])
        owner = idx[owner]
        lo = np.searchsorted(self._keys, keys, side="left")
        hi = np.searchsorted(self._keys, keys, side="right")
        pos_owner, pos = _expand_ranges(lo, hi - lo)
        qi = owner[pos_owner]
        ri = self._ids[pos]
        if len(qi) == 0:
            return empty
        n = np.int64(len(self.rects))
        packed = np.unique(qi * n + ri)
        qi = packed // n
        ri = packed % n
        a = q[qi]
        b = self.rects[ri]
        hit = (
            (a[:, 0] - margin <= b[:, 2])
            & (b[:, 0] <= a[:, 2] + margin)
            & (a[:, 1] - margin <= b[:, 3])
            & (b[:, 1] <= a[:, 3] + margin)
        )
        return qi[hit], ri[hit]


def pairwise_gap(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise axis gaps and Euclidean gap between rectangle arrays (0 where touching/overlapping)."""
    dx = np.maximum(0, np.maximum(b[:, 0] - a[:, 2], a[:, 0] - b[:, 2]))
    dy = np.maximum(0, np.maximum(b[:, 1] - a[:, 3], a[:, 1] - b[:, 3]))
    return dx, dy, np.hypot(dx, dy)


def overlap_lengths(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ox = np.maximum(0, np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0]))
    oy = np.maximum(0, np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1]))
    return ox, oy
