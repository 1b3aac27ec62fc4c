"""Abutment connectivity between Shield fill and Reference nets."""

from __future__ import annotations

import numpy as np

from fillwright.spatial import GridIndex, as_rect_array


class UnionFind:
    """Disjoint sets over ``0..size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def edge_contacts(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise: rectangles touch along a boundary segment of positive length without overlapping."""
    ox = np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    oy = np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    return ((ox == 0) & (oy > 0)) | ((oy == 0) & (ox > 0))


def check_shield_connectivity(layout) -> list[int]:
    """Ids of Shield fill tiles that cannot reach a Reference shape by same-layer abutment.

    An empty list means every Shield tile is grounded.
    """
    from fillwright.layout import FillKind, NetClass

    unreachable: list[int] = []
    for spec in layout.layers:
        shields = [f for f in layout.fills if f.layer == spec.index and f.kind is FillKind.SHIELD]
        if not shields:
            continue
        refs = [
            r
            for net in layout.nets
            if net.net_class is NetClass.REFERENCE
            for lyr, r in net.shapes
            if lyr == spec.index
        ]
        rects = as_rect_array(
            [f.rect.as_list() for f in shields] + [r.as_list() for r in refs]
        )
        n_shield = len(shields)
        uf = UnionFind(len(rects))
        index = GridIndex(rects, cell=max(layout.rules.tile_size * 4, 1))
        qi, ri = index.query(rects[:n_shield])
        touching = edge_contacts(rects[qi], rects[ri])
        for a, b in zip(qi[touching].tolist(), ri[touching].tolist()):
            uf.union(a, b)
        grounded = {uf.find(k) for k in range(n_shield, len(rects))}
        for k, f in enumerate(shields):
            if uf.find(k) not in grounded:
                unreachable.append(f.id)
    return sorted(unreachable)
