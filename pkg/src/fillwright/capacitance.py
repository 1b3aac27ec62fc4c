"""Lateral, parallel-plate and fringing coupling capacitance.

Kernels take microns and F/um; layout geometry (nm) is converted here and
nowhere else. Per-unit-length expressions are multiplied by the coupled
length (lateral, fringing) or plan-view overlap area (parallel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from fillwright.errors import GeometryError, StackError
from fillwright.layout import FillKind, LayerSpec, Layout, NetClass, Rect, overlap_len, rect_gap
from fillwright.spatial import GridIndex, overlap_lengths, pairwise_gap

NM_PER_UM = 1000.0


class AggressorClass(str, Enum):
    SIGNAL = "Signal"
    CRITICAL = "Critical"
    REFERENCE = "Reference"
    FLOATING_FILL = "FloatingFill"
    SHIELD_FILL = "ShieldFill"


GROUND_CLASSES = frozenset({AggressorClass.REFERENCE, AggressorClass.SHIELD_FILL})


@dataclass(frozen=True)
class CapComponents:
    lateral: float = 0.0
    parallel: float = 0.0
    fringing: float = 0.0

    @property
    def total(self) -> float:
        return self.lateral + self.parallel + self.fringing


@dataclass(frozen=True)
class CouplingRecord:
    victim: str
    aggressor: Union[str, int]
    aggressor_class: AggressorClass
    victim_layer: int
    aggressor_layer: int
    components: CapComponents
    victim_shape: int = 0
    aggressor_shape: int = 0

    @property
    def total(self) -> float:
        return self.components.total


# --------------------------------------------------------------------------
# kernels


def c_lateral(H: float, eps: float, s: float, coupled_len: float) -> float:
    if s <= 0:
        raise GeometryError(f"lateral spacing must be positive, got {s}")
    return H * eps / s * coupled_len


def c_parallel(eps: float, overlap_area: float, t: float) -> float:
    if t <= 0:
        raise StackError(f"dielectric thickness must be positive, got {t}")
    return eps * overlap_area / t


def c_fringing(eps: float, t: float, H: float, edge_len: float) -> float:
    if t <= H:
        raise StackError(f"fringing needs t_di > H (t={t}, H={H})")
    return 2.0 * math.pi * eps / math.log(t / H) * edge_len


def _edge_lengths_within(x: Rect, y: Rect, radius: float) -> float:
    """Summed projection overlap of x's plan-view edges lying within ``radius`` of y's footprint."""
    total = 0.0
    ox = overlap_len(x, y, "x")
    oy = overlap_len(x, y, "y")
    if ox > 0:
        for ye in (x.y_lo, x.y_hi):
            if max(0, y.y_lo - ye, ye - y.y_hi) <= radius:
                total += ox
    if oy > 0:
        for xe in (x.x_lo, x.x_hi):
            if max(0, y.x_lo - xe, xe - y.x_hi) <= radius:
                total += oy
    return total


def pair_coupling(
    a: tuple[int, Rect],
    b: tuple[int, Rect],
    layers: Sequence[LayerSpec],
    interaction_radius: float = 2000,
) -> CapComponents:
    """Capacitance components between two shapes given as ``(layer, Rect)`` in nm."""
    la, ra = a
    lb, rb = b
    if la == lb:
        gap = rect_gap(ra, rb)
        if gap is None:
            raise GeometryError(f"overlapping shapes on layer {la}: {ra.as_list()} / {rb.as_list()}")
        if gap == 0:
            # touching metal is one conductor
            return CapComponents()
        spec = layers[la]
        ox = overlap_len(ra, rb, "x")
        oy = overlap_len(ra, rb, "y")
        if ox > 0:
            length = ox
        elif oy > 0:
            length = oy
        else:
            return CapComponents()
        lat = c_lateral(spec.thickness / NM_PER_UM, spec.permittivity, gap / NM_PER_UM, length / NM_PER_UM)
        return CapComponents(lateral=lat)
    if abs(la - lb) != 1:
        return CapComponents()
    lower = layers[min(la, lb)]
    t = lower.dielectric_above / NM_PER_UM
    eps = lower.permittivity
    par = c_parallel(eps, overlap_len(ra, rb, "x") * overlap_len(ra, rb, "y") / NM_PER_UM**2, t)
    fr = 0.0
    for (lx, rx), ry in (((la, ra), rb), ((lb, rb), ra)):
        edge = _edge_lengths_within(rx, ry, interaction_radius)
        if edge > 0:
            fr += c_fringing(eps, t, layers[lx].thickness / NM_PER_UM, edge / NM_PER_UM)
    return CapComponents(parallel=par, fringing=fr)


def pair_coupling_arrays(
    a: np.ndarray,
    b: np.ndarray,
    la: np.ndarray,
    lb: np.ndarray,
    layers: Sequence[LayerSpec],
    interaction_radius: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`pair_coupling` over row-aligned rectangle arrays (nm)."""
    n = len(a)
    lateral = np.zeros(n)
    parallel = np.zeros(n)
    fringing = np.zeros(n)
    if n == 0:
        return lateral, parallel, fringing
    H = np.array([s.thickness for s in layers], dtype=float) / NM_PER_UM
    eps = np.array([s.permittivity for s in layers], dtype=float)
    t = np.array([s.dielectric_above or 0 for s in layers], dtype=float) / NM_PER_UM

    dx, dy, _ = pairwise_gap(a, b)
    ox, oy = overlap_lengths(a, b)

    same = la == lb
    if np.any(same):
        gx = np.maximum(b[:, 0] - a[:, 2], a[:, 0] - b[:, 2])
        gy = np.maximum(b[:, 1] - a[:, 3], a[:, 1] - b[:, 3])
        clash = same & (gx < 0) & (gy < 0)
        if np.any(clash):
            k = int(np.nonzero(clash)[0][0])
            raise GeometryError(f"overlapping shapes on layer {int(la[k])}: {a[k].tolist()} / {b[k].tolist()}")
        face_y = same & (ox > 0) & (gy > 0)
        face_x = same & (oy > 0) & (gx > 0)
        s = np.where(face_y, gy, np.where(face_x, gx, 1)).astype(float) / NM_PER_UM
        length = np.where(face_y, ox, np.where(face_x, oy, 0)).astype(float) / NM_PER_UM
        lyr = np.where(same, la, 0)
        lateral = np.where(face_y | face_x, H[lyr] * eps[lyr] / s * length, 0.0)

    adj = np.abs(la - lb) == 1
    if np.any(adj):
        lower = np.where(adj, np.minimum(la, lb), 0)
        tt = t[lower]
        ee = eps[lower]
        with np.errstate(divide="ignore", invalid="ignore"):
            parallel = np.where(adj, ee * (ox * oy) / NM_PER_UM**2 / np.where(adj, tt, 1.0), 0.0)
            edge_total = np.zeros(n)
            for x, y, lx in ((a, b, la), (b, a, lb)):
                edges = np.zeros(n)
                for ye in (x[:, 1], x[:, 3]):
                    dist = np.maximum(0, np.maximum(y[:, 1] - ye, ye - y[:, 3]))
                    edges += np.where((ox > 0) & (dist <= interaction_radius), ox, 0)
                for xe in (x[:, 0], x[:, 2]):
                    dist = np.maximum(0, np.maximum(y[:, 0] - xe, xe - y[:, 2]))
                    edges += np.where((oy > 0) & (dist <= interaction_radius), oy, 0)
                hx = H[np.where(adj, lx, 0)]
                coef = np.where(adj, 2.0 * np.pi * ee / np.log(np.where(adj, tt / hx, np.e)), 0.0)
                edge_total += coef * edges / NM_PER_UM
            fringing = np.where(adj, edge_total, 0.0)
    return lateral, parallel, fringing


# --------------------------------------------------------------------------
# extraction


@dataclass
class CouplingTable:
    """Columnar coupling records. ``agg_kind`` is 0 for a net aggressor, 1 for fill."""

    victim_net: np.ndarray
    victim_shape: np.ndarray
    victim_layer: np.ndarray
    agg_kind: np.ndarray
    agg_index: np.ndarray
    agg_shape: np.ndarray
    agg_layer: np.ndarray
    lateral: np.ndarray
    parallel: np.ndarray
    fringing: np.ndarray
    agg_ground: np.ndarray  # aggressor is Reference net or Shield fill

    @property
    def total(self) -> np.ndarray:
        return self.lateral + self.parallel + self.fringing

    def __len__(self) -> int:
        return len(self.victim_net)

    def records(self, layout: Layout) -> list[CouplingRecord]:
        out = []
        for k in range(len(self)):
            victim = layout.nets[int(self.victim_net[k])].id
            if self.agg_kind[k] == 0:
                net = layout.nets[int(self.agg_index[k])]
                agg: Union[str, int] = net.id
                cls = AggressorClass(net.net_class.value)
            else:
                f = layout.fills[int(self.agg_index[k])]
                agg = f.id
                cls = AggressorClass.SHIELD_FILL if f.kind is FillKind.SHIELD else AggressorClass.FLOATING_FILL
            out.append(
                CouplingRecord(
                    victim=victim,
                    aggressor=agg,
                    aggressor_class=cls,
                    victim_layer=int(self.victim_layer[k]),
                    aggressor_layer=int(self.agg_layer[k]),
                    components=CapComponents(
                        float(self.lateral[k]), float(self.parallel[k]), float(self.fringing[k])
                    ),
                    victim_shape=int(self.victim_shape[k]),
                    aggressor_shape=int(self.agg_shape[k]),
                )
            )
        out.sort(key=record_sort_key)
        return out

    def per_net_deltas(self, n_nets: int) -> tuple[np.ndarray, np.ndarray]:
        """Summed totals per victim net split into (ground, coupling) buckets."""
        tot = self.total
        g = np.bincount(self.victim_net, weights=np.where(self.agg_ground, tot, 0.0), minlength=n_nets)
        c = np.bincount(self.victim_net, weights=np.where(self.agg_ground, 0.0, tot), minlength=n_nets)
        return g[:n_nets], c[:n_nets]


def record_sort_key(r: CouplingRecord):
    agg = (0, r.aggressor, 0) if isinstance(r.aggressor, str) else (1, "", r.aggressor)
    return (r.victim, agg, r.victim_layer, r.aggressor_layer, r.victim_shape, r.aggressor_shape)


def _empty_table() -> CouplingTable:
    z = np.zeros(0, dtype=np.int64)
    f = np.zeros(0)
    return CouplingTable(z, z, z, z, z, z, z, f, f, f, np.zeros(0, dtype=bool))


def _concat(tables: Iterable[CouplingTable]) -> CouplingTable:
    tables = [t for t in tables if len(t)]
    if not tables:
        return _empty_table()
    fields = CouplingTable.__dataclass_fields__
    return CouplingTable(**{k: np.concatenate([getattr(t, k) for t in tables]) for k in fields})


def coupling_table(layout: Layout, include_net_pairs: bool = True, include_fill: bool = True) -> CouplingTable:
    """Indexed extraction of every victim-net shape pair within the interaction radius.

    Victims are net shapes; aggressors are other nets' shapes and/or fill on
    the same or an adjacent layer. Pairs with zero total are dropped.
    """
    radius = layout.rules.interaction_radius
    cell = max(radius, layout.rules.tile_pitch, 1) * 2
    shapes = layout.layer_shapes
    fill_ground = np.array([f.kind is FillKind.SHIELD for f in layout.fills], dtype=bool)
    net_ground = np.array([n.net_class is NetClass.REFERENCE for n in layout.nets], dtype=bool)
    parts: list[CouplingTable] = []
    n_layers = len(layout.layers)
    for lv in range(n_layers):
        vic = shapes[lv]
        if len(vic.net_rects) == 0:
            continue
        for la in (lv - 1, lv, lv + 1):
            if not (0 <= la < n_layers):
                continue
            agg = shapes[la]
            kinds = []
            if include_net_pairs and len(agg.net_rects):
                kinds.append(0)
            if include_fill and len(agg.fill_rects):
                kinds.append(1)
            for kind in kinds:
                rects = agg.net_rects if kind == 0 else agg.fill_rects
                qi, ri = GridIndex(rects, cell).query(vic.net_rects, margin=radius)
                if kind == 0:
                    keep = vic.net_owner[qi] != agg.net_owner[ri]
                    qi, ri = qi[keep], ri[keep]
                a = vic.net_rects[qi]
                b = rects[ri]
                _, _, gap = pairwise_gap(a, b)
                keep = gap <= radius
                qi, ri, a, b = qi[keep], ri[keep], a[keep], b[keep]
                m = len(qi)
                la_arr = np.full(m, lv, dtype=np.int64)
                lb_arr = np.full(m, la, dtype=np.int64)
                lat, par, fr = pair_coupling_arrays(a, b, la_arr, lb_arr, layout.layers, radius)
                nz = (lat + par + fr) > 0
                if kind == 0:
                    agg_index = agg.net_owner[ri]
                    agg_shape = agg.net_shape_idx[ri]
                    ground = net_ground[agg_index]
                else:
                    agg_index = agg.fill_idx[ri]
                    agg_shape = np.zeros(m, dtype=np.int64)
                    ground = fill_ground[agg_index]
                parts.append(
                    CouplingTable(
                        victim_net=vic.net_owner[qi][nz],
                        victim_shape=vic.net_shape_idx[qi][nz],
                        victim_layer=la_arr[nz],
                        agg_kind=np.full(int(nz.sum()), kind, dtype=np.int64),
                        agg_index=agg_index[nz],
                        agg_shape=agg_shape[nz],
                        agg_layer=lb_arr[nz],
                        lateral=lat[nz],
                        parallel=par[nz],
                        fringing=fr[nz],
                        agg_ground=ground[nz],
                    )
                )
    return _concat(parts)


def extract_coupling(layout: Layout) -> list[CouplingRecord]:
    return coupling_table(layout).records(layout)


def fill_induced_table(layout: Layout) -> CouplingTable:
    """Records present in the filled layout but not in its unfilled copy.

    Extraction is pairwise, so these are exactly the net-to-fill pairs.
    """
    return coupling_table(layout, include_net_pairs=False)


def net_delta_caps(records: Iterable[CouplingRecord], net: str) -> tuple[float, float]:
    ground = 0.0
    coupling = 0.0
    for r in records:
        if r.victim != net:
            continue
        if r.aggressor_class in GROUND_CLASSES:
            ground += r.total
        else:
            coupling += r.total
    return ground, coupling


def all_net_delta_caps(layout: Layout, table: Optional[CouplingTable] = None) -> dict[str, tuple[float, float]]:
    """``net_delta_caps`` for every net at once from a fill-induced table."""
    if table is None:
        table = fill_induced_table(layout)
    g, c = table.per_net_deltas(len(layout.nets))
    return {net.id: (float(g[i]), float(c[i])) for i, net in enumerate(layout.nets)}
