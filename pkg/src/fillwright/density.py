"""Sliding-window metal density.

Window metal area is the union of net shapes clipped to the window plus the
clipped area of every fill shape. Fill is validated to be interior-disjoint
from everything else, so adding its clipped area is exact. All areas are
integer nm^2; conversion to a ratio happens only when a report is built.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from fillwright.errors import RulesError
from fillwright.layout import DesignRules, Layout, Rect
from fillwright.spatial import GridIndex, as_rect_array


class DensityStatus(str, Enum):
    LOW = "Low"
    OK = "Ok"
    HIGH = "High"


@dataclass(frozen=True)
class DensityWindow:
    layer: int
    window: Rect
    density: float
    status: DensityStatus
    metal_area: int


def classify(density: float, rules: DesignRules) -> DensityStatus:
    if density < rules.rho_min:
        return DensityStatus.LOW
    if density > rules.rho_max:
        return DensityStatus.HIGH
    return DensityStatus.OK


def window_positions(lo: int, hi: int, w: int, step: int) -> list[int]:
    """Window origins along one axis: multiples of ``step`` from ``lo`` with the last clamped inside."""
    if w > hi - lo:
        raise RulesError(f"window edge {w} exceeds die extent {hi - lo}")
    pos = list(range(lo, hi - w + 1, step))
    if pos[-1] + w < hi:
        pos.append(hi - w)
    return pos


def enumerate_windows(die: Rect, rules: DesignRules) -> list[Rect]:
    w = rules.window_w
    xs = window_positions(die.x_lo, die.x_hi, w, rules.window_step)
    ys = window_positions(die.y_lo, die.y_hi, w, rules.window_step)
    return [Rect(x, y, x + w, y + w) for y in ys for x in xs]


def union_area(rects: np.ndarray) -> int:
    """Exact area of the union of rectangles via coordinate compression."""
    rects = as_rect_array(rects)
    if len(rects) == 0:
        return 0
    xs = np.unique(rects[:, [0, 2]])
    ys = np.unique(rects[:, [1, 3]])
    cover = np.zeros((len(ys) - 1, len(xs) - 1), dtype=bool)
    ix0 = np.searchsorted(xs, rects[:, 0])
    ix1 = np.searchsorted(xs, rects[:, 2])
    iy0 = np.searchsorted(ys, rects[:, 1])
    iy1 = np.searchsorted(ys, rects[:, 3])
    for a, b, c, d in zip(iy0.tolist(), iy1.tolist(), ix0.tolist(), ix1.tolist()):
        cover[a:b, c:d] = True
    dx = np.diff(xs)
    dy = np.diff(ys)
    return int((dy[:, None] * dx[None, :])[cover].sum())


def _clip(rects: np.ndarray, window: np.ndarray) -> np.ndarray:
    out = np.empty_like(rects)
    out[:, 0] = np.maximum(rects[:, 0], window[0])
    out[:, 1] = np.maximum(rects[:, 1], window[1])
    out[:, 2] = np.minimum(rects[:, 2], window[2])
    out[:, 3] = np.minimum(rects[:, 3], window[3])
    keep = (out[:, 0] < out[:, 2]) & (out[:, 1] < out[:, 3])
    return out[keep]


def window_metal_areas(layout: Layout, layer: int, windows: list[Rect]) -> np.ndarray:
    """Integer metal area per window on one layer."""
    shapes = layout.layer_shapes[layer]
    wins = as_rect_array([w.as_list() for w in windows])
    areas = np.zeros(len(wins), dtype=np.int64)
    if len(wins) == 0:
        return areas
    cell = max(layout.rules.window_step, 1)
    if len(shapes.net_rects):
        qi, ri = GridIndex(shapes.net_rects, cell).query(wins)
        bounds = np.searchsorted(qi, np.arange(len(wins) + 1))
        for k in range(len(wins)):
            sel = ri[bounds[k] : bounds[k + 1]]
            if len(sel):
                areas[k] = union_area(_clip(shapes.net_rects[sel], wins[k]))
    if len(shapes.fill_rects):
        qi, ri = GridIndex(shapes.fill_rects, cell).query(wins)
        f = shapes.fill_rects[ri]
        w = wins[qi]
        ox = np.maximum(0, np.minimum(f[:, 2], w[:, 2]) - np.maximum(f[:, 0], w[:, 0]))
        oy = np.maximum(0, np.minimum(f[:, 3], w[:, 3]) - np.maximum(f[:, 1], w[:, 1]))
        np.add.at(areas, qi, ox * oy)
    return areas


def window_density(layout: Layout, layer: int, window: Rect) -> float:
    area = window_metal_areas(layout, layer, [window])[0]
    return int(area) / window.area


def density_report(layout: Layout) -> list[DensityWindow]:
    windows = enumerate_windows(layout.die, layout.rules)
    out: list[DensityWindow] = []
    for spec in layout.layers:
        areas = window_metal_areas(layout, spec.index, windows)
        for w, a in zip(windows, areas.tolist()):
            d = a / w.area
            out.append(DensityWindow(spec.index, w, d, classify(d, layout.rules), a))
    return out


def density_csv(report: list[DensityWindow]) -> str:
    lines = ["layer,window_x,window_y,density,status"]
    for d in report:
        lines.append(f"{d.layer},{d.window.x_lo},{d.window.y_lo},{d.density!r},{d.status.value}")
    return "\n".join(lines) + "\n"
