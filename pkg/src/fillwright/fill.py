"""Dummy fill insertion: regular fill, NDR-spaced fill, grounded shield fill.

Floating tiles sit on a die-anchored grid of pitch ``tile_pitch``. Because the
pitch leaves at least ``s_def`` between neighbouring tiles, grid tiles never
conflict with each other; legality reduces to a per-layer raster of anchors
blocked by net shapes. Shield tiles are placed off-grid on lattices anchored
at critical-net and reference-shape edges so that chains can abut.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from fillwright.connectivity import edge_contacts
from fillwright.density import enumerate_windows, window_metal_areas, window_positions
from fillwright.errors import ParseError, ValidationError
from fillwright.layout import FillKind, FillShape, Layout, Net, NetClass, Rect
from fillwright.spatial import GridIndex, as_rect_array, pairwise_gap

log = logging.getLogger(__name__)

E_NOREF = "E_NOREF"


class FillMode(str, Enum):
    NONE = "None"
    REGULAR = "Regular"
    TIMING_DRIVEN = "TimingDriven"


class WindowDensity(NamedTuple):
    layer: int
    window: Rect
    density: float


class PhaseEntry(NamedTuple):
    phase: str
    layer: int
    window: Rect
    tiles_added: int


class WindowNote(NamedTuple):
    layer: int
    window: Rect
    code: str


@dataclass(frozen=True)
class FillPlan:
    mode: FillMode
    inserted: tuple[FillShape, ...] = ()
    infeasible_windows: tuple[WindowDensity, ...] = ()
    phase_log: tuple[PhaseEntry, ...] = ()
    notes: tuple[WindowNote, ...] = ()

    def apply(self, layout: Layout) -> Layout:
        return layout.with_fills(tuple(layout.fills) + tuple(self.inserted))


# --------------------------------------------------------------------------
# anchor grid and blocked rasters


class AnchorGrid:
    """Tile anchors ``origin + i * pitch`` per axis, restricted to tiles inside the die."""

    def __init__(self, die: Rect, tile: int, pitch: int):
        self.tile = tile
        self.pitch = pitch
        self.x0 = die.x_lo
        self.y0 = die.y_lo
        nx = (die.x_hi - tile - die.x_lo) // pitch + 1 if die.width >= tile else 0
        ny = (die.y_hi - tile - die.y_lo) // pitch + 1 if die.height >= tile else 0
        self.ax = self.x0 + pitch * np.arange(max(nx, 0), dtype=np.int64)
        self.ay = self.y0 + pitch * np.arange(max(ny, 0), dtype=np.int64)

    def index_range(self, lo: int, hi: int, axis: str) -> tuple[int, int]:
        """Anchor index range whose tiles lie fully inside [lo, hi] on ``axis``."""
        origin, n = (self.x0, len(self.ax)) if axis == "x" else (self.y0, len(self.ay))
        p = self.pitch
        i0 = max(0, -((origin - lo) // p))
        i1 = min(n, (hi - self.tile - origin) // p + 1)
        return i0, max(i0, i1)

    def rect(self, iy: int, ix: int) -> Rect:
        x = int(self.ax[ix])
        y = int(self.ay[iy])
        return Rect(x, y, x + self.tile, y + self.tile)


def block_anchors(
    blocked: np.ndarray,
    ax: np.ndarray,
    ay: np.ndarray,
    tile: int,
    rects: np.ndarray,
    spacing: np.ndarray,
) -> None:
    """Mark anchors whose tile comes closer than ``spacing`` (Euclidean) to any rect."""
    if len(ax) == 0 or len(ay) == 0:
        return
    for (a0, b0, a1, b1), s in zip(rects.tolist(), spacing.tolist()):
        i0 = int(np.searchsorted(ax, a0 - s - tile, side="right"))
        i1 = int(np.searchsorted(ax, a1 + s, side="left"))
        if i0 >= i1:
            continue
        j0 = int(np.searchsorted(ay, b0 - s - tile, side="right"))
        j1 = int(np.searchsorted(ay, b1 + s, side="left"))
        if j0 >= j1:
            continue
        xs = ax[i0:i1]
        ys = ay[j0:j1]
        dx = np.maximum(0, np.maximum(a0 - (xs + tile), xs - a1))
        dy = np.maximum(0, np.maximum(b0 - (ys + tile), ys - b1))
        blocked[j0:j1, i0:i1] |= (dy[:, None] ** 2 + dx[None, :] ** 2) < s * s


def gen_candidates(
    layout: Layout,
    layer: int,
    region: Rect,
    spacing_fn: Callable[[Union[Net, FillShape]], int],
) -> list[Rect]:
    """Grid tiles inside ``region`` that keep ``spacing_fn(shape)`` from every existing shape.

    ``spacing_fn`` receives the owning Net for net shapes and the FillShape for
    fill. Result is in scanline (y, x) order.
    """
    rules = layout.rules
    grid = AnchorGrid(layout.die, rules.tile_size, rules.tile_pitch)
    i0, i1 = grid.index_range(region.x_lo, region.x_hi, "x")
    j0, j1 = grid.index_range(region.y_lo, region.y_hi, "y")
    ax = grid.ax[i0:i1]
    ay = grid.ay[j0:j1]
    blocked = np.zeros((len(ay), len(ax)), dtype=bool)
    rects, spacing = [], []
    for net in layout.nets:
        s = spacing_fn(net)
        for lyr, r in net.shapes:
            if lyr == layer:
                rects.append(r.as_list())
                spacing.append(s)
    for f in layout.fills:
        if f.layer == layer:
            rects.append(f.rect.as_list())
            spacing.append(spacing_fn(f))
    block_anchors(blocked, ax, ay, rules.tile_size, as_rect_array(rects), np.asarray(spacing, dtype=np.int64))
    t = rules.tile_size
    return [
        Rect(int(ax[i]), int(ay[j]), int(ax[i]) + t, int(ay[j]) + t)
        for j, i in zip(*np.nonzero(~blocked))
    ]


# --------------------------------------------------------------------------
# incremental fill state


class _FillState:
    def __init__(self, layout: Layout):
        self.layout = layout
        self.rules = rules = layout.rules
        die = layout.die
        self.W = rules.window_w
        self.win_area = self.W * self.W
        self.wx = np.asarray(window_positions(die.x_lo, die.x_hi, self.W, rules.window_step), dtype=np.int64)
        self.wy = np.asarray(window_positions(die.y_lo, die.y_hi, self.W, rules.window_step), dtype=np.int64)
        windows = enumerate_windows(die, rules)
        self.area = {
            spec.index: window_metal_areas(layout, spec.index, windows).reshape(len(self.wy), len(self.wx))
            for spec in layout.layers
        }
        self.grid = AnchorGrid(die, rules.tile_size, rules.tile_pitch)
        self.occupied = {
            spec.index: np.zeros((len(self.grid.ay), len(self.grid.ax)), dtype=bool) for spec in layout.layers
        }
        self.max_area = rules.rho_max * self.win_area
        self.target_area = rules.rho_target * self.win_area
        # (layer, rect, kind, group) in insertion order
        self.added: list[tuple[int, Rect, FillKind, Optional[int]]] = []
        self.shields: dict[int, list[tuple[Rect, str]]] = {spec.index: [] for spec in layout.layers}
        self.next_group = 1 + max((f.shield_group or 0 for f in layout.fills), default=0)
        self.log: list[PhaseEntry] = []
        self.notes: list[WindowNote] = []

    def window(self, iy: int, ix: int) -> Rect:
        x, y = int(self.wx[ix]), int(self.wy[iy])
        return Rect(x, y, x + self.W, y + self.W)

    def window_index(self, w: Rect) -> tuple[int, int]:
        return int(np.searchsorted(self.wy, w.y_lo)), int(np.searchsorted(self.wx, w.x_lo))

    def overlaps(self, lo: np.ndarray, hi: np.ndarray, pos: np.ndarray) -> np.ndarray:
        """(k, n_windows_axis) overlap lengths of intervals [lo, hi] with windows along one axis."""
        return np.maximum(
            0, np.minimum(hi[:, None], pos[None, :] + self.W) - np.maximum(lo[:, None], pos[None, :])
        )

    def increments(self, rects: np.ndarray) -> np.ndarray:
        oy = self.overlaps(rects[:, 1], rects[:, 3], self.wy)
        ox = self.overlaps(rects[:, 0], rects[:, 2], self.wx)
        # float64 BLAS product; every partial sum is an integer far below 2**53
        return np.rint(oy.T.astype(np.float64) @ ox.astype(np.float64)).astype(np.int64)

    def fits(self, layer: int, rect: Rect) -> tuple[bool, np.ndarray]:
        inc = self.increments(as_rect_array([rect.as_list()]))
        return bool(np.all(self.area[layer] + inc <= self.max_area)), inc

    def add(self, layer: int, rect: Rect, kind: FillKind, inc: np.ndarray, group: Optional[int] = None) -> None:
        self.area[layer] += inc
        self.added.append((layer, rect, kind, group))

    def density(self, layer: int, iy: int, ix: int) -> float:
        return int(self.area[layer][iy, ix]) / self.win_area

    def low_windows(self) -> list[tuple[int, int, int]]:
        out = []
        for spec in self.layout.layers:
            ys, xs = np.nonzero(self.area[spec.index] < self.rules.rho_min * self.win_area)
            out.extend((spec.index, int(iy), int(ix)) for iy, ix in zip(ys, xs))
        return out

    def infeasible(self) -> tuple[WindowDensity, ...]:
        return tuple(
            WindowDensity(lyr, self.window(iy, ix), self.density(lyr, iy, ix))
            for lyr, iy, ix in sorted(self.low_windows())
        )

    def fill_shapes(self) -> tuple[FillShape, ...]:
        start = 1 + max((f.id for f in self.layout.fills), default=0)
        return tuple(
            FillShape._make((start + k, *entry)) for k, entry in enumerate(self.added)
        )

    def plan(self, mode: FillMode) -> FillPlan:
        return FillPlan(
            mode=mode,
            inserted=self.fill_shapes(),
            infeasible_windows=self.infeasible(),
            phase_log=tuple(self.log),
            notes=tuple(self.notes),
        )


def _require_unfilled(layout: Layout) -> None:
    if layout.fills:
        raise ValidationError("fill flow expects a layout without fill")


# --------------------------------------------------------------------------
# grid fill (regular / NDR)


def _grid_fill(state: _FillState, spacing_for_net: Callable[[Net], int], phase: str) -> None:
    layout, rules, grid = state.layout, state.rules, state.grid
    t = rules.tile_size
    blocked = {}
    for spec in layout.layers:
        shapes = layout.layer_shapes[spec.index]
        b = np.zeros((len(grid.ay), len(grid.ax)), dtype=bool)
        spacing = np.array([spacing_for_net(layout.nets[i]) for i in shapes.net_owner.tolist()], dtype=np.int64)
        block_anchors(b, grid.ax, grid.ay, t, shapes.net_rects, spacing)
        if len(shapes.fill_rects):
            block_anchors(
                b, grid.ax, grid.ay, t, shapes.fill_rects, np.full(len(shapes.fill_rects), rules.s_def)
            )
        blocked[spec.index] = b

    tile_area = t * t
    for lyr, iy, ix in state.low_windows():
        win = state.window(iy, ix)
        area = state.area[lyr]
        deficit = state.target_area - int(area[iy, ix])
        if deficit <= 0:
            state.log.append(PhaseEntry(phase, lyr, win, 0))
            continue
        i0, i1 = grid.index_range(win.x_lo, win.x_hi, "x")
        j0, j1 = grid.index_range(win.y_lo, win.y_hi, "y")
        free = ~(blocked[lyr][j0:j1, i0:i1] | state.occupied[lyr][j0:j1, i0:i1])
        jj, ii = np.nonzero(free)
        jj = jj + j0
        ii = ii + i0
        need = min(len(jj), math.ceil(deficit / tile_area))
        added = 0
        if need:
            xs = grid.ax[ii[:need]]
            ys = grid.ay[jj[:need]]
            rects = np.stack([xs, ys, xs + t, ys + t], axis=1)
            inc = state.increments(rects)
            if np.all(area + inc <= state.max_area):
                state.area[lyr] += inc
                state.occupied[lyr][jj[:need], ii[:need]] = True
                state.added.extend(
                    (lyr, r, FillKind.FLOATING, None) for r in map(Rect._make, rects.tolist())
                )
                added = need
            else:
                # slow path: some overlapping window would exceed rho_max
                for j, i in zip(jj.tolist(), ii.tolist()):
                    if area[iy, ix] >= state.target_area:
                        break
                    rect = grid.rect(j, i)
                    ok, inc1 = state.fits(lyr, rect)
                    if not ok:
                        continue
                    state.add(lyr, rect, FillKind.FLOATING, inc1)
                    state.occupied[lyr][j, i] = True
                    added += 1
        state.log.append(PhaseEntry(phase, lyr, win, added))


def regular_fill(layout: Layout) -> FillPlan:
    _require_unfilled(layout)
    state = _FillState(layout)
    s_def = layout.rules.s_def
    _grid_fill(state, lambda net: s_def, "regular")
    return state.plan(FillMode.REGULAR)


def ndr_fill_phase(layout: Layout, critical: Iterable[str]) -> FillPlan:
    _require_unfilled(layout)
    crit = set(critical)
    rules = layout.rules
    state = _FillState(layout)
    _grid_fill(state, lambda net: rules.s_ndr if net.id in crit else rules.s_def, "ndr")
    return state.plan(FillMode.TIMING_DRIVEN)


# --------------------------------------------------------------------------
# shield fill


def _lattice(bases: Iterable[int], lo: int, hi: int, step: int) -> np.ndarray:
    """Union of ``base + k * step`` lattices restricted to [lo, hi]."""
    vals = []
    for a in set(bases):
        k0 = -((a - lo) // step)
        k1 = (hi - a) // step
        if k1 >= k0:
            vals.append(a + step * np.arange(k0, k1 + 1, dtype=np.int64))
    if not vals:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(vals))


def _near(rects: np.ndarray, box: Rect, margin: int) -> np.ndarray:
    if len(rects) == 0:
        return np.zeros(0, dtype=bool)
    return (
        (rects[:, 0] <= box.x_hi + margin)
        & (rects[:, 2] >= box.x_lo - margin)
        & (rects[:, 1] <= box.y_hi + margin)
        & (rects[:, 3] >= box.y_lo - margin)
    )


def _min_gap(tiles: np.ndarray, rects: np.ndarray) -> np.ndarray:
    """Minimum Euclidean gap from each tile to any rect (inf when no rects); -1 marks overlap."""
    out = np.full(len(tiles), np.inf)
    for r in rects:
        rr = np.broadcast_to(r, tiles.shape)
        dx, dy, g = pairwise_gap(tiles, rr)
        ox = np.minimum(tiles[:, 2], r[2]) - np.maximum(tiles[:, 0], r[0])
        oy = np.minimum(tiles[:, 3], r[3]) - np.maximum(tiles[:, 1], r[1])
        g = np.where((ox > 0) & (oy > 0), -1.0, g)
        out = np.minimum(out, g)
    return out


class _ShieldContext:
    """Static per-layer geometry for the shield phase."""

    def __init__(self, layout: Layout, layer: int, critical: set[str]):
        shapes = layout.layer_shapes[layer]
        owners = [layout.nets[i] for i in shapes.net_owner.tolist()]
        is_ref = np.array([n.net_class is NetClass.REFERENCE for n in owners], dtype=bool)
        is_crit = np.array([n.id in critical for n in owners], dtype=bool)
        self.ref_rects = shapes.net_rects[is_ref] if len(owners) else shapes.net_rects
        self.ref_net = [n.id for n, r in zip(owners, is_ref) if r]
        self.crit_rects = shapes.net_rects[is_crit] if len(owners) else shapes.net_rects
        other = shapes.net_rects[~is_ref] if len(owners) else shapes.net_rects
        floating = [
            f.rect.as_list() for f in layout.fills if f.layer == layer and f.kind is FillKind.FLOATING
        ]
        self.keepout = np.concatenate([other, as_rect_array(floating)]) if len(floating) else other


def _shield_candidates(ctx: _ShieldContext, win: Rect, rules) -> tuple[np.ndarray, list[Optional[str]]]:
    """Legal shield tile positions in ``win`` within the NDR annulus, with the reference net each abuts."""
    t, s_def, s_ndr = rules.tile_size, rules.s_def, rules.s_ndr
    crit = ctx.crit_rects[_near(ctx.crit_rects, win, s_ndr + t)]
    ref_sel = np.nonzero(_near(ctx.ref_rects, win, 0))[0]
    refs = ctx.ref_rects[ref_sel]
    empty = (np.zeros((0, 4), dtype=np.int64), [])
    if len(crit) == 0 or len(refs) == 0:
        return empty
    xb = [c[2] + s_def for c in crit.tolist()] + [c[0] - s_def - t for c in crit.tolist()]
    yb = [c[3] + s_def for c in crit.tolist()] + [c[1] - s_def - t for c in crit.tolist()]
    xb += [r[2] for r in refs.tolist()] + [r[0] - t for r in refs.tolist()]
    yb += [r[3] for r in refs.tolist()] + [r[1] - t for r in refs.tolist()]
    X = _lattice(xb, win.x_lo, win.x_hi - t, t)
    Y = _lattice(yb, win.y_lo, win.y_hi - t, t)
    packed = []
    for c in crit.tolist():
        xs = X[(X > c[0] - s_ndr - t) & (X < c[2] + s_ndr)]
        ys = Y[(Y > c[1] - s_ndr - t) & (Y < c[3] + s_ndr)]
        if len(xs) and len(ys):
            gx, gy = np.meshgrid(xs, ys)
            packed.append(np.stack([gy.ravel(), gx.ravel()], axis=1))
    if not packed:
        return empty
    yx = np.unique(np.concatenate(packed), axis=0)  # sorted by (y, x)
    tiles = np.stack([yx[:, 1], yx[:, 0], yx[:, 1] + t, yx[:, 0] + t], axis=1)

    crit_gap = _min_gap(tiles, crit)
    ok = (crit_gap >= s_def) & (crit_gap < s_ndr)
    tiles = tiles[ok]
    if len(tiles):
        near = ctx.keepout[_near(ctx.keepout, win, s_def + t)]
        ok = _min_gap(tiles, near) >= s_def
        tiles = tiles[ok]
    if len(tiles) == 0:
        return empty

    # reference contacts: abut with a positive-length edge, or stay s_def away
    abut_net: list[Optional[str]] = [None] * len(tiles)
    legal = np.ones(len(tiles), dtype=bool)
    near_refs = np.nonzero(_near(ctx.ref_rects, win, s_def + t))[0]
    for k in near_refs.tolist():
        r = ctx.ref_rects[k]
        rr = np.broadcast_to(r, tiles.shape)
        _, _, g = pairwise_gap(tiles, rr)
        ox = np.minimum(tiles[:, 2], r[2]) - np.maximum(tiles[:, 0], r[0])
        oy = np.minimum(tiles[:, 3], r[3]) - np.maximum(tiles[:, 1], r[1])
        overlap = (ox > 0) & (oy > 0)
        touch = edge_contacts(tiles, rr)
        bad = overlap | ((g < s_def) & ~touch)
        legal &= ~bad
        for i in np.nonzero(touch & ~bad)[0].tolist():
            net = ctx.ref_net[k]
            if abut_net[i] is None:
                abut_net[i] = net
            elif abut_net[i] != net:
                legal[i] = False
    keep = np.nonzero(legal)[0]
    return tiles[keep], [abut_net[i] for i in keep.tolist()]


class _ShieldBins:
    """Inserted shield tiles on one layer, bucketed for neighbourhood lookups."""

    def __init__(self, cell: int):
        self.cell = cell
        self.bins: dict[tuple[int, int], list[tuple[Rect, str, int]]] = {}

    def add(self, rect: Rect, net: str, group: int) -> None:
        key = (rect.x_lo // self.cell, rect.y_lo // self.cell)
        self.bins.setdefault(key, []).append((rect, net, group))

    def near(self, rect: Rect) -> list[tuple[Rect, str, int]]:
        cx, cy = rect.x_lo // self.cell, rect.y_lo // self.cell
        out = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                out.extend(self.bins.get((cx + dx, cy + dy), ()))
        return out


def _shield_window(
    state: _FillState,
    ctx: _ShieldContext,
    bins: _ShieldBins,
    lyr: int,
    iy: int,
    ix: int,
) -> int:
    rules = state.rules
    win = state.window(iy, ix)
    if len(ctx.ref_rects) == 0 or not np.any(_near(ctx.ref_rects, win, 0)):
        state.notes.append(WindowNote(lyr, win, E_NOREF))
        return 0
    tiles, seed_net = _shield_candidates(ctx, win, rules)
    n = len(tiles)
    if n == 0:
        return 0

    # abutment graph among candidates, BFS from reference-abutting tiles
    qi, ri = GridIndex(tiles, cell=max(rules.tile_size * 2, 1)).query(tiles)
    touch = edge_contacts(tiles[qi], tiles[ri]) & (qi != ri)
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(qi[touch].tolist(), ri[touch].tolist()):
        adj[a].append(b)
    dist = [-1] * n
    queue = deque()
    for i in range(n):
        if seed_net[i] is not None:
            dist[i] = 0
            queue.append(i)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    order = sorted((d, int(tiles[i, 1]), int(tiles[i, 0]), i) for i, d in enumerate(dist) if d >= 0)

    added = 0
    s_def = rules.s_def
    for _, _, _, i in order:
        if state.area[lyr][iy, ix] >= state.target_area:
            break
        x0, y0, x1, y1 = tiles[i].tolist()
        rect = Rect(x0, y0, x1, y1)
        nets = {seed_net[i]} if seed_net[i] is not None else set()
        groups = []
        clash = False
        for other, net, grp in bins.near(rect):
            dx = max(other.x_lo - rect.x_hi, rect.x_lo - other.x_hi)
            dy = max(other.y_lo - rect.y_hi, rect.y_lo - other.y_hi)
            if dx < 0 and dy < 0:
                clash = True
                break
            if (dx == 0 and dy < 0) or (dy == 0 and dx < 0):
                nets.add(net)
                groups.append(grp)
            elif math.hypot(max(dx, 0), max(dy, 0)) < s_def:
                clash = True
                break
        if clash or len(nets) != 1:
            continue
        ok, inc = state.fits(lyr, rect)
        if not ok:
            continue
        if groups:
            group = min(groups)
        else:
            group = state.next_group
            state.next_group += 1
        state.add(lyr, rect, FillKind.SHIELD, inc, group)
        bins.add(rect, nets.pop(), group)
        added += 1
    return added


def shield_fill_phase(
    layout: Layout,
    violating_windows: Sequence[tuple[int, Rect]],
    critical: Iterable[str],
) -> FillPlan:
    """Grow grounded shield chains next to critical nets inside density-violating windows.

    ``layout`` carries the phase-1 fill. Windows are served worst density first.
    """
    crit = set(critical)
    state = _FillState(layout)
    rules = layout.rules
    contexts: dict[int, _ShieldContext] = {}
    bins: dict[int, _ShieldBins] = {}
    for f in layout.fills:
        if f.kind is FillKind.SHIELD:
            log.debug("shield fill %d already present; treated as keep-out", f.id)
    keyed = []
    for lyr, win in violating_windows:
        iy, ix = state.window_index(win)
        keyed.append((state.density(lyr, iy, ix), lyr, win.y_lo, win.x_lo, iy, ix))
    for _, lyr, _, _, iy, ix in sorted(keyed):
        if lyr not in contexts:
            contexts[lyr] = _ShieldContext(layout, lyr, crit)
            bins[lyr] = _ShieldBins(max(rules.tile_size * 4, rules.s_def * 4))
        added = _shield_window(state, contexts[lyr], bins[lyr], lyr, iy, ix)
        state.log.append(PhaseEntry("shield", lyr, state.window(iy, ix), added))
    return state.plan(FillMode.TIMING_DRIVEN)


def timing_driven_fill(layout: Layout, critical: Iterable[str]) -> FillPlan:
    crit = set(critical)
    phase1 = ndr_fill_phase(layout, crit)
    filled = phase1.apply(layout)
    violating = [(w.layer, w.window) for w in phase1.infeasible_windows]
    if not violating:
        return phase1
    phase2 = shield_fill_phase(filled, violating, crit)
    return FillPlan(
        mode=FillMode.TIMING_DRIVEN,
        inserted=phase1.inserted + phase2.inserted,
        infeasible_windows=phase2.infeasible_windows,
        phase_log=phase1.phase_log + phase2.phase_log,
        notes=phase2.notes,
    )


def run_fill(layout: Layout, mode: FillMode, critical: Optional[Iterable[str]] = None) -> FillPlan:
    if mode is FillMode.NONE:
        state = _FillState(layout)
        return FillPlan(mode=mode, infeasible_windows=state.infeasible())
    if mode is FillMode.REGULAR:
        return regular_fill(layout)
    if critical is None:
        from fillwright.timing import classify_critical

        critical = classify_critical(layout)
    return timing_driven_fill(layout, critical)


# --------------------------------------------------------------------------
# plan JSON


def plan_to_dict(plan: FillPlan) -> dict:
    def fill(f: FillShape) -> dict:
        d = {"id": f.id, "layer": f.layer, "rect": f.rect.as_list(), "kind": f.kind.value}
        if f.shield_group is not None:
            d["shield_group"] = f.shield_group
        return d

    return {
        "mode": plan.mode.value,
        "inserted": [fill(f) for f in plan.inserted],
        "infeasible_windows": [
            {"layer": w.layer, "window": w.window.as_list(), "density": w.density} for w in plan.infeasible_windows
        ],
        "phase_log": [
            {"phase": p.phase, "layer": p.layer, "window": p.window.as_list(), "tiles_added": p.tiles_added}
            for p in plan.phase_log
        ],
        "notes": [{"layer": n.layer, "window": n.window.as_list(), "code": n.code} for n in plan.notes],
    }


def plan_from_dict(doc: dict) -> FillPlan:
    try:
        return FillPlan(
            mode=FillMode(doc["mode"]),
            inserted=tuple(
                FillShape(
                    int(d["id"]),
                    int(d["layer"]),
                    Rect.from_seq(d["rect"]),
                    FillKind(d["kind"]),
                    d.get("shield_group"),
                )
                for d in doc.get("inserted", [])
            ),
            infeasible_windows=tuple(
                WindowDensity(int(d["layer"]), Rect.from_seq(d["window"]), float(d["density"]))
                for d in doc.get("infeasible_windows", [])
            ),
            phase_log=tuple(
                PhaseEntry(d["phase"], int(d["layer"]), Rect.from_seq(d["window"]), int(d["tiles_added"]))
                for d in doc.get("phase_log", [])
            ),
            notes=tuple(
                WindowNote(int(d["layer"]), Rect.from_seq(d["window"]), d["code"]) for d in doc.get("notes", [])
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed plan: {exc}") from exc


def dumps_plan(plan: FillPlan) -> str:
    return json.dumps(plan_to_dict(plan), sort_keys=True, separators=(",", ":")) + "\n"
