"""Seeded synthetic benchmark layouts.

Wires run on routing tracks: horizontal on even layers, vertical on odd
layers. Each layer carries VSS/VDD rails in its routing direction every
``reference_rail_pitch``. A ``critical_fraction`` of signal nets is tagged
Critical and given endpoint slacks inside the default guard band.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from fillwright.errors import ParamsError
from fillwright.layout import DesignRules, Endpoint, LayerSpec, Layout, Net, NetClass, Rect, validate_layout

EPS_SIO2_F_PER_UM = 3.9 * 8.854e-18


@dataclass(frozen=True)
class BenchmarkParams:
    seed: int = 1
    die_edge: int = 100_000
    num_layers: int = 2
    num_nets: int = 150
    critical_fraction: float = 0.2
    reference_rail_pitch: int = 10_000
    wire_len_range: tuple[int, int] = (4_000, 25_000)
    wire_width_range: tuple[int, int] = (60, 140)
    track_pitch: int = 400
    rail_width: int = 300


def default_stack(num_layers: int) -> tuple[LayerSpec, ...]:
    return tuple(
        LayerSpec(
            index=i,
            name=f"M{i + 1}",
            thickness=140,
            dielectric_above=200 if i < num_layers - 1 else None,
            permittivity=EPS_SIO2_F_PER_UM,
            sheet_res=0.08,
            unit_area_cap=2.0e-17,
        )
        for i in range(num_layers)
    )


def _check(p: BenchmarkParams, rules: DesignRules) -> None:
    if p.num_layers < 1:
        raise ParamsError("num_layers must be >= 1")
    if p.num_nets < 0:
        raise ParamsError("num_nets must be >= 0")
    if not 0.0 <= p.critical_fraction <= 1.0:
        raise ParamsError("critical_fraction must lie in [0, 1]")
    if p.die_edge < rules.window_w:
        raise ParamsError(f"die_edge {p.die_edge} smaller than the density window {rules.window_w}")
    lo, hi = p.wire_len_range
    if not 0 < lo <= hi <= p.die_edge:
        raise ParamsError("wire_len_range must satisfy 0 < lo <= hi <= die_edge")
    wlo, whi = p.wire_width_range
    if not 0 < wlo <= whi:
        raise ParamsError("wire_width_range must satisfy 0 < lo <= hi")
    if p.track_pitch < max(whi, p.rail_width) / 2 + whi / 2 + rules.s_def:
        raise ParamsError("track_pitch too small for wire widths plus s_def")
    if p.reference_rail_pitch < 2 * p.track_pitch:
        raise ParamsError("reference_rail_pitch must span at least two tracks")


class _Tracks:
    """Occupied intervals per (layer, track); keeps s_def between wire ends."""

    def __init__(self, spacing: int):
        self.spacing = spacing
        self.busy: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def free(self, key: tuple[int, int], lo: int, hi: int) -> bool:
        ivs = self.busy.get(key, [])
        k = bisect.bisect_left(ivs, (lo, hi))
        for a, b in ivs[max(0, k - 1) : k + 1]:
            if lo < b + self.spacing and a < hi + self.spacing:
                return False
        return True

    def take(self, key: tuple[int, int], lo: int, hi: int) -> None:
        bisect.insort(self.busy.setdefault(key, []), (lo, hi))


def gen_benchmark(params: BenchmarkParams, rules: DesignRules = DesignRules()) -> Layout:
    _check(params, rules)
    p = params
    rng = np.random.default_rng(p.seed)
    die = Rect(0, 0, p.die_edge, p.die_edge)
    n_tracks = p.die_edge // p.track_pitch
    # leave the outermost tracks empty so wide rails stay inside the die
    usable = range(1, n_tracks - 1)
    tracks = _Tracks(rules.s_def)

    def center(k: int) -> int:
        return k * p.track_pitch + p.track_pitch // 2

    def wire(layer: int, track: int, lo: int, hi: int, width: int) -> Rect:
        c = center(track)
        a, b = c - width // 2, c - width // 2 + width
        return Rect(lo, a, hi, b) if layer % 2 == 0 else Rect(a, lo, b, hi)

    rails: dict[str, list[tuple[int, Rect]]] = {"VSS": [], "VDD": []}
    rail_tracks = sorted({
        min(max(int(round((y - p.track_pitch / 2) / p.track_pitch)), 1), n_tracks - 2)
        for y in range(p.reference_rail_pitch // 2, p.die_edge, p.reference_rail_pitch)
    })
    for layer in range(p.num_layers):
        for i, k in enumerate(rail_tracks):
            rect = wire(layer, k, 0, p.die_edge, p.rail_width)
            rails["VSS" if i % 2 == 0 else "VDD"].append((layer, rect))
            for kk in (k - 1, k, k + 1):
                tracks.take((layer, kk), 0, p.die_edge)

    def place(layer: int, lo_bound: int = 0, hi_bound: int = p.die_edge, track=None, tries: int = 50):
        for _ in range(tries):
            length = int(rng.integers(p.wire_len_range[0], p.wire_len_range[1] + 1))
            length = min(length, hi_bound - lo_bound)
            start = int(rng.integers(lo_bound, hi_bound - length + 1))
            k = int(rng.integers(usable.start, usable.stop)) if track is None else track
            if not tracks.free((layer, k), start, start + length):
                continue
            width = int(rng.integers(p.wire_width_range[0], p.wire_width_range[1] + 1))
            tracks.take((layer, k), start, start + length)
            return k, wire(layer, k, start, start + length, width)
        return None

    n_crit = int(round(p.critical_fraction * p.num_nets))
    crit_ids = set(rng.choice(p.num_nets, size=n_crit, replace=False).tolist()) if n_crit else set()
    even = list(range(0, p.num_layers, 2))
    odd = list(range(1, p.num_layers, 2))

    nets: list[Net] = []
    for n in range(p.num_nets):
        shapes: list[tuple[int, Rect]] = []
        for _ in range(200):
            layer = even[int(rng.integers(len(even)))]
            got = place(layer, tries=1)
            if got is not None:
                shapes.append((layer, got[1]))
                break
        else:
            raise ParamsError(f"die too crowded to place net {n}")
        if odd and rng.random() < 0.5:
            h = shapes[0][1]
            # vertical branch from the wire's end, on the track under that end
            x_end = h.x_hi if rng.random() < 0.5 else h.x_lo
            k = min(max(x_end // p.track_pitch, usable.start), usable.stop - 1)
            layer = odd[int(rng.integers(len(odd)))]
            y = (h.y_lo + h.y_hi) // 2
            half = p.wire_len_range[1]
            got = place(layer, max(0, y - half), min(p.die_edge, y + half), track=k, tries=10)
            if got is not None:
                shapes.append((layer, got[1]))
        critical = n in crit_ids
        endpoints = []
        for e in range(int(rng.integers(1, 3))):
            slack = float(rng.uniform(-0.030, 0.005)) if critical else float(rng.uniform(0.05, 0.40))
            required = round(1.0 + float(rng.uniform(0.0, 0.5)), 4)
            endpoints.append(Endpoint(f"n{n:05d}/ff{e}/D", round(required - slack, 4), required))
        nets.append(
            Net(
                id=f"n{n:05d}",
                net_class=NetClass.CRITICAL if critical else NetClass.SIGNAL,
                shapes=tuple(shapes),
                driver_res=float(rng.integers(200, 1001)),
                endpoints=tuple(endpoints),
            )
        )
    for name in ("VDD", "VSS"):
        if rails[name]:
            nets.append(Net(id=name, net_class=NetClass.REFERENCE, shapes=tuple(rails[name])))

    layout = Layout(die=die, layers=default_stack(p.num_layers), nets=tuple(nets), rules=rules)
    validate_layout(layout)
    return layout


def shape_count(layout: Layout) -> int:
    return sum(len(n.shapes) for n in layout.nets)
