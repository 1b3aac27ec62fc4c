"""Layout data model, JSON interchange and primitive rectangle geometry.

All coordinates are integer nanometers. Capacitance code converts to microns
at its own boundary; nothing here knows about physics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence

import numpy as np

from fillwright.errors import LayoutIOError, ParseError, ValidationError
from fillwright.spatial import GridIndex, as_rect_array


class Rect(NamedTuple):
    """Axis-aligned integer rectangle; tuple order is (x_lo, y_lo, x_hi, y_hi)."""

    x_lo: int
    y_lo: int
    x_hi: int
    y_hi: int

    @property
    def width(self) -> int:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> int:
        return self.y_hi - self.y_lo

    @property
    def area(self) -> int:
        return self.width * self.height

    def is_valid(self) -> bool:
        return self.x_lo < self.x_hi and self.y_lo < self.y_hi

    def contains(self, other: "Rect") -> bool:
        return (
            self.x_lo <= other.x_lo
            and self.y_lo <= other.y_lo
            and other.x_hi <= self.x_hi
            and other.y_hi <= self.y_hi
        )

    def clip(self, other: "Rect") -> Optional["Rect"]:
        r = Rect(
            max(self.x_lo, other.x_lo),
            max(self.y_lo, other.y_lo),
            min(self.x_hi, other.x_hi),
            min(self.y_hi, other.y_hi),
        )
        return r if r.is_valid() else None

    def as_list(self) -> list[int]:
        return [self.x_lo, self.y_lo, self.x_hi, self.y_hi]

    @classmethod
    def from_seq(cls, seq: Sequence[Any]) -> "Rect":
        if len(seq) != 4:
            raise ParseError(f"rectangle needs 4 coordinates, got {seq!r}")
        return cls(*(_snap(v) for v in seq))


class NetClass(str, Enum):
    SIGNAL = "Signal"
    CRITICAL = "Critical"
    REFERENCE = "Reference"


class FillKind(str, Enum):
    FLOATING = "Floating"
    SHIELD = "Shield"


@dataclass(frozen=True)
class LayerSpec:
    index: int
    name: str
    thickness: int  # H, nm
    dielectric_above: Optional[int]  # t_di to layer index+1, nm
    permittivity: float  # absolute, F/um
    sheet_res: float  # ohm/sq
    unit_area_cap: float  # F/um^2


@dataclass(frozen=True)
class Endpoint:
    name: str
    base_arrival: float  # ns
    required: float  # ns

    @property
    def base_slack(self) -> float:
        return self.required - self.base_arrival


@dataclass(frozen=True)
class Net:
    id: str
    net_class: NetClass
    shapes: tuple[tuple[int, Rect], ...]
    driver_res: Optional[float] = None
    endpoints: tuple[Endpoint, ...] = ()


class FillShape(NamedTuple):
    id: int
    layer: int
    rect: Rect
    kind: FillKind = FillKind.FLOATING
    shield_group: Optional[int] = None


@dataclass(frozen=True)
class DesignRules:
    s_def: int = 70
    s_ndr: int = 210
    tile_size: int = 400
    tile_pitch: int = 600
    window_w: int = 20000
    window_step: int = 10000
    rho_min: float = 0.25
    rho_max: float = 0.75
    interaction_radius: int = 2000
    miller_factor: float = 2.0
    target: Optional[float] = None  # defaults to the midpoint of [rho_min, rho_max]

    @property
    def rho_target(self) -> float:
        if self.target is not None:
            return self.target
        return (self.rho_min + self.rho_max) / 2


@dataclass(frozen=True)
class Layout:
    die: Rect
    layers: tuple[LayerSpec, ...]
    nets: tuple[Net, ...]
    rules: DesignRules = field(default_factory=DesignRules)
    fills: tuple[FillShape, ...] = ()

    @cached_property
    def net_by_id(self) -> dict[str, Net]:
        return {n.id: n for n in self.nets}

    def with_fills(self, fills: Sequence[FillShape]) -> "Layout":
        return replace(self, fills=tuple(fills))

    def with_rules(self, **changes) -> "Layout":
        return replace(self, rules=replace(self.rules, **changes))

    @cached_property
    def layer_shapes(self) -> dict[int, "LayerShapes"]:
        return {spec.index: LayerShapes.build(self, spec.index) for spec in self.layers}


@dataclass(frozen=True)
class LayerShapes:
    """Columnar view of one layer: net shapes and fill shapes as int64 arrays."""

    layer: int
    net_rects: np.ndarray
    net_owner: np.ndarray  # index into layout.nets
    net_shape_idx: np.ndarray  # index into net.shapes
    fill_rects: np.ndarray
    fill_idx: np.ndarray  # index into layout.fills

    @classmethod
    def build(cls, layout: Layout, layer: int) -> "LayerShapes":
        rects, owner, sidx = [], [], []
        for ni, net in enumerate(layout.nets):
            for si, (lyr, r) in enumerate(net.shapes):
                if lyr == layer:
                    rects.append((r.x_lo, r.y_lo, r.x_hi, r.y_hi))
                    owner.append(ni)
                    sidx.append(si)
        fidx = [fi for fi, f in enumerate(layout.fills) if f.layer == layer]
        frects = [layout.fills[fi].rect for fi in fidx]
        return cls(
            layer=layer,
            net_rects=as_rect_array(rects),
            net_owner=np.asarray(owner, dtype=np.int64),
            net_shape_idx=np.asarray(sidx, dtype=np.int64),
            fill_rects=as_rect_array(frects),
            fill_idx=np.asarray(fidx, dtype=np.int64),
        )


# --------------------------------------------------------------------------
# primitive geometry


def rect_gap(a: Rect, b: Rect) -> Optional[float]:
    """Edge-to-edge separation of two rectangles, or ``None`` when interiors intersect.

    Facing walls (projections overlap on one axis) give the integer axis gap;
    diagonal neighbours give the Euclidean corner distance. Touching shapes
    have gap 0.
    """
    dx = max(b.x_lo - a.x_hi, a.x_lo - b.x_hi)
    dy = max(b.y_lo - a.y_hi, a.y_lo - b.y_hi)
    if dx < 0 and dy < 0:
        return None
    if dx < 0:
        return dy
    if dy < 0:
        return dx
    return math.hypot(dx, dy)


def overlap_len(a: Rect, b: Rect, axis: str) -> int:
    if axis == "x":
        return max(0, min(a.x_hi, b.x_hi) - max(a.x_lo, b.x_lo))
    if axis == "y":
        return max(0, min(a.y_hi, b.y_hi) - max(a.y_lo, b.y_lo))
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def overlap_area(a: Rect, b: Rect) -> int:
    return overlap_len(a, b, "x") * overlap_len(a, b, "y")


def shares_edge(a: Rect, b: Rect) -> bool:
    """True when the rectangles touch along a boundary segment of positive length."""
    if a.x_hi == b.x_lo or b.x_hi == a.x_lo:
        return overlap_len(a, b, "y") > 0
    if a.y_hi == b.y_lo or b.y_hi == a.y_lo:
        return overlap_len(a, b, "x") > 0
    return False


# --------------------------------------------------------------------------
# JSON interchange


def _snap(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ParseError(f"non-finite coordinate {v!r}")
    return int(round(v))


def _num(obj: dict, key: str, where: str, default: Any = ...) -> float:
    if key not in obj:
        if default is ...:
            raise ParseError(f"{where}: missing key {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: {key!r} must be a number, got {v!r}")
    return float(v)


def _require(obj: Any, kind: type, where: str):
    if not isinstance(obj, kind):
        raise ParseError(f"{where}: expected {kind.__name__}, got {type(obj).__name__}")
    return obj


def layout_from_dict(doc: Any) -> Layout:
    """Build a Layout from parsed JSON. Structural problems raise ParseError; call
    :func:`validate_layout` for semantic checks."""
    _require(doc, dict, "layout")
    die = Rect.from_seq(_require(doc.get("die"), list, "die"))

    layers = []
    for i, ld in enumerate(_require(doc.get("layers"), list, "layers")):
        where = f"layers[{i}]"
        _require(ld, dict, where)
        t = ld.get("dielectric_above_t")
        layers.append(
            LayerSpec(
                index=int(_num(ld, "index", where)),
                name=str(ld.get("name", f"M{i + 1}")),
                thickness=_snap(_num(ld, "thickness_H", where)),
                dielectric_above=None if t is None else _snap(t),
                permittivity=_num(ld, "permittivity_eps_f_per_um", where),
                sheet_res=_num(ld, "sheet_res_ohm_sq", where, 0.0),
                unit_area_cap=_num(ld, "unit_area_cap_f_per_um2", where, 0.0),
            )
        )

    rd = _require(doc.get("rules", {}), dict, "rules")
    target = rd.get("rho_target")
    rules = DesignRules(
        s_def=_snap(_num(rd, "s_def", "rules", 70)),
        s_ndr=_snap(_num(rd, "s_ndr", "rules", 210)),
        tile_size=_snap(_num(rd, "tile_size", "rules", 400)),
        tile_pitch=_snap(_num(rd, "tile_pitch", "rules", 600)),
        window_w=_snap(_num(rd, "window_W", "rules", 20000)),
        window_step=_snap(_num(rd, "window_step", "rules", 10000)),
        rho_min=_num(rd, "rho_min", "rules", 0.25),
        rho_max=_num(rd, "rho_max", "rules", 0.75),
        interaction_radius=_snap(_num(rd, "interaction_radius", "rules", 2000)),
        miller_factor=_num(rd, "miller_factor", "rules", 2.0),
        target=None if target is None else _num(rd, "rho_target", "rules"),
    )

    nets = []
    for i, nd in enumerate(_require(doc.get("nets"), list, "nets")):
        where = f"nets[{i}]"
        _require(nd, dict, where)
        try:
            cls = NetClass(nd.get("class", "Signal"))
        except ValueError:
            raise ParseError(f"{where}: unknown net class {nd.get('class')!r}") from None
        shapes = []
        for j, sd in enumerate(_require(nd.get("shapes", []), list, f"{where}.shapes")):
            if not isinstance(sd, list) or len(sd) != 2:
                raise ParseError(f"{where}.shapes[{j}]: expected [layer, [x_lo,y_lo,x_hi,y_hi]]")
            shapes.append((_snap(sd[0]), Rect.from_seq(_require(sd[1], list, f"{where}.shapes[{j}]"))))
        endpoints = []
        for j, ed in enumerate(_require(nd.get("endpoints", []), list, f"{where}.endpoints")):
            ew = f"{where}.endpoints[{j}]"
            _require(ed, dict, ew)
            endpoints.append(
                Endpoint(
                    name=str(ed.get("name", f"{nd.get('id')}/{j}")),
                    base_arrival=_num(ed, "base_arrival_ns", ew),
                    required=_num(ed, "required_ns", ew),
                )
            )
        drv = nd.get("driver_res_ohm")
        nets.append(
            Net(
                id=str(_require(nd.get("id"), str, f"{where}.id")),
                net_class=cls,
                shapes=tuple(shapes),
                driver_res=None if drv is None else _num(nd, "driver_res_ohm", where),
                endpoints=tuple(endpoints),
            )
        )

    fills = []
    for i, fd in enumerate(_require(doc.get("fills", []), list, "fills")):
        where = f"fills[{i}]"
        _require(fd, dict, where)
        try:
            kind = FillKind(fd.get("kind", "Floating"))
        except ValueError:
            raise ParseError(f"{where}: unknown fill kind {fd.get('kind')!r}") from None
        grp = fd.get("shield_group")
        fills.append(
            FillShape(
                id=_snap(_num(fd, "id", where)),
                layer=_snap(_num(fd, "layer", where)),
                rect=Rect.from_seq(_require(fd.get("rect"), list, f"{where}.rect")),
                kind=kind,
                shield_group=None if grp is None else _snap(grp),
            )
        )

    return Layout(die=die, layers=tuple(layers), nets=tuple(nets), rules=rules, fills=tuple(fills))


def layout_to_dict(layout: Layout) -> dict:
    r = layout.rules
    rules = {
        "s_def": r.s_def,
        "s_ndr": r.s_ndr,
        "tile_size": r.tile_size,
        "tile_pitch": r.tile_pitch,
        "window_W": r.window_w,
        "window_step": r.window_step,
        "rho_min": r.rho_min,
        "rho_max": r.rho_max,
        "interaction_radius": r.interaction_radius,
        "miller_factor": r.miller_factor,
    }
    if r.target is not None:
        rules["rho_target"] = r.target
    layers = []
    for spec in layout.layers:
        ld = {
            "index": spec.index,
            "name": spec.name,
            "thickness_H": spec.thickness,
            "permittivity_eps_f_per_um": spec.permittivity,
            "sheet_res_ohm_sq": spec.sheet_res,
            "unit_area_cap_f_per_um2": spec.unit_area_cap,
        }
        if spec.dielectric_above is not None:
            ld["dielectric_above_t"] = spec.dielectric_above
        layers.append(ld)
    nets = []
    for net in layout.nets:
        nd: dict[str, Any] = {
            "id": net.id,
            "class": net.net_class.value,
            "shapes": [[lyr, rect.as_list()] for lyr, rect in net.shapes],
        }
        if net.driver_res is not None:
            nd["driver_res_ohm"] = net.driver_res
        if net.endpoints:
            nd["endpoints"] = [
                {"name": e.name, "base_arrival_ns": e.base_arrival, "required_ns": e.required}
                for e in net.endpoints
            ]
        nets.append(nd)
    fills = []
    for f in layout.fills:
        fd: dict[str, Any] = {"id": f.id, "layer": f.layer, "rect": f.rect.as_list(), "kind": f.kind.value}
        if f.shield_group is not None:
            fd["shield_group"] = f.shield_group
        fills.append(fd)
    return {
        "die": layout.die.as_list(),
        "layers": layers,
        "rules": rules,
        "nets": nets,
        "fills": fills,
    }


def dumps_layout(layout: Layout) -> str:
    return json.dumps(layout_to_dict(layout), sort_keys=True, separators=(",", ":")) + "\n"


def load_layout(path) -> Layout:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LayoutIOError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    layout = layout_from_dict(doc)
    validate_layout(layout)
    return layout


def save_layout(layout: Layout, path) -> None:
    try:
        Path(path).write_text(dumps_layout(layout), encoding="utf-8")
    except OSError as exc:
        raise LayoutIOError(f"cannot write {path}: {exc}") from exc


# --------------------------------------------------------------------------
# validation


def _fail(msg: str) -> None:
    raise ValidationError(msg)


def validate_rules(rules: DesignRules) -> None:
    r = rules
    if not (0 < r.rho_min < r.rho_max <= 1):
        _fail(f"rules: need 0 < rho_min < rho_max <= 1 (got {r.rho_min}, {r.rho_max})")
    if not (r.s_ndr >= r.s_def > 0):
        _fail(f"rules: need s_ndr >= s_def > 0 (got s_ndr={r.s_ndr}, s_def={r.s_def})")
    if r.tile_size <= 0:
        _fail("rules: tile_size must be positive")
    if r.tile_pitch < r.tile_size + r.s_def:
        _fail(f"rules: need tile_pitch >= tile_size + s_def (got {r.tile_pitch})")
    if not (0 < r.window_step <= r.window_w):
        _fail(f"rules: need 0 < window_step <= window_W (got {r.window_step}, {r.window_w})")
    if r.interaction_radius < 0:
        _fail("rules: interaction_radius must be non-negative")
    if r.miller_factor < 1:
        _fail(f"rules: miller_factor must be >= 1 (got {r.miller_factor})")
    if r.target is not None and not (r.rho_min <= r.target <= r.rho_max):
        _fail(f"rules: rho_target {r.target} outside [rho_min, rho_max]")


def validate_layout(layout: Layout) -> None:
    """Raise ValidationError naming the first violated invariant and the offending object."""
    die = layout.die
    if not die.is_valid():
        _fail(f"die: degenerate or inverted rectangle {die.as_list()}")

    n_layers = len(layout.layers)
    if n_layers == 0:
        _fail("layers: at least one layer required")
    for i, spec in enumerate(layout.layers):
        if spec.index != i:
            _fail(f"layer {spec.name}: index {spec.index} out of order (expected {i})")
        if spec.thickness <= 0:
            _fail(f"layer {spec.name}: thickness_H must be positive")
        if spec.permittivity <= 0:
            _fail(f"layer {spec.name}: permittivity must be positive")
        if i < n_layers - 1:
            t = spec.dielectric_above
            if t is None:
                _fail(f"layer {spec.name}: dielectric_above_t required below the top layer")
            upper = layout.layers[i + 1]
            if t <= spec.thickness or t <= upper.thickness:
                _fail(
                    f"layer {spec.name}: dielectric_above_t={t} must exceed thickness_H of "
                    f"{spec.name} ({spec.thickness}) and {upper.name} ({upper.thickness})"
                )

    validate_rules(layout.rules)

    seen: set[str] = set()
    for net in layout.nets:
        if net.id in seen:
            _fail(f"net {net.id}: duplicate id")
        seen.add(net.id)
        for lyr, rect in net.shapes:
            if not (0 <= lyr < n_layers):
                _fail(f"net {net.id}: shape on unknown layer {lyr}")
            if not rect.is_valid():
                _fail(f"net {net.id}: degenerate or inverted rectangle {rect.as_list()}")
            if not die.contains(rect):
                _fail(f"net {net.id}: shape {rect.as_list()} outside die")
        if net.net_class is NetClass.REFERENCE:
            if net.endpoints:
                _fail(f"net {net.id}: Reference nets carry no endpoints")
            if net.driver_res is not None:
                _fail(f"net {net.id}: Reference nets carry no driver_res")
        else:
            if net.driver_res is None or net.driver_res <= 0:
                _fail(f"net {net.id}: driver_res must be positive for {net.net_class.value} nets")
        for ep in net.endpoints:
            if not (math.isfinite(ep.base_arrival) and math.isfinite(ep.required)):
                _fail(f"net {net.id}: endpoint {ep.name} has non-finite timing")

    fill_ids: set[int] = set()
    for f in layout.fills:
        if f.id in fill_ids:
            _fail(f"fill {f.id}: duplicate id")
        fill_ids.add(f.id)
        if not (0 <= f.layer < n_layers):
            _fail(f"fill {f.id}: unknown layer {f.layer}")
        if not f.rect.is_valid():
            _fail(f"fill {f.id}: degenerate or inverted rectangle {f.rect.as_list()}")
        if not die.contains(f.rect):
            _fail(f"fill {f.id}: outside die")
        if f.kind is FillKind.SHIELD and f.shield_group is None:
            _fail(f"fill {f.id}: Shield fill needs a shield_group")
        if f.kind is FillKind.FLOATING and f.shield_group is not None:
            _fail(f"fill {f.id}: Floating fill cannot carry a shield_group")

    if layout.fills:
        _check_fill_contacts(layout)
        from fillwright.connectivity import check_shield_connectivity

        bad = check_shield_connectivity(layout)
        if bad:
            _fail(f"fill {bad[0]}: Shield fill not connected to a Reference net")


def _check_fill_contacts(layout: Layout) -> None:
    """Fill never overlaps anything; only Shield fill may touch, and only Shield/Reference."""
    for lyr, shapes in layout.layer_shapes.items():
        if len(shapes.fill_rects) == 0:
            continue
        fills = shapes.fill_rects
        index = GridIndex(fills, cell=max(layout.rules.window_w // 4, 1))
        # fill vs fill
        qi, ri = index.query(fills)
        keep = qi < ri
        _contact_errors(layout, fills[qi[keep]], fills[ri[keep]], shapes.fill_idx[qi[keep]], ("fill", shapes.fill_idx[ri[keep]]))
        # fill vs nets
        if len(shapes.net_rects):
            qi, ri = index.query(shapes.net_rects)
            _contact_errors(layout, fills[ri], shapes.net_rects[qi], shapes.fill_idx[ri], ("net", shapes.net_owner[qi]))


def _contact_errors(layout, fa, fb, fa_idx, other) -> None:
    if len(fa) == 0:
        return
    kind, other_idx = other
    ox = np.minimum(fa[:, 2], fb[:, 2]) - np.maximum(fa[:, 0], fb[:, 0])
    oy = np.minimum(fa[:, 3], fb[:, 3]) - np.maximum(fa[:, 1], fb[:, 1])
    overlap = (ox > 0) & (oy > 0)
    touch = ~overlap & (ox >= 0) & (oy >= 0)
    for k in np.nonzero(overlap | touch)[0]:
        f = layout.fills[int(fa_idx[k])]
        if kind == "fill":
            o = layout.fills[int(other_idx[k])]
            label = f"fill {o.id}"
            shield_ok = f.kind is FillKind.SHIELD and o.kind is FillKind.SHIELD
        else:
            net = layout.nets[int(other_idx[k])]
            label = f"net {net.id}"
            shield_ok = f.kind is FillKind.SHIELD and net.net_class is NetClass.REFERENCE
        if overlap[k]:
            _fail(f"fill {f.id}: overlaps {label}")
        edge = (ox[k] > 0) or (oy[k] > 0)
        if not (shield_ok and edge):
            _fail(f"fill {f.id}: touches {label}")
