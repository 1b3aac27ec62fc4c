"""Static SVG view of one layer."""

from __future__ import annotations

from pathlib import Path

from fillwright.errors import LayoutIOError, ValidationError
from fillwright.layout import FillKind, Layout, NetClass, Rect

_STYLE = """
.die { fill: none; stroke: #222; stroke-width: 0.4%; }
.net-signal { fill: #4a78c2; }
.net-critical { fill: #d23c3c; }
.net-reference { fill: #3a9a4a; }
.fill-floating { fill: #b0b0b0; }
.fill-shield { fill: #e0a020; }
""".strip()

_NET_CSS = {
    NetClass.SIGNAL: "net-signal",
    NetClass.CRITICAL: "net-critical",
    NetClass.REFERENCE: "net-reference",
}


def _rect_el(r: Rect, die: Rect, css: str, title: str | None = None) -> str:
    # SVG y grows downward; flip so the die origin sits bottom-left
    y = die.y_hi - r.y_hi
    attrs = f'x="{r.x_lo - die.x_lo}" y="{y}" width="{r.width}" height="{r.height}" class="{css}"'
    if title:
        return f"<rect {attrs}><title>{title}</title></rect>"
    return f"<rect {attrs}/>"


def layer_svg(layout: Layout, layer: int) -> str:
    if not any(spec.index == layer for spec in layout.layers):
        raise ValidationError(f"layer {layer} not in stack")
    die = layout.die
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {die.width} {die.height}" '
        f'width="800" height="{max(1, round(800 * die.height / die.width))}">',
        f"<style>{_STYLE}</style>",
        _rect_el(die, die, "die"),
    ]
    for net in layout.nets:
        for lyr, r in net.shapes:
            if lyr == layer:
                out.append(_rect_el(r, die, _NET_CSS[net.net_class], net.id))
    for f in layout.fills:
        if f.layer == layer:
            css = "fill-shield" if f.kind is FillKind.SHIELD else "fill-floating"
            out.append(_rect_el(f.rect, die, css))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(layout: Layout, layer: int, path) -> None:
    text = layer_svg(layout, layer)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise LayoutIOError(f"cannot write {path}: {exc}") from exc
