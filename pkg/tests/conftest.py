from __future__ import annotations

import math

import pytest

from fillwright.benchmark import default_stack
from fillwright.layout import DesignRules, Endpoint, Layout, Net, NetClass, Rect


def make_net(net_id: str, shapes, cls: NetClass = NetClass.SIGNAL, slack: float = 0.1) -> Net:
    if cls is NetClass.REFERENCE:
        return Net(net_id, cls, tuple(shapes))
    return Net(net_id, cls, tuple(shapes), driver_res=500.0, endpoints=(Endpoint(f"{net_id}/D", 1.0 - slack, 1.0),))


def make_layout(nets, die=Rect(0, 0, 20000, 20000), rules: DesignRules = DesignRules(), layers: int = 2) -> Layout:
    return Layout(die=die, layers=default_stack(layers), nets=tuple(nets), rules=rules)


def brute_gap(a: Rect, b: Rect) -> float:
    """Euclidean distance between closed rectangles, negative on interior overlap."""
    dx = max(b.x_lo - a.x_hi, a.x_lo - b.x_hi)
    dy = max(b.y_lo - a.y_hi, a.y_lo - b.y_hi)
    if dx < 0 and dy < 0:
        return -1.0
    return math.hypot(max(dx, 0), max(dy, 0))


@pytest.fixture
def shield_layout() -> Layout:
    """A critical wire on layer 0 passing a vertical VSS rail, with room on both sides."""
    crit = make_net("crit", [(0, Rect(1000, 9950, 19000, 10050))], NetClass.CRITICAL, slack=-0.01)
    vss = make_net("VSS", [(0, Rect(500, 0, 800, 20000))], NetClass.REFERENCE)
    return make_layout([crit, vss])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
