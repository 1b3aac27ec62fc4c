from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_layout, make_net
from fillwright.errors import NoNetError
from fillwright.layout import DesignRules, Endpoint, Net, NetClass, Rect
from fillwright.timing import (
    CriticalityPolicy,
    TimingReport,
    apply_deltas,
    classify_critical,
    delta_delay,
    format_value,
)

WIRE = [(0, Rect(0, 0, 1000, 100))]


def test_delta_delay_lumped_rc():
    net = make_net("a", WIRE)
    rules = DesignRules(miller_factor=2.0)
    # 500 ohm * (1e-15 + 2 * 2e-15) F = 2.5e-12 s
    assert delta_delay(net, 1e-15, 2e-15, rules) == pytest.approx(0.0025, rel=1e-12)
    assert delta_delay(net, 0.0, 0.0, rules) == 0.0


def test_delta_delay_rejects_reference():
    with pytest.raises(NoNetError):
        delta_delay(make_net("VSS", WIRE, NetClass.REFERENCE), 1e-15, 0, DesignRules())


@given(st.floats(0, 1e-13), st.floats(0, 1e-13), st.floats(0, 1e-13))
def test_coupling_weighs_at_least_ground(g, c, extra):
    net = make_net("a", WIRE)
    rules = DesignRules()
    assert delta_delay(net, g, c + extra, rules) >= delta_delay(net, g + extra, c, rules)


def test_apply_deltas_and_summary():
    layout = make_layout([make_net("a", WIRE, slack=0.01), make_net("b", [(0, Rect(0, 500, 1000, 600))], slack=0.2)])
    rep = apply_deltas(layout, {"a": 0.03})
    assert rep.wns == pytest.approx(-0.02)
    assert rep.tns == pytest.approx(-0.02)
    assert rep.num_violations == 1
    with pytest.raises(NoNetError):
        apply_deltas(layout, {"zzz": 0.1})


def test_report_without_endpoints():
    rep = TimingReport.from_slacks([])
    assert rep.wns is None and rep.tns == 0 and rep.num_violations == 0
    assert format_value(rep.wns) == "n/a"


def test_classification_boundary_is_strict():
    at = Net("at", NetClass.SIGNAL, tuple(WIRE), 100.0, (Endpoint("at/D", 0.990, 1.0),))
    below = Net("below", NetClass.SIGNAL, tuple(WIRE), 100.0, (Endpoint("below/D", 0.9901, 1.0),))
    tagged = make_net("tagged", WIRE, NetClass.CRITICAL, slack=1.0)
    relaxed = make_net("relaxed", WIRE, slack=1.0)
    layout = make_layout([at, below, tagged, relaxed])
    # slack exactly at threshold + guard is not critical
    assert classify_critical(layout, CriticalityPolicy(0.0, 0.010)) == {"below", "tagged"}


def test_format_value():
    assert format_value(-0.0154) == "-0.015"
    assert format_value(-0.0001) == "0.000"
    assert format_value(1.0) == "1.000"
