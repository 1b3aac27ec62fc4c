from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_layout, make_net
from fillwright.benchmark import BenchmarkParams, gen_benchmark
from fillwright.errors import LayoutIOError, ParseError, ValidationError
from fillwright.layout import (
    DesignRules,
    Net,
    FillKind,
    FillShape,
    NetClass,
    Rect,
    dumps_layout,
    layout_from_dict,
    layout_to_dict,
    load_layout,
    overlap_area,
    overlap_len,
    rect_gap,
    save_layout,
    shares_edge,
    validate_layout,
)

coords = st.integers(min_value=-5000, max_value=5000)


@st.composite
def rects(draw):
    x0, y0 = draw(coords), draw(coords)
    return Rect(x0, y0, x0 + draw(st.integers(1, 3000)), y0 + draw(st.integers(1, 3000)))


def test_rect_gap_cases():
    a = Rect(0, 0, 10, 10)
    assert rect_gap(a, Rect(15, 0, 20, 10)) == 5
    assert rect_gap(a, Rect(0, 13, 10, 20)) == 3
    assert rect_gap(a, Rect(13, 14, 20, 20)) == 5.0
    assert rect_gap(a, Rect(10, 0, 20, 10)) == 0
    assert rect_gap(a, Rect(5, 5, 20, 20)) is None


def test_overlap_helpers():
    a, b = Rect(0, 0, 10, 10), Rect(4, 6, 20, 30)
    assert overlap_len(a, b, "x") == 6
    assert overlap_len(a, b, "y") == 4
    assert overlap_area(a, b) == 24
    assert overlap_area(a, Rect(20, 20, 30, 30)) == 0
    assert shares_edge(a, Rect(10, 2, 12, 4))
    assert not shares_edge(a, Rect(10, 10, 12, 12))  # corner only
    assert not shares_edge(a, Rect(11, 2, 12, 4))


@given(rects(), rects())
def test_rect_gap_symmetric_and_matches_distance(a, b):
    g1, g2 = rect_gap(a, b), rect_gap(b, a)
    assert g1 == g2
    # sampled points on the boundaries never get closer than the gap
    if g1 is not None:
        pts_a = [(a.x_lo, a.y_lo), (a.x_hi, a.y_hi), (a.x_lo, a.y_hi), (a.x_hi, a.y_lo)]
        nearest = min(
            math.hypot(max(b.x_lo - x, 0, x - b.x_hi), max(b.y_lo - y, 0, y - b.y_hi)) for x, y in pts_a
        )
        assert g1 <= nearest + 1e-9


def test_json_round_trip_is_byte_stable(tmp_path):
    layout = gen_benchmark(BenchmarkParams(seed=4, num_nets=30))
    text = dumps_layout(layout)
    again = layout_from_dict(json.loads(text))
    assert again == layout
    assert dumps_layout(again) == text
    path = tmp_path / "l.json"
    save_layout(layout, path)
    assert load_layout(path) == layout


def test_load_errors(tmp_path):
    with pytest.raises(LayoutIOError):
        load_layout(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_layout(bad)
    doc = layout_to_dict(make_layout([make_net("a", [(0, Rect(0, 0, 100, 100))])]))
    doc["nets"][0]["shapes"][0][1] = [0, 0, 100]
    with pytest.raises(ParseError):
        layout_from_dict(doc)


def _invalid(layout):
    with pytest.raises(ValidationError):
        validate_layout(layout)


def test_validation_rejects_bad_layouts():
    ok = make_net("a", [(0, Rect(100, 100, 500, 200))])
    validate_layout(make_layout([ok]))
    _invalid(make_layout([ok, ok]))  # duplicate id
    _invalid(make_layout([make_net("b", [(5, Rect(0, 0, 10, 10))])]))
    _invalid(make_layout([make_net("b", [(0, Rect(0, 0, 30000, 10))])]))
    _invalid(make_layout([make_net("b", [(0, Rect(10, 0, 10, 10))])]))
    _invalid(make_layout([ok], rules=DesignRules(s_ndr=10)))
    # a reference net may not carry timing endpoints
    ref = make_net("VSS", [(0, Rect(0, 0, 50, 50))], NetClass.SIGNAL)
    _invalid(make_layout([Net(ref.id, NetClass.REFERENCE, ref.shapes, endpoints=ref.endpoints)]))


def test_fill_contact_rules():
    wire = make_net("a", [(0, Rect(0, 0, 1000, 100))])
    base = make_layout([wire])
    touching = base.with_fills([FillShape(1, 0, Rect(1000, 0, 1400, 400))])
    _invalid(touching)
    overlapping = base.with_fills([FillShape(1, 0, Rect(2000, 0, 2400, 400)), FillShape(2, 0, Rect(2200, 0, 2600, 400))])
    _invalid(overlapping)
    fine = base.with_fills([FillShape(1, 0, Rect(2000, 0, 2400, 400))])
    validate_layout(fine)
    dangling = base.with_fills([FillShape(1, 0, Rect(2000, 0, 2400, 400), FillKind.SHIELD, 1)])
    _invalid(dangling)


@settings(max_examples=60, deadline=None)
@given(st.recursive(st.one_of(st.none(), st.booleans(), st.integers(), st.text(max_size=4)), lambda c: st.lists(c, max_size=3) | st.dictionaries(st.text(max_size=6), c, max_size=3), max_leaves=12))
def test_fuzzed_documents_fail_cleanly(doc):
    try:
        layout = layout_from_dict(doc)
    except ParseError:
        return
    try:
        validate_layout(layout)
    except ValidationError:
        pass


def _paths(node, prefix=()):
    yield prefix
    if isinstance(node, dict):
        for k, v in node.items():
            yield from _paths(v, prefix + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _paths(v, prefix + (i,))


_VALID_DOC = layout_to_dict(
    make_layout(
        [
            make_net("a", [(0, Rect(100, 100, 900, 200)), (1, Rect(800, 100, 900, 1500))]),
            make_net("VSS", [(0, Rect(0, 5000, 20000, 5300))], NetClass.REFERENCE),
        ]
    )
)
_VALID_PATHS = [p for p in _paths(_VALID_DOC) if p]


@settings(max_examples=150, deadline=None)
@given(
    st.sampled_from(_VALID_PATHS),
    st.one_of(st.none(), st.integers(-10**6, 10**6), st.floats(allow_nan=True), st.text(max_size=3), st.just([]), st.just({})),
)
def test_mutated_documents_fail_cleanly(path, junk):
    doc = json.loads(json.dumps(_VALID_DOC))
    node = doc
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = junk
    try:
        validate_layout(layout_from_dict(doc))
    except (ParseError, ValidationError):
        pass
