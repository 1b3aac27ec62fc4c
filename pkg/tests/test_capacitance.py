from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_layout, make_net
from oracles import brute_coupling, record_map
from fillwright.benchmark import BenchmarkParams, gen_benchmark
from fillwright.capacitance import (
    AggressorClass,
    CapComponents,
    CouplingRecord,
    c_fringing,
    c_lateral,
    c_parallel,
    extract_coupling,
    net_delta_caps,
    pair_coupling,
)
from fillwright.errors import GeometryError, StackError
from fillwright.fill import regular_fill
from fillwright.layout import FillKind, FillShape, LayerSpec, NetClass, Rect

UNIT_STACK = (
    LayerSpec(0, "M1", 1000, 2000, 1.0, 0.0, 0.0),
    LayerSpec(1, "M2", 1000, None, 1.0, 0.0, 0.0),
    LayerSpec(2, "M3", 1000, None, 1.0, 0.0, 0.0),
)


def test_kernel_examples():
    assert c_lateral(1, 1, 1, 1) == 1.0
    assert c_lateral(0.14, 3.453e-17, 0.07, 5.0) == pytest.approx(3.453e-16, rel=1e-12)
    assert c_parallel(1, 1, 1) == 1.0
    assert c_parallel(3.453e-17, 0.16, 0.2) == pytest.approx(2.7624e-17, rel=1e-12)
    assert c_parallel(1.0, 0.0, 0.2) == 0.0
    assert c_fringing(1, math.e, 1, 1) == pytest.approx(2 * math.pi, rel=1e-15)
    assert c_fringing(1, 2, 1, 1) == pytest.approx(9.064720, abs=1e-6)


def test_kernel_errors():
    with pytest.raises(GeometryError):
        c_lateral(1, 1, 0, 1)
    with pytest.raises(StackError):
        c_fringing(1, 1, 1, 1)


@given(
    st.floats(0.01, 2),
    st.floats(1e-18, 1e-16),
    st.floats(0.01, 5),
    st.floats(0.01, 5),
    st.just(0.0) | st.floats(1e-3, 50),  # lengths are whole nanometres
)
def test_lateral_decreases_with_spacing(H, eps, s, ds, length):
    if length == 0:
        assert c_lateral(H, eps, s, length) == 0
        return
    assert c_lateral(H, eps, s + ds, length) < c_lateral(H, eps, s, length)
    assert c_lateral(H, eps, 2 * s, length) == pytest.approx(c_lateral(H, eps, s, length) / 2, rel=1e-12)


def test_pair_same_layer_parallel_wires():
    a = (0, Rect(0, 0, 10_000, 500))
    b = (0, Rect(0, 1500, 10_000, 2000))
    c = pair_coupling(a, b, UNIT_STACK)
    assert c.lateral == pytest.approx(10.0)
    assert (c.parallel, c.fringing) == (0.0, 0.0)


def test_pair_stacked_squares_golden():
    a = (0, Rect(0, 0, 1000, 1000))
    b = (1, Rect(0, 0, 1000, 1000))
    c = pair_coupling(a, b, UNIT_STACK)
    assert c.parallel == pytest.approx(0.5)
    # all four edges of both squares lie within reach of the other footprint
    assert c.fringing == pytest.approx(8 * 2 * math.pi / math.log(2))
    assert c.lateral == 0.0


def test_pair_degenerate_cases():
    assert pair_coupling((0, Rect(0, 0, 10, 10)), (2, Rect(0, 0, 10, 10)), UNIT_STACK).total == 0
    assert pair_coupling((0, Rect(0, 0, 10, 10)), (0, Rect(20, 20, 30, 30)), UNIT_STACK).total == 0
    assert pair_coupling((0, Rect(0, 0, 10, 10)), (0, Rect(10, 0, 20, 10)), UNIT_STACK).total == 0
    with pytest.raises(GeometryError):
        pair_coupling((0, Rect(0, 0, 10, 10)), (0, Rect(5, 5, 20, 20)), UNIT_STACK)


def test_single_fill_at_s_def():
    wire = Rect(1000, 1000, 9000, 1100)
    layout = make_layout([make_net("crit", [(0, wire)], NetClass.CRITICAL)])
    tile = Rect(2000, 1170, 2400, 1570)
    filled = layout.with_fills([FillShape(1, 0, tile)])
    recs = [r for r in extract_coupling(filled) if r.aggressor == 1]
    assert len(recs) == 1
    spec = layout.layers[0]
    expected = c_lateral(spec.thickness / 1000, spec.permittivity, 0.07, 0.4)
    assert recs[0].components.lateral == pytest.approx(expected, rel=1e-12)
    assert recs[0].aggressor_class is AggressorClass.FLOATING_FILL


def test_no_fill_gives_only_net_records():
    layout = make_layout([make_net("a", [(0, Rect(0, 0, 1000, 100))])])
    assert extract_coupling(layout) == []


def _rec(agg, cls, total):
    return CouplingRecord("v", agg, cls, 0, 0, CapComponents(lateral=total))


def test_net_delta_partition():
    assert net_delta_caps([], "v") == (0.0, 0.0)
    assert net_delta_caps([_rec(1, AggressorClass.SHIELD_FILL, 2e-16)], "v") == (2e-16, 0.0)
    recs = [_rec(1, AggressorClass.FLOATING_FILL, 1e-16), _rec(2, AggressorClass.SHIELD_FILL, 2e-16)]
    assert net_delta_caps(recs, "v") == (2e-16, 1e-16)
    assert net_delta_caps(recs, "other") == (0.0, 0.0)


def _assert_matches_oracle(layout):
    got = record_map(extract_coupling(layout))
    ref = brute_coupling(layout)
    assert got.keys() == ref.keys()
    for k, v in ref.items():
        for x, y in zip(got[k], v):
            assert x == pytest.approx(y, rel=1e-9, abs=0)


def test_extraction_matches_oracle_on_filled_benchmark():
    layout = gen_benchmark(BenchmarkParams(seed=11, die_edge=30_000, num_nets=25, reference_rail_pitch=6_000))
    filled = regular_fill(layout).apply(layout)
    _assert_matches_oracle(filled)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_extraction_matches_oracle_random(seed):
    rng = random.Random(seed)
    nets = []
    fills = []
    # shapes on a coarse lattice so same-layer shapes never overlap
    cells = rng.sample([(i, j, l) for i in range(12) for j in range(12) for l in range(3)], 60)
    for k, (i, j, lyr) in enumerate(cells):
        x, y = i * 1500 + rng.randint(0, 300), j * 1500 + rng.randint(0, 300)
        r = Rect(x, y, x + rng.randint(100, 1100), y + rng.randint(100, 1100))
        if k % 3 == 0:
            fills.append(FillShape(k, lyr, r, FillKind.FLOATING))
        else:
            nets.append(make_net(f"n{k}", [(lyr, r)], rng.choice([NetClass.SIGNAL, NetClass.CRITICAL])))
    layout = make_layout(nets, layers=3).with_fills(fills)
    _assert_matches_oracle(layout)


def test_superposition_over_disjoint_fill_sets():
    layout = gen_benchmark(BenchmarkParams(seed=3, die_edge=30_000, num_nets=20, reference_rail_pitch=6_000))
    fills = regular_fill(layout).inserted
    f1, f2 = fills[::2], fills[1::2]
    both = record_map(extract_coupling(layout.with_fills(fills)))
    only1 = record_map(extract_coupling(layout.with_fills(f1)))
    only2 = record_map(extract_coupling(layout.with_fills(f2)))
    assert both == {**only1, **only2}
    assert all(min(v) >= 0 for v in both.values())
