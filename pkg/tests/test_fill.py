from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_gap, make_layout, make_net
from oracles import grounded_shields, spacing_violations
from fillwright.benchmark import BenchmarkParams, gen_benchmark
from fillwright.connectivity import check_shield_connectivity
from fillwright.density import DensityStatus, density_report
from fillwright.errors import ValidationError
from fillwright.fill import (
    E_NOREF,
    FillMode,
    dumps_plan,
    gen_candidates,
    ndr_fill_phase,
    plan_from_dict,
    plan_to_dict,
    regular_fill,
    run_fill,
    shield_fill_phase,
    timing_driven_fill,
)
from fillwright.layout import DesignRules, FillKind, FillShape, NetClass, Rect, validate_layout

DIE = Rect(0, 0, 20_000, 20_000)


def s_def_everywhere(_shape):
    return 70


# --------------------------------------------------------------------------
# candidates


def test_candidate_count_on_empty_region():
    layout = make_layout([])
    tiles = gen_candidates(layout, 0, Rect(0, 0, 10_000, 10_000), s_def_everywhere)
    assert len(tiles) == 289
    assert tiles[0] == Rect(0, 0, 400, 400)
    assert tiles[-1] == Rect(9_600, 9_600, 10_000, 10_000)
    assert tiles == sorted(tiles, key=lambda r: (r.y_lo, r.x_lo))


def test_covered_region_has_no_candidates():
    layout = make_layout([make_net("VSS", [(0, Rect(0, 0, 10_000, 10_000))], NetClass.REFERENCE)])
    assert gen_candidates(layout, 0, Rect(0, 0, 10_000, 10_000), s_def_everywhere) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 19_000), st.integers(50, 300), st.integers(70, 800))
def test_bisecting_wire_keeps_spacing(y, width, spacing):
    wire = Rect(0, y, 20_000, min(20_000, y + width))
    layout = make_layout([make_net("w", [(0, wire)])])
    tiles = gen_candidates(layout, 0, DIE, lambda _s: spacing)
    assert all(brute_gap(t, wire) >= spacing for t in tiles)
    # everything the grid could host far away from the wire is still offered
    far = [t for t in gen_candidates(make_layout([]), 0, DIE, lambda _s: spacing) if brute_gap(t, wire) >= spacing]
    assert tiles == far


# --------------------------------------------------------------------------
# regular / NDR


def test_regular_fill_on_empty_die():
    layout = make_layout([])
    plan = regular_fill(layout)
    assert plan.infeasible_windows == ()
    assert all(d.status is DensityStatus.OK for d in density_report(plan.apply(layout)))
    validate_layout(plan.apply(layout))


def test_dense_window_gets_no_tiles():
    plate = make_net("VSS", [(0, Rect(0, 0, 20_000, 10_000))], NetClass.REFERENCE)
    plan = regular_fill(make_layout([plate]))
    assert not [f for f in plan.inserted if f.layer == 0]


def test_blocked_window_is_infeasible():
    # 100 nm wires on a 500 nm pitch: 20% density and no 400 nm tile fits between them
    wires = [(0, Rect(0, y, 20_000, y + 100)) for y in range(0, 20_000, 500)]
    layout = make_layout([make_net("bus", wires, NetClass.CRITICAL)])
    plan = regular_fill(layout)
    on0 = [w for w in plan.infeasible_windows if w.layer == 0]
    assert len(on0) == 1
    assert on0[0].density == pytest.approx(0.2)
    assert gen_candidates(layout, 0, DIE, s_def_everywhere) == []


def test_regular_fill_requires_empty_layout():
    layout = make_layout([])
    filled = regular_fill(layout).apply(layout)
    with pytest.raises(ValidationError):
        regular_fill(filled)


def test_ndr_without_critical_equals_regular():
    layout = gen_benchmark(BenchmarkParams(seed=8, die_edge=40_000, num_nets=30, reference_rail_pitch=8_000))
    assert ndr_fill_phase(layout, set()).inserted == regular_fill(layout).inserted
    same = layout.with_rules(s_ndr=70)
    crit = {n.id for n in layout.nets if n.net_class is NetClass.CRITICAL}
    a, b = ndr_fill_phase(same, crit), regular_fill(same)
    assert json.dumps(plan_to_dict(a)["inserted"]) == json.dumps(plan_to_dict(b)["inserted"])


def test_single_critical_wire_ndr_spacing():
    wire = Rect(2_000, 9_950, 18_000, 10_050)
    layout = make_layout([make_net("c", [(0, wire)], NetClass.CRITICAL)])
    plan = ndr_fill_phase(layout, {"c"})
    gaps = [brute_gap(f.rect, wire) for f in plan.inserted if f.layer == 0]
    assert min(gaps) >= 210
    assert min(gaps) < 210 + 600  # the next grid row is actually used


def test_fill_respects_rho_max():
    rules = DesignRules(rho_min=0.3, rho_max=0.35, target=0.34)
    layout = make_layout([], rules=rules)
    plan = regular_fill(layout)
    dens = density_report(plan.apply(layout))
    assert all(0.3 <= d.density <= 0.35 for d in dens)


def test_benchmark_spacing_and_density():
    layout = gen_benchmark(BenchmarkParams(seed=21, die_edge=40_000, num_nets=40, reference_rail_pitch=8_000))
    crit = {n.id for n in layout.nets if n.net_class is NetClass.CRITICAL}
    reg = regular_fill(layout).apply(layout)
    td_plan = timing_driven_fill(layout, crit)
    td = td_plan.apply(layout)
    assert spacing_violations(reg, lambda _o: 70) == []
    ndr = lambda o: 210 if o[0] == "net" and o[1].id in crit else 70  # noqa: E731
    assert spacing_violations(td, ndr) == []
    for filled in (reg, td):
        validate_layout(filled)
        assert all(d.status is DensityStatus.OK for d in density_report(filled))


# --------------------------------------------------------------------------
# shield phase


def _shield_run(layout):
    return shield_fill_phase(layout, [(0, DIE)], {"crit"})


def test_shield_chain_grows_from_rail(shield_layout):
    plan = _shield_run(shield_layout)
    shields = [f for f in plan.inserted if f.kind is FillKind.SHIELD]
    assert shields
    crit = shield_layout.net_by_id["crit"].shapes[0][1]
    rail = shield_layout.net_by_id["VSS"].shapes[0][1]
    assert all(70 <= brute_gap(f.rect, crit) < 210 for f in shields)
    assert any(brute_gap(f.rect, rail) == 0 for f in shields)
    filled = plan.apply(shield_layout)
    validate_layout(filled)
    assert check_shield_connectivity(filled) == []
    assert grounded_shields(filled) == {f.id for f in shields}


def test_shield_insertion_order_is_chain_growth(shield_layout):
    plan = _shield_run(shield_layout)
    placed = []
    for f in plan.inserted:
        if placed:
            assert any(
                (min(f.rect.x_hi, p.x_hi) - max(f.rect.x_lo, p.x_lo) > 0 and (f.rect.y_lo == p.y_hi or f.rect.y_hi == p.y_lo))
                or (min(f.rect.y_hi, p.y_hi) - max(f.rect.y_lo, p.y_lo) > 0 and (f.rect.x_lo == p.x_hi or f.rect.x_hi == p.x_lo))
                for p in placed
            ) or f.rect.x_lo == 800
        placed.append(f.rect)


def test_moved_shield_fails_connectivity(shield_layout):
    plan = _shield_run(shield_layout)
    filled = plan.apply(shield_layout)
    victim = max(plan.inserted, key=lambda f: f.rect.x_lo)
    moved = victim._replace(rect=Rect(15_000, 2_000, 15_400, 2_400))
    broken = filled.with_fills([moved if f.id == victim.id else f for f in filled.fills])
    assert check_shield_connectivity(broken) == [victim.id]
    with pytest.raises(ValidationError):
        validate_layout(broken)


def test_missing_reference_reports_noref(shield_layout):
    no_ref = make_layout([n for n in shield_layout.nets if n.net_class is not NetClass.REFERENCE])
    plan = _shield_run(no_ref)
    assert plan.inserted == ()
    assert [n.code for n in plan.notes] == [E_NOREF]
    assert [w.window for w in plan.infeasible_windows if w.layer == 0] == [DIE]


def test_no_violating_windows_is_noop(shield_layout):
    plan = shield_fill_phase(shield_layout, [], {"crit"})
    assert plan.inserted == () and plan.phase_log == ()


def test_timing_driven_runs_both_phases(shield_layout):
    layout = shield_layout.with_rules(rho_min=0.5, rho_max=0.95)
    plan = timing_driven_fill(layout, {"crit"})
    phases = {p.phase for p in plan.phase_log}
    assert phases == {"ndr", "shield"}
    filled = plan.apply(layout)
    validate_layout(filled)
    assert check_shield_connectivity(filled) == []
    crit = layout.net_by_id["crit"].shapes[0][1]
    for f in plan.inserted:
        if f.kind is FillKind.FLOATING and f.layer == 0:
            assert brute_gap(f.rect, crit) >= 210
    low = {(d.layer, d.window) for d in density_report(filled) if d.status is DensityStatus.LOW}
    assert low == {(w.layer, w.window) for w in plan.infeasible_windows}


# --------------------------------------------------------------------------
# plans


def test_plan_json_round_trip(shield_layout):
    plan = timing_driven_fill(shield_layout.with_rules(rho_min=0.5, rho_max=0.95), {"crit"})
    text = dumps_plan(plan)
    again = plan_from_dict(json.loads(text))
    assert again == plan
    assert dumps_plan(again) == text


def test_run_fill_none_reports_low_windows():
    plan = run_fill(make_layout([]), FillMode.NONE)
    assert plan.inserted == ()
    assert len(plan.infeasible_windows) == 2


def test_sweep_oracle_agrees_and_detects_planted_violation():
    from oracles import sweep_spacing_violations

    layout = gen_benchmark(BenchmarkParams(seed=21, die_edge=40_000, num_nets=40, reference_rail_pitch=8_000))
    crit = {n.id for n in layout.nets if n.net_class is NetClass.CRITICAL}
    td = timing_driven_fill(layout, crit).apply(layout)
    assert sweep_spacing_violations(td, crit, ndr=True) == 0
    # one floating tile 100 nm above a critical wire: legal for s_def, not for s_ndr
    wire = next(r for n in layout.nets if n.id in crit for lyr, r in n.shapes if lyr == 0)
    tile = Rect(wire.x_lo, wire.y_hi + 100, wire.x_lo + 400, wire.y_hi + 500)
    planted = layout.with_fills([FillShape(1, 0, tile)])
    expected = [v for v in spacing_violations(planted, lambda _o: 70)]
    assert sweep_spacing_violations(planted, crit, ndr=False) == len(expected)
    assert sweep_spacing_violations(planted, crit, ndr=True) >= 1
