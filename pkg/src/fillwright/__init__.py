"""Timing-aware dummy metal fill for rectilinear layouts."""

from fillwright.capacitance import (
    CapComponents,
    CouplingRecord,
    c_fringing,
    c_lateral,
    c_parallel,
    extract_coupling,
    net_delta_caps,
    pair_coupling,
)
from fillwright.compare import CompareResult, render_table, run_compare
from fillwright.connectivity import check_shield_connectivity
from fillwright.density import density_report, enumerate_windows, window_density
from fillwright.fill import (
    FillPlan,
    gen_candidates,
    ndr_fill_phase,
    regular_fill,
    shield_fill_phase,
    timing_driven_fill,
)
from fillwright.layout import (
    DesignRules,
    Endpoint,
    FillKind,
    FillShape,
    LayerSpec,
    Layout,
    Net,
    NetClass,
    Rect,
    load_layout,
    overlap_area,
    overlap_len,
    rect_gap,
    save_layout,
    validate_layout,
)
from fillwright.timing import CriticalityPolicy, TimingReport, apply_deltas, classify_critical, delta_delay

__version__ = "0.1.0"
