"""Three-way before / regular / timing-driven comparison and its table renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from fillwright.capacitance import fill_induced_table
from fillwright.density import DensityStatus, density_report
from fillwright.errors import ParseError
from fillwright.fill import FillPlan, regular_fill, timing_driven_fill
from fillwright.layout import Layout, NetClass
from fillwright.timing import (
    CriticalityPolicy,
    TimingReport,
    apply_deltas,
    classify_critical,
    delta_delay,
    format_value,
)

MODES = ("before", "regular", "timing-driven")


@dataclass(frozen=True)
class DensitySummary:
    windows: int
    low: int
    high: int
    min_density: float
    max_density: float
    infeasible: int
    tiles: int


@dataclass(frozen=True)
class CompareResult:
    rows: dict[str, TimingReport]
    density: dict[str, DensitySummary]
    cap_deltas: dict[str, dict[str, tuple[float, float]]]
    critical: tuple[str, ...] = ()
    design: str = "design"
    # the plans behind the regular / timing-driven rows; not part of the CSV
    plans: dict[str, FillPlan] = field(default_factory=dict, compare=False, repr=False)

    def weighted_cap(self, mode: str, net: str, miller: float) -> float:
        g, c = self.cap_deltas[mode][net]
        return g + miller * c


def summarize_density(layout: Layout, plan: FillPlan | None) -> DensitySummary:
    report = density_report(layout)
    dens = [d.density for d in report]
    return DensitySummary(
        windows=len(report),
        low=sum(d.status is DensityStatus.LOW for d in report),
        high=sum(d.status is DensityStatus.HIGH for d in report),
        min_density=min(dens) if dens else 0.0,
        max_density=max(dens) if dens else 0.0,
        infeasible=len(plan.infeasible_windows) if plan else sum(d.status is DensityStatus.LOW for d in report),
        tiles=len(plan.inserted) if plan else 0,
    )


def evaluate_fill(filled: Layout) -> tuple[TimingReport, dict[str, tuple[float, float]]]:
    """Timing report and per-net (ground, coupling) fill-induced deltas of a filled layout."""
    g, c = fill_induced_table(filled).per_net_deltas(len(filled.nets))
    caps: dict[str, tuple[float, float]] = {}
    deltas: dict[str, float] = {}
    for i, net in enumerate(filled.nets):
        if net.net_class is NetClass.REFERENCE:
            continue
        caps[net.id] = (float(g[i]), float(c[i]))
        deltas[net.id] = delta_delay(net, caps[net.id][0], caps[net.id][1], filled.rules)
    return apply_deltas(filled, deltas), caps


def run_compare(
    layout: Layout,
    policy: CriticalityPolicy = CriticalityPolicy(),
    design: str = "design",
) -> CompareResult:
    crit = classify_critical(layout, policy)
    rows = {"before": apply_deltas(layout, {})}
    density = {"before": summarize_density(layout, None)}
    caps: dict[str, dict[str, tuple[float, float]]] = {}
    plans = {"regular": regular_fill(layout), "timing-driven": timing_driven_fill(layout, crit)}
    for mode, plan in plans.items():
        filled = plan.apply(layout)
        rows[mode], all_caps = evaluate_fill(filled)
        caps[mode] = {n: all_caps[n] for n in sorted(crit)}
        density[mode] = summarize_density(filled, plan)
    return CompareResult(
        rows=rows, density=density, cap_deltas=caps, critical=tuple(sorted(crit)), design=design, plans=plans
    )


# --------------------------------------------------------------------------
# renderings


def render_table(result: CompareResult) -> str:
    label_w = max(len(result.design), *(len(m) for m in MODES))
    lines = [f"{result.design:<{label_w}}  {'WNS':>8}  {'TNS':>8}  {'#violation':>10}"]
    for mode in MODES:
        r = result.rows[mode]
        lines.append(
            f"{mode:<{label_w}}  {format_value(r.wns):>8}  {format_value(r.tns):>8}  {r.num_violations:>10}"
        )
    return "\n".join(lines) + "\n"


_CSV_HEADER = ["section", "mode", "key", "field", "value"]
_DENSITY_FIELDS = ("windows", "low", "high", "min_density", "max_density", "infeasible", "tiles")


def compare_to_csv(result: CompareResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_HEADER)
    w.writerow(["design", "", result.design, "", ""])
    for net in result.critical:
        w.writerow(["critical", "", net, "", ""])
    for mode in MODES:
        r = result.rows[mode]
        w.writerow(["timing", mode, "", "wns", "" if r.wns is None else repr(r.wns)])
        w.writerow(["timing", mode, "", "tns", repr(r.tns)])
        w.writerow(["timing", mode, "", "num_violations", r.num_violations])
        for name, slack in r.per_endpoint:
            w.writerow(["endpoint", mode, name, "slack", repr(slack)])
        d = result.density[mode]
        for f in _DENSITY_FIELDS:
            w.writerow(["density", mode, "", f, repr(getattr(d, f))])
    for mode, per_net in result.cap_deltas.items():
        w.writerow(["cap", mode, "", "", ""])
        for net, (g, c) in per_net.items():
            w.writerow(["cap", mode, net, "ground", repr(g)])
            w.writerow(["cap", mode, net, "coupling", repr(c)])
    return buf.getvalue()


def compare_from_csv(text: str) -> CompareResult:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != _CSV_HEADER:
        raise ParseError(f"unexpected compare CSV header {header!r}")
    design = "design"
    critical: list[str] = []
    timing: dict[str, dict[str, str]] = {}
    endpoints: dict[str, list[tuple[str, float]]] = {}
    density: dict[str, dict[str, str]] = {}
    caps: dict[str, dict[str, list[float]]] = {}
    for row in reader:
        if len(row) != 5:
            raise ParseError(f"bad compare CSV row {row!r}")
        section, mode, key, fld, value = row
        if section == "design":
            design = key
        elif section == "critical":
            critical.append(key)
        elif section == "timing":
            timing.setdefault(mode, {})[fld] = value
        elif section == "endpoint":
            endpoints.setdefault(mode, []).append((key, float(value)))
        elif section == "density":
            density.setdefault(mode, {})[fld] = value
        elif section == "cap" and key == "":
            caps.setdefault(mode, {})
        elif section == "cap":
            slot = caps.setdefault(mode, {}).setdefault(key, [0.0, 0.0])
            slot[0 if fld == "ground" else 1] = float(value)
        else:
            raise ParseError(f"unknown compare CSV section {section!r}")
    rows = {}
    for mode, t in timing.items():
        rows[mode] = TimingReport(
            wns=None if t["wns"] == "" else float(t["wns"]),
            tns=float(t["tns"]),
            num_violations=int(t["num_violations"]),
            per_endpoint=tuple(endpoints.get(mode, [])),
        )
    dens = {
        mode: DensitySummary(
            windows=int(d["windows"]),
            low=int(d["low"]),
            high=int(d["high"]),
            min_density=float(d["min_density"]),
            max_density=float(d["max_density"]),
            infeasible=int(d["infeasible"]),
            tiles=int(d["tiles"]),
        )
        for mode, d in density.items()
    }
    cap_deltas = {m: {n: (v[0], v[1]) for n, v in per.items()} for m, per in caps.items()}
    return CompareResult(rows=rows, density=dens, cap_deltas=cap_deltas, critical=tuple(critical), design=design)
