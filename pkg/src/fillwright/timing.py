"""Lumped-RC delay deltas, endpoint slacks and WNS/TNS summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from fillwright.errors import NoNetError
from fillwright.layout import DesignRules, Layout, Net, NetClass

NS_PER_S = 1e9


@dataclass(frozen=True)
class TimingReport:
    wns: Optional[float]
    tns: float
    num_violations: int
    per_endpoint: tuple[tuple[str, float], ...]

    @classmethod
    def from_slacks(cls, slacks: list[tuple[str, float]]) -> "TimingReport":
        values = [s for _, s in slacks]
        return cls(
            wns=min(values) if values else None,
            tns=sum(s for s in values if s < 0),
            num_violations=sum(1 for s in values if s < 0),
            per_endpoint=tuple(slacks),
        )


@dataclass(frozen=True)
class CriticalityPolicy:
    slack_threshold: float = 0.0
    guard_band: float = 0.010


def delta_delay(net: Net, delta_ground: float, delta_coupling: float, rules: DesignRules) -> float:
    """Added driver delay in ns: R_drv * (dC_ground + miller * dC_coupling)."""
    if net.net_class is NetClass.REFERENCE or net.driver_res is None:
        raise NoNetError(f"net {net.id} has no driver")
    return net.driver_res * (delta_ground + rules.miller_factor * delta_coupling) * NS_PER_S


def apply_deltas(layout: Layout, deltas: Mapping[str, float]) -> TimingReport:
    by_id = layout.net_by_id
    for key in deltas:
        if key not in by_id:
            raise NoNetError(f"unknown net {key!r}")
    slacks = []
    for net in layout.nets:
        d = deltas.get(net.id, 0.0)
        for ep in net.endpoints:
            slacks.append((ep.name, ep.required - (ep.base_arrival + d)))
    return TimingReport.from_slacks(slacks)


def classify_critical(layout: Layout, policy: CriticalityPolicy = CriticalityPolicy()) -> set[str]:
    limit = policy.slack_threshold + policy.guard_band
    out = set()
    for net in layout.nets:
        if net.net_class is NetClass.CRITICAL:
            out.add(net.id)
        elif net.net_class is NetClass.SIGNAL and any(ep.base_slack < limit for ep in net.endpoints):
            out.add(net.id)
    return out


def format_value(v: Optional[float]) -> str:
    if v is None:
        return "n/a"
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s
