"""``fillwright`` command line.

Exit codes: 0 ok, 1 validation/parse error, 2 runtime error, 3 infeasible
density windows remain (outputs are still written).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from fillwright.benchmark import BenchmarkParams, gen_benchmark
from fillwright.capacitance import all_net_delta_caps, extract_coupling, fill_induced_table
from fillwright.compare import compare_to_csv, render_table, run_compare
from fillwright.density import density_csv, density_report, DensityStatus
from fillwright.errors import FillwrightError, LayoutIOError, ParamsError, ParseError, ValidationError
from fillwright.fill import FillMode, dumps_plan, run_fill
from fillwright.layout import NetClass, load_layout, save_layout
from fillwright.svg import render_svg
from fillwright.timing import apply_deltas, delta_delay

log = logging.getLogger("fillwright")

EXIT_OK, EXIT_VALIDATE, EXIT_RUNTIME, EXIT_INFEASIBLE = 0, 1, 2, 3

_MODES = {"none": FillMode.NONE, "regular": FillMode.REGULAR, "timing-driven": FillMode.TIMING_DRIVEN}


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise LayoutIOError(f"cannot write {path}: {exc}") from exc


def cmd_gen(args) -> int:
    seed = args.seed
    env = os.environ.get("FILLWRIGHT_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise ParamsError(f"FILLWRIGHT_SEED must be an integer, got {env!r}") from None
    params = BenchmarkParams(
        seed=seed,
        die_edge=int(round(args.die_um * 1000)),
        num_layers=args.layers,
        num_nets=args.nets,
        critical_fraction=args.critical_frac,
    )
    save_layout(gen_benchmark(params), args.out)
    return EXIT_OK


def cmd_fill(args) -> int:
    layout = load_layout(args.layout)
    plan = run_fill(layout, _MODES[args.mode])
    save_layout(plan.apply(layout), args.out)
    if args.plan:
        _write(args.plan, dumps_plan(plan))
    for note in plan.notes:
        log.warning("%s on layer %d window %s", note.code, note.layer, note.window.as_list())
    if plan.infeasible_windows:
        log.warning("%d window(s) remain below rho_min", len(plan.infeasible_windows))
        return EXIT_INFEASIBLE
    return EXIT_OK


def _caps_csv(layout) -> str:
    lines = ["victim,aggressor,aggressor_class,victim_layer,aggressor_layer,lateral_f,parallel_f,fringing_f,total_f"]
    for r in extract_coupling(layout):
        c = r.components
        lines.append(
            f"{r.victim},{r.aggressor},{r.aggressor_class.value},{r.victim_layer},{r.aggressor_layer},"
            f"{c.lateral!r},{c.parallel!r},{c.fringing!r},{c.total!r}"
        )
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    layout = load_layout(args.layout)
    report = density_report(layout)
    if args.density:
        _write(args.density, density_csv(report))
    if args.caps:
        _write(args.caps, _caps_csv(layout))
    caps = all_net_delta_caps(layout, fill_induced_table(layout))
    deltas = {
        n.id: delta_delay(n, *caps[n.id], layout.rules) for n in layout.nets if n.net_class is not NetClass.REFERENCE
    }
    timing = apply_deltas(layout, deltas)
    if args.timing:
        lines = ["endpoint,slack_ns"] + [f"{name},{slack!r}" for name, slack in timing.per_endpoint]
        _write(args.timing, "\n".join(lines) + "\n")
    low = sum(d.status is DensityStatus.LOW for d in report)
    print(f"windows={len(report)} low={low} wns={timing.wns} tns={timing.tns} violations={timing.num_violations}")
    return EXIT_INFEASIBLE if low else EXIT_OK


def cmd_compare(args) -> int:
    layout = load_layout(args.layout)
    result = run_compare(layout, design=Path(args.layout).stem)
    table = render_table(result)
    _write(args.out, table)
    if args.csv:
        _write(args.csv, compare_to_csv(result))
    sys.stdout.write(table)
    if any(result.density[m].infeasible for m in ("regular", "timing-driven")):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_svg(args) -> int:
    render_svg(load_layout(args.layout), args.layer, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fillwright", description="Timing-aware dummy metal fill")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded benchmark layout")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--die-um", type=float, default=100.0)
    g.add_argument("--nets", type=int, default=150)
    g.add_argument("--critical-frac", type=float, default=0.2)
    g.add_argument("--layers", type=int, default=2)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fill", help="insert dummy fill")
    f.add_argument("--mode", choices=sorted(_MODES), required=True)
    f.add_argument("--layout", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--plan")
    f.set_defaults(func=cmd_fill)

    r = sub.add_parser("report", help="density / coupling / timing reports")
    r.add_argument("--layout", required=True)
    r.add_argument("--density")
    r.add_argument("--caps")
    r.add_argument("--timing")
    r.set_defaults(func=cmd_report)

    c = sub.add_parser("compare", help="before / regular / timing-driven table")
    c.add_argument("--layout", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--csv")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("svg", help="render one layer as SVG")
    s.add_argument("--layout", required=True)
    s.add_argument("--layer", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_svg)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError, ParamsError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATE
    except FillwrightError as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
