"""Command-line runner.

Subcommands:
  run      simulate one scenario and write a results directory
  sweep    run one scenario across an axis of values with replications
  selftest quick oracle and property battery (no files written)

Exit code 0 on success; 2 for argument/scenario errors; 3 for simulation
errors; 4 for a failed selftest.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import SimulationError, run, write_run_result
from .scenario import ScenarioError, load_scenario, parse_overrides
from .sweep import sweep, write_sweep_result


def _load(args) -> "Scenario":
    text = Path(args.scenario).read_text() if args.scenario else ""
    overrides = parse_overrides(args.set or [])
    return load_scenario(text, overrides)


def _cmd_run(args) -> int:
    scenario = _load(args)
    result = run(scenario)
    write_run_result(result, args.out)
    samples = result.samples()
    print(f"completed {sum(result.completed)} packets "
          f"({samples.size} latency samples after warm-up), "
          f"dropped {sum(result.dropped)}, residual {result.residual}")
    for q in scenario.quantile_targets:
        if samples.size:
            import warnings
            from . import stats
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                est = stats.outage_latency(samples, q)
            note = " (insufficient tail support)" if est.insufficient_support else ""
            print(f"outage latency @ {q:g}: {est.value_ms:.3f} ms "
                  f"[{est.ci_low_ms:.3f}, {est.ci_high_ms:.3f}]{note}")
    print(f"results written to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    scenario = _load(args)
    key, _, raw_values = args.axis.partition("=")
    key = key.strip()
    if not raw_values:
        raise ScenarioError("--axis must be of the form key=v1,v2,...")
    values = [parse_overrides([f"{key}={v}"])[key] for v in raw_values.split(",")]
    result = sweep(scenario, key, values, replications=args.reps, workers=args.workers)
    write_sweep_result(result, args.out)
    failed = [p for p in result.points if p.error]
    for p in result.points:
        status = f"ERROR: {p.error}" if p.error else f"{p.samples.size} samples"
        print(f"point {p.index}: {key}={p.value} -> {status}")
    print(f"results written to {args.out}")
    return 3 if failed else 0


def _cmd_selftest(_args) -> int:
    import numpy as np

    from . import coordination as coord
    from . import phy
    from .frame import build_rfc, build_slot_pattern, format_slot, make_rfc_set, quantize_theta
    from .scenario import Scenario

    failures = []

    def check(name: str, ok: bool):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    check("slot pattern 2:1 layout",
          format_slot(build_slot_pattern(2, 1)) == "[DDDDFUUUUDDDDF]")
    rfc_set = make_rfc_set()
    check("theta 0.2 quantizes to 1:4", quantize_theta(0.2, rfc_set).ratio_label == "1:4")
    check("frame symbol accounting",
          all(m.d_count + m.u_count <= 14 * 20 for m in rfc_set.members))
    w = coord.kaiser_weights(20, 0.0)
    check("flat window at beta 0", bool(np.all(w == 1.0)))
    w = coord.kaiser_weights(20, 90.0)
    check("window strictly decreasing", bool(np.all(np.diff(w) < 0)))
    check("traffic ratio 900/100", coord.traffic_ratio(900, 100) == 0.9)
    g = phy.effective_sinr([3.7, 3.7, 3.7], beta=1.0)
    check("EESM fixed point", abs(g - 3.7) < 1e-12)
    rng = np.random.default_rng(7)
    h = phy.draw_channel(2, 8, 1.0, rng)
    v = phy.precode(h)
    check("unit-norm precoder", abs(np.linalg.norm(v) - 1.0) < 1e-12)
    out = phy.post_sinr(h, v, 1.0, [], [], mode="aligned", noise_power=0.5)
    direct = float(np.vdot(h @ v, h @ v).real) / 0.5
    check("matched-filter SINR", abs(out.gamma - direct) / direct < 1e-9)

    from .engine import run as _run
    tiny = Scenario(cell_count=3, ue_per_cell_dl=2, ue_per_cell_ul=2,
                    sim_duration_ms=100.0, warmup_ms=0.0, seed=11)
    r1 = _run(tiny)
    r2 = _run(tiny)
    check("deterministic rerun",
          bool(np.array_equal(r1.records["total_ms"], r2.records["total_ms"])))
    check("packet conservation",
          sum(r1.generated) == sum(r1.completed) + sum(r1.dropped) + r1.residual)

    if failures:
        print(f"{len(failures)} selftest check(s) failed")
        return 4
    print("all selftest checks passed")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tddsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario")
    p_run.add_argument("--scenario", help="scenario document path (defaults apply if absent)")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario key (repeatable)")
    p_run.add_argument("--out", required=True, help="results directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario across an axis of values")
    p_sweep.add_argument("--scenario", help="scenario document path")
    p_sweep.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_sweep.add_argument("--axis", required=True, metavar="KEY=V1,V2,...")
    p_sweep.add_argument("--reps", type=int, default=1, help="replications per point")
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_sweep.add_argument("--out", required=True, help="results directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_self = sub.add_parser("selftest", help="run the quick oracle/property battery")
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
