"""Command-line interface: plan, bounds, run, verify, validate.

Exit codes are a stable contract: 0 success, 1 tasks unsatisfied or no
progress, 2 scenario validation failure, 3 run-time invariant violation,
4 plan synthesis failure, 5 I/O error.  Every flag can also be supplied
through an environment variable prefixed ``LTLSWARM_`` (for example
``LTLSWARM_SEED``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ltlswarm.control import CASE_STUDY_QUOTED_EPS_MIN, epsilon_bounds, r_S, xi
from ltlswarm.errors import (
    InvariantViolationError,
    LtlSwarmError,
    ScenarioValidationError,
    SynthesisError,
)
from ltlswarm.scenario import (
    builtin_scenario_path,
    load_scenario,
    synthesize_all,
    validate_scenario,
)
from ltlswarm.sim import SimConfig, run, satisfaction_report
from ltlswarm.trace import read_events_csv, read_samples_csv
from ltlswarm.verify import offline_verify

EXIT_OK = 0
EXIT_UNSATISFIED = 1
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3
EXIT_SYNTHESIS = 4
EXIT_IO = 5


def _env(name, default=None):
    return os.environ.get(f"LTLSWARM_{name}", default)


def _load(path_str):
    path = Path(path_str)
    if not path.exists():
        try:
            path = builtin_scenario_path(path_str)
        except LtlSwarmError:
            raise OSError(f"scenario file not found: {path_str}")
    return load_scenario(path)


def cmd_validate(args):
    scenario = _load(args.scenario)
    report = validate_scenario(scenario)
    for v in report.violations:
        print(f"violation: {v}")
    for w in report.warnings:
        print(f"warning:   {w}")
    print(f"scenario {scenario.name!r}: "
          f"{'VALID' if report.ok else 'INVALID'} "
          f"({len(report.violations)} violations, {len(report.warnings)} warnings)")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_plan(args):
    scenario = _load(args.scenario)
    report = validate_scenario(scenario)
    if not report.ok:
        for v in report.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    plans = synthesize_all(scenario)
    if args.json:
        out = {str(aid): plan.to_dict(scenario.mission(aid).alphabet)
               for aid, plan in sorted(plans.items())}
        print(json.dumps(out, indent=2, sort_keys=True))
        return EXIT_OK
    for aid, plan in sorted(plans.items()):
        alphabet = scenario.mission(aid).alphabet
        d = plan.to_dict(alphabet)
        steps = d["steps"]
        pre = steps[:d["suffix_start"]]
        suf = steps[d["suffix_start"]:]
        fmt = lambda seq: " ".join(
            f"({s['region']},{{{','.join(s['services'])}}})" for s in seq)
        line = fmt(pre)
        if suf:
            line += f" [{fmt(suf)}]^w"
        print(f"agent {aid}: {line}")
    return EXIT_OK


def cmd_bounds(args):
    scenario = _load(args.scenario)
    p = scenario.params
    bounds = epsilon_bounds(p)
    rs = r_S(p.eps, p)
    if args.machine:
        print(f"xi={bounds.xi!r}")
        print(f"r_S_eps={rs!r}")
        for key, val in bounds.as_dict().items():
            if key != "xi":
                print(f"{key}={val!r}")
        print(f"eps={p.eps!r}")
        return EXIT_OK
    print(f"design-parameter thresholds for {scenario.name!r} "
          f"(r={p.r}, delta={p.delta}, N={p.n_agents}, "
          f"c_max={p.c_max}, r_min={p.r_min})")
    print(f"  xi        = {bounds.xi:.6g}")
    print(f"  r_S(eps)  = {rs:.6g}   (eps = {p.eps})")
    for key, val in bounds.as_dict().items():
        if key == "xi":
            continue
        if key == "eps_min":
            mark = ""
        else:
            mark = "  <-- exceeded by eps" if p.eps >= val else ""
        print(f"  {key:8s}= {val:.6g}{mark}")
    print(f"  note: literal eps_min = {bounds.e_min:.3e}; the case-study "
          f"quoted bound {CASE_STUDY_QUOTED_EPS_MIN} is not reproduced by "
          f"literal evaluation (closest threshold: eps7 = {bounds.e7:.3e})")
    return EXIT_OK


def _write_outputs(out_dir, trace, report):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace.write_samples_csv(out / "samples.csv")
    trace.write_events_csv(out / "events.csv")
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump({"meta": trace.meta, "satisfaction": report}, fh,
                  indent=2, sort_keys=True, default=str)


def _run_once(scenario, cfg, out_dir):
    trace = run(scenario, cfg)
    report = satisfaction_report(trace, scenario)
    if out_dir:
        _write_outputs(out_dir, trace, report)
    return trace, report


def cmd_run(args):
    scenario = _load(args.scenario)
    report = validate_scenario(scenario)
    if not report.ok:
        for v in report.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    seeds = [int(s) for s in str(args.batch).split(",")] if args.batch \
        else [int(args.seed)]
    status = EXIT_OK
    for seed in seeds:
        cfg = SimConfig(dt=float(args.dt), horizon=float(args.horizon),
                        seed=seed, invariant_every=int(args.monitor_every))
        out_dir = None
        if args.out:
            out_dir = Path(args.out) / f"seed-{seed}" if len(seeds) > 1 else args.out
        trace, sat = _run_once(scenario, cfg, out_dir)
        words_ok = all(
            v["verdict"] in ("satisfied", "consistent-progress")
            for v in sat["agents"].values())
        finished = all(
            v["verdict"] == "satisfied" for v in sat["agents"].values())
        provisions = sum(len(ts) for ts in trace.provision_times().values())
        print(f"seed {seed}: t_end={trace.meta['steps'] * cfg.dt:.3f}s "
              f"events={len(trace.events)} provisions={provisions} "
              f"rounds={sat.get('rounds', 0)} "
              f"max_edge={trace.meta['max_initial_edge_distance']:.3f}m")
        for aid, v in sorted(sat["agents"].items()):
            print(f"  agent {aid}: {v['verdict']}")
        if scenario.protocol == "scltl":
            if not finished:
                stall = trace.meta.get("all_passive_t",
                                       trace.meta["steps"] * cfg.dt)
                print(f"  no progress after t={stall}; tasks incomplete",
                      file=sys.stderr)
                status = max(status, EXIT_UNSATISFIED)
        elif not words_ok:
            status = max(status, EXIT_UNSATISFIED)
    return status


def cmd_verify(args):
    scenario = _load(args.scenario)
    trace_dir = Path(args.trace_dir)
    samples_path = trace_dir / "samples.csv"
    events_path = trace_dir / "events.csv"
    if not samples_path.exists() or not events_path.exists():
        raise OSError(f"trace files missing under {trace_dir}")
    header, samples = read_samples_csv(samples_path)
    events = read_events_csv(events_path)
    result = offline_verify(header, samples, events, scenario)
    for v in result["violations"]:
        print(f"violation: {v}")
    verdicts = result["info"].get("verdicts", {})
    for aid, verdict in sorted(verdicts.items()):
        print(f"agent {aid}: {verdict}")
    print(f"rounds: {result['info'].get('rounds', 0)}")
    print("VERIFIED" if result["ok"] else "VERIFICATION FAILED")
    if not result["ok"]:
        return EXIT_INVARIANT
    if scenario.protocol == "scltl" and any(
            v != "satisfied" for v in verdicts.values()):
        return EXIT_UNSATISFIED
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ltlswarm",
        description="Multi-agent coordination under local LTL tasks: "
                    "plan synthesis, parameter bounds, simulation, and "
                    "trace verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario(p):
        p.add_argument("scenario",
                       help="scenario JSON path or builtin scenario name")

    p = sub.add_parser("validate", help="check a scenario's structural rules")
    add_scenario(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plan", help="synthesize and print discrete plans")
    add_scenario(p)
    p.add_argument("--json", action="store_true",
                   default=bool(_env("PLAN_JSON")),
                   help="machine-readable output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bounds", help="print the design-parameter thresholds")
    add_scenario(p)
    p.add_argument("--machine", action="store_true",
                   default=bool(_env("BOUNDS_MACHINE")),
                   help="key=value output")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("run", help="simulate a scenario")
    add_scenario(p)
    p.add_argument("--out", default=_env("OUT"),
                   help="directory for samples.csv/events.csv/report.json")
    p.add_argument("--seed", default=_env("SEED", "0"), help="master seed")
    p.add_argument("--dt", default=_env("DT", "0.001"), help="step size (s)")
    p.add_argument("--horizon", default=_env("HORIZON", "60.0"),
                   help="simulated seconds")
    p.add_argument("--monitor-every", default=_env("MONITOR_EVERY", "1"),
                   help="invariant check cadence in steps")
    p.add_argument("--batch", default=_env("BATCH"),
                   help="comma-separated seeds; outputs go to seed-N subdirs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="re-verify a recorded trace offline")
    add_scenario(p)
    p.add_argument("trace_dir", help="directory holding samples.csv/events.csv")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SynthesisError as exc:
        print(f"synthesis error: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
