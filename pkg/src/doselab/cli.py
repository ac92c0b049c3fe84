"""Command-line entry points: batch simulation, scenario tools, the session
service, and report re-aggregation from saved traces."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .dose_model import ValidationError
from .metrics_bounds import summarize
from .policies import PolicyConfig, PolicyKind
from .scenarios_io import (
    ReportDocument,
    builtin_scenarios,
    parse_scenario,
    write_report,
    write_scenario,
)
from .trial_engine import BatchResult, run_batch

DATA_DIR_ENV = "DOSELAB_DATA_DIR"


def _parse_policies(spec: str) -> list[PolicyKind]:
    if spec == "all":
        return list(PolicyKind)
    kinds = []
    for name in spec.split(","):
        name = name.strip()
        try:
            kinds.append(PolicyKind(name))
        except ValueError:
            known = ", ".join(k.value for k in PolicyKind)
            raise ValidationError(f"unknown policy '{name}' (known: {known}, all)")
    return kinds


def _load_scenario(args):
    if args.scenario_file:
        return parse_scenario(Path(args.scenario_file).read_bytes())
    catalog = builtin_scenarios()
    if args.scenario not in catalog:
        raise ValidationError(
            f"unknown scenario '{args.scenario}' (known: {', '.join(catalog)})")
    return catalog[args.scenario]


def _cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    if args.reps < 1:
        raise ValidationError("--reps must be >= 1")
    if args.n < 1 or args.cohort < 1:
        raise ValidationError("--n and --cohort must be >= 1")
    kinds = _parse_policies(args.policy)
    overrides = {}
    if args.c is not None:
        overrides["c"] = args.c
    if args.delta is not None:
        overrides["delta"] = args.delta
    cfgs = [PolicyConfig(kind=kind, theta=args.theta or scenario.theta, **overrides)
            for kind in kinds]

    def progress(policy, reps):
        print(f"  {policy}: {reps} replications done", flush=True)

    print(f"simulating '{scenario.name}' n={args.n} cohort={args.cohort} "
          f"reps={args.reps} seed={args.seed}")
    batch = run_batch(scenario, cfgs, replications=args.reps, n_patients=args.n,
                      cohort_size=args.cohort, master_seed=args.seed,
                      progress=progress)
    report = summarize(batch)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    document = ReportDocument(
        metadata={
            "scenario": scenario.name,
            "n_patients": args.n,
            "cohort_size": args.cohort,
            "replications": args.reps,
            "master_seed": args.seed,
            "policies": [k.value for k in kinds],
            "overrides": overrides,
        },
        report=report,
    )
    if args.format in ("csv", "both"):
        (out_dir / "report.csv").write_bytes(write_report(document, "csv"))
        print(f"wrote {out_dir / 'report.csv'}")
    if args.format in ("json", "both"):
        (out_dir / "report.json").write_bytes(write_report(document, "json"))
        print(f"wrote {out_dir / 'report.json'}")
    if args.save_traces:
        (out_dir / "traces.json").write_bytes(batch.to_json_bytes())
        print(f"wrote {out_dir / 'traces.json'}")
    return 0


def _cmd_scenarios(args) -> int:
    if args.validate:
        scenario = parse_scenario(Path(args.validate).read_bytes())
        print(f"{scenario.name}: OK (K={scenario.k_doses}, theta={scenario.theta}, "
              f"optimal dose {scenario.optimal_dose})")
        return 0
    catalog = builtin_scenarios()
    for name, s in catalog.items():
        plateau = f" plateau@{s.plateau_start}" if s.plateau_start else ""
        print(f"{name}: K={s.k_doses} theta={s.theta} optimal={s.optimal_dose}{plateau}")
        print(f"  tox={list(s.true_tox)}")
        print(f"  eff={list(s.true_eff)}")
    if args.dump:
        out_dir = Path(args.dump)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, s in catalog.items():
            (out_dir / f"{name}.json").write_bytes(write_scenario(s))
        print(f"wrote {len(catalog)} scenario files to {out_dir}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve_forever

    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV) or "./doselab-sessions"
    static = args.static
    if static is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static = bundled if bundled.is_dir() else None
    serve_forever(port=args.port, data_dir=data_dir, static_dir=static,
                  host=args.host)
    return 0


def _cmd_report(args) -> int:
    batch = BatchResult.from_json_bytes(Path(args.traces).read_bytes())
    report = summarize(batch)
    document = ReportDocument(
        metadata={
            "scenario": batch.scenario.name,
            "n_patients": batch.n_patients,
            "cohort_size": batch.cohort_size,
            "replications": batch.replications,
            "master_seed": batch.master_seed,
            "policies": batch.policies(),
            "reaggregated_from": str(args.traces),
        },
        report=report,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        (out_dir / "report.csv").write_bytes(write_report(document, "csv"))
        print(f"wrote {out_dir / 'report.csv'}")
    if args.format in ("json", "both"):
        (out_dir / "report.json").write_bytes(write_report(document, "json"))
        print(f"wrote {out_dir / 'report.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doselab",
        description="Dose-finding bandit laboratory: simulations, scenario "
                    "tools, and a live-trial session service.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a seeded batch of simulated trials")
    sim.add_argument("--scenario", default="main-setting")
    sim.add_argument("--scenario-file", default=None)
    sim.add_argument("--policy", default="all",
                     help="comma-separated policy names, or 'all'")
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--n", type=int, default=300)
    sim.add_argument("--cohort", type=int, default=3)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--theta", type=float, default=None)
    sim.add_argument("--c", type=float, default=None)
    sim.add_argument("--delta", type=float, default=None)
    sim.add_argument("--out", default=".")
    sim.add_argument("--format", choices=["csv", "json", "both"], default="both")
    sim.add_argument("--save-traces", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    sc = sub.add_parser("scenarios", help="list or validate scenarios")
    sc.add_argument("--validate", default=None, help="scenario file to validate")
    sc.add_argument("--dump", default=None, help="write catalog files to a directory")
    sc.set_defaults(func=_cmd_scenarios)

    srv = sub.add_parser("serve", help="run the live-trial session service")
    srv.add_argument("--port", type=int, default=8421)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--data-dir", default=None,
                     help=f"session log directory (or ${DATA_DIR_ENV})")
    srv.add_argument("--static", default=None, help="console bundle directory")
    srv.set_defaults(func=_cmd_serve)

    rep = sub.add_parser("report", help="re-aggregate saved traces into reports")
    rep.add_argument("--traces", required=True)
    rep.add_argument("--out", default=".")
    rep.add_argument("--format", choices=["csv", "json", "both"], default="both")
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
