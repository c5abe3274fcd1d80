"""Command line front end.

Every subcommand writes its files plus ``manifest.csv`` into ``--out``.
Failures print one ``error: category=<name> exit=<code>`` line to stderr
and exit with the category's code (see ``bathtub.errors.EXIT_CODES``).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence

import yaml

from bathtub import experiments, io
from bathtub.config import ParsedConfig, RunOptions, config_data, parse_config
from bathtub.errors import AssumptionViolation, BathtubError
from bathtub.forward import BoundaryTrace, SpaceTimeGrid, solve_characteristics, solve_upwind

SUBCOMMANDS = ("forward", "invert-inflow", "invert-distribution", "convergence", "noise-scaling", "example", "validate")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bathtub", description="Forward and inverse solvers for the generalized bathtub model.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scenario YAML file")
            p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config entry (dotted path)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        return p

    p = common(sub.add_parser("forward", help="solve the forward problem and write the boundary trace"))
    p.add_argument("--dt", type=float, help="forward time step (default: run.forward_dt)")
    p.add_argument("--dx", type=float, help="space step for the upwind solver (default: dt)")
    p.add_argument("--solver", choices=("characteristics", "upwind"), default="characteristics")
    p.add_argument("--sigma", type=float, help="also write a noisy trace at this level (default: run.sigma)")
    p.add_argument("--seed", type=int, help="noise seed (default: run.seed)")

    p = common(sub.add_parser("invert-inflow", help="recover f from a trace CSV"))
    p.add_argument("--trace", required=True, help="trace CSV with header t,k0")
    p.add_argument("--dt", type=float, help="inverse time step (default: run.dt)")
    p.add_argument("--method", choices=("explicit", "successive", "uniform-recursion"), help="default: run.method")
    p.add_argument("--sigma", type=float, help="noise level recorded in the report")
    p.add_argument("--seed", type=int, help="noise seed recorded in the report")

    p = common(sub.add_parser("invert-distribution", help="recover phi from a trace CSV"))
    p.add_argument("--trace", required=True, help="trace CSV with header t,k0")
    p.add_argument("--dt", type=float, help="inverse time step (default: run.dt)")
    p.add_argument("--dx", type=float, help="space step (default: v_max * dt)")

    p = common(sub.add_parser("convergence", help="exact-data error against inverse step size"))
    p.add_argument("--dts", type=_floats, default=[4e-3, 2e-3, 1e-3], help="comma-separated inverse steps")
    p.add_argument("--dt", type=float, help="forward step (default: run.forward_dt)")
    p.add_argument("--method", choices=("explicit", "successive", "uniform-recursion"), default="explicit")

    p = common(sub.add_parser("noise-scaling", help="error against noise level with dt = sigma^(1/2)"))
    p.add_argument("--sigmas", type=_floats, default=[1e-2, 1e-4, 1e-6], help="comma-separated noise levels")
    p.add_argument("--dt", type=float, help="forward step (default: run.forward_dt)")
    p.add_argument("--seed", type=int, help="noise seed (default: run.seed)")

    p = common(sub.add_parser("example", help="run a built-in example end to end"), config=False)
    p.add_argument("name", help=f"one of {', '.join(experiments.EXAMPLES)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, help="forward step (default: 0.001)")

    p = sub.add_parser("validate", help="check a config against the model assumptions")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return parser


def _finish(out: Path, artifacts: list[str], report: dict) -> None:
    (out / "report.yaml").write_text(yaml.safe_dump(experiments._plain(report), sort_keys=False, default_flow_style=None))
    io.write_manifest(out, artifacts + ["report.yaml"])


def _run_options(cfg: ParsedConfig, **changes) -> RunOptions:
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(cfg.run, **changes)


def cmd_forward(args, cfg: ParsedConfig, out: Path) -> None:
    run = _run_options(cfg, forward_dt=args.dt, sigma=args.sigma, seed=args.seed)
    s = cfg.scenario
    artifacts = ["trace.csv", "mass.csv"]
    if args.solver == "upwind":
        grid = SpaceTimeGrid.for_scenario(s, run.forward_dt, args.dx)
        fld = solve_upwind(s, grid)
        trace, mass = fld.boundary_trace(), fld.mass_curve()
        fld.to_csv(out / "field.csv")
        artifacts.append("field.csv")
    else:
        mass, trace = solve_characteristics(s, run.forward_dt)
    trace.to_csv(out / "trace.csv")
    mass.to_csv(out / "mass.csv")
    noise = experiments.NoiseSpec(run.sigma, run.seed)
    if run.sigma > 0:
        experiments.add_noise(trace, noise).to_csv(out / "trace_noisy.csv")
        artifacts.append("trace_noisy.csv")
    _finish(
        out,
        artifacts,
        {
            "command": "forward",
            "config": config_data(s, run, cfg.name),
            "forward": {"solver": args.solver, "dt": run.forward_dt, "dx": args.dx},
            "noise": noise.describe(),
        },
    )


def cmd_invert_inflow(args, cfg: ParsedConfig, out: Path) -> None:
    run = _run_options(cfg, dt=args.dt, method=args.method, sigma=args.sigma, seed=args.seed)
    trace = BoundaryTrace.from_csv(args.trace, run.sigma, run.seed)
    metrics = experiments.run_inflow(cfg.scenario, trace, run.dt, out / "reconstruction.csv", run.method, strict=True)
    _finish(
        out,
        ["reconstruction.csv"],
        {"command": "invert-inflow", "config": config_data(cfg.scenario, run, cfg.name), "trace": str(args.trace), "metrics": metrics},
    )


def cmd_invert_distribution(args, cfg: ParsedConfig, out: Path) -> None:
    run = _run_options(cfg, dt=args.dt, dx=args.dx)
    trace = BoundaryTrace.from_csv(args.trace)
    metrics = experiments.run_distribution(cfg.scenario, trace, run.dt, run.dx, out / "recovery.csv")
    _finish(
        out,
        ["recovery.csv"],
        {"command": "invert-distribution", "config": config_data(cfg.scenario, run, cfg.name), "trace": str(args.trace), "metrics": metrics},
    )


def cmd_convergence(args, cfg: ParsedConfig, out: Path) -> None:
    run = _run_options(cfg, forward_dt=args.dt)
    fit = experiments.convergence_study(cfg.scenario, args.dts, run.forward_dt, method=args.method)
    fit.to_csv(out / "study.csv")
    _finish(
        out,
        ["study.csv"],
        {"command": "convergence", "config": config_data(cfg.scenario, run, cfg.name), "method": args.method, "fit": fit.as_dict()},
    )
    print(f"slope={fit.slope:.4f}")


def cmd_noise_scaling(args, cfg: ParsedConfig, out: Path) -> None:
    run = _run_options(cfg, forward_dt=args.dt, seed=args.seed)
    fit = experiments.noise_scaling_study(cfg.scenario, args.sigmas, run.seed, run.forward_dt)
    fit.to_csv(out / "study.csv")
    _finish(
        out,
        ["study.csv"],
        {
            "command": "noise-scaling",
            "config": config_data(cfg.scenario, run, cfg.name),
            "rng": experiments.RNG_ALGORITHM,
            "fit": fit.as_dict(),
        },
    )
    print(f"slope={fit.slope:.4f}")


def cmd_validate(cfg: ParsedConfig) -> None:
    for line in cfg.report.lines():
        print(line)
    failed = [c for c in cfg.report.failures if c.severity == "assumption"]
    if failed:
        raise AssumptionViolation("; ".join(f"{c.name} ({c.detail})" for c in failed))


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example":
            report = experiments.run_example(args.name, args.out, args.seed, args.dt)
            print(f"wrote {Path(args.out) / 'manifest.csv'} ({len(report.artifacts)} artifacts, {report.runtime:.2f} s)")
            return 0
        cfg = parse_config(args.config, args.set)
        if args.command == "validate":
            cmd_validate(cfg)
            return 0
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        handler = {
            "forward": cmd_forward,
            "invert-inflow": cmd_invert_inflow,
            "invert-distribution": cmd_invert_distribution,
            "convergence": cmd_convergence,
            "noise-scaling": cmd_noise_scaling,
        }[args.command]
        handler(args, cfg, out)
        print(f"wrote {out / 'manifest.csv'}")
        return 0
    except BathtubError as exc:
        print(f"error: category={exc.category} exit={exc.exit_code} message={exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
