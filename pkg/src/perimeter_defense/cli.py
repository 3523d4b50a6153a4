"""Command line entry point: validate, solve, simulate, montecarlo."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import MarkovModel, asymptotic_percentage, monte_carlo_summary, percentage_curve
from .config import RunConfig, load_config
from .engagement import Branch, capture_probabilities, guarding_arc, head_on_region
from .dubins import Configuration
from .errors import ConfigParseError, NoBoundaryError, NoFeasibleEngagementError
from .game import GameEngine, Outcome, ValidationReport, run_sequence, validate_assumptions

EXIT_OK, EXIT_CONFIG, EXIT_WARN, EXIT_INFEASIBLE = 0, 1, 2, 3


def _report_dict(report: ValidationReport) -> dict:
    def verdict(v):
        return {"passed": v.passed, "lhs": v.lhs, "rhs": v.rhs, "note": v.note}

    return {"assumption1": verdict(report.assumption1), "assumption2": verdict(report.assumption2)}


def _relation(v) -> str:
    return "<=" if v.passed else ">"


def _print_report(report: ValidationReport) -> None:
    a1, a2 = report.assumption1, report.assumption2
    print(f"assumption 1: {'PASS' if a1.passed else 'FAIL'}  max region norm {a1.lhs:.4f} {_relation(a1)} {a1.rhs:.4f}")
    print(f"assumption 2: {'PASS' if a2.passed else 'FAIL'}  lhs {a2.lhs:.4f} {_relation(a2)} rhs {a2.rhs:.4f}")
    for w in report.warnings():
        print(f"warning: {w}", file=sys.stderr)


def _arc_dict(arc) -> dict:
    return {"measure": arc.measure, "intervals": [list(iv) for iv in arc.intervals]}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _open_csv(path: Path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh)


def _solver_outputs(cfg: RunConfig, engine: GameEngine) -> dict:
    p, sol = cfg.params, engine.sol
    cap = engine.canonical_capture(Branch.CCW)
    p1, p2 = capture_probabilities(p, sol, cfg.grid, cap, cfg.arc_samples, cfg.boundary_samples)
    return {
        "r_D_star": sol.r_D_star,
        "t_star": sol.t_star,
        "deadline": sol.deadline,
        "r_cap": cap.r_cap,
        "theta_cap": cap.theta_cap,
        "p1": p1,
        "p2": p2,
        "guarding_arc_center": _arc_dict(guarding_arc(Configuration(0.0, 0.0, 0.0), p, sol, cfg.arc_samples)),
        "guarding_arc_capture": _arc_dict(guarding_arc(cap.post_capture, p, sol, cfg.arc_samples)),
    }


def _engine(cfg: RunConfig, record_trajectories: bool) -> GameEngine:
    return GameEngine(
        cfg.params,
        cfg.grid,
        n_samples=cfg.arc_samples,
        n_boundary=cfg.boundary_samples,
        dt=cfg.dt,
        branch=cfg.branch,
        record_trajectories=record_trajectories,
    )


def _record(cfg: RunConfig, command: str, report, solver: dict, results: dict) -> dict:
    return {
        "tool": "perimeter-defense",
        "version": __version__,
        "command": command,
        "config_hash": cfg.config_hash,
        "config": cfg.snapshot(),
        "validation": _report_dict(report),
        "solver": solver,
        "results": results,
        "notes": [
            "defender waits at the engagement point with zero speed until the engagement instant",
        ],
    }


def cmd_validate(cfg: RunConfig, args) -> int:
    report = validate_assumptions(cfg.params, cfg.grid)
    _print_report(report)
    return EXIT_OK if report.ok else EXIT_WARN


def cmd_solve(cfg: RunConfig, args) -> int:
    engine = _engine(cfg, False)
    solver = _solver_outputs(cfg, engine)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "solve.json", {"config_hash": cfg.config_hash, **solver})
    print(f"r_D*     {solver['r_D_star']:.4f}")
    print(f"deadline {solver['deadline']:.4f}")
    print(f"r_cap    {solver['r_cap']:.4f}   theta_cap {solver['theta_cap']:.4f}")
    print(f"p1       {solver['p1']:.4f}   p2 {solver['p2']:.4f}")
    return EXIT_OK


def _capture_dict(cap) -> dict | None:
    if cap is None:
        return None
    return {
        "x_cap": list(cap.x_cap),
        "psi_cap": cap.psi_cap,
        "r_cap": cap.r_cap,
        "theta_cap": cap.theta_cap,
        "arc_measure": cap.arc_measure,
        "branch": cap.branch.value,
    }


def cmd_simulate(cfg: RunConfig, args) -> int:
    engine = _engine(cfg, True)
    report = validate_assumptions(cfg.params, cfg.grid)
    solver = _solver_outputs(cfg, engine)
    angles = args.angles
    result = run_sequence(cfg.params, cfg.n_arrivals, cfg.seed, cfg.grid, engine=engine, angles=angles)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    canonical = head_on_region(cfg.params, cfg.grid.cell, 0.0, engine.sol.r_D_star).boundary
    records = []
    for rec in result.records:
        for agent, traj in (("defender", rec.defender_trajectory), ("intruder", rec.intruder_trajectory)):
            fh, writer = _open_csv(out / f"traj_{rec.index}_{agent}.csv")
            with fh:
                writer.writerow(["t", "agent", "x", "y", "heading", "config_hash"])
                for t, pose in traj:
                    writer.writerow([repr(t), agent, repr(pose.x), repr(pose.y), repr(pose.heading), cfg.config_hash])
        if rec.outcome is Outcome.CAPTURE:
            c, s = math.cos(rec.phi), math.sin(rec.phi)
            rot = np.array([[c, -s], [s, c]])
            polys = [[[float(x), float(y)] for x, y in poly @ rot.T] for poly in canonical]
            _write_json(out / f"dominance_boundary_{rec.index}.json", {"config_hash": cfg.config_hash, "phi": rec.phi, "boundary": polys})
        records.append({
            "index": rec.index,
            "phi": rec.phi,
            "outcome": rec.outcome.value,
            "start_state": rec.start_state.value,
            "t_start": rec.t_start,
            "t_end": rec.t_end,
            "capture_point": _capture_dict(rec.capture_point),
            "breach_point": list(rec.breach_point) if rec.breach_point else None,
        })
    results = {
        "n_arrivals": len(result.records),
        "n_captures": result.n_captures,
        "capture_fraction": result.capture_fraction,
        "scripted_angles": angles is not None,
        "engagements": records,
    }
    _write_json(out / "run_record.json", _record(cfg, "simulate", report, solver, results))
    for rec in result.records:
        print(f"{rec.index:4d}  phi {rec.phi:+.4f}  {rec.outcome.value:7s}  t_end {rec.t_end:.3f}")
    print(f"captured {result.n_captures}/{len(result.records)}")
    return EXIT_OK


def cmd_montecarlo(cfg: RunConfig, args) -> int:
    engine = _engine(cfg, False)
    report = validate_assumptions(cfg.params, cfg.grid)
    summary = monte_carlo_summary(cfg.params, cfg.n_trials, cfg.n_arrivals, cfg.seed, cfg.grid, engine=engine)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fh, writer = _open_csv(out / "percentage_curves.csv")
    with fh:
        writer.writerow(["n", "empirical_mean_pct", "theory_pct", "asymptotic_pct", "config_hash"])
        for n, (emp, th) in enumerate(zip(summary.mean_curve, summary.theory_curve), start=1):
            writer.writerow([n, repr(float(emp)), repr(float(th)), repr(summary.asymptotic), cfg.config_hash])
    fh, writer = _open_csv(out / "trials.csv")
    with fh:
        writer.writerow(["trial", "fraction", "config_hash"])
        for k, frac in enumerate(summary.per_trial_fractions):
            writer.writerow([k, repr(float(frac)), cfg.config_hash])
    results = {
        "n_trials": summary.n_trials,
        "n_arrivals": summary.n_arrivals,
        "p1": summary.p1,
        "p2": summary.p2,
        "asymptotic_pct": summary.asymptotic,
        "empirical_mean_pct_final": float(summary.mean_curve[-1]) if summary.n_arrivals else None,
        "theory_pct_final": float(summary.theory_curve[-1]) if summary.n_arrivals else None,
        "per_trial_fractions": [float(f) for f in summary.per_trial_fractions],
    }
    solver = {"r_D_star": engine.sol.r_D_star, "t_star": engine.sol.t_star, "deadline": engine.sol.deadline}
    _write_json(out / "run_record.json", _record(cfg, "montecarlo", report, solver, results))
    if summary.n_arrivals:
        print(f"empirical mean at n={summary.n_arrivals}: {summary.mean_curve[-1]:.2f}%")
        print(f"theory at n={summary.n_arrivals}:         {summary.theory_curve[-1]:.2f}%")
    print(f"asymptotic:               {summary.asymptotic:.2f}%")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "montecarlo": cmd_montecarlo,
}


def _angles(text: str) -> list[float]:
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"angles must be comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perimeter-defense", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a key = value config file")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--arrivals", type=int, dest="n_arrivals")
        cmd.add_argument("--trials", type=int, dest="n_trials")
        cmd.add_argument("--angles", type=_angles, help="comma-separated scripted arrival angles")
        cmd.add_argument("--out", dest="output_dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, n_arrivals=args.n_arrivals, n_trials=args.n_trials, output_dir=args.output_dir
        )
        if args.angles is not None:
            cfg = cfg.with_overrides(n_arrivals=len(args.angles))
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    started = time.perf_counter()
    try:
        code = COMMANDS[args.command](cfg, args)
    except (NoFeasibleEngagementError, NoBoundaryError) as exc:
        print(f"infeasible: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.command in ("simulate", "montecarlo"):
        _write_json(
            Path(cfg.output_dir) / "run_record.timing.json",
            {"config_hash": cfg.config_hash, "wall_clock_seconds": time.perf_counter() - started},
        )
    return code


if __name__ == "__main__":
    sys.exit(main())
