"""Command-line interface: solve, sweep, scenario, and validate-metric.

All numeric CSV fields are written with 17 significant digits so repeated
runs of a fixed config are byte-identical and downstream plots are
bit-stable.  Exit codes: 0 success, 2 configuration error, 3 solve failure
under --strict.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import Config, ConfigError, load_config
from .scenario import assemble_scenario
from .solvers import (
    Solution,
    Status,
    Variant,
    solve_transition,
    sweep_transitions,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STRICT = 3


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _write_csv(path: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _extra_labels(variant: Variant, dim: int):
    if variant is Variant.ACCEL:
        return [f"a{i + 1}" for i in range(dim)]
    if variant is Variant.TORQUE:
        return [f"E{i + 1}" for i in range(dim)]
    return []


def _solution_json(solution: Solution) -> dict:
    d = solution.decision
    return {
        "variant": solution.problem.variant.value,
        "status": solution.status.value,
        "t0": d["t0"],
        "t_f": d["t_f"],
        "T": d["T"],
        "rates": list(d["rates"]),
        "residual": list(np.atleast_1d(solution.residual)),
        "residual_norm": solution.residual_norm,
        "cost": solution.cost,
    }


def write_solution(solution: Solution, out_dir: str):
    """Write solution.json and trajectory.csv for one solved transition."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "solution.json"), "w", encoding="utf-8") as fh:
        json.dump(_solution_json(solution), fh, indent=2, sort_keys=True)
        fh.write("\n")
    traj = solution.trajectory
    if traj is None:
        return
    problem = solution.problem
    n = problem.dim
    labels = _extra_labels(problem.variant, n)
    header = (["t"] + [f"r{i + 1}" for i in range(n)]
              + [f"dr{i + 1}" for i in range(n)] + labels + ["cost_accum"])
    from .scenario import _cumtrapz, _transition_cost_rate

    cost_accum = _cumtrapz(_transition_cost_rate(problem, traj.states), traj.t)
    rows = []
    for k in range(len(traj.t)):
        row = [traj.t[k], *traj.r[k], *traj.rdot[k]]
        if labels:
            row.extend(traj.extra[k, :n])
        row.append(cost_accum[k])
        rows.append([_fmt(v) for v in row])
    _write_csv(os.path.join(out_dir, "trajectory.csv"), header, rows)


def write_scenario(scenario, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    header = ["t", "r1", "r2", "x", "y", "theta",
              "fwd_disp", "turn_disp", "cost_accum", "segment"]
    has_body = scenario.poses is not None
    rows = []
    for k in range(len(scenario.t)):
        pose = scenario.poses[k] if has_body else None
        row = [
            _fmt(scenario.t[k]),
            *(_fmt(v) for v in scenario.r[k]),
            _fmt(pose.x) if has_body else "nan",
            _fmt(pose.y) if has_body else "nan",
            _fmt(pose.theta) if has_body else "nan",
            _fmt(scenario.fwd_disp[k]) if has_body else "nan",
            _fmt(scenario.turn_disp[k]) if has_body else "nan",
            _fmt(scenario.cost_accum[k]),
            scenario.segment[k],
        ]
        rows.append(row)
    _write_csv(os.path.join(out_dir, "scenario.csv"), header, rows)


def _net_displacement(cfg: Config, solution: Solution):
    """Net forward/turning displacement of the full scenario, or (nan, nan)."""
    body = cfg.body_field()
    if body is None or solution.status is not Status.CONVERGED:
        return float("nan"), float("nan")
    scen = assemble_scenario(cfg.source_gait, solution, cfg.target_gait,
                             sample_rate=cfg.samples_per_period
                             / cfg.source_gait.period,
                             body_field=body)
    return float(scen.fwd_disp[-1]), float(scen.turn_disp[-1])


def cmd_solve(cfg: Config, args) -> int:
    problem = cfg.build_problem(variant=args.variant, phase=args.phase)
    solution = solve_transition(problem)
    out_dir = args.out or cfg.output_dir
    write_solution(solution, out_dir)
    print(f"status={solution.status.value} cost={solution.cost:.6g} "
          f"residual={solution.residual_norm:.3g}")
    if args.strict and solution.status is not Status.CONVERGED:
        return EXIT_STRICT
    return EXIT_OK


def cmd_sweep(cfg: Config, args) -> int:
    problem = cfg.build_problem(variant=args.variant)
    solutions = sweep_transitions(problem, cfg.phase_count)
    out_dir = args.out or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for idx, sol in enumerate(solutions):
        fwd, turn = _net_displacement(cfg, sol)
        rows.append([
            str(idx), _fmt(sol.decision["t0"]), sol.status.value,
            _fmt(sol.decision["T"]), _fmt(sol.decision["t_f"]),
            _fmt(sol.cost), _fmt(fwd), _fmt(turn),
        ])
        write_solution(sol, os.path.join(out_dir, f"phase_{idx:02d}"))
        print(f"phase {idx}: t0={sol.decision['t0']:.4f} "
              f"status={sol.status.value} cost={sol.cost:.6g}")
    header = ["phase", "t0", "status", "T", "t_f", "cost",
              "net_fwd_disp", "net_turn_disp"]
    _write_csv(os.path.join(out_dir, "summary.csv"), header, rows)
    if args.strict and any(s.status is not Status.CONVERGED for s in solutions):
        return EXIT_STRICT
    return EXIT_OK


def cmd_scenario(cfg: Config, args) -> int:
    problem = cfg.build_problem(variant=args.variant, phase=args.phase)
    solution = solve_transition(problem)
    if solution.status is not Status.CONVERGED:
        print(f"transition did not converge: {solution.status.value}",
              file=sys.stderr)
        return EXIT_STRICT if args.strict else EXIT_OK
    scen = assemble_scenario(cfg.source_gait, solution, cfg.target_gait,
                             sample_rate=cfg.samples_per_period
                             / cfg.source_gait.period,
                             body_field=cfg.body_field())
    out_dir = args.out or cfg.output_dir
    write_scenario(scen, out_dir)
    write_solution(solution, out_dir)
    print(f"scenario: {len(scen.t)} samples, junctions at "
          f"{scen.junctions[0]:.4f} and {scen.junctions[1]:.4f}")
    return EXIT_OK


def cmd_validate_metric(cfg: Config, args) -> int:
    metric = cfg.build_metric()
    n = args.grid
    lim = args.grid_extent
    axis = np.linspace(-lim, lim, n)
    out_dir = args.out or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    header = ["r1", "r2", "m11", "m12", "m22",
              "eig_min", "eig_max", "angle"]
    rows = []
    for b in axis:
        for a in axis:
            M = metric.matrix(np.array([a, b]))
            w, V = np.linalg.eigh(M)
            angle = float(np.arctan2(V[1, -1], V[0, -1]))
            rows.append([_fmt(v) for v in
                         (a, b, M[0, 0], M[0, 1], M[1, 1], w[0], w[-1], angle)])
    _write_csv(os.path.join(out_dir, "metric_grid.csv"), header, rows)
    print(f"metric grid: {n}x{n} points written")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsg",
        description="Optimal gait-transition trajectories on shape-space "
                    "Riemannian metrics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", cmd_solve), ("sweep", cmd_sweep),
                     ("scenario", cmd_scenario),
                     ("validate-metric", cmd_validate_metric)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--variant", choices=[v.value for v in Variant],
                       default=None, help="override the config's variant")
        p.add_argument("--phase", type=float, default=None,
                       help="departure phase t0 on the source gait")
        p.add_argument("--strict", action="store_true",
                       help="exit 3 when the solve does not converge")
        p.add_argument("--out", default=None, help="output directory")
        if name == "validate-metric":
            p.add_argument("--grid", type=int, default=25,
                           help="grid points per axis")
            p.add_argument("--grid-extent", type=float, default=1.5,
                           help="half-width of the sampled square")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.variant is not None:
        args.variant = Variant(args.variant)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return args.fn(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
