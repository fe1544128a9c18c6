"""Command-line front end.

Three subcommands:

    homotcp solve PATH     trace the homotopy path for a problem file
    homotcp verify PATH    check a candidate point against the problem
    homotcp corpus         reproduce the six bundled examples

Exit codes: 0 success (solved / residuals within tolerance / all corpus
expectations met), 1 malformed input, 2 terminated without a solution
(stall, iteration cap, singular system, or a failed verification), 3
divergence to an unbounded state.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import default_anchor_basket, solve
from .homotopy import Anchor, HomotopyMap
from .io import (
    ProblemFormatError,
    load_problem,
    report_to_dict,
    write_trace_csv,
)
from .problems import TcpProblem, corpus, verify
from .tracer import SolveReport, Status, TracerConfig, trace_path

STATUS_EXIT = {
    Status.SOLVED: 0,
    Status.STALLED_TERMINATED: 2,
    Status.MAX_ITERATIONS: 2,
    Status.SINGULAR_SYSTEM: 2,
    Status.DIVERGED_UNBOUNDED: 3,
}

# Tolerance for comparing a solved x against a corpus problem's recorded
# solution, loose enough for the 6-figure rounding those records carry.
CORPUS_X_TOL = 2e-3


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_vec(v) -> str:
    return "(" + ", ".join(_fmt(x) for x in v) + ")"


def _build_config(args) -> TracerConfig:
    return TracerConfig(
        eps1=args.mu_tol,
        eps2=args.eps2,
        eps3=args.eps3,
        shrink=args.shrink,
        inner_refinements=args.inner,
        step_floor=args.step_floor,
        r_max=args.r_max,
        max_outer_iterations=args.max_iter,
    )


def _parse_anchor(spec: str, n: int) -> Anchor:
    if spec == "ones":
        return Anchor.ones(n)
    try:
        vals = [float(s) for s in spec.split(",")]
    except ValueError:
        raise ProblemFormatError(f"--anchor: not a comma-separated number list: {spec!r}")
    if len(vals) != 4 * n:
        raise ProblemFormatError(
            f"--anchor: expected 'ones' or {4 * n} comma-separated values "
            f"(x0, w0, z1_0, z2_0), got {len(vals)}"
        )
    try:
        return Anchor.from_stacked(np.array(vals))
    except ValueError as e:
        raise ProblemFormatError(f"--anchor: {e}")


def _solve_problem(problem: TcpProblem, args) -> SolveReport:
    config = _build_config(args)
    if args.anchor is not None:
        anchor = _parse_anchor(args.anchor, problem.n)
        return solve(problem, config, anchor=anchor)
    return solve(problem, config)


def _print_report(report: SolveReport, as_json: bool):
    doc = report_to_dict(report)
    if as_json:
        print(json.dumps(doc, indent=2, sort_keys=True))
        return
    print(f"status:     {doc['status']}")
    print(f"x:          {_fmt_vec(doc['x'])}")
    print(f"w:          {_fmt_vec(doc['w'])}")
    print(f"mu:         {_fmt(doc['mu'])}")
    print(f"iterations: {doc['iterations']}")
    res = doc["residual"]
    print(
        "residual:   "
        f"x_negativity={_fmt(res['x_negativity'])} "
        f"w_negativity={_fmt(res['w_negativity'])} "
        f"gap={_fmt(res['gap'])}"
    )


def cmd_solve(args) -> int:
    problem = load_problem(args.path)
    report = _solve_problem(problem, args)
    if args.trace and report.trace is not None:
        write_trace_csv(report.trace, problem.n, args.trace)
    _print_report(report, args.json)
    return STATUS_EXIT[report.status]


def cmd_verify(args) -> int:
    problem = load_problem(args.path)
    try:
        x = np.array([float(s) for s in args.x.split(",")])
    except ValueError:
        raise ProblemFormatError(f"--x: not a comma-separated number list: {args.x!r}")
    if x.shape != (problem.n,):
        raise ProblemFormatError(f"--x: expected {problem.n} components, got {x.shape[0]}")
    res = verify(problem, x)
    doc = {
        "x_negativity": res.x_negativity,
        "w_negativity": res.w_negativity,
        "gap": res.gap,
        "per_component": [float(v) for v in res.per_component],
        "tol": args.tol,
        "pass": bool(res.max_violation <= args.tol),
    }
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"x_negativity:  {_fmt(res.x_negativity)}")
        print(f"w_negativity:  {_fmt(res.w_negativity)}")
        print(f"gap:           {_fmt(res.gap)}")
        print(f"per-component: {_fmt_vec(res.per_component)}")
        print(f"verdict:       {'pass' if doc['pass'] else 'fail'} (tol={_fmt(args.tol)})")
    return 0 if doc["pass"] else 2


def _expectation_met(problem: TcpProblem, report: SolveReport) -> bool:
    exp = problem.expected
    if exp is None:
        return True
    if report.status.value != exp.kind:
        return False
    if report.status is Status.SOLVED:
        return bool(np.abs(report.point.x - exp.x).max() <= CORPUS_X_TOL)
    return True


def cmd_corpus(args) -> int:
    rows = []
    all_met = True
    for problem in corpus():
        report = _solve_problem(problem, args)
        if args.trace_dir and report.trace is not None:
            out = pathlib.Path(args.trace_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_trace_csv(report.trace, problem.n, out / f"{problem.name}.csv")
        met = _expectation_met(problem, report)
        all_met &= met
        doc = report_to_dict(report)
        rows.append(
            {
                "problem": problem.name,
                "label": problem.label,
                "status": doc["status"],
                "x": doc["x"],
                "w": doc["w"],
                "gap": doc["residual"]["gap"],
                "iterations": doc["iterations"],
                "expected_met": met,
            }
        )
    if args.json:
        print(json.dumps({"problems": rows, "all_expected": all_met},
                         indent=2, sort_keys=True))
    else:
        for r in rows:
            x = ", ".join(f"{v:.6g}" for v in r["x"])
            w = ", ".join(f"{v:.6g}" for v in r["w"])
            print(
                f"{r['problem']:<9} {r['status']:<18} x=({x}) w=({w}) "
                f"gap={r['gap']:.2e} iters={r['iterations']:<3d} "
                f"{'ok' if r['expected_met'] else 'UNEXPECTED'}  [{r['label']}]"
            )
        print(f"all expectations met: {'yes' if all_met else 'no'}")
    return 0 if all_met else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homotcp",
        description="Homotopy continuation solver for tensor complementarity problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--mu-tol", type=float, default=1e-8,
                       help="final |mu| tolerance (default 1e-8)")
        p.add_argument("--eps2", type=float, default=1e-3,
                       help="stall detection threshold on mu movement (default 1e-3)")
        p.add_argument("--eps3", type=float, default=1e-6,
                       help="step length floor for retries (default 1e-6)")
        p.add_argument("--shrink", type=float, default=0.9,
                       help="geometric step shrink factor (default 0.9)")
        p.add_argument("--inner", type=int, default=3,
                       help="predictor-corrector passes per candidate (default 3)")
        p.add_argument("--step-floor", type=float, default=1e-5,
                       help="minimum useful step in the mu-movement gate (default 1e-5)")
        p.add_argument("--r-max", type=float, default=1.0,
                       help="residual norm acceptance bound (default 1.0)")
        p.add_argument("--max-iter", type=int, default=500,
                       help="outer iteration cap (default 500)")
        p.add_argument("--anchor", type=str, default=None,
                       help="'ones' or 4n comma-separated positive values "
                            "(x0,w0,z1_0,z2_0); traces that single anchor. "
                            "Omit to try the default anchor basket.")

    ps = sub.add_parser("solve", help="solve a problem file")
    ps.add_argument("path", help="problem JSON file")
    add_solver_flags(ps)
    ps.add_argument("--trace", type=str, default=None, metavar="PATH",
                    help="write the path trace as CSV")
    ps.add_argument("--json", action="store_true", help="machine-readable report")
    ps.set_defaults(func=cmd_solve)

    pv = sub.add_parser("verify", help="check a candidate solution")
    pv.add_argument("path", help="problem JSON file")
    pv.add_argument("--x", required=True, help="comma-separated candidate, e.g. 1,2")
    pv.add_argument("--tol", type=float, default=1e-6,
                    help="acceptance tolerance on all residual fields (default 1e-6)")
    pv.add_argument("--json", action="store_true", help="machine-readable report")
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("corpus", help="reproduce the bundled example problems")
    add_solver_flags(pc)
    pc.add_argument("--json", action="store_true", help="machine-readable table")
    pc.add_argument("--trace-dir", type=str, default=None, metavar="DIR",
                    help="write one CSV path trace per problem")
    pc.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProblemFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
