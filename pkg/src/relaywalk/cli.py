"""Command-line front end: solving, sweeps, simulation, and the advisor.

Scalar results are printed as one JSON record; curves are CSV with fixed
headers (documented in the README) so figure scripts can consume them
directly. Model defaults mirror the numerical studies: p_m=0.1,
gamma=0.01, eta=2; p, q and lambda are always explicit.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bellman import verify_osla_equivalence
from .constrained import InfeasibleBudgetError, relay_curve, solve_constrained
from .heuristic import compare, distance_set, optimize_threshold
from .model import CostParams, ModelError, PathParams
from .osla import grid_scan, solve_unconstrained
from .placement import PlacementSet
from .simulate import monte_carlo, run_episode
from . import verify as verify_mod

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INFEASIBLE = 3


def _add_model_args(sp: argparse.ArgumentParser, *, need_q: bool = True, need_lam: bool = True) -> None:
    sp.add_argument("--p", type=float, required=True, help="per-step corridor end probability")
    if need_q:
        sp.add_argument("--q", type=float, required=True, help="East-step probability")
    if need_lam:
        sp.add_argument("--lambda", dest="lam", type=float, required=True, help="relay price")
    sp.add_argument("--eta", type=float, default=2.0, help="path-loss exponent (default 2)")
    sp.add_argument("--pm", type=float, default=0.1, help="minimum per-hop power (default 0.1)")
    sp.add_argument("--gamma", type=float, default=0.01, help="SNR coefficient (default 0.01)")


def _model(args) -> tuple[PathParams, CostParams]:
    return PathParams(args.p, args.q), CostParams(args.pm, args.gamma, args.eta)


def _emit_json(record: dict, out: str | None) -> None:
    text = json.dumps(record, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _emit_csv(header: list[str], rows, out: str | None) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out:
            fh.close()


def _grid(spec: str) -> list[float]:
    """Parse 'start:stop:step' or a comma list into floats."""
    if ":" in spec:
        start, stop, step = (float(v) for v in spec.split(":"))
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad grid {spec!r}")
        return [float(v) for v in np.arange(start, stop + step / 2, step)]
    return [float(v) for v in spec.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaywalk",
        description="Optimal as-you-go relay placement on a random lattice corridor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="optimal boundary and value")
    _add_model_args(sp)
    sp.add_argument("--out", help="write the JSON record here instead of stdout")

    sp = sub.add_parser("scan-g", help="sample the cycle cost over thresholds (CSV h,g_h)")
    _add_model_args(sp)
    sp.add_argument("--h-max", type=float, default=None, help="scan limit (default 2.5x the optimum)")
    sp.add_argument("--step", type=float, default=None, help="grid step (default h_max/200)")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = sub.add_parser("sweep-lambda", help="relay-price sweep (CSV lambda,en,ec,j)")
    _add_model_args(sp, need_lam=False)
    sp.add_argument("--lambdas", default="0:60:0.5", help="grid start:stop:step or comma list")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = sub.add_parser("sweep-q", help="turn-bias sweep at fixed price (CSV q,j)")
    _add_model_args(sp, need_q=False)
    sp.add_argument("--qs", default="0.1:0.9:0.1", help="grid start:stop:step or comma list")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = sub.add_parser("boundaries", help="optimal boundaries per exponent (CSV eta,n,m_star)")
    _add_model_args(sp)
    sp.add_argument("--etas", default="2,3", help="comma list of exponents")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = sub.add_parser("constrained", help="budget-constrained solve (JSON)")
    _add_model_args(sp, need_lam=False)
    sp.add_argument("--rho", type=float, required=True, help="average relay budget")
    sp.add_argument("--out", help="write the JSON record here instead of stdout")

    sp = sub.add_parser("heuristic", help="budget frontier vs the circle rule (CSV rho,cost_opt,cost_heur)")
    _add_model_args(sp, need_lam=False)
    sp.add_argument("--rhos", required=True, help="budget grid start:stop:step or comma list")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = sub.add_parser("simulate", help="seeded Monte Carlo of a policy (JSON)")
    _add_model_args(sp)
    sp.add_argument(
        "--policy",
        default="optimal",
        help="optimal | heuristic | file:PATH (a solve record or boundary record)",
    )
    sp.add_argument("--r-th", type=float, default=None, help="circle radius for --policy heuristic")
    sp.add_argument("--episodes", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write the JSON record here instead of stdout")

    sp = sub.add_parser("verify", help="run the invariant battery")

    sp = sub.add_parser("check-equivalence", help="compare both solvers on one instance (JSON)")
    _add_model_args(sp)

    sp = sub.add_parser("serve", help="start the live advisor service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8080)
    sp.add_argument("--ui-dir", default=None, help="static UI bundle (default: auto-detect frontend/dist)")
    sp.add_argument("--log-dir", default=None, help="append-only session event logs")

    return parser


def _policy_from_args(args, pp: PathParams, cost: CostParams) -> PlacementSet:
    spec = args.policy
    if spec == "optimal":
        return solve_unconstrained(pp, cost, args.lam).optimal_set
    if spec == "heuristic":
        if args.r_th is not None:
            return distance_set(args.r_th)
        policy, _ev = optimize_threshold(pp, cost, args.lam)
        return policy.induced_set
    if spec.startswith("file:"):
        rec = json.loads(Path(spec[5:]).read_text())
        return PlacementSet.from_record(rec.get("set", rec))
    raise ModelError(f"unknown policy {spec!r}")


def _cmd_solve(args) -> int:
    pp, cost = _model(args)
    res = solve_unconstrained(pp, cost, args.lam)
    _emit_json(res.to_record(), args.out)
    return EXIT_OK


def _cmd_scan_g(args) -> int:
    pp, cost = _model(args)
    h_max = args.h_max
    if h_max is None:
        h_max = 2.5 * solve_unconstrained(pp, cost, args.lam).g_star + 10.0
    step = args.step if args.step is not None else h_max / 200.0
    scan = grid_scan(pp, cost, args.lam, h_max, step)
    _emit_csv(["h", "g_h"], scan.rows(), args.out)
    return EXIT_OK


def _cmd_sweep_lambda(args) -> int:
    pp, cost = _model(args)
    points = relay_curve(pp, cost, _grid(args.lambdas))
    rows = [(pt.lam, pt.expected_relays, pt.expected_cost, pt.total_cost) for pt in points]
    _emit_csv(["lambda", "en", "ec", "j"], rows, args.out)
    return EXIT_OK


def _cmd_sweep_q(args) -> int:
    cost = CostParams(args.pm, args.gamma, args.eta)
    rows = []
    for q in _grid(args.qs):
        res = solve_unconstrained(PathParams(args.p, q), cost, args.lam)
        rows.append((q, res.g_star))
    _emit_csv(["q", "j"], rows, args.out)
    return EXIT_OK


def _cmd_boundaries(args) -> int:
    pp = PathParams(args.p, args.q)
    rows = []
    for eta in (float(v) for v in args.etas.split(",") if v):
        cost = CostParams(args.pm, args.gamma, eta)
        res = solve_unconstrained(pp, cost, args.lam)
        for n, m in enumerate(res.optimal_set.m_star):
            rows.append((eta, n, m))
    _emit_csv(["eta", "n", "m_star"], rows, args.out)
    return EXIT_OK


def _cmd_constrained(args) -> int:
    pp = PathParams(args.p, args.q)
    cost = CostParams(args.pm, args.gamma, args.eta)
    try:
        sol = solve_constrained(pp, cost, args.rho)
    except InfeasibleBudgetError as exc:
        _emit_json({"error": "infeasible", "message": str(exc)}, args.out)
        return EXIT_INFEASIBLE
    _emit_json(sol.to_record(), args.out)
    return EXIT_OK


def _cmd_heuristic(args) -> int:
    pp = PathParams(args.p, args.q)
    cost = CostParams(args.pm, args.gamma, args.eta)
    points = compare(pp, cost, _grid(args.rhos))
    rows = [(pt.rho, pt.cost_optimal, pt.cost_heuristic) for pt in points]
    _emit_csv(["rho", "cost_opt", "cost_heur"], rows, args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    pp, cost = _model(args)
    policy = _policy_from_args(args, pp, cost)
    estimate = monte_carlo(policy, pp, cost, args.lam, args.episodes, args.seed)
    record = estimate.to_record()
    record["policy"] = policy.to_record()
    if args.episodes == 1:
        episode = run_episode(policy, pp, cost, np.random.default_rng(np.random.SeedSequence(args.seed).spawn(1)[0]))
        record["episode"] = {
            "steps": episode.steps,
            "relays": episode.relays,
            "total_cost": episode.total_cost,
            "relay_positions": [list(pt) for pt in episode.relay_positions],
        }
    _emit_json(record, args.out)
    return EXIT_OK


def _cmd_verify(_args) -> int:
    failures = verify_mod.run_checks()
    print(f"{'OK' if failures == 0 else 'FAILED'}: {failures} failing check(s)")
    return EXIT_OK if failures == 0 else EXIT_FAILURE


def _cmd_check_equivalence(args) -> int:
    pp, cost = _model(args)
    rep = verify_osla_equivalence(pp, cost, args.lam)
    _emit_json(
        {
            "passed": rep.passed,
            "g_star": rep.g_star,
            "j00": rep.j00,
            "value_gap": rep.value_gap,
            "sets_equal": rep.sets_equal,
            "tie_limited": rep.tie_limited,
        },
        None,
    )
    return EXIT_OK if rep.passed else EXIT_FAILURE


def _cmd_serve(args) -> int:
    from .service import run_server

    ui_dir = args.ui_dir
    if ui_dir is None:
        for candidate in (
            Path.cwd() / "frontend" / "dist",
            Path(__file__).resolve().parents[2] / "frontend" / "dist",
        ):
            if candidate.is_dir():
                ui_dir = str(candidate)
                break
    run_server(args.host, args.port, ui_dir=ui_dir, log_dir=args.log_dir)
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "scan-g": _cmd_scan_g,
    "sweep-lambda": _cmd_sweep_lambda,
    "sweep-q": _cmd_sweep_q,
    "boundaries": _cmd_boundaries,
    "constrained": _cmd_constrained,
    "heuristic": _cmd_heuristic,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "check-equivalence": _cmd_check_equivalence,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RELAYWALK_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
