"""Command line front end.

Two subcommands:

    bmadmm solve   --input problem.{txt,bin} --alg {admm,admm2,prox-admm,rgd}
                   [--rho-mode {theory,practice} | --rho VALUE] [--mu MU]
                   [--eps EPS] [--r auto|R] [--seed N] [--check-invariants]
                   [--trace out.csv] [--trace-jsonl out.jsonl]
                   [--summary out.json] [--oracle] [--budget-seconds S]
    bmadmm gen-so3 --q Q --s S --seed N --out problem.bin

Exit codes: 0 when the run converged (or certified an approximately convex
point), 2 when an iteration or time budget ran out, 3 on configuration or
I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass

from .certify import dual_certificate, oracle_sdp, relative_gap
from .curvature import solve_with_curvature
from .errors import BmadmmError
from .manifold import ManifoldSpec
from .problems import (
    generate_so3,
    load_gset,
    maxcut_cost,
    read_problem,
    write_problem,
)
from .rgd import RgdOptions, rgd_solve
from .solver import ProblemSpec, SolverOptions, Status, solve
from .trace import atomic_write_text

logger = logging.getLogger("bmadmm")

ALGORITHMS = ("admm", "admm2", "prox-admm", "rgd")


@dataclass
class ExperimentConfig:
    input: str
    alg: str = "admm"
    r: str | int = "auto"
    rho_mode: str = "practice"
    rho_value: float | None = None
    mu: float = 0.0
    eps: float | None = None
    tol_primal: float = 1e-8
    tol_obj: float = 1e-10
    max_iter: int = 100_000
    seed: int = 0
    check_invariants: bool = False
    trace: str | None = None
    trace_jsonl: str | None = None
    summary: str | None = None
    budget_seconds: float | None = None
    oracle: bool = False


def _load_problem(config):
    path = config.input
    if path.endswith(".bin"):
        C, d = read_problem(path)
        name = path
    else:
        graph = load_gset(path)
        C = maxcut_cost(graph)
        d = 1
        name = graph.name or path
    r = config.r
    if r == "auto":
        r = ManifoldSpec.default_rank(C.n, d)
    else:
        r = int(r)
    spec = ManifoldSpec(q=C.n // d, d=d, r=r)
    return ProblemSpec(C, spec), name


def _validate(config, problem):
    if config.alg not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {config.alg!r}; expected one of {ALGORITHMS}")
    if config.eps is not None and config.alg != "admm2":
        raise ValueError("--eps only applies to --alg admm2")
    if config.mu > 0 and config.alg != "prox-admm":
        raise ValueError("--mu only applies to --alg prox-admm")
    if config.alg == "admm2" and problem.manifold.d != 1:
        raise ValueError("admm2 requires a unit-diagonal (d = 1) problem")


def run(config):
    """Execute one configured solve; returns the process exit code."""
    try:
        problem, name = _load_problem(config)
        _validate(config, problem)
    except (OSError, ValueError, BmadmmError) as exc:
        logger.error("%s", exc)
        return 3

    rho = config.rho_value if config.rho_value is not None else config.rho_mode
    started = time.perf_counter()
    try:
        if config.alg == "rgd":
            options = RgdOptions(
                max_iter=config.max_iter,
                grad_tol=config.tol_primal,
                seed=config.seed,
            )
            result = rgd_solve(problem, options)
        else:
            mu = config.mu
            if config.alg == "prox-admm" and mu == 0.0:
                mu = default_mu(problem, config, rho)
            options = SolverOptions(
                rho=rho,
                mu=mu,
                max_iter=config.max_iter,
                tol_primal=config.tol_primal,
                tol_obj=config.tol_obj,
                seed=config.seed,
                check_invariants=config.check_invariants,
                time_budget=config.budget_seconds,
            )
            if config.alg == "admm2":
                eps = config.eps if config.eps is not None else 1e-2
                result = solve_with_curvature(problem, options, eps=eps)
            else:
                result = solve(problem, options)
    except (BmadmmError, ValueError) as exc:
        logger.error("solve failed: %s", exc)
        return 3
    seconds = time.perf_counter() - started

    certificate = dual_certificate(
        problem.cost,
        result.state.sigma_tilde,
        d=problem.manifold.d,
        seed=config.seed,
    )
    summary = {
        "problem": name,
        "alg": config.alg,
        "n": problem.cost.n,
        "r": problem.manifold.r,
        "rho": result.state.rho,
        "mu": result.state.mu,
        "final_objective": result.state.last_objective,
        "gap": certificate.duality_gap,
        "certified": certificate.certified,
        "iterations": result.state.k,
        "seconds": seconds,
        "seed": config.seed,
        "status": result.status.value,
        "slack_min_eig": certificate.slack_min_eig,
        "certified_lower_bound": certificate.lower_bound(),
    }
    if config.oracle:
        oracle = oracle_sdp(problem.cost, d=problem.manifold.d, seed=config.seed)
        summary["oracle_value"] = oracle.value
        summary["oracle_certified"] = oracle.certificate.certified
        if oracle.value != 0.0:
            summary["relative_gap"] = relative_gap(
                problem.cost, result.state.sigma_tilde, oracle.value
            )
    if config.trace:
        result.trace.to_csv(config.trace)
    if config.trace_jsonl:
        result.trace.to_jsonl(config.trace_jsonl)
    if config.summary:
        atomic_write_text(config.summary, json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    if result.status in (Status.CONVERGED, Status.EPS_CONVEX):
        return 0
    if result.status in (Status.MAX_ITER, Status.STALLED):
        return 2
    return 3


def default_mu(problem, config, rho):
    """Proximal weight matching the penalty when none was given."""
    from .sparse import two_norm_estimate

    if isinstance(rho, str):
        return two_norm_estimate(problem.cost, seed=config.seed)
    return float(rho)


def gen_so3_command(args):
    try:
        problem = generate_so3(args.q, args.s, args.seed)
        write_problem(args.out, problem.cost, d=problem.manifold.d)
        from .sparse import two_norm_estimate

        norm_two = (
            two_norm_estimate(problem.cost, seed=args.seed)
            if problem.cost.nnz
            else 0.0
        )
        print(
            json.dumps(
                {
                    "out": args.out,
                    "n": problem.cost.n,
                    "nnz": problem.cost.nnz,
                    "d": problem.manifold.d,
                    "norm_two": norm_two,
                    "seed": args.seed,
                }
            )
        )
    except (OSError, ValueError, BmadmmError) as exc:
        logger.error("%s", exc)
        return 3
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="bmadmm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a problem from a file")
    ps.add_argument("--input", required=True, help="Gset edge list (.txt) or binary problem (.bin)")
    ps.add_argument("--alg", default="admm", help="admm | admm2 | prox-admm | rgd")
    ps.add_argument("--r", default="auto", help="factor rank, or 'auto'")
    ps.add_argument("--rho-mode", default="practice", choices=("theory", "practice"))
    ps.add_argument("--rho", type=float, default=None, help="explicit penalty value")
    ps.add_argument("--mu", type=float, default=0.0, help="proximal weight (prox-admm)")
    ps.add_argument("--eps", type=float, default=None, help="curvature tolerance (admm2)")
    ps.add_argument("--tol-primal", type=float, default=1e-8)
    ps.add_argument("--tol-obj", type=float, default=1e-10)
    ps.add_argument("--max-iter", type=int, default=100_000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--check-invariants", action="store_true")
    ps.add_argument("--trace", default=None, help="write the iterate trace as CSV")
    ps.add_argument("--trace-jsonl", default=None, help="write the trace as JSON lines")
    ps.add_argument("--summary", default=None, help="write the summary JSON")
    ps.add_argument("--budget-seconds", type=float, default=None)
    ps.add_argument("--oracle", action="store_true", help="also compute the reference oracle value")

    pg = sub.add_parser("gen-so3", help="generate a synthetic block-sparse problem")
    pg.add_argument("--q", type=int, required=True, help="number of 3x3 blocks")
    pg.add_argument("--s", type=float, required=True, help="block pair density in (0, 1]")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", required=True, help="output .bin path")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "gen-so3":
        return gen_so3_command(args)
    config = ExperimentConfig(
        input=args.input,
        alg=args.alg,
        r=args.r,
        rho_mode=args.rho_mode,
        rho_value=args.rho,
        mu=args.mu,
        eps=args.eps,
        tol_primal=args.tol_primal,
        tol_obj=args.tol_obj,
        max_iter=args.max_iter,
        seed=args.seed,
        check_invariants=args.check_invariants,
        trace=args.trace,
        trace_jsonl=args.trace_jsonl,
        summary=args.summary,
        budget_seconds=args.budget_seconds,
        oracle=args.oracle,
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
