"""Command line interface: generate instances, solve, certify, sweep.

Subcommands:
  pcp gen      write a synthetic low-rank + sparse instance to PCPM files
  pcp solve    run the pursuit solver on a data matrix
  pcp certify  build and verify a dual certificate for a ground-truth pair
  pcp sweep    run (or resume) a phase-transition experiment grid
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import pcpm
from .certificate import certify_instance, default_j0
from .harness import (
    SweepConfig,
    SweepResult,
    emit_csv,
    emit_heatmap,
    resume_sweep,
    run_sweep,
    write_sidecar,
)
from .problems import lambda_classic, lambda_dense, make_instance
from .solver import SolverConfig, pcp_solve


def parse_lambda_spec(spec: str, n: int) -> float:
    """Weighting parameter from 'classic', 'dense:rho,C1', or a literal."""
    if spec == "classic":
        return lambda_classic(n)
    if spec.startswith("dense:"):
        try:
            rho_str, c1_str = spec[len("dense:"):].split(",")
            return lambda_dense(n, float(rho_str), float(c1_str))
        except ValueError as exc:
            raise ValueError(
                f"bad lambda spec {spec!r}; expected dense:<rho>,<C1>"
            ) from exc
    try:
        value = float(spec)
    except ValueError as exc:
        raise ValueError(f"bad lambda spec {spec!r}") from exc
    if value <= 0:
        raise ValueError(f"lambda must be positive, got {value}")
    return value


def _cmd_gen(args) -> int:
    inst = make_instance(args.n, args.r, args.rho, args.seed, args.model)
    pcpm.save_matrix(inst.L0, args.out_l0)
    pcpm.save_matrix(inst.S0, args.out_s0)
    pcpm.save_matrix(inst.D, args.out_d)
    sidecar = {
        "n": args.n, "r": args.r, "rho": args.rho, "seed": args.seed,
        "support_model": args.model, "nnz_S0": int(np.count_nonzero(inst.S0)),
        "out_l0": str(args.out_l0), "out_s0": str(args.out_s0),
        "out_d": str(args.out_d),
    }
    Path(str(args.out_d) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return 0


def _cmd_solve(args) -> int:
    D = pcpm.load_matrix(args.d)
    lam = parse_lambda_spec(getattr(args, "lambda"), D.shape[0])
    cfg = SolverConfig(tol_feasibility=args.tol, max_iters=args.max_iters)
    result = pcp_solve(D, lam, cfg)
    if args.out_l:
        pcpm.save_matrix(result.L_hat, args.out_l)
    if args.out_s:
        pcpm.save_matrix(result.S_hat, args.out_s)
    report = {
        "lambda": lam,
        "iterations": result.iterations,
        "feasibility_residual": result.feasibility_residual,
        "objective": result.objective,
        "converged": result.converged,
    }
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return 0 if result.converged else 1


def _cmd_certify(args) -> int:
    L0 = pcpm.load_matrix(args.l0)
    S0 = pcpm.load_matrix(args.s0)
    n = L0.shape[0]
    lam = parse_lambda_spec(getattr(args, "lambda"), n)
    j0 = default_j0(n) if args.j0 == "auto" else int(args.j0)
    report, _ = certify_instance(L0, S0, lam, j0=j0, seed=args.seed)
    payload = report.to_dict()
    if args.report:
        Path(args.report).write_text(json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload))
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    raw = json.loads(Path(args.config).read_text())
    cfg = SweepConfig.from_dict(raw)
    if args.jobs is not None:
        jobs = args.jobs
    else:
        jobs = int(os.environ.get("PCP_JOBS", cfg.parallelism))
    collector = []
    try:
        if args.resume:
            result = resume_sweep(cfg, args.resume, jobs=jobs, collector=collector)
        else:
            result = run_sweep(cfg, jobs=jobs, collector=collector)
    except (KeyboardInterrupt, OSError) as exc:
        # flush whatever completed, then signal the partial run
        partial = SweepResult(config=cfg, records=sorted(
            collector, key=lambda rec: (rec.n, rec.rho, rec.trial)
        ))
        if args.out_csv:
            emit_csv(partial, args.out_csv)
            write_sidecar(partial, args.out_csv)
        print(f"sweep interrupted ({exc}); partial results flushed", file=sys.stderr)
        return 2
    if args.out_csv:
        emit_csv(result, args.out_csv)
        write_sidecar(result, args.out_csv)
    if args.out_pgm:
        emit_heatmap(result, args.out_pgm)
    total = len(result.records)
    print(f"sweep complete: {total} records")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic instance")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--r", type=int, required=True)
    gen.add_argument("--rho", type=float, required=True)
    gen.add_argument("--model", choices=("bernoulli", "exact"), default="exact")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-l0", required=True)
    gen.add_argument("--out-s0", required=True)
    gen.add_argument("--out-d", required=True)
    gen.set_defaults(func=_cmd_gen)

    solve = sub.add_parser("solve", help="run the pursuit solver")
    solve.add_argument("--d", required=True)
    solve.add_argument("--lambda", required=True,
                       help="<value> | dense:<rho>,<C1> | classic")
    solve.add_argument("--tol", type=float, default=1e-7)
    solve.add_argument("--max-iters", type=int, default=1000)
    solve.add_argument("--out-l")
    solve.add_argument("--out-s")
    solve.add_argument("--report")
    solve.set_defaults(func=_cmd_solve)

    certify = sub.add_parser("certify", help="build and verify a dual certificate")
    certify.add_argument("--l0", required=True)
    certify.add_argument("--s0", required=True)
    certify.add_argument("--lambda", required=True,
                         help="<value> | dense:<rho>,<C1> | classic")
    certify.add_argument("--j0", default="auto",
                         help="golfing batch count, integer or 'auto'")
    certify.add_argument("--seed", type=int, default=0)
    certify.add_argument("--report")
    certify.set_defaults(func=_cmd_certify)

    sweep = sub.add_parser("sweep", help="run a phase-transition sweep")
    sweep.add_argument("--config", required=True, help="JSON sweep configuration")
    sweep.add_argument("--out-csv")
    sweep.add_argument("--out-pgm")
    sweep.add_argument("--resume", help="existing CSV to complete")
    sweep.add_argument("--jobs", type=int, default=None,
                       help="parallel workers (default: PCP_JOBS or config)")
    sweep.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
