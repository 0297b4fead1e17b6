"""Command-line front end: single projections, benchmark grids, instance
generation, and degeneracy checks.

Subcommands
-----------
project     solve one instance (from a matrix file or a generator) and
            write the primal/dual matrices plus a JSON report; exit code 0
            on convergence, 2 when an iteration budget ran out, 1 on error.
bench       run a (family x size x seed x solver) grid, print an aligned
            text table and persist JSON/CSV rows.
gen         write a generated instance to MatrixMarket with a JSON sidecar.
degeneracy  constraint-degeneracy verdict for a matrix file, as JSON.

Matrix files are MatrixMarket (.mtx/.mm) or dense CSV (.csv), chosen by
extension.  DNNPROJ_THREADS (or --threads) caps the bench worker pool.
"""

import argparse
import concurrent.futures
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .alm import AlmConfig, alm_solve
from .baselines import AdmmConfig, admm_solve, apg_solve, dykstra_solve
from .datagen import FAMILIES, generate
from .degeneracy import (MEMORY_BUDGET, RANK_TOL, SUPPORT_TOL,
                         nondegeneracy_check)
from .linalg import read_matrix, write_matrix_market
from .reporting import format_hms
from .sncg import SncgConfig

SOLVERS = ("alm", "apg", "admm", "dykstra")
DEFAULT_ALM_CAP = 200
DEFAULT_FIRST_ORDER_CAP = 20000


def run_solver(solver, g, tol=1e-12, max_iter=None, sigma0=None,
               sigma_growth=None):
    """Dispatch one solve; returns ``(KktPoint, SolveReport)``."""
    if solver == "alm":
        kwargs = {"tol": tol, "max_alm": max_iter or DEFAULT_ALM_CAP}
        if sigma0 is not None:
            kwargs["sigma0"] = sigma0
        if sigma_growth is not None:
            kwargs["sigma_growth"] = sigma_growth
        return alm_solve(g, AlmConfig(**kwargs))
    cap = max_iter or DEFAULT_FIRST_ORDER_CAP
    if solver == "apg":
        return apg_solve(g, tol=tol, max_iter=cap)
    if solver == "admm":
        return admm_solve(g, AdmmConfig(), tol=tol, max_iter=cap)
    if solver == "dykstra":
        return dykstra_solve(g, tol=tol, max_iter=cap)
    raise ValueError(f"unknown solver {solver!r}")


def _load_instance(args):
    if args.matrix:
        g = read_matrix(args.matrix)
        name = Path(args.matrix).stem
    else:
        inst = generate(args.gen, args.n, seed=args.seed)
        g = inst.g
        name = f"{inst.family}{inst.n}s{args.seed}"
    return g, name


def cmd_project(args):
    try:
        g, name = _load_instance(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        point, report = run_solver(args.solver, g, tol=args.tol,
                                   max_iter=args.max_iter, sigma0=args.sigma0,
                                   sigma_growth=args.sigma_growth)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    write_matrix_market(outdir / f"{name}_X.mtx", point.x)
    write_matrix_market(outdir / f"{name}_S.mtx", point.s)
    write_matrix_market(outdir / f"{name}_Z.mtx", point.z)
    report.save_json(outdir / f"{name}_report.json")
    print(f"{args.solver} on {name}: eta={report.eta_final:.3e} "
          f"iters={report.alm_iters} time={format_hms(report.wall_time)} "
          f"converged={report.converged}")
    return 0 if report.converged else 2


def _bench_cell(cell):
    """One (instance, solver) run; returns a flat result row."""
    family, n, seed, solver, tol, max_iter, sigma0, sigma_growth = cell
    row = {"problem": family, "n": n, "seed": seed, "solver": solver}
    try:
        inst = generate(family, n, seed=seed)
        _point, report = run_solver(solver, inst.g, tol=tol,
                                    max_iter=max_iter, sigma0=sigma0,
                                    sigma_growth=sigma_growth)
        row.update(
            iterations=report.alm_iters,
            newton_iters=report.newton_iters_total,
            warmstart_iters=report.warmstart_iters,
            eta=report.eta_final,
            time=report.wall_time,
            sc=report.diagnostics.sc if report.diagnostics else None,
            converged=report.converged,
            error=None,
        )
    except Exception as exc:  # recorded in-row, harness continues
        row.update(iterations=None, newton_iters=None, warmstart_iters=None,
                   eta=None, time=None, sc=None, converged=False,
                   error=str(exc))
    return row


def _pool_size(args):
    env = os.environ.get("DNNPROJ_THREADS")
    size = args.threads or (int(env) if env else 1)
    return max(1, size)


def _iters_text(row):
    if row["iterations"] is None:
        return "err"
    if row["solver"] == "alm":
        return (f"{row['iterations']}({row['newton_iters']}, "
                f"{row['warmstart_iters']})")
    return str(row["iterations"])


def render_bench_table(rows, solvers):
    """Aligned text table, one line per (problem, n, seed)."""
    keys = sorted({(r["problem"], r["n"], r["seed"]) for r in rows})
    by_cell = {(r["problem"], r["n"], r["seed"], r["solver"]): r for r in rows}
    lines = []
    header = (["problem", "n", "seed"]
              + [f"{s} iters" for s in solvers]
              + [f"{s} eta" for s in solvers]
              + [f"{s} time" for s in solvers]
              + ["sc"])
    table = [header]
    for prob, n, seed in keys:
        cells = [by_cell.get((prob, n, seed, s)) for s in solvers]
        sc = next((c["sc"] for c in cells
                   if c and c["solver"] == "alm" and c["sc"] is not None),
                  next((c["sc"] for c in cells if c and c["sc"] is not None),
                       None))
        table.append(
            [prob, str(n), str(seed)]
            + [_iters_text(c) if c else "-" for c in cells]
            + [f"{c['eta']:.1e}" if c and c["eta"] is not None else "-"
               for c in cells]
            + [format_hms(c["time"]) if c and c["time"] is not None else "-"
               for c in cells]
            + [f"{sc:.1e}" if sc is not None else "-"])
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for r in table:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def cmd_bench(args):
    families = args.families.split(",")
    for fam in families:
        if fam not in FAMILIES:
            print(f"error: unknown family {fam!r}", file=sys.stderr)
            return 1
    sizes = [int(v) for v in args.sizes.split(",")]
    seeds = [int(v) for v in args.seeds.split(",")]
    solvers = [s for s in args.solvers.split(",")]
    for s in solvers:
        if s not in SOLVERS:
            print(f"error: unknown solver {s!r}", file=sys.stderr)
            return 1
    cells = [(fam, n, seed, s, args.tol, args.max_iter, args.sigma0,
              args.sigma_growth)
             for fam in families for n in sizes for seed in seeds
             for s in solvers]
    workers = _pool_size(args)
    if workers == 1:
        rows = [_bench_cell(c) for c in cells]
    else:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_bench_cell, cells))
    rows.sort(key=lambda r: (r["problem"], r["n"], r["seed"], r["solver"]))
    print(render_bench_table(rows, solvers))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if args.format == "csv" or out.suffix == ".csv":
            with open(out, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                writer.writerows(rows)
        elif args.format == "text":
            out.write_text(render_bench_table(rows, solvers) + "\n")
        else:
            with open(out, "w") as fh:
                json.dump({"rows": rows}, fh, indent=2)
    return 0


def cmd_gen(args):
    try:
        inst = generate(args.family, args.n, seed=args.seed)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out or f"{inst.family}{inst.n}.mtx")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_matrix_market(out, inst.g)
    sidecar = out.with_suffix(".json")
    with open(sidecar, "w") as fh:
        json.dump({"family": inst.family, "n": inst.n, "seed": inst.seed,
                   "provenance": inst.provenance}, fh, indent=2)
    print(f"wrote {out} and {sidecar}")
    return 0


def cmd_degeneracy(args):
    try:
        x = read_matrix(args.matrix)
        verdict = nondegeneracy_check(x, rank_tol=args.rank_tol,
                                      support_tol=args.support_tol,
                                      memory_budget=args.budget)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(verdict.to_dict(), indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dnnproj",
        description="Projection onto the doubly nonnegative cone.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="solve a single instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="matrix file (.mtx/.mm/.csv)")
    src.add_argument("--gen", choices=sorted(FAMILIES),
                     help="generate the instance instead")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=SOLVERS, default="alm")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--sigma0", type=float, default=None)
    p.add_argument("--sigma-growth", type=float, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("bench", help="run a benchmark grid")
    p.add_argument("--families", default="zero,hankel,lowrank,toeplitz")
    p.add_argument("--sizes", default="100")
    p.add_argument("--seeds", default="0")
    p.add_argument("--solvers", default="alm,apg,admm,dykstra")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--sigma0", type=float, default=None)
    p.add_argument("--sigma-growth", type=float, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv", "text"),
                   default="json")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a generated instance")
    p.add_argument("--family", choices=sorted(FAMILIES), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("degeneracy", help="degeneracy verdict for a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rank-tol", type=float, default=RANK_TOL)
    p.add_argument("--support-tol", type=float, default=SUPPORT_TOL)
    p.add_argument("--budget", type=int, default=MEMORY_BUDGET)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_degeneracy)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
