"""Experiment CLI: solve problems, compare the two methods, time the scalar
products, and cross-check against the dense truncation oracle.

Exit codes: 0 success, 1 configuration error, 2 solver breakdown (partial
output still written), 3 I/O error.
"""

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import bilanczos, iar, nep, oracle, svg
from .errors import Breakdown, BranchCut, NepSolverError, ParseError

GUN_SIGMA2 = 108.8774
GUN_LAM0 = 300.0**2
GUN_ALPHA = (300.0**2 - 200.0**2) * 10.0

GUN_DOWNLOAD_NOTE = (
    "gun data files not found: expected A0.mtx .. A3.mtx in the directory given "
    "by --gun-data. The matrices belong to the 'gun' benchmark of the NLEVP "
    "collection; export the four coefficient matrices to Matrix Market format "
    "and point --gun-data at them."
)


@dataclass
class RunConfig:
    problem: str
    method: str = "bilanczos"
    k_max: int = 50
    tol: float = 1e-10
    seed: int = 1
    out_dir: Path = Path("nep-out")
    rebiorthogonalize: bool = False
    dot_mode: str = "split"
    random_start: bool = False
    dep_size: int = 1000
    gun_data: Path = Path("gun-data")

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


#: expansion shift for the quadratic demo; M'(0) = 0 there, which would make
#: the two-sided start inner product vanish identically
QUAD_DEMO_SHIFT = 0.3


def build_problem(config):
    """Returns (problem, lam0): reported eigenvalues are lam0 + mu when the
    builtin is posed in a shifted variable mu."""
    name = config.problem
    if name == "quadratic-demo":
        problem = nep.make_pep(
            [
                sp.diags([-1.0, -4.0]).tocsr(),
                sp.csr_matrix((2, 2)),
                sp.identity(2, format="csr"),
            ]
        )
        return problem.shifted(QUAD_DEMO_SHIFT), QUAD_DEMO_SHIFT
    if name == "dep-random":
        return nep.make_dep_random(n=config.dep_size, seed=config.seed), 0.0
    if name == "gun":
        paths = [config.gun_data / f"A{i}.mtx" for i in range(4)]
        if not all(p.exists() for p in paths):
            raise FileNotFoundError(GUN_DOWNLOAD_NOTE)
        from .linalg import read_matrix_market

        mats = [read_matrix_market(p) for p in paths]
        problem = nep.make_gun(*mats, sigma2=GUN_SIGMA2,
                               ss=nep.ShiftScale(GUN_LAM0, GUN_ALPHA))
        return problem, 0.0  # reported in shifted coordinates
    return nep.load_problem(name), 0.0


def start_vector(config, n):
    if config.random_start:
        rng = np.random.default_rng(config.seed)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        v = np.ones(n, dtype=complex)
    return v / np.linalg.norm(v)


def _solver_options(config):
    return bilanczos.Options(
        max_iter=config.k_max,
        tol=config.tol,
        rebiorthogonalize=config.rebiorthogonalize,
        dot_mode=config.dot_mode,
    )


def _arnoldi_options(config):
    return iar.ArnoldiOptions(max_iter=config.k_max, tol=config.tol)


def write_triplets_csv(path, triplets):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "re_lambda", "im_lambda", "abs_lambda",
                         "rres", "lres", "kappa", "converged"])
        for i, t in enumerate(triplets, start=1):
            writer.writerow([i, repr(t.lam.real), repr(t.lam.imag),
                             repr(abs(t.lam)), repr(t.rres), repr(t.lres),
                             repr(t.kappa), int(t.converged)])


def write_convergence_svg(path, labelled_histories):
    by_iter = svg.Plot(title="residual vs iteration", xlabel="iteration",
                       ylabel="relative residual")
    by_time = svg.Plot(title="residual vs wall time", xlabel="seconds",
                       ylabel="relative residual")
    for label, history in labelled_histories:
        for idx in range(3):
            rows = [r for r in history.rows if r.ritz_index == idx]
            if not rows:
                continue
            tag = f"{label} #{idx + 1}" if len(labelled_histories) > 1 or idx else label
            by_iter.add_series(tag, [r.iteration for r in rows], [r.rres for r in rows])
            by_time.add_series(tag, [r.wall_seconds for r in rows], [r.rres for r in rows])
    svg.write_svg(path, [by_iter, by_time])


def _run_method(config, problem, method):
    q1 = start_vector(config, problem.n)
    if method == "bilanczos":
        result = bilanczos.solve(problem, q1, q1.copy(), _solver_options(config))
        return result.triplets, result.history
    result = iar.iar_solve(problem, q1, _arnoldi_options(config))
    return result.triplets, result.history


def _apply_shift(triplets, lam0):
    if lam0:
        for t in triplets:
            t.lam = lam0 + t.lam
    return triplets


def cmd_solve(config):
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    problem, lam0 = build_problem(config)
    methods = ["bilanczos", "iar"] if config.method == "both" else [config.method]
    exit_code = 0
    histories = []
    for method in methods:
        suffix = f"-{method}" if len(methods) > 1 else ""
        try:
            triplets, history = _run_method(config, problem, method)
        except Breakdown as exc:
            triplets = exc.triplets or []
            history = exc.history
            exit_code = 2
            print(f"{method}: {exc}", file=sys.stderr)
        _apply_shift(triplets, lam0)
        write_triplets_csv(out / f"triplets{suffix}.csv", triplets)
        if history is not None:
            history.write_csv(out / f"history{suffix}.csv")
            histories.append((method, history))
        for i, t in enumerate(triplets, start=1):
            mark = "*" if t.converged else " "
            print(f"{mark} lambda_{i} = {t.lam:.10g}  rres = {t.rres:.3e}  "
                  f"kappa = {t.kappa:.3e}")
    if histories:
        write_convergence_svg(out / "convergence.svg", histories)
    return exit_code


def cmd_compare(config):
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    problem, lam0 = build_problem(config)
    exit_code = 0
    histories = []
    for method in ("bilanczos", "iar"):
        try:
            triplets, history = _run_method(config, problem, method)
        except Breakdown as exc:
            triplets, history = exc.triplets or [], exc.history
            exit_code = 2
            print(f"{method}: {exc}", file=sys.stderr)
        _apply_shift(triplets, lam0)
        write_triplets_csv(out / f"triplets-{method}.csv", triplets)
        if history is not None:
            histories.append((method, history))
    with open(out / "history-compare.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "iteration", "wall_seconds", "ritz_index",
                         "re_lambda", "im_lambda", "rres", "lres", "kappa"])
        for method, history in histories:
            for r in history.rows:
                writer.writerow([method, r.iteration, f"{r.wall_seconds:.6f}",
                                 r.ritz_index, repr(r.re_lambda), repr(r.im_lambda),
                                 repr(r.rres), repr(r.lres), repr(r.kappa)])
    write_convergence_svg(out / "convergence-compare.svg", histories)
    return exit_code


TIMING_CHECKPOINTS = (10, 20, 30, 40, 50, 60)


def cmd_timing(config):
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    problem, _ = build_problem(config)
    q1 = start_vector(config, problem.n)
    rows = {}
    for mode in ("naive", "split"):
        opts = _solver_options(config)
        opts.dot_mode = mode
        opts.num_wanted = 10**9  # run the full k_max iterations
        result = bilanczos.solve(problem, q1, q1.copy(), opts)
        for tr in result.history.timing:
            if tr.iteration in TIMING_CHECKPOINTS and tr.iteration <= config.k_max:
                rows.setdefault(tr.iteration, {})[mode] = (
                    tr.scalar_product_seconds, tr.total_seconds)
    header = ["k", "naive_scal_prod_seconds", "naive_total_seconds",
              "split_scal_prod_seconds", "split_total_seconds"]
    with open(out / "timing.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in sorted(rows):
            n_sp, n_tot = rows[k].get("naive", (float("nan"),) * 2)
            s_sp, s_tot = rows[k].get("split", (float("nan"),) * 2)
            writer.writerow([k, f"{n_sp:.6f}", f"{n_tot:.6f}",
                             f"{s_sp:.6f}", f"{s_tot:.6f}"])
    print(f"{'k':>4} {'naive scal.':>12} {'naive total':>12} "
          f"{'split scal.':>12} {'split total':>12}")
    for k in sorted(rows):
        n_sp, n_tot = rows[k].get("naive", (float("nan"),) * 2)
        s_sp, s_tot = rows[k].get("split", (float("nan"),) * 2)
        print(f"{k:>4} {n_sp:>12.4f} {n_tot:>12.4f} {s_sp:>12.4f} {s_tot:>12.4f}")
    return 0


def oracle_deviation(problem, q1, qt1, steps):
    """Max relative deviation of the recurrence coefficients from the dense
    truncation oracle over the given number of steps."""
    block_count = 2 * steps + 4
    tc = oracle.build_truncation(problem, block_count)
    lu = bilanczos.linalg.lu_factorize(problem.m0())
    x0 = oracle.expand_right(q1[:, None], block_count)
    y0 = oracle.expand_left(lu.solve(qt1, mode="conj_transpose")[:, None],
                            problem, block_count)
    oa, ob, og, _, _ = oracle.two_sided_lanczos(tc.matrix, x0, y0, steps)

    right1, left1 = bilanczos.normalize_start(problem, lu, q1, qt1)
    state = bilanczos.LanczosState(problem, lu, right1, left1)
    for _ in range(steps):
        bilanczos.bilanczos_step(state)
    dev = 0.0
    for mine, ref in ((state.alpha, oa), (state.beta, ob), (state.gamma, og)):
        mine = np.asarray(mine)
        scale = np.maximum(np.abs(ref), 1e-8 * np.max(np.abs(ref)))
        dev = max(dev, float(np.max(np.abs(mine - ref) / scale)))
    return dev


def cmd_oracle_check(config):
    problem, _ = build_problem(config)
    steps = min(config.k_max, 10)
    if (2 * steps + 4) * problem.n > oracle.TRUNCATION_CAP:
        print("problem too large for the dense oracle "
              f"(need (2k+4)*n <= {oracle.TRUNCATION_CAP})", file=sys.stderr)
        return 1
    q1 = start_vector(config, problem.n)
    dev = oracle_deviation(problem, q1, q1.copy(), steps)
    print(f"max relative deviation over {steps} steps: {dev:.3e}")
    if dev <= 1e-9:
        print("oracle check passed")
        return 0
    print("oracle check FAILED (threshold 1e-9)")
    return 1


def make_parser():
    parser = argparse.ArgumentParser(
        prog="nep",
        description="Nonlinear eigenvalue solver experiments "
                    "(two-sided Lanczos on the companion operator).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "compare", "timing", "oracle-check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True,
                       help="builtin problem name (quadratic-demo, dep-random, gun) "
                            "or path to a problem JSON file")
        p.add_argument("--out", type=Path, default=Path("nep-out"))
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--k", type=int, default=50, help="maximum iterations")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--method", choices=["bilanczos", "iar", "both"],
                       default="bilanczos")
        p.add_argument("--rebiorthogonalize", action="store_true")
        p.add_argument("--dot", choices=["naive", "split"], default="split")
        p.add_argument("--random-start", action="store_true")
        p.add_argument("--n", type=int, default=1000,
                       help="dimension of the dep-random builtin")
        p.add_argument("--gun-data", type=Path, default=Path("gun-data"))
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        config = RunConfig(
            problem=args.config,
            method=args.method,
            k_max=args.k,
            tol=args.tol,
            seed=args.seed,
            out_dir=args.out,
            rebiorthogonalize=args.rebiorthogonalize,
            dot_mode=args.dot,
            random_start=args.random_start,
            dep_size=args.n,
            gun_data=args.gun_data,
        )
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    handlers = {
        "solve": cmd_solve,
        "compare": cmd_compare,
        "timing": cmd_timing,
        "oracle-check": cmd_oracle_check,
    }
    try:
        return handlers[args.command](config)
    except (ParseError, BranchCut, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except NepSolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
