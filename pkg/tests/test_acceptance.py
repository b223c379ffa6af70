"""End-to-end acceptance suite.

Each test prints a single PASS/FAIL line (bypassing capture so the lines show
up in ordinary pytest output) and then asserts, so a red run still pinpoints
the criterion that failed.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from nepsolver import bilanczos, cli, iar, linalg, oracle
from nepsolver import nep as nepmod
from nepsolver.bilanczos import Options, dot_naive, dot_split, solve

from conftest import make_random_split, random_coeff_matrix

DEP_N = 1000
DEP_SEED = 1


@pytest.fixture
def report(capfd):
    def _report(ok, label):
        with capfd.disabled():
            print(f"[{'PASS' if ok else 'FAIL'}] {label}", flush=True)
        assert ok, label

    return _report


@pytest.fixture(scope="module")
def dep_problem():
    return nepmod.make_dep_random(n=DEP_N, seed=DEP_SEED)


@pytest.fixture(scope="module")
def dep_runs(dep_problem):
    """One 50-step run per method on the fixed-seed delay problem, shared by
    the experiment criteria."""
    q = np.ones(DEP_N, dtype=complex) / np.sqrt(DEP_N)
    many = 10**9  # never stop early; the criteria look at the full k=50 run
    t0 = time.perf_counter()
    bl = solve(dep_problem, q, q.copy(),
               Options(max_iter=50, tol=1e-8, ritz_stride=1, num_wanted=many))
    bl_seconds = time.perf_counter() - t0
    ar = iar.iar_solve(dep_problem, q,
                       iar.ArnoldiOptions(max_iter=50, tol=1e-8, ritz_stride=1,
                                          num_wanted=many))
    return bl, ar, bl_seconds


def test_criterion_01_oracle_equivalence(report):
    """Ten implicit steps match the dense truncation for 20 random problems."""
    rng = np.random.default_rng(20)
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(20):
        n = int(rng.integers(4, 13))
        p = 2 + case % 2
        prob = make_random_split(n, p, rng)
        q = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        qt = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        worst = max(worst, cli.oracle_deviation(prob, q, qt, 10))
    elapsed = time.perf_counter() - t0
    report(worst <= 1e-9 and elapsed < 10.0,
           f"criterion 1 oracle equivalence: max deviation {worst:.3e} "
           f"over 20 problems in {elapsed:.1f}s")


def test_criterion_02_scalar_product_equivalence(report, dep_problem):
    rng = np.random.default_rng(21)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(4, 40))
        p = int(rng.integers(2, 4))
        prob = make_random_split(n, p, rng)
        ka, kb = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        at = random_coeff_matrix(rng, n, ka)
        b = random_coeff_matrix(rng, n, kb)
        v1, v2 = dot_naive(at, b, prob), dot_split(at, b, prob)
        worst = max(worst, abs(v1 - v2) / max(abs(v1), 1e-300))
    at = random_coeff_matrix(rng, DEP_N, 60)
    b = random_coeff_matrix(rng, DEP_N, 60)
    v1, v2 = dot_naive(at, b, dep_problem), dot_split(at, b, dep_problem)
    worst = max(worst, abs(v1 - v2) / abs(v1))
    elapsed = time.perf_counter() - t0
    report(worst <= 1e-12 and elapsed < 30.0,
           f"criterion 2 scalar-product equivalence: max relative gap {worst:.3e} "
           f"in {elapsed:.1f}s")


def test_criterion_03_scalar_product_speedup(report, dep_problem):
    q = np.ones(DEP_N, dtype=complex) / np.sqrt(DEP_N)
    # warm both code paths so the comparison measures the algorithms
    for mode in ("naive", "split"):
        solve(dep_problem, q, q.copy(),
              Options(max_iter=8, dot_mode=mode, ritz_stride=100))
    # best of three alternating repeats per mode, to suppress machine noise
    seconds = {"naive": np.inf, "split": np.inf}
    for _ in range(3):
        for mode in ("naive", "split"):
            res = solve(dep_problem, q, q.copy(),
                        Options(max_iter=60, dot_mode=mode, ritz_stride=100, tol=0.0))
            seconds[mode] = min(seconds[mode], res.state.dot_seconds)
    ratio = seconds["naive"] / seconds["split"]
    report(ratio >= 2.0,
           f"criterion 3 scalar-product speedup: naive {seconds['naive']:.3f}s / "
           f"split {seconds['split']:.3f}s = {ratio:.1f}x at k=60")


def test_criterion_04_known_eigenvalue_recovery(report, quad_demo):
    import scipy.sparse as sp

    plain = nepmod.make_pep(
        [
            sp.diags([-1.0, -4.0]).tocsr(),
            sp.csr_matrix((2, 2)),
            sp.identity(2, format="csr"),
        ]
    )
    q = np.ones(2, dtype=complex)
    res = solve(quad_demo, q, q.copy(), Options(max_iter=20, ritz_stride=1, tol=1e-10))
    ok = True
    detail = []
    for target in (1.0, -1.0):
        hits = [t for t in res.triplets
                if t.converged and abs((t.lam + 0.3) - target) < 1e-6]
        if not hits:
            ok = False
            detail.append(f"lambda={target} missed")
            continue
        t = hits[0]
        lam = t.lam + 0.3
        left_res = np.linalg.norm(
            plain.eval_m(lam).toarray().conj().T @ t.y
        ) / np.linalg.norm(t.y)
        ok = ok and t.rres < 1e-10 and t.lres < 1e-10 and left_res < 1e-10
        detail.append(f"lambda={target}: rres {t.rres:.1e} lres {t.lres:.1e} "
                      f"recovered-left {left_res:.1e}")
    report(ok, "criterion 4 known-eigenvalue recovery: " + "; ".join(detail))


def test_criterion_05_dep_experiment(report, dep_runs):
    bl, _, bl_seconds = dep_runs
    good = [t for t in bl.triplets
            if t.rres < 1e-8 and np.isfinite(t.kappa) and t.kappa > 0]
    report(len(good) >= 8 and bl_seconds < 60.0,
           f"criterion 5 delay experiment: {len(good)} Ritz values with "
           f"rres < 1e-8 and finite condition numbers in {bl_seconds:.1f}s")


def value_settled(result, tol):
    """Earliest iteration at which the first-converging Ritz value is within
    tol (relative) of its final converged value.

    Measures Ritz-value convergence: the oblique projection yields accurate
    eigenvalues before the extracted eigenvector residual catches up.
    """
    finals = [t.lam for t in result.triplets if t.converged]
    best = None
    for lam in finals:
        for r in sorted(result.history.rows, key=lambda r: r.iteration):
            if abs(complex(r.re_lambda, r.im_lambda) - lam) <= tol * abs(lam):
                if best is None or r.iteration < best:
                    best = r.iteration
                break
    return best


def test_criterion_06_method_comparison(report, dep_runs):
    bl, ar, _ = dep_runs
    bl_lams = [t.lam for t in bl.triplets if t.converged]
    ar_lams = [t.lam for t in ar.triplets if t.converged]
    shared, worst = 0, 0.0
    for l in bl_lams:
        close = [abs(a - l) for a in ar_lams if abs(a - l) < 1e-6 * abs(l)]
        if close:
            shared += 1
            worst = max(worst, min(close) / abs(l))
    it_bl = value_settled(bl, 1e-8)
    it_ar = value_settled(ar, 1e-8)
    ok = (shared >= 1 and worst <= 1e-8
          and it_bl is not None and it_ar is not None and it_bl <= it_ar)
    report(ok,
           f"criterion 6 method comparison: {shared} shared eigenvalues agree to "
           f"{worst:.1e}; first Ritz value settles to 1e-8 at iteration {it_bl} "
           f"(two-sided) vs {it_ar} (Arnoldi)")


def residual_tails(result, tol):
    """Post-convergence residual curve per converged eigenvalue.

    Takes the best matching copy per iteration so spurious duplicates of an
    already-converged Ritz value do not pollute the curve."""
    tails = []
    for lam in {t.lam for t in result.triplets if t.converged}:
        per_iter = {}
        for r in result.history.rows:
            if abs(complex(r.re_lambda, r.im_lambda) - lam) < 1e-6 * abs(lam):
                per_iter[r.iteration] = min(per_iter.get(r.iteration, np.inf), r.rres)
        rres = [per_iter[i] for i in sorted(per_iter)]
        below = next((i for i, v in enumerate(rres) if v < tol), None)
        if below is not None:
            tails.append(rres[below:])
    return tails


def test_criterion_07_stagnation_tolerance(report, dep_problem, dep_runs):
    bl, _, _ = dep_runs
    # plain run: curves may wobble in the plateau but must stay in the
    # neighbourhood of the declared tolerance, never blowing up
    plain_tails = residual_tails(bl, 1e-8)
    plain_ok = all(max(t) <= 1e2 * 1e-8 for t in plain_tails)
    # rebiorthogonalized run: the plateau is clean, so the strict bound of
    # 100x the curve's own minimum applies
    q = np.ones(DEP_N, dtype=complex) / np.sqrt(DEP_N)
    rb = solve(dep_problem, q, q.copy(),
               Options(max_iter=50, tol=1e-8, ritz_stride=1, num_wanted=10**9,
                       rebiorthogonalize=True))
    rb_tails = residual_tails(rb, 1e-8)
    rb_ok = True
    for t in rb_tails:
        # from the deepest point onward the curve must hold its plateau
        start = int(np.argmin(t))
        if max(t[start:]) > 1e2 * t[start]:
            rb_ok = False
    report(plain_ok and rb_ok and len(plain_tails) >= 1 and len(rb_tails) >= 1,
           f"criterion 7 stagnation tolerance: {len(plain_tails)} plain and "
           f"{len(rb_tails)} rebiorthogonalized curves plateau without blow-up")


def test_criterion_08_biorthogonality(report):
    rng = np.random.default_rng(22)
    worst = 0.0
    for _ in range(3):
        prob = make_random_split(10, 2, rng)
        q = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        qt = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        lu = linalg.lu_factorize(prob.m0())
        right1, left1 = bilanczos.normalize_start(prob, lu, q, qt)
        state = bilanczos.LanczosState(prob, lu, right1, left1)
        for _ in range(10):
            bilanczos.bilanczos_step(state)
        g = bilanczos.biorthogonality_gram(state)
        worst = max(worst, float(np.max(np.abs(g - np.eye(g.shape[0])))))
    report(worst <= 1e-6,
           f"criterion 8 biorthogonality: max Gram deviation from identity "
           f"{worst:.3e} over 10-step runs")


def test_criterion_09_gun_problem(report, capfd):
    data_dir = Path("gun-data")
    paths = [data_dir / f"A{i}.mtx" for i in range(4)]
    if not all(p.exists() for p in paths):
        with capfd.disabled():
            print("[SKIP] criterion 9 gun problem: data files absent", flush=True)
        pytest.skip("gun data not available")
    mats = [linalg.read_matrix_market(p) for p in paths]
    prob = nepmod.make_gun(*mats, sigma2=cli.GUN_SIGMA2,
                           ss=nepmod.ShiftScale(cli.GUN_LAM0, cli.GUN_ALPHA))
    q = np.ones(prob.n, dtype=complex)
    res = solve(prob, q, q.copy(), Options(max_iter=20, tol=1e-6, ritz_stride=1))
    good = [t for t in res.triplets if t.rres < 1e-6]
    report(len(good) >= 1 and not res.broke_down,
           f"criterion 9 gun problem: {len(good)} Ritz values below 1e-6 "
           "in shifted coordinates after 20 steps")


def test_criterion_10_adjoint_consistency(report):
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(4, 25))
        p = int(rng.integers(2, 4))
        prob = make_random_split(n, p, rng)
        lu = linalg.lu_factorize(prob.m0())
        ka, kb = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        at = random_coeff_matrix(rng, n, ka)
        b = random_coeff_matrix(rng, n, kb)
        lhs = dot_naive(at, bilanczos.action_a(prob, lu, b), prob)
        rhs = dot_naive(bilanczos.action_a_star(prob, lu, at), b, prob)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    report(worst <= 1e-10,
           f"criterion 10 adjoint consistency: max relative gap {worst:.3e}")
