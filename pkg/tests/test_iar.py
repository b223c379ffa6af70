import numpy as np
import pytest

from nepsolver import iar, linalg
from nepsolver.iar import ArnoldiOptions, ArnoldiState, iar_solve, iar_step, orthonormality_defect


def test_orthonormality(dep_small):
    lu = linalg.lu_factorize(dep_small.m0())
    state = ArnoldiState(dep_small, lu, np.ones(dep_small.n, dtype=complex))
    for _ in range(15):
        iar_step(state)
    assert orthonormality_defect(state) < 1e-10


def test_hessenberg_shape(dep_small):
    lu = linalg.lu_factorize(dep_small.m0())
    state = ArnoldiState(dep_small, lu, np.ones(dep_small.n, dtype=complex))
    for _ in range(6):
        iar_step(state)
    assert state.h.shape == (7, 6)
    # proper Hessenberg: zero strictly below the first subdiagonal
    for i in range(7):
        for j in range(6):
            if i > j + 1:
                assert state.h[i, j] == 0


def test_solve_quadratic_demo(quad_demo):
    res = iar_solve(quad_demo, np.ones(2, dtype=complex),
                    ArnoldiOptions(max_iter=25, ritz_stride=1))
    lams = sorted(t.lam.real + 0.3 for t in res.triplets if t.converged)
    for target in (-2.0, -1.0, 1.0, 2.0):
        assert min(abs(l - target) for l in lams) < 1e-8


def test_solve_dep(dep_small):
    res = iar_solve(dep_small, np.ones(dep_small.n, dtype=complex),
                    ArnoldiOptions(max_iter=40, tol=1e-8))
    converged = [t for t in res.triplets if t.converged]
    assert len(converged) >= 3
    for t in converged:
        assert t.rres < 1e-8


def test_column_cap(quad_demo):
    lu = linalg.lu_factorize(quad_demo.m0())
    state = ArnoldiState(quad_demo, lu, np.ones(2, dtype=complex))
    with pytest.raises((OverflowError, iar.LuckyBreakdown)):
        for _ in range(iar.MAX_COLUMNS + 1):
            iar_step(state)


def test_methods_agree(dep_small):
    from nepsolver.bilanczos import Options, solve

    q = np.ones(dep_small.n, dtype=complex)
    bl = solve(dep_small, q, q.copy(), Options(max_iter=40, tol=1e-8))
    ar = iar_solve(dep_small, q, ArnoldiOptions(max_iter=40, tol=1e-8))
    bl_lams = [t.lam for t in bl.triplets if t.converged]
    ar_lams = [t.lam for t in ar.triplets if t.converged]
    shared = 0
    for l in bl_lams:
        close = [a for a in ar_lams if abs(a - l) < 1e-6 * max(1.0, abs(l))]
        if close:
            shared += 1
            assert min(abs(a - l) for a in close) < 1e-8 * max(1.0, abs(l))
    assert shared >= 2
