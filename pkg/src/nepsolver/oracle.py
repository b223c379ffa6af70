"""Ground-truth machinery for verifying the implicit iteration.

Builds explicit dense truncations of the companion operator, runs the
textbook two-sided Lanczos on arbitrary dense matrices, and expands
coefficient representations into literal stacked block vectors so the two
can be compared entrywise.
"""

import numpy as np

from . import linalg
from .errors import Breakdown, DimensionMismatch

#: keep dense truncations desk-sized
TRUNCATION_CAP = 2000


class TruncatedCompanion:
    """Dense (N n) x (N n) leading section of the companion operator."""

    def __init__(self, matrix, block_count, base_dim):
        self.matrix = matrix
        self.block_count = block_count
        self.base_dim = base_dim


def build_truncation(nep, block_count):
    """Assemble the explicit truncation: first block row holds the solver-mapped
    derivative blocks, the subdiagonal carries 1/j identities."""
    n = nep.n
    if block_count < 1:
        raise DimensionMismatch("need at least one block")
    if block_count * n > TRUNCATION_CAP:
        raise DimensionMismatch(
            f"truncation dimension {block_count * n} exceeds cap {TRUNCATION_CAP}"
        )
    lu = linalg.lu_factorize(nep.m0())
    table = nep.taylor_table(block_count)
    eye = np.eye(n)
    a = np.zeros((block_count * n, block_count * n), dtype=complex)
    fact = 1.0  # (j-1)! updated incrementally
    for j in range(1, block_count + 1):
        if j > 1:
            fact *= j - 1
        # M^(j)(0)/j = sum_k M_k c_{k,j} (j-1)!
        w = np.zeros((n, n), dtype=complex)
        for k, (mat, _) in enumerate(nep.terms):
            c = table[k, j] * fact
            if c != 0:
                w += c * mat.toarray()
        nj = -lu.solve(w)
        a[:n, (j - 1) * n : j * n] = nj
        if j < block_count:
            a[j * n : (j + 1) * n, (j - 1) * n : j * n] = eye / j
    return TruncatedCompanion(a, block_count, n)


def expand_right(a_comp, block_count=None):
    """Stacked block expansion of a right coefficient matrix (comp scaling undone)."""
    a_comp = np.atleast_2d(np.asarray(a_comp, dtype=complex))
    n, k = a_comp.shape
    block_count = block_count or k
    if block_count < k:
        raise DimensionMismatch("truncation shorter than the vector's support")
    out = np.zeros(block_count * n, dtype=complex)
    inv_fact = 1.0  # 1/(j-1)! updated incrementally
    for j in range(1, k + 1):
        if j > 1:
            inv_fact /= j - 1
        out[(j - 1) * n : j * n] = a_comp[:, j - 1] * inv_fact
    return out


def expand_left(at_comp, nep, block_count):
    """Stacked block expansion of a left coefficient matrix, truncated.

    Block b of the represented vector is
    -(b-1)! sum_j sum_k M_k* conj(c_{k, b+j-1}) at_comp[:, j-1],
    a closed form that needs no linear solves.
    """
    at_comp = np.atleast_2d(np.asarray(at_comp, dtype=complex))
    n, ka = at_comp.shape
    table = nep.taylor_table(block_count + ka - 1)
    out = np.zeros(block_count * n, dtype=complex)
    fact = 1.0  # (b-1)! updated incrementally
    for b in range(1, block_count + 1):
        if b > 1:
            fact *= b - 1
        acc = np.zeros(n, dtype=complex)
        for k, (mat, _) in enumerate(nep.terms):
            coeffs = np.conj(table[k, b : b + ka])
            acc += mat.conj().T @ (at_comp @ coeffs)
        out[(b - 1) * n : b * n] = -fact * acc
    return out


def two_sided_lanczos(a, q1, qt1, steps, breakdown_tol=1e-14):
    """Textbook two-sided Lanczos on a dense matrix.

    Start vectors are rescaled so qt1* q1 = 1 with the same split convention
    the implicit iteration uses.  Returns (alpha, beta, gamma, Q, Qt) where
    beta/gamma hold the k off-diagonal couplings produced at steps 1..k.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if steps >= n:
        raise DimensionMismatch(f"{steps} steps need dimension > {steps}")
    q1 = np.asarray(q1, dtype=complex).copy()
    qt1 = np.asarray(qt1, dtype=complex).copy()
    d = np.vdot(qt1, q1)
    if abs(d) < breakdown_tol * np.linalg.norm(q1) * np.linalg.norm(qt1):
        raise Breakdown("start vectors are (near-)biorthogonal")
    sigma = np.sqrt(abs(d))
    q1 = q1 / sigma
    qt1 = qt1 * np.conj(sigma / d)

    qs = [q1]
    qts = [qt1]
    alpha, beta, gamma = [], [], []
    for j in range(steps):
        r = a @ qs[-1]
        s = a.conj().T @ qts[-1]
        if j >= 1:
            r -= gamma[-1] * qs[-2]
            s -= np.conj(beta[-1]) * qts[-2]
        aj = np.vdot(qts[-1], r)
        r -= aj * qs[-1]
        s -= np.conj(aj) * qts[-1]
        omega = np.vdot(r, s)
        alpha.append(aj)
        if abs(omega) < breakdown_tol * np.linalg.norm(r) * np.linalg.norm(s):
            raise Breakdown(f"serious breakdown at step {j + 1}")
        bj = np.sqrt(abs(omega))
        gj = np.conj(omega) / bj
        beta.append(bj)
        gamma.append(gj)
        qs.append(r / bj)
        qts.append(s / np.conj(gj))
    return (
        np.array(alpha),
        np.array(beta),
        np.array(gamma),
        np.column_stack(qs),
        np.column_stack(qts),
    )


def reference_eigs(nep, block_count, window_radius, dedupe_tol=1e-8):
    """Reciprocal eigenvalues of the dense truncation inside a disk, deduplicated."""
    tc = build_truncation(nep, block_count)
    values = np.linalg.eigvals(tc.matrix)
    lams = [1.0 / t for t in values if abs(t) > 1e-10]
    lams = [l for l in lams if abs(l) < window_radius]
    lams.sort(key=abs)
    out = []
    for l in lams:
        if all(abs(l - o) > dedupe_tol * max(abs(o), 1.0) for o in out):
            out.append(l)
    return out
