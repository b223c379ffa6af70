"""Infinite Arnoldi baseline: one orthonormal Krylov basis on the companion
operator, Euclidean inner product on stacked Taylor-coefficient blocks.

Used for comparison runs; shares the operator action and the history format
with the two-sided iteration.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import linalg
from .bilanczos import RitzTriplet, action_a, residuals
from .errors import LuckyBreakdown, OutsideRadius

#: factorial rescaling between plain and comp columns overflows past this width
MAX_COLUMNS = 150

LUCKY_TOL = 1e-14


@dataclass
class ArnoldiOptions:
    max_iter: int = 50
    tol: float = 1e-10
    ritz_stride: int = 5
    num_wanted: int = 6
    stability_tol: float = 1e-8


class ArnoldiState:
    """Basis vectors stored as n x k_i block-coefficient matrices (unscaled)."""

    def __init__(self, nep, lu, q1, options=None):
        q1 = np.asarray(q1, dtype=complex)
        self.nep = nep
        self.lu = lu
        self.options = options or ArnoldiOptions()
        self.basis = [q1[:, None] / np.linalg.norm(q1)]
        self.h = np.zeros((1, 0), dtype=complex)

    @property
    def k(self):
        return len(self.basis)


def _stacked_dot(u, v):
    """Euclidean inner product over the shared block support."""
    w = min(u.shape[1], v.shape[1])
    return np.vdot(u[:, :w], v[:, :w])


def _stacked_norm(v):
    return float(np.linalg.norm(v))


def _expand(nep, lu, v):
    """Operator action on an unscaled coefficient matrix via the comp-scaled one."""
    k = v.shape[1]
    if k + 1 > MAX_COLUMNS:
        raise OverflowError(f"basis width {k + 1} exceeds factorial-stable cap {MAX_COLUMNS}")
    fact = np.empty(k)
    fact[0] = 1.0
    for j in range(1, k):
        fact[j] = fact[j - 1] * j
    w_comp = action_a(nep, lu, v * fact)
    inv = np.empty(k + 1)
    inv[0] = 1.0
    for j in range(1, k + 1):
        inv[j] = inv[j - 1] / j
    return w_comp * inv


def iar_step(state):
    """Expand the last basis vector and orthogonalize with two-pass Gram-Schmidt."""
    nep, lu = state.nep, state.lu
    k = state.k
    w = _expand(nep, lu, state.basis[-1])
    hcol = np.zeros(k, dtype=complex)
    for _ in range(2):
        for i, v in enumerate(state.basis):
            c = _stacked_dot(v, w)
            w[:, : v.shape[1]] -= c * v
            hcol[i] += c
    nw = _stacked_norm(w)
    grown = np.zeros((k + 1, k), dtype=complex)
    grown[:k, : k - 1] = state.h
    grown[:k, k - 1] = hcol
    grown[k, k - 1] = nw
    state.h = grown
    if nw < LUCKY_TOL:
        raise LuckyBreakdown(f"invariant subspace found at step {k}")
    state.basis.append(w / nw)
    return state


def extract_ritz(state):
    """Right-only Ritz triplets from the square part of the Hessenberg matrix."""
    k = state.h.shape[1]
    if k == 0:
        return []
    hk = state.h[:k, :k]
    q1 = np.column_stack([v[:, 0] for v in state.basis[:k]])
    triplets = []
    for theta, z, _ in linalg.dense_eig(hk):
        if abs(theta) < 1e-300:
            continue
        lam = 1.0 / theta
        sr = q1 @ z
        nsr = np.linalg.norm(sr)
        if nsr == 0.0:
            continue
        x = sr / nsr
        outside = False
        try:
            rres, _ = residuals(state.nep, lam, x)
        except OutsideRadius:
            rres, outside = np.inf, True
        triplets.append(
            RitzTriplet(theta=complex(theta), lam=complex(lam), x=x, y=None,
                        rres=rres, lres=np.nan, kappa=np.nan, outside_radius=outside)
        )
    triplets.sort(key=lambda tr: abs(tr.lam))
    return triplets


@dataclass
class ArnoldiResult:
    triplets: list
    history: object
    state: ArnoldiState
    invariant_subspace: bool = False


def iar_solve(nep, q1, options=None):
    """Arnoldi outer loop with the same convergence bookkeeping as the
    two-sided solver."""
    from .bilanczos import _StabilityTracker
    from .history import ConvergenceHistory

    opts = options or ArnoldiOptions()
    lu = linalg.lu_factorize(nep.m0())
    state = ArnoldiState(nep, lu, q1, opts)
    history = ConvergenceHistory()
    tracker = _StabilityTracker(opts.tol, opts.stability_tol)
    t_start = time.perf_counter()
    triplets = []
    lucky = False

    for it in range(1, opts.max_iter + 1):
        try:
            iar_step(state)
        except LuckyBreakdown:
            lucky = True
            triplets = extract_ritz(state)
            tracker.update(triplets)
            tracker.update(triplets)
            elapsed = time.perf_counter() - t_start
            history.record(it, elapsed, triplets)
            history.record_timing(it, elapsed, 0.0)
            return ArnoldiResult(triplets, history, state, invariant_subspace=True)
        elapsed = time.perf_counter() - t_start
        history.record_timing(it, elapsed, 0.0)
        if it % opts.ritz_stride == 0 or it == opts.max_iter:
            triplets = extract_ritz(state)
            n_conv = tracker.update(triplets)
            history.record(it, time.perf_counter() - t_start, triplets)
            if n_conv >= opts.num_wanted:
                break

    if not triplets:
        triplets = extract_ritz(state)
        tracker.update(triplets)
        history.record(state.k - 1, time.perf_counter() - t_start, triplets)
    return ArnoldiResult(triplets, history, state, invariant_subspace=lucky)


def orthonormality_defect(state):
    """Max deviation of the stacked-coefficient Gram matrix from identity."""
    k = state.k
    g = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            g[i, j] = _stacked_dot(state.basis[i], state.basis[j])
    return float(np.max(np.abs(g - np.eye(k))))
