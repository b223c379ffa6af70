"""Two-sided Lanczos on the companion operator of a split NEP.

The iteration never forms the operator: Krylov vectors are held as n x k
coefficient matrices.  Right vectors store column l as (l-1)! a_l; left
vectors store column j as M(0)^-* applied to the underlying block
coefficient.  With these scalings one iteration costs two sparse solves and
two scalar products, and no factorial ever appears explicitly.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import Breakdown, DegenerateDerivative, InvariantViolation, OutsideRadius

#: dot products fall back to the term-by-term formula for many-term problems
SPLIT_P_LIMIT = 16


def action_a(nep, lu, a_comp):
    """Apply the companion operator to a right coefficient matrix (k -> k+1 columns)."""
    a_comp = np.atleast_2d(np.asarray(a_comp, dtype=complex))
    n, k = a_comp.shape
    out = np.empty((n, k + 1), dtype=complex)
    out[:, 1:] = a_comp
    out[:, 0] = -lu.solve(nep.lincomb_taylor(a_comp))
    return out


def action_a_star(nep, lu, at_comp):
    """Apply the conjugate-transposed companion operator to a left coefficient matrix."""
    at_comp = np.atleast_2d(np.asarray(at_comp, dtype=complex))
    n, k = at_comp.shape
    out = np.empty((n, k + 1), dtype=complex)
    out[:, 1:] = at_comp
    out[:, 0] = -lu.solve(nep.lincomb_taylor_star(at_comp), mode="conj_transpose")
    return out


def dot_naive(at_comp, b_comp, nep):
    """Inner product of a left and a right coefficient matrix, column by column.

    One derivative linear combination per left column, each over a block that
    grows with the column index; no linear solves.
    """
    at_comp = np.atleast_2d(np.asarray(at_comp, dtype=complex))
    b_comp = np.atleast_2d(np.asarray(b_comp, dtype=complex))
    ka, kb = at_comp.shape[1], b_comp.shape[1]
    val = 0j
    for j in range(1, ka + 1):
        block = np.zeros((nep.n, j - 1 + kb), dtype=complex)
        block[:, j - 1 :] = b_comp
        val += np.vdot(at_comp[:, j - 1], nep.lincomb_taylor(block))
    return -val


def dot_split(at_comp, b_comp, nep):
    """Same value as dot_naive via precomputed per-term Gram matrices."""
    at_comp = np.atleast_2d(np.asarray(at_comp, dtype=complex))
    b_comp = np.atleast_2d(np.asarray(b_comp, dtype=complex))
    n = nep.n
    ka, kb = at_comp.shape[1], b_comp.shape[1]
    table = nep.taylor_table(ka + kb - 1)
    orders = np.arange(1, ka + 1)[:, None] + np.arange(kb)[None, :]
    prods = (nep.stacked_matrix() @ b_comp).reshape(nep.p, n, kb)
    grams = np.matmul(at_comp.conj().T[None, :, :], prods)
    return -np.sum(grams * table[:, orders])


@dataclass
class Options:
    max_iter: int = 50
    tol: float = 1e-10
    breakdown_tol: float = 1e-14
    rebiorthogonalize: bool = False
    dot_mode: str = "split"  # "split" | "naive"
    ritz_stride: int = 5
    num_wanted: int = 6
    #: relative eigenvalue change below this over two tests counts as stable
    stability_tol: float = 1e-8


@dataclass
class RitzTriplet:
    theta: complex
    lam: complex
    x: np.ndarray
    y: np.ndarray
    rres: float
    lres: float
    kappa: float
    converged: bool = False
    outside_radius: bool = False


class LanczosState:
    """Bases, recurrence coefficients, and bookkeeping for one run."""

    def __init__(self, nep, lu, right1, left1, options=None):
        self.nep = nep
        self.lu = lu
        self.options = options or Options()
        self.rights = [np.atleast_2d(np.asarray(right1, dtype=complex))]
        self.lefts = [np.atleast_2d(np.asarray(left1, dtype=complex))]
        self.alpha = []
        self.beta = []   # beta_{j+1} produced at step j
        self.gamma = []  # gamma_{j+1} produced at step j
        self.k = 1
        self.dot_seconds = 0.0

    def dot(self, at_comp, b_comp):
        use_split = self.options.dot_mode == "split" and self.nep.p <= SPLIT_P_LIMIT
        fn = dot_split if use_split else dot_naive
        t0 = time.perf_counter()
        val = fn(at_comp, b_comp, self.nep)
        self.dot_seconds += time.perf_counter() - t0
        return val

    def t_matrix(self):
        """Tridiagonal projection after k-1 completed steps (k x k requires k steps)."""
        k = len(self.alpha)
        t = np.zeros((k, k), dtype=complex)
        for i in range(k):
            t[i, i] = self.alpha[i]
        for i in range(k - 1):
            t[i + 1, i] = self.beta[i]
            t[i, i + 1] = self.gamma[i]
        return t

    def first_columns(self):
        """n x k matrices of the leading blocks of both bases (all that Ritz
        extraction needs)."""
        k = len(self.alpha)
        q1 = np.column_stack([self.rights[i][:, 0] for i in range(k)])
        qt1 = np.column_stack([self.lefts[i][:, 0] for i in range(k)])
        return q1, qt1


def normalize_start(nep, lu, q1, qt1, breakdown_tol=1e-14):
    """Single-column bases scaled so their companion-space inner product is 1."""
    q1 = np.asarray(q1, dtype=complex)
    qt1 = np.asarray(qt1, dtype=complex)
    right = q1[:, None].copy()
    left = lu.solve(qt1, mode="conj_transpose")[:, None]
    d = dot_naive(left, right, nep)
    if abs(d) < breakdown_tol * np.linalg.norm(q1) * np.linalg.norm(qt1):
        raise Breakdown("start vectors are (near-)orthogonal in the companion inner product")
    sigma = np.sqrt(abs(d))
    right /= sigma
    left *= np.conj(sigma / d)
    return right, left


def bilanczos_step(state):
    """Advance the recurrence by one step, growing both bases by one vector."""
    k = state.k
    opts = state.options
    pk, ptk = state.rights[-1], state.lefts[-1]

    r = action_a(state.nep, state.lu, pk)
    rt = action_a_star(state.nep, state.lu, ptk)
    if k >= 2:
        r[:, : k - 1] -= state.gamma[k - 2] * state.rights[-2]
        rt[:, : k - 1] -= np.conj(state.beta[k - 2]) * state.lefts[-2]

    alpha_k = state.dot(ptk, r)
    r[:, :k] -= alpha_k * pk
    rt[:, :k] -= np.conj(alpha_k) * ptk

    omega_k = np.conj(state.dot(rt, r))
    scale = np.linalg.norm(r) * np.linalg.norm(rt)
    if abs(omega_k) < opts.breakdown_tol * scale or scale == 0.0:
        state.alpha.append(alpha_k)
        raise Breakdown(f"serious breakdown at step {k}: |omega| = {abs(omega_k):.3g}",
                        state=state)

    beta_next = np.sqrt(abs(omega_k))
    gamma_next = np.conj(omega_k) / beta_next
    p_next = r / beta_next
    pt_next = rt / np.conj(gamma_next)
    if not (np.all(np.isfinite(p_next)) and np.all(np.isfinite(pt_next))):
        raise InvariantViolation(f"non-finite basis entries at step {k}")

    state.alpha.append(alpha_k)
    state.beta.append(beta_next)
    state.gamma.append(gamma_next)
    state.rights.append(p_next)
    state.lefts.append(pt_next)
    state.k = k + 1

    if opts.rebiorthogonalize:
        _rebiorthogonalize(state)
    return state


def _rebiorthogonalize(state):
    """One two-sided pass of the newest pair against all stored vectors."""
    pn, ptn = state.rights[-1], state.lefts[-1]
    for i in range(len(state.rights) - 1):
        pi, pti = state.rights[i], state.lefts[i]
        w = pi.shape[1]
        g = state.dot(pti, pn)
        pn[:, :w] -= g * pi
        h = state.dot(ptn, pi)
        ptn[:, :w] -= np.conj(h) * pti


def residuals(nep, lam, x, y=None):
    """Relative residuals of an approximate eigentriplet.

    Scaled by sum_k |f_k(lambda)| ||M_k||_F; lres is None when y is absent.
    """
    m = nep.eval_m(lam)
    denom = sum(
        abs(f.eval(lam)) * nrm for (_, f), nrm in zip(nep.terms, nep.fro_norms())
    )
    if denom == 0.0:
        denom = 1.0
    rres = float(np.linalg.norm(m @ x) / (denom * np.linalg.norm(x)))
    if y is None:
        return rres, None
    lres = float(np.linalg.norm(m.conj().T @ y) / (denom * np.linalg.norm(y)))
    return rres, lres


def condition_number(nep, lam, x, y):
    """Eigenvalue condition estimate alpha ||x|| ||y|| / (|lambda| |y* M'(lambda) x|)."""
    if lam == 0:
        raise DegenerateDerivative("condition number undefined at lambda = 0")
    alpha = sum(
        abs(f.eval(lam)) * nrm for (_, f), nrm in zip(nep.terms, nep.two_norms())
    )
    md = nep.eval_m_deriv(lam)
    denom = abs(lam) * abs(np.vdot(y, md @ x))
    if denom < 1e-300:
        raise DegenerateDerivative("y* M'(lambda) x vanished")
    return float(alpha * np.linalg.norm(x) * np.linalg.norm(y) / denom)


def extract_ritz(state, compute_kappa=True):
    """Eigentriplets of the projected tridiagonal matrix lifted to the NEP.

    Right vectors come from the leading blocks of the right basis; the left
    basis is stored with M(0)^-* already applied, so the recovery map is a
    plain combination followed by the theta scaling.
    """
    t = state.t_matrix()
    if t.shape[0] == 0:
        return []
    q1, qt1 = state.first_columns()
    triplets = []
    for theta, z, zt in linalg.dense_eig(t):
        if abs(theta) < 1e-300:
            continue
        lam = 1.0 / theta
        sr = q1 @ z
        if np.linalg.norm(sr) == 0.0:
            continue
        x = sr / np.linalg.norm(sr)
        sl = qt1 @ zt
        y = theta * sl
        ny = np.linalg.norm(y)
        if ny == 0.0:
            continue
        y = y / ny
        outside = False
        try:
            rres, lres = residuals(state.nep, lam, x, y)
        except OutsideRadius:
            rres, lres, outside = np.inf, np.inf, True
        kappa = np.nan
        if compute_kappa and not outside:
            try:
                kappa = condition_number(state.nep, lam, x, y)
            except DegenerateDerivative:
                kappa = np.inf
        triplets.append(
            RitzTriplet(theta=complex(theta), lam=complex(lam), x=x, y=y,
                        rres=rres, lres=lres, kappa=kappa, outside_radius=outside)
        )
    triplets.sort(key=lambda tr: abs(tr.lam))
    return triplets


@dataclass
class SolveResult:
    triplets: list
    history: "object"
    state: LanczosState
    broke_down: bool = False


class _StabilityTracker:
    """Marks Ritz values converged once the residual is small and the value
    has stopped moving between two consecutive tests."""

    def __init__(self, tol, stability_tol):
        self.tol = tol
        self.stability_tol = stability_tol
        self.prev = []

    def update(self, triplets):
        converged = 0
        for t in triplets:
            if t.rres >= self.tol or not np.isfinite(t.rres):
                continue
            for lam_prev in self.prev:
                if abs(t.lam - lam_prev) <= self.stability_tol * max(abs(t.lam), 1e-300):
                    t.converged = True
                    converged += 1
                    break
        self.prev = [t.lam for t in triplets if np.isfinite(t.rres)]
        return converged


def solve(nep, q1, qt1, options=None):
    """Run the iteration until enough Ritz values converge or max_iter is hit.

    Raises Breakdown (with partial triplets and history attached) when the
    recurrence breaks down before the convergence goal is met.
    """
    from .history import ConvergenceHistory

    opts = options or Options()
    lu = linalg.lu_factorize(nep.m0())
    right1, left1 = normalize_start(nep, lu, q1, qt1, opts.breakdown_tol)
    state = LanczosState(nep, lu, right1, left1, opts)
    history = ConvergenceHistory()
    tracker = _StabilityTracker(opts.tol, opts.stability_tol)
    t_start = time.perf_counter()
    triplets = []
    broke_down = False

    for it in range(1, opts.max_iter + 1):
        try:
            bilanczos_step(state)
        except Breakdown as exc:
            broke_down = True
            triplets = extract_ritz(state)
            tracker.update(triplets)
            tracker.update(triplets)  # no further motion possible: basis is exhausted
            elapsed = time.perf_counter() - t_start
            history.record(it, elapsed, triplets)
            history.record_timing(it, elapsed, state.dot_seconds)
            if sum(t.converged for t in triplets) == 0:
                exc.triplets = triplets
                exc.history = history
                raise
            return SolveResult(triplets, history, state, broke_down=True)
        elapsed = time.perf_counter() - t_start
        history.record_timing(it, elapsed, state.dot_seconds)
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
    return SolveResult(triplets, history, state, broke_down=broke_down)


def biorthogonality_gram(state):
    """Gram matrix dot(left_i, right_j); identity up to roundoff drift."""
    k = len(state.alpha)
    g = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            g[i, j] = state.dot(state.lefts[i], state.rights[j])
    return g
