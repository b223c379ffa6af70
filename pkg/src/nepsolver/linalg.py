"""Complex linear-algebra kernel.

Thin layer over scipy: sparse LU with normal and conjugate-transpose solves
reusing one factorization, a small dense nonsymmetric eigensolver returning
left and right eigenvectors, and Matrix Market I/O for complex sparse
matrices.
"""

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch, NoConvergence, SingularMatrix

#: dense_eig refuses matrices larger than this (the projected problems are small)
DENSE_EIG_CAP = 2000

#: pivot magnitudes below this signal a numerically singular matrix
PIVOT_TOL = 1e-300


class LuFactors:
    """Reusable LU factorization of a square complex sparse matrix.

    Supports solves with the matrix itself and with its conjugate transpose,
    both from the single factorization.
    """

    def __init__(self, matrix):
        matrix = sp.csc_matrix(matrix, dtype=complex)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch(f"matrix is {matrix.shape}, expected square")
        try:
            self._lu = spla.splu(matrix)
        except RuntimeError as exc:
            raise SingularMatrix(str(exc)) from exc
        if np.min(np.abs(self._lu.U.diagonal())) < PIVOT_TOL:
            raise SingularMatrix("pivot underflow; is 0 an eigenvalue? apply a shift")
        self.shape = matrix.shape

    @property
    def n(self):
        return self.shape[0]

    def solve(self, b, mode="normal"):
        """Solve M x = b (mode 'normal') or M* x = b (mode 'conj_transpose')."""
        b = np.asarray(b, dtype=complex)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"rhs has length {b.shape[0]}, matrix is {self.n}")
        if mode == "normal":
            return self._lu.solve(b)
        if mode == "conj_transpose":
            return self._lu.solve(b, trans="H")
        raise ValueError(f"unknown solve mode {mode!r}")


def lu_factorize(m):
    return LuFactors(m)


def lu_solve(f, b, mode="normal"):
    return f.solve(b, mode)


def sparse_matvec(m, x, mode="normal"):
    """Product m @ x or m* @ x for sparse (or dense) m."""
    x = np.asarray(x, dtype=complex)
    rows, cols = m.shape
    if mode == "normal":
        if x.shape[0] != cols:
            raise DimensionMismatch(f"vector length {x.shape[0]}, matrix has {cols} columns")
        return m @ x
    if mode == "conj_transpose":
        if x.shape[0] != rows:
            raise DimensionMismatch(f"vector length {x.shape[0]}, matrix has {rows} rows")
        return m.conj().T @ x
    raise ValueError(f"unknown matvec mode {mode!r}")


def dense_eig(a, cap=DENSE_EIG_CAP):
    """Eigen-decomposition of a small dense complex matrix.

    Returns a list of (value, right, left) with unit-norm right vectors and
    left vectors satisfying a* y = conj(value) y, ordered as scipy returns
    them.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is {a.shape}, expected square")
    if a.shape[0] > cap:
        raise DimensionMismatch(f"dimension {a.shape[0]} exceeds dense cap {cap}")
    try:
        values, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NoConvergence(str(exc)) from exc
    out = []
    for i, theta in enumerate(values):
        right = vr[:, i] / np.linalg.norm(vr[:, i])
        left = vl[:, i] / np.linalg.norm(vl[:, i])
        out.append((complex(theta), right, left))
    return out


def norm2_estimate(m, iters=50, tol=1e-6, seed=0):
    """2-norm estimate by power iteration on m* m."""
    n = m.shape[1]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = m.conj().T @ (m @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_est = np.sqrt(nw)
        v = w / nw
        if est > 0 and abs(new_est - est) <= tol * est:
            return float(new_est)
        est = new_est
    return float(est)


def read_matrix_market(path):
    """Read a complex sparse matrix in Matrix Market coordinate format."""
    m = scipy.io.mmread(str(path))
    if not sp.issparse(m):
        m = sp.coo_matrix(m)
    return sp.csr_matrix(m, dtype=complex)


def write_matrix_market(path, m):
    """Write a sparse matrix as 'matrix coordinate complex general'."""
    m = sp.coo_matrix(m, dtype=complex)
    scipy.io.mmwrite(str(path), m, field="complex", symmetry="general")
