"""Nonlinear eigenvalue problems in split form M(lambda) = sum_k M_k f_k(lambda).

Each term pairs a sparse matrix with an analytic scalar family exposing
Taylor coefficients c_j = f^(j)(0)/j!.  The coefficients are stored in the
divided-by-factorial form throughout, which is what every downstream formula
consumes and which avoids factorial overflow.
"""

import cmath
import json
import math
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import linalg
from .errors import BranchCut, DimensionMismatch, OutsideRadius, ParseError

_REAL_AXIS_TOL = 1e-12


class ScalarFamily:
    """Analytic scalar function with Taylor machinery around 0.

    Subclasses provide ``eval``, ``deriv``, ``_extend_taylor`` and ``shifted``.
    ``taylor(j)`` returns c_j = f^(j)(0)/j!; ``radius`` is the convergence
    radius of the series (math.inf when entire).
    """

    radius = math.inf

    def __init__(self):
        self._taylor_cache = []

    def eval(self, lam):
        raise NotImplementedError

    def deriv(self, lam):
        raise NotImplementedError

    def shifted(self, lam0, alpha):
        """Family g(mu) = f(lam0 + alpha*mu)."""
        raise NotImplementedError

    def _extend_taylor(self, upto):
        raise NotImplementedError

    def taylor(self, j):
        """Divided Taylor coefficient c_j = f^(j)(0)/j!."""
        if j >= len(self._taylor_cache):
            self._extend_taylor(j)
        return self._taylor_cache[j]

    def taylor_upto(self, jmax):
        """Array [c_0, c_1, ..., c_jmax]."""
        if jmax >= len(self._taylor_cache):
            self._extend_taylor(jmax)
        return np.array(self._taylor_cache[: jmax + 1], dtype=complex)

    def check_radius(self, lam):
        if abs(lam) >= self.radius:
            raise OutsideRadius(
                f"|lambda| = {abs(lam):.3g} outside convergence radius {self.radius:.3g}"
            )


class PolyFamily(ScalarFamily):
    """Polynomial sum_j coeffs[j] * lambda^j."""

    def __init__(self, coeffs):
        super().__init__()
        self.coeffs = [complex(c) for c in coeffs] or [0j]

    def eval(self, lam):
        out = 0j
        for c in reversed(self.coeffs):
            out = out * lam + c
        return out

    def deriv(self, lam):
        out = 0j
        for j in range(len(self.coeffs) - 1, 0, -1):
            out = out * lam + j * self.coeffs[j]
        return out

    def shifted(self, lam0, alpha):
        p = np.polynomial.Polynomial(self.coeffs)
        q = p(np.polynomial.Polynomial([lam0, alpha]))
        return PolyFamily(list(np.atleast_1d(q.coef)))

    def _extend_taylor(self, upto):
        for j in range(len(self._taylor_cache), upto + 1):
            self._taylor_cache.append(self.coeffs[j] if j < len(self.coeffs) else 0j)


class ExpFamily(ScalarFamily):
    """a * exp(b * lambda)."""

    def __init__(self, a, b):
        super().__init__()
        self.a = complex(a)
        self.b = complex(b)

    def eval(self, lam):
        return self.a * cmath.exp(self.b * lam)

    def deriv(self, lam):
        return self.a * self.b * cmath.exp(self.b * lam)

    def shifted(self, lam0, alpha):
        return ExpFamily(self.a * cmath.exp(self.b * lam0), self.b * alpha)

    def _extend_taylor(self, upto):
        cache = self._taylor_cache
        if not cache:
            cache.append(self.a)
        # c_j = c_{j-1} * b / j
        for j in range(len(cache), upto + 1):
            cache.append(cache[j - 1] * self.b / j)


class SqrtFamily(ScalarFamily):
    """a * sqrt(c + b*lambda), principal branch; radius |c/b|."""

    def __init__(self, a, b, c):
        super().__init__()
        self.a = complex(a)
        self.b = complex(b)
        self.c = complex(c)
        self.radius = math.inf if self.b == 0 else abs(self.c) / abs(self.b)

    def eval(self, lam):
        return self.a * cmath.sqrt(self.c + self.b * lam)

    def deriv(self, lam):
        return self.a * self.b / (2.0 * cmath.sqrt(self.c + self.b * lam))

    def shifted(self, lam0, alpha):
        return SqrtFamily(self.a, self.b * alpha, self.c + self.b * lam0)

    def branch_point_at_origin(self):
        """True when c sits on the nonpositive real axis (branch cut at 0)."""
        scale = max(abs(self.c), 1.0)
        return abs(self.c.imag) <= _REAL_AXIS_TOL * scale and self.c.real <= 0.0

    def _extend_taylor(self, upto):
        cache = self._taylor_cache
        if not cache:
            cache.append(self.a * cmath.sqrt(self.c))
        # c_j = c_{j-1} * (b/c) * (3/2 - j) / j  from binom(1/2, j) recurrence
        for j in range(len(cache), upto + 1):
            cache.append(cache[j - 1] * (self.b / self.c) * (1.5 - j) / j)


class SplitNep:
    """NEP in split form: ordered terms (M_k, f_k), all M_k square n x n."""

    def __init__(self, terms):
        if not terms:
            raise DimensionMismatch("a split NEP needs at least one term")
        self.terms = []
        n = None
        for matrix, family in terms:
            matrix = sp.csr_matrix(matrix, dtype=complex)
            if matrix.shape[0] != matrix.shape[1]:
                raise DimensionMismatch(f"term matrix is {matrix.shape}, expected square")
            if n is None:
                n = matrix.shape[0]
            elif matrix.shape[0] != n:
                raise DimensionMismatch(
                    f"term matrix is {matrix.shape[0]}x{matrix.shape[0]}, expected {n}x{n}"
                )
            self.terms.append((matrix, family))
        self.n = n
        self.p = len(self.terms)
        self._fro_norms = None
        self._two_norms = None
        self._stacked = None

    def stacked_matrix(self):
        """All term matrices stacked vertically (p n) x n, cached."""
        if self._stacked is None:
            self._stacked = sp.vstack([m for m, _ in self.terms], format="csr")
        return self._stacked

    @property
    def radius(self):
        return min(f.radius for _, f in self.terms)

    def m0(self):
        """M(0) as a sparse matrix."""
        return sum(f.taylor(0) * m for m, f in self.terms)

    def eval_m(self, lam):
        """Assemble M(lambda) sparsely."""
        lam = complex(lam)
        for _, f in self.terms:
            f.check_radius(lam)
        return sum(f.eval(lam) * m for m, f in self.terms)

    def eval_m_deriv(self, lam):
        """Assemble M'(lambda) with analytically evaluated f_k'."""
        lam = complex(lam)
        for _, f in self.terms:
            f.check_radius(lam)
        return sum(f.deriv(lam) * m for m, f in self.terms)

    def taylor_block(self, j):
        """Per-term divided coefficients (c_{1,j}, ..., c_{p,j})."""
        if j < 1:
            raise ValueError("derivative order must be >= 1")
        return tuple(f.taylor(j) for _, f in self.terms)

    def taylor_table(self, jmax):
        """p x (jmax+1) table of divided coefficients, column j = order j."""
        return np.vstack([f.taylor_upto(jmax) for _, f in self.terms])

    def lincomb_taylor(self, z):
        """sum_i sum_k M_k c_{k,i} z_i for columns z_1..z_m (divided weights).

        This is the building block of the companion-operator actions: with
        z_i = a_i^comp it equals sum_i M^(i)(0)/i! a_i^comp.  Evaluated
        term-major so each M_k is applied to a single accumulated vector.
        """
        z = np.asarray(z, dtype=complex)
        if z.ndim == 1:
            z = z[:, None]
        if z.shape[0] != self.n:
            raise DimensionMismatch(f"columns have length {z.shape[0]}, expected {self.n}")
        m = z.shape[1]
        table = self.taylor_table(m)
        out = np.zeros(self.n, dtype=complex)
        for k, (mat, _) in enumerate(self.terms):
            out += mat @ (z @ table[k, 1 : m + 1])
        return out

    def lincomb_taylor_star(self, z):
        """Conjugate-transpose counterpart: sum_i sum_k M_k* conj(c_{k,i}) z_i."""
        z = np.asarray(z, dtype=complex)
        if z.ndim == 1:
            z = z[:, None]
        if z.shape[0] != self.n:
            raise DimensionMismatch(f"columns have length {z.shape[0]}, expected {self.n}")
        m = z.shape[1]
        table = self.taylor_table(m)
        out = np.zeros(self.n, dtype=complex)
        for k, (mat, _) in enumerate(self.terms):
            out += mat.conj().T @ (z @ np.conj(table[k, 1 : m + 1]))
        return out

    def lincomb(self, z):
        """sum_i M^(i)(0) z_i with raw (undivided) derivatives."""
        z = np.asarray(z, dtype=complex)
        if z.ndim == 1:
            z = z[:, None]
        # raw derivative = c_i * i!; fold the factorial into the columns
        # incrementally so no bare factorial of the column count appears
        scaled = np.array(z, copy=True)
        fact = 1.0
        for i in range(1, z.shape[1] + 1):
            fact *= i
            scaled[:, i - 1] *= fact
        return self.lincomb_taylor(scaled)

    def lincomb_star(self, z):
        """sum_i M^(i)(0)* z_i with raw (undivided) derivatives."""
        z = np.asarray(z, dtype=complex)
        if z.ndim == 1:
            z = z[:, None]
        scaled = np.array(z, copy=True)
        fact = 1.0
        for i in range(1, z.shape[1] + 1):
            fact *= i
            scaled[:, i - 1] *= fact
        return self.lincomb_taylor_star(scaled)

    def shifted(self, lam0, alpha=1.0):
        """The same problem in the variable mu with lambda = lam0 + alpha*mu.

        Useful when M'(0) is singular or zero (the two-sided start inner
        product degenerates) or when 0 is an eigenvalue.
        """
        return SplitNep([(m, f.shifted(lam0, alpha)) for m, f in self.terms])

    def fro_norms(self):
        if self._fro_norms is None:
            self._fro_norms = [sp.linalg.norm(m) for m, _ in self.terms]
        return self._fro_norms

    def two_norms(self):
        if self._two_norms is None:
            self._two_norms = [linalg.norm2_estimate(m) for m, _ in self.terms]
        return self._two_norms


class ShiftScale:
    """Affine change of variables lambda = lam0 + alpha * mu."""

    def __init__(self, lam0, alpha):
        if alpha == 0:
            raise ValueError("scale must be nonzero")
        self.lam0 = complex(lam0)
        self.alpha = complex(alpha)


def make_dep(a0, a1):
    """Delay problem M(lambda) = -lambda^2 I + A0 + exp(-lambda) A1."""
    a0 = sp.csr_matrix(a0, dtype=complex)
    a1 = sp.csr_matrix(a1, dtype=complex)
    if a0.shape != a1.shape:
        raise DimensionMismatch(f"A0 is {a0.shape} but A1 is {a1.shape}")
    n = a0.shape[0]
    eye = sp.identity(n, dtype=complex, format="csr")
    return SplitNep(
        [
            (eye, PolyFamily([0, 0, -1])),
            (a0, PolyFamily([1])),
            (a1, ExpFamily(1, -1)),
        ]
    )


def make_dep_random(n=1000, seed=1, density=0.01):
    """Fixed-seed random delay problem (regression baseline)."""
    rng = np.random.default_rng(seed)
    a0 = sp.random(n, n, density=density, random_state=rng, data_rvs=rng.standard_normal)
    a1 = sp.random(n, n, density=density, random_state=rng, data_rvs=rng.standard_normal)
    return make_dep(a0, a1)


def make_gun(a0, a1, a2, a3, sigma2, ss):
    """Cavity problem in the shifted-scaled variable mu, lambda = lam0 + alpha*mu.

    M(lambda) = A0 - lambda A1 + i sqrt(lambda) A2 + i sqrt(lambda - sigma2^2) A3.
    """
    mats = [sp.csr_matrix(a, dtype=complex) for a in (a0, a1, a2, a3)]
    for m in mats[1:]:
        if m.shape != mats[0].shape:
            raise DimensionMismatch("gun matrices must share one square dimension")
    lam0, alpha = ss.lam0, ss.alpha
    families = [
        PolyFamily([1]),
        PolyFamily([-lam0, -alpha]),
        SqrtFamily(1j, alpha, lam0),
        SqrtFamily(1j, alpha, lam0 - sigma2**2),
    ]
    for fam in families:
        if isinstance(fam, SqrtFamily) and fam.branch_point_at_origin():
            raise BranchCut(
                "shift places a square-root branch point at the expansion point; "
                "pick lam0 off (-inf, 0] and (-inf, sigma2^2]"
            )
    return SplitNep(list(zip(mats, families)))


def make_pep(coeffs):
    """Polynomial problem sum_j A_j lambda^j."""
    if not coeffs:
        raise DimensionMismatch("a polynomial NEP needs at least one coefficient matrix")
    terms = []
    for j, a in enumerate(coeffs):
        terms.append((a, PolyFamily([0] * j + [1])))
    return SplitNep(terms)


def _parse_scalar(value, where):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _parse_family(node, where):
    if not isinstance(node, dict) or len(node) != 1:
        raise ParseError(f"{where}: family must be one of poly/exp_scaled/sqrt_shifted")
    kind, body = next(iter(node.items()))
    if kind == "poly":
        if not isinstance(body, list):
            raise ParseError(f"{where}: poly expects a coefficient list")
        return PolyFamily([_parse_scalar(c, where) for c in body])
    if kind == "exp_scaled":
        return ExpFamily(_parse_scalar(body["a"], where), _parse_scalar(body["b"], where))
    if kind == "sqrt_shifted":
        return SqrtFamily(
            _parse_scalar(body["a"], where),
            _parse_scalar(body["b"], where),
            _parse_scalar(body["c"], where),
        )
    raise ParseError(f"{where}: unknown family kind {kind!r}")


def load_problem(path):
    """Load a split NEP from a JSON config.

    Schema::

        {
          "terms": [{"matrix": "<matrix-market path>",
                     "family": {"poly": [...]}
                              | {"exp_scaled": {"a": ..., "b": ...}}
                              | {"sqrt_shifted": {"a": ..., "b": ..., "c": ...}}}],
          "shift": <scalar, optional>,
          "scale": <scalar, optional>
        }

    Matrix paths are resolved relative to the config file; scalars may be
    numbers or [re, im] pairs.  When shift/scale are present every family is
    rewritten in the shifted variable.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        config = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(config, dict) or "terms" not in config:
        raise ParseError(f"{path}: top level must be an object with a 'terms' list")
    shift = _parse_scalar(config["shift"], "shift") if "shift" in config else None
    scale = _parse_scalar(config["scale"], "scale") if "scale" in config else None
    terms = []
    for i, node in enumerate(config["terms"]):
        where = f"{path} terms[{i}]"
        if "matrix" not in node or "family" not in node:
            raise ParseError(f"{where}: needs 'matrix' and 'family'")
        mpath = path.parent / node["matrix"]
        if not mpath.exists():
            raise FileNotFoundError(mpath)
        matrix = linalg.read_matrix_market(mpath)
        family = _parse_family(node["family"], where)
        if shift is not None or scale is not None:
            family = family.shifted(shift or 0j, scale if scale is not None else 1.0)
        terms.append((matrix, family))
    return SplitNep(terms)
