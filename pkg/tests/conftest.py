"""Shared fixtures: small random split problems and the diagonal quadratic demo."""

import numpy as np
import pytest
import scipy.sparse as sp

from nepsolver import nep as nepmod


def make_random_split(n, p, rng, density=0.5):
    """Random split NEP mixing polynomial and exponential terms.

    The constant part is kept diagonally dominant so M(0) is comfortably
    invertible and the ten-step recurrences stay well conditioned.
    """
    terms = []
    for k in range(p):
        a = rng.standard_normal((n, n))
        a[rng.random((n, n)) > density] = 0.0
        if k == 0:
            a = a + n * np.eye(n)
            fam = nepmod.PolyFamily([1.0, 0.4, -0.15])
        elif k % 2 == 1:
            fam = nepmod.ExpFamily(0.8, -1.5)
        else:
            fam = nepmod.PolyFamily([0.0, 1.0, 0.0, 0.05])
        terms.append((sp.csr_matrix(a), fam))
    return nepmod.SplitNep(terms)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_nep(rng):
    return make_random_split(8, 3, rng)


@pytest.fixture
def dep_small():
    return nepmod.make_dep_random(n=60, seed=1, density=0.1)


@pytest.fixture
def quad_demo():
    """diag(lam^2-1, lam^2-4) posed in the variable lam - 0.3.

    The shift avoids the structurally zero start inner product caused by
    M'(0) = 0; true eigenvalues of the shifted problem are
    {0.7, -1.3, 1.7, -2.3}.
    """
    prob = nepmod.make_pep(
        [
            sp.diags([-1.0, -4.0]).tocsr(),
            sp.csr_matrix((2, 2)),
            sp.identity(2, format="csr"),
        ]
    )
    return prob.shifted(0.3)


def random_coeff_matrix(rng, n, k):
    return rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
