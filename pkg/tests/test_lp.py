from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from cubequot.lp import LPError, simplex, verify_basis


def random_lp(rng, m, n):
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    x0 = rng.integers(0, 3, size=n).astype(float)
    b = A @ x0
    c = rng.integers(0, 5, size=n).astype(float)
    return c, A, b


@pytest.mark.parametrize("seed", range(25))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(2, 7)), int(rng.integers(6, 14))
    c, A, b = random_lp(rng, m, n)
    ours = simplex(c, A, b)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ours.status == "optimal" and ref.status == 0
    assert ours.objective == pytest.approx(ref.fun, abs=1e-8)
    assert np.abs(A @ ours.x - b).max() <= 1e-8 and ours.x.min() >= 0
    cert = verify_basis(c, A, b, ours.basis, ours.rows)
    assert cert.optimal and cert.objective == Fraction(ref.fun).limit_denominator(10**6)


def test_redundant_rows():
    A = np.array([[1.0, 1, 0], [2, 2, 0], [0, 1, 1]])
    b = np.array([2.0, 4, 3])
    c = np.array([1.0, 2, 1])
    res = simplex(c, A, b)
    # cost is constant (5) along the feasible segment
    assert res.status == "optimal" and res.objective == pytest.approx(5.0)
    assert len(res.rows) == 2
    assert verify_basis(c, A, b, res.basis, res.rows).optimal


def test_infeasible_and_unbounded():
    assert simplex([1, 1], [[1, 1]], [-1]).status == "infeasible"
    assert simplex([-1, 0], [[1, -1]], [0]).status == "unbounded"


def test_negative_rhs_and_duals():
    A = np.array([[-1.0, -1, 1]])
    b = np.array([-3.0])
    c = np.array([2.0, 1, 0])
    res = simplex(c, A, b)
    assert res.objective == pytest.approx(3.0)
    # strong duality: b . y equals the optimum
    assert float(b @ res.duals) == pytest.approx(res.objective)


def test_verify_basis_rejects_suboptimal_basis():
    c = [1, 2, 0]
    A = [[1, 1, 1]]
    b = [1]
    assert verify_basis(c, A, b, [0]).optimal is False
    assert verify_basis(c, A, b, [2]).objective == 0


def test_dimension_checks():
    with pytest.raises(ValueError):
        simplex([1, 2], [[1, 2, 3]], [1])


def test_iteration_limit():
    rng = np.random.default_rng(0)
    c, A, b = random_lp(rng, 6, 12)
    with pytest.raises(LPError):
        simplex(-np.abs(c) - 1 + 0 * c, np.vstack([A, np.ones(12)]), np.append(b, 1e6), max_iter=1)
