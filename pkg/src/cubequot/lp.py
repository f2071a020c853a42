"""Two-phase revised simplex for ``min c.x  s.t.  A x = b, x >= 0``.

The solver works in floating point with an explicit basis inverse.  Its final basis can be re-checked in
exact rational arithmetic by :func:`verify_basis`, which recomputes the
basic solution and the reduced costs with :class:`fractions.Fraction` and
so certifies optimality (or reports that the float basis is not optimal).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
FEAS_TOL = 1e-8
DEGENERATE_SWITCH = 50
REFACTOR_EVERY = 64
PERTURBATION = 1e-7


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray
    objective: float
    basis: np.ndarray  # column index per kept row
    rows: np.ndarray  # indices of the constraint rows kept (redundant rows dropped)
    duals: np.ndarray  # one multiplier per original row
    iterations: int


@dataclass
class ExactCertificate:
    optimal: bool
    objective: Fraction | None
    x: list[Fraction] | None
    reason: str = ""


class _Revised:
    """Revised simplex state: basis, explicit basis inverse and basic values."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: np.ndarray):
        self.A = A
        self.b = b
        self.basis = basis
        self.refactor()

    def refactor(self) -> None:
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.xb = self.Binv @ self.b

    def pivot(self, r: int, j: int, col: np.ndarray) -> None:
        piv = col[r]
        self.Binv[r] /= piv
        self.xb[r] /= piv
        other = col.copy()
        other[r] = 0.0
        nz = np.flatnonzero(other)
        if nz.size:
            self.Binv[nz] -= np.outer(other[nz], self.Binv[r])
            self.xb[nz] -= other[nz] * self.xb[r]
        self.basis[r] = j

    def run(self, c: np.ndarray, allowed: np.ndarray, max_iter: int, it: int) -> tuple[str, int]:
        """Dantzig pricing; a long run of degenerate pivots switches to Bland's rule."""
        degenerate_run = 0
        bland = False
        since_refactor = 0
        while it < max_iter:
            y = c[self.basis] @ self.Binv
            red = c - y @ self.A
            red[~allowed] = np.inf
            red[self.basis] = np.inf
            if bland:
                cand = np.flatnonzero(red < -COST_TOL)
                if cand.size == 0:
                    return "optimal", it
                j = int(cand[0])
            else:
                j = int(np.argmin(red))
                if red[j] >= -COST_TOL:
                    return "optimal", it
            col = self.Binv @ self.A[:, j]
            pos = col > PIVOT_TOL
            if not pos.any():
                return "unbounded", it
            ratios = np.full(col.size, np.inf)
            ratios[pos] = np.maximum(self.xb[pos], 0.0) / col[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
            r = int(ties[np.argmin(self.basis[ties])])
            if best <= 1e-12:
                degenerate_run += 1
                bland = bland or degenerate_run > DEGENERATE_SWITCH
            else:
                degenerate_run = 0
                bland = False
            self.pivot(r, j, col)
            it += 1
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
        raise LPError(f"simplex hit the iteration limit ({max_iter})")


def _crash_basis(A: np.ndarray) -> np.ndarray:
    """Pick a positive unit column for each row where one exists.

    Returns the chosen column per row (-1 where an artificial is needed).
    """
    m, n = A.shape
    nnz = np.count_nonzero(A, axis=0)
    chosen = np.full(m, -1, dtype=np.int64)
    for j in np.flatnonzero(nnz == 1):
        r = int(np.flatnonzero(A[:, j])[0])
        if A[r, j] > 0 and chosen[r] < 0:
            chosen[r] = j
    return chosen


def need_rows(A: np.ndarray) -> np.ndarray:
    """Rows that get an artificial variable, in artificial-column order."""
    return np.flatnonzero(_crash_basis(A) < 0)


def _solve(c, A, b, max_iter, rng_seed, perturb):
    m, n = A.shape
    chosen = _crash_basis(A)
    need = np.flatnonzero(chosen < 0)
    art = np.zeros((m, need.size))
    art[need, np.arange(need.size)] = 1.0
    Aa = np.hstack([A, art])
    basis = chosen.copy()
    basis[need] = n + np.arange(need.size)
    bp = b.copy()
    if perturb > 0:
        rng = np.random.default_rng(rng_seed)
        bp = b + perturb * max(1.0, float(np.abs(b).max())) * rng.uniform(1.0, 2.0, size=m)
    state = _Revised(Aa, bp, basis)

    it = 0
    allowed = np.ones(n + need.size, dtype=bool)
    if need.size:
        c1 = np.zeros(n + need.size)
        c1[n:] = 1.0
        _, it = state.run(c1, allowed, max_iter, it)
        infeas = float(state.xb[state.basis >= n].sum())
        if infeas > FEAS_TOL * max(1.0, float(np.abs(bp).sum())):
            return "infeasible", None, it
        for r in np.flatnonzero(state.basis >= n):
            row = state.Binv[r] @ A
            cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            cand = cand[~np.isin(cand, state.basis)]
            if cand.size:
                j = int(cand[np.argmax(np.abs(row[cand]))])
                state.pivot(int(r), j, state.Binv @ Aa[:, j])
        state.refactor()
        allowed[n:] = False
    c2 = np.concatenate([c, np.zeros(need.size)])
    status, it = state.run(c2, allowed, max_iter, it)
    return status, state, it


def simplex(c: Sequence[float], A: np.ndarray, b: Sequence[float], max_iter: int = 200_000, seed: int = 0) -> LPResult:
    """Solve ``min c.x, A x = b, x >= 0`` with a two-phase revised simplex.

    The right-hand side is first perturbed by a tiny random amount, which
    breaks the ties that make degenerate problems stall; the final basis is
    then re-evaluated on the true right-hand side.  If that basis turns out
    infeasible for the true data the solve is repeated without perturbation.
    """
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    c = np.array(c, dtype=np.float64)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    sign = np.where(b < 0, -1.0, 1.0)
    As = A * sign[:, None]
    bs = b * sign

    for perturb in (PERTURBATION, 0.0):
        status, state, it = _solve(c, As, bs, max_iter, seed, perturb)
        if status == "infeasible" and perturb == 0.0:
            nan = np.full(n, np.nan)
            return LPResult("infeasible", nan, np.nan, np.zeros(0, dtype=np.int64), np.arange(m), np.full(m, np.nan), it)
        if status == "unbounded":
            return LPResult("unbounded", np.full(n, np.nan), -np.inf, state.basis, np.arange(m), np.full(m, np.nan), it)
        if status != "optimal":
            continue
        keep = state.basis < n
        # an artificial still basic here sits in a redundant row: drop that row
        stuck = state.basis[~keep] - n
        rows = np.setdiff1d(np.arange(m), need_rows(As)[stuck])
        basis = state.basis[keep]
        B = As[np.ix_(rows, basis)]
        xb = np.linalg.solve(B, bs[rows])
        if xb.min(initial=0.0) < -FEAS_TOL * max(1.0, float(np.abs(bs).max())):
            continue
        x = np.zeros(n)
        x[basis] = np.maximum(xb, 0.0)
        y = np.zeros(m)
        y[rows] = np.linalg.solve(B.T, c[basis])
        y *= sign
        return LPResult("optimal", x, float(c @ x), basis, rows, y, it)
    raise LPError("simplex could not reach a basis feasible for the unperturbed data")


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _solve_exact(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan elimination over the rationals; None when singular."""
    n = len(M)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        prow = [v * inv for v in aug[col]]
        aug[col] = prow
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * p for a, p in zip(aug[r], prow)]
    return [aug[r][n] for r in range(n)]


def verify_basis(c, A, b, basis: Sequence[int], rows: Sequence[int] | None = None) -> ExactCertificate:
    """Certify that ``basis`` is an optimal basis using exact rationals.

    Entries may be ints, floats (converted exactly) or Fractions.  Checks
    primal feasibility of the basic solution on every row, including rows
    dropped as redundant, and nonnegativity of every reduced cost.
    """
    A = [[_frac(v) for v in row] for row in np.asarray(A, dtype=object)]
    b = [_frac(v) for v in b]
    c = [_frac(v) for v in c]
    m, n = len(A), len(c)
    rows = list(range(m)) if rows is None else [int(r) for r in rows]
    basis = [int(j) for j in basis]
    if len(basis) != len(rows):
        return ExactCertificate(False, None, None, "basis size does not match the row count")
    B = [[A[r][j] for j in basis] for r in rows]
    xb = _solve_exact(B, [b[r] for r in rows])
    if xb is None:
        return ExactCertificate(False, None, None, "basis matrix is singular")
    if any(v < 0 for v in xb):
        return ExactCertificate(False, None, None, "basic solution has a negative entry")
    x = [Fraction(0)] * n
    for j, v in zip(basis, xb):
        x[j] = v
    for r in range(m):
        if sum((a * xv for a, xv in zip(A[r], x) if xv), Fraction(0)) != b[r]:
            return ExactCertificate(False, None, None, f"row {r} is not satisfied exactly")
    Bt = [[B[i][j] for i in range(len(rows))] for j in range(len(rows))]
    y = _solve_exact(Bt, [c[j] for j in basis])
    for j in range(n):
        red = c[j] - sum((y[i] * A[r][j] for i, r in enumerate(rows) if A[r][j]), Fraction(0))
        if red < 0:
            return ExactCertificate(False, None, x, f"column {j} has negative reduced cost {red}")
    obj = sum((cj * xj for cj, xj in zip(c, x)), Fraction(0))
    return ExactCertificate(True, obj, x)
