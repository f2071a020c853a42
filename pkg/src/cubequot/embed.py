"""Finite metrics, snowflakes and l_1 distortion.

An l_1 embedding of an n-point space is handled through its cut
decomposition: every l_1 semimetric on n points is a nonnegative combination
of cut semimetrics, so both the least distortion into l_1 and the best
l_1-valued Poincare constant become finite problems over the 2^(n-1) - 1
cuts.  Cuts are canonicalized to contain point 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .lp import ExactCertificate, LPError, simplex, verify_basis
from .quotient import QuotientSpace, pushforward_theta, theta_mass

TRIANGLE_TOL = 1e-9
WITNESS_TOL = 1e-7
EMBED_TOL = 1e-7
EIG_TOL = 1e-9
C1_CAP = 16
CUT_CAP = 20
SUBSET_CAP = 14


# ----------------------------------------------------------------------------
# metrics


@dataclass
class FiniteMetric:
    d: np.ndarray
    labels: list | None = None
    tol: float = TRIANGLE_TOL

    def __post_init__(self):
        d = np.array(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        n = d.shape[0]
        if not np.all(np.isfinite(d)):
            raise ValueError("distances must be finite")
        if np.any(np.diag(d) != 0):
            raise ValueError("diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be symmetric")
        if n > 1 and np.any(d[~np.eye(n, dtype=bool)] <= 0):
            raise ValueError("distinct points must be at positive distance")
        for m in range(n):
            viol = d - (d[:, m][:, None] + d[m, :][None, :])
            if viol.max(initial=0.0) > self.tol:
                i, j = np.unravel_index(np.argmax(viol), viol.shape)
                raise ValueError(f"triangle inequality fails at ({i}, {m}, {j}) by {viol[i, j]:.3g}")
        self.d = d
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels must have one entry per point")

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return np.triu_indices(self.n, 1)


def path_metric(n_or_edges, n: int | None = None) -> FiniteMetric:
    """Shortest-path metric of an unweighted graph given by an edge list."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import shortest_path

    edges = list(n_or_edges)
    if n is None:
        n = 1 + max(max(e) for e in edges)
    r, c = zip(*edges)
    adj = coo_matrix((np.ones(len(edges)), (r, c)), shape=(n, n)).tocsr()
    D = shortest_path(adj, directed=False, unweighted=True)
    return FiniteMetric(D)


def hamming_metric(k: int) -> FiniteMetric:
    """Hamming distance on all of F_2^k, points in bitmask order."""
    from .cube import popcount

    x = np.arange(1 << k, dtype=np.int64)
    return FiniteMetric(popcount(x[:, None] ^ x[None, :]).astype(np.float64))


def quotient_metric(Q: QuotientSpace, orbits: Sequence[int] | None = None) -> FiniteMetric:
    """The quotient metric on the given orbits (all of them by default)."""
    D = Q.ensure_distances()
    idx = np.arange(Q.q) if orbits is None else np.asarray(orbits, dtype=np.int64)
    return FiniteMetric(D[np.ix_(idx, idx)].astype(np.float64), labels=[int(Q.reps[a]) for a in idx])


def read_metric(path) -> FiniteMetric:
    """Plain text: first token n, then n rows of n numbers.  ``#`` starts a comment."""
    toks = []
    for line in Path(path).read_text().splitlines():
        toks.extend(line.split("#", 1)[0].split())
    if not toks:
        raise ValueError(f"{path}: empty metric file")
    n = int(toks[0])
    vals = [float(t) for t in toks[1:]]
    if len(vals) != n * n:
        raise ValueError(f"{path}: expected {n * n} entries after n={n}, found {len(vals)}")
    return FiniteMetric(np.array(vals).reshape(n, n))


def write_metric(M: FiniteMetric, path) -> None:
    lines = [str(M.n)] + [" ".join(repr(float(v)) for v in row) for row in M.d]
    Path(path).write_text("\n".join(lines) + "\n")


def snowflake(M: FiniteMetric, exponent: float) -> FiniteMetric:
    """(M, d^exponent), revalidated as a metric."""
    if not 0.0 < exponent <= 1.0:
        raise ValueError(f"snowflake exponent must lie in (0, 1], got {exponent}")
    return FiniteMetric(M.d**exponent, M.labels, M.tol)


def quasi_distance(u, v, power: float) -> tuple[float, float]:
    """(sum_i |u_i - v_i|^power, and its power-th root), for 0 < power <= 1."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    if not 0.0 < power <= 1.0:
        raise ValueError(f"power must lie in (0, 1], got {power}")
    dist = float(np.sum(np.abs(u - v) ** power))
    return dist, dist ** (1.0 / power)


def alpha_from_c1(c1: float, eps: float) -> float:
    """Best l_{1-eps} embedding constant matching snowflake distortion c1."""
    if c1 < 1:
        raise ValueError(f"c1 must be >= 1, got {c1}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return c1 ** (1.0 / (1.0 - eps))


# ----------------------------------------------------------------------------
# cuts


def cut_masks(n: int) -> np.ndarray:
    """Boolean ``(2^(n-1) - 1, n)`` array of the canonical cuts, in canonical order."""
    if n < 2:
        return np.zeros((0, n), dtype=bool)
    t = np.arange((1 << (n - 1)) - 1, dtype=np.int64)
    S = np.ones((t.size, n), dtype=bool)
    for i in range(1, n):
        S[:, i] = (t >> (i - 1)) & 1
    return S


@dataclass
class CutCombination:
    n: int
    weights: dict[frozenset, float]

    def __post_init__(self):
        for S, w in self.weights.items():
            if w < 0:
                raise ValueError("cut weights must be nonnegative")
            if 0 not in S or len(S) >= self.n or not S:
                raise ValueError(f"cut {sorted(S)} is not canonical")

    def semimetric(self) -> np.ndarray:
        D = np.zeros((self.n, self.n))
        for S, w in self.weights.items():
            ind = np.zeros(self.n, dtype=bool)
            ind[list(S)] = True
            D += w * (ind[:, None] != ind[None, :])
        return D

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "cuts": [
                {"set": sorted(int(i) for i in S), "weight": float(w)}
                for S, w in sorted(self.weights.items(), key=lambda kv: sorted(kv[0]))
            ],
        }


@dataclass
class PoincareForm:
    n: int
    w1: np.ndarray
    w2: np.ndarray
    C_opt: float
    witness_cut: frozenset

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "w1": self.w1.tolist(),
            "w2": self.w2.tolist(),
            "C_opt": self.C_opt,
            "witness_cut": sorted(int(i) for i in self.witness_cut),
        }


@dataclass
class DistortionBound:
    value: float
    kind: str  # "exact" or "lower"
    witness: CutCombination | PoincareForm
    epsilon: float = 0.0
    certificate: ExactCertificate | None = None
    extra: dict = field(default_factory=dict)

    @property
    def exact_value(self) -> Fraction | None:
        if self.certificate is not None and self.certificate.optimal:
            return self.certificate.objective
        return None

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "value": self.value,
            "epsilon": self.epsilon,
            "witness": self.witness.to_dict(),
        }
        if self.certificate is not None:
            out["exact_verified"] = self.certificate.optimal
            if self.certificate.objective is not None:
                out["exact_value"] = str(self.certificate.objective)
        out.update(self.extra)
        return out


def _cut_pair_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical cuts and the (pairs x cuts) 0/1 separation matrix."""
    S = cut_masks(n)
    iu, ju = np.triu_indices(n, 1)
    delta = (S[:, iu] != S[:, ju]).T
    return S, delta


def c1_lp(M: FiniteMetric):
    """The distortion LP in equality form.

    Variables: cut weights (one per canonical cut), alpha, then one surplus
    and one slack per pair.  Rows per pair (i, j):
        sum_S lam_S delta_S(i, j) - s_ij          = d(i, j)
        sum_S lam_S delta_S(i, j) - alpha d(i, j) + t_ij = 0
    """
    n = M.n
    S, delta = _cut_pair_matrix(n)
    iu, ju = M.pairs()
    d = M.d[iu, ju]
    P, N = delta.shape
    A = np.zeros((2 * P, N + 1 + 2 * P))
    A[:P, :N] = delta
    A[P:, :N] = delta
    A[P:, N] = -d
    A[np.arange(P), N + 1 + np.arange(P)] = -1.0
    A[P + np.arange(P), N + 1 + P + np.arange(P)] = 1.0
    b = np.concatenate([d, np.zeros(P)])
    c = np.zeros(A.shape[1])
    c[N] = 1.0
    return c, A, b, S


def exact_c1(M: FiniteMetric, cap: int = C1_CAP, exact: bool = False, witness_tol: float = WITNESS_TOL) -> DistortionBound:
    """Least distortion of M into l_1 via the cut-cone linear program.

    With ``exact=True`` the final simplex basis is re-verified in rational
    arithmetic and the certified optimum is attached.
    """
    n = M.n
    if n > cap:
        raise ValueError(f"n={n} exceeds the exact-c1 cap {cap}")
    if n <= 2:
        weights = {frozenset({0}): float(M.d[0, 1])} if n == 2 else {}
        return DistortionBound(1.0, "exact", CutCombination(n, weights))
    c, A, b, S = c1_lp(M)
    res = simplex(c, A, b)
    if res.status != "optimal":
        raise LPError(f"distortion LP returned {res.status}; a valid metric cannot do that")
    N = S.shape[0]
    lam = res.x[:N]
    alpha = float(res.x[N])
    weights = {frozenset(np.flatnonzero(S[i]).tolist()): float(lam[i]) for i in np.flatnonzero(lam > 0)}
    witness = CutCombination(n, weights)
    induced = witness.semimetric()
    scale = max(1.0, float(M.d.max()))
    off = ~np.eye(n, dtype=bool)
    if np.any(induced[off] < M.d[off] - witness_tol * scale) or np.any(
        induced[off] > alpha * M.d[off] + witness_tol * scale
    ):
        raise LPError("distortion witness fails its own constraints")
    cert = None
    if exact:
        cert = verify_basis(c, A, b, res.basis, res.rows)
    return DistortionBound(max(alpha, 1.0), "exact", witness, certificate=cert)


def poincare_optimal_constant(w1, w2, cap: int = CUT_CAP, tol: float = 0.0) -> PoincareForm:
    """Best C with sum w1 |f_i - f_j| <= C sum w2 |f_i - f_j| for all f into l_1.

    The optimum is attained on a cut, so this is a max over canonical cuts,
    ties going to the first cut in canonical order.  A cut that separates
    w1-mass but no w2-mass makes the constant infinite, which raises.
    """
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    n = w1.shape[0]
    if w1.shape != (n, n) or w2.shape != (n, n):
        raise ValueError("weight matrices must be square and of equal size")
    if not (np.allclose(w1, w1.T) and np.allclose(w2, w2.T)):
        raise ValueError("weight matrices must be symmetric")
    if np.any(w1 < 0) or np.any(w2 < 0):
        raise ValueError("weights must be nonnegative")
    if n < 2:
        raise ValueError("need at least two points")
    if n > cap:
        raise ValueError(f"n={n} exceeds the cut-enumeration cap {cap}")
    S = cut_masks(n).astype(np.float64)
    best, best_idx = -np.inf, -1
    chunk = 1 << 16
    for s in range(0, S.shape[0], chunk):
        blk = S[s : s + chunk]
        num = _cut_values(blk, w1)
        den = _cut_values(blk, w2)
        bad = (den <= tol) & (num > tol)
        if bad.any():
            cut = frozenset(np.flatnonzero(blk[np.argmax(bad)]).tolist())
            raise ZeroDivisionError(f"cut {sorted(cut)} separates w1-mass but no w2-mass: constant is unbounded")
        ok = den > tol
        ratio = np.full(blk.shape[0], -np.inf)
        ratio[ok] = num[ok] / den[ok]
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best, best_idx = float(ratio[i]), s + i
    if best_idx < 0:
        raise ZeroDivisionError("no cut separates any w2-mass")
    witness = frozenset(np.flatnonzero(S[best_idx]).tolist())
    return PoincareForm(n, w1, w2, best, witness)


def _cut_values(S: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum over ordered pairs of w_ij [s_i != s_j] for each row s of S."""
    row = w.sum(axis=1)
    return 2.0 * (S @ row) - 2.0 * np.einsum("ci,ij,cj->c", S, w, S)


def distortion_lower_bound(M: FiniteMetric, w1, w2, eps: float = 0.0, cap: int = CUT_CAP) -> DistortionBound:
    """Certified lower bound on c_1 of the (1-eps)-snowflake of M.

    For an embedding with d' <= |f_i - f_j| <= alpha d' (d' = d^(1-eps)),
    sum w1 d' <= C sum w2 alpha d', hence
    alpha >= sum w1 d' / (C sum w2 d').
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    form = poincare_optimal_constant(w1, w2, cap)
    dp = M.d ** (1.0 - eps)
    num = float(np.sum(form.w1 * dp))
    den = float(np.sum(form.w2 * dp))
    if den <= 0:
        raise ZeroDivisionError("w2 puts no mass on distinct pairs")
    value = num / (form.C_opt * den)
    return DistortionBound(value, "lower", form, eps, extra={"pair_average": num, "edge_average": den})


# ----------------------------------------------------------------------------
# negative type


def _schoenberg(M: FiniteMetric) -> np.ndarray:
    d0 = M.d[0, 1:]
    return 0.5 * (d0[:, None] + d0[None, :] - M.d[1:, 1:])


def negative_type_test(M: FiniteMetric, tol: float = EIG_TOL) -> tuple[bool, float]:
    """Schoenberg test: sqrt(d) is Euclidean iff the Gram matrix is PSD."""
    if M.n < 2:
        return True, 0.0
    lam = float(np.linalg.eigvalsh(_schoenberg(M)).min())
    return lam >= -tol, lam


def hilbert_sqrt_embed(M: FiniteMetric, tol: float = EMBED_TOL) -> np.ndarray:
    """Points v_0..v_{n-1} in R^(n-1) with |v_i - v_j|^2 = d(i, j)."""
    ok, lam = negative_type_test(M)
    if not ok:
        raise ValueError(f"metric is not of negative type (min eigenvalue {lam:.3g})")
    n = M.n
    if n == 1:
        return np.zeros((1, 0))
    evals, evecs = np.linalg.eigh(_schoenberg(M))
    V = np.zeros((n, n - 1))
    V[1:] = evecs * np.sqrt(np.clip(evals, 0.0, None))
    sq = ((V[:, None, :] - V[None, :, :]) ** 2).sum(-1)
    err = float(np.abs(sq - M.d).max())
    if err > tol * max(1.0, float(M.d.max())):
        raise ArithmeticError(f"embedding reproduces squared distances only to {err:.3g}")
    return V


def schoenberg_violation(M: FiniteMetric, b) -> float:
    """sum_ij b_i b_j d(i, j) for sum(b) = 0; positive values witness failure of negative type."""
    b = np.asarray(b, dtype=np.float64)
    if abs(b.sum()) > 1e-12 * max(1.0, np.abs(b).sum()):
        raise ValueError("b must sum to zero")
    return float(b @ M.d @ b)


# ----------------------------------------------------------------------------
# quotient-specific forms


def quotient_forms(Q: QuotientSpace) -> tuple[np.ndarray, np.ndarray]:
    """Uniform pair weights and coordinate-edge weights on the orbits."""
    mu = Q.measure
    return np.outer(mu, mu), Q.edge_weights()


def subset_poincare_constants(weights_mu: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """C_opt(Y) for every orbit subset Y (as bitmask), by enumerating 3^q (S, T) splits.

    Returns an array indexed by the bitmask of Y (``-inf`` for |Y| < 2,
    ``inf`` when some split of Y has zero theta-mass across it) together
    with the bitmask of a maximizing S.
    """
    q = weights_mu.size
    C = np.full(1 << q, -np.inf)
    arg = np.zeros(1 << q, dtype=np.int64)
    total = 3**q
    chunk = 1 << 18
    pow3 = 3 ** np.arange(q, dtype=np.int64)
    for s in range(0, total, chunk):
        code = np.arange(s, min(total, s + chunk), dtype=np.int64)
        digit = (code[:, None] // pow3[None, :]) % 3
        inS = digit == 1
        inT = digit == 2
        keep = inS.any(1) & inT.any(1)
        if not keep.any():
            continue
        inS, inT = inS[keep], inT[keep]
        Sf, Tf = inS.astype(np.float64), inT.astype(np.float64)
        num = 2.0 * (Sf @ weights_mu) * (Tf @ weights_mu)
        den = 2.0 * np.einsum("ca,ab,cb->c", Sf, theta, Tf)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
        bitw = np.int64(1) << np.arange(q, dtype=np.int64)
        Ymask = (inS | inT) @ bitw
        Smask = inS @ bitw
        order = np.lexsort((-ratio, Ymask))
        Ym, first = np.unique(Ymask[order], return_index=True)
        better = ratio[order][first] > C[Ym]
        C[Ym[better]] = ratio[order][first][better]
        arg[Ym[better]] = Smask[order][first][better]
    return C, arg


def best_subset_poincare(
    Q: QuotientSpace,
    p: float,
    size_fraction_bounds: tuple[float, float] = (0.0, 1.0),
    X: Sequence[int] | None = None,
    cap: int = SUBSET_CAP,
):
    """Orbit subset Y of X, within the mass bounds, with the least Poincare constant.

    The form compares the mu x mu average of |f(O) - f(O')| on Y x Y with
    its theta^p average.  Returns ``(Y, C_opt(Y))``; ties go to the
    numerically smallest bitmask of Y.
    """
    X = np.arange(Q.q) if X is None else np.asarray(sorted(set(int(a) for a in X)), dtype=np.int64)
    q = X.size
    if q > cap:
        raise ValueError(f"{q} orbits exceed the subset-search cap {cap}")
    lo, hi = size_fraction_bounds
    mu = Q.measure[X]
    theta = pushforward_theta(Q, p).weights[np.ix_(X, X)]
    C, _ = subset_poincare_constants(mu, theta)
    masks = np.arange(1 << q, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(q)) & 1).astype(np.float64)
    frac = (bits @ mu) / mu.sum()
    eligible = (frac >= lo - 1e-12) & (frac <= hi + 1e-12) & np.isfinite(C) & (C > -np.inf)
    if not eligible.any():
        raise ValueError("no orbit subset satisfies the size bounds")
    cand = np.flatnonzero(eligible)
    best = int(cand[np.argmin(C[cand])])
    Y = X[np.flatnonzero((best >> np.arange(q)) & 1)]
    return Y, float(C[best])


def expansion_ratio(Q: QuotientSpace, p: float, Z: Sequence[int], X: Sequence[int] | None = None) -> float:
    """2 theta^p(Z x (X minus Z)) / theta^p(X x X), for orbit sets Z within X."""
    X = range(Q.q) if X is None else X
    Xs, Zs = set(int(a) for a in X), set(int(a) for a in Z)
    if not Zs <= Xs:
        raise ValueError("Z must be a subset of X")
    zmask = Q.lift(sorted(Zs)) if Zs else np.zeros(1 << Q.k, dtype=bool)
    xmask = Q.lift(sorted(Xs)) if Xs else np.zeros(1 << Q.k, dtype=bool)
    denom = theta_mass(Q.k, p, xmask, xmask)
    if denom <= 0:
        raise ZeroDivisionError("theta(X x X) vanishes")
    return 2.0 * theta_mass(Q.k, p, zmask, xmask & ~zmask) / denom


def ratio_condition(Q: QuotientSpace, Z: Sequence[int], X: Sequence[int] | None = None) -> tuple[float, bool]:
    """mu(Z)/mu(X) and whether it lies in [1/4, 2/3]."""
    mu = Q.measure
    X = range(Q.q) if X is None else X
    r = float(mu[list(Z)].sum() / mu[list(X)].sum()) if len(list(Z)) else 0.0
    return r, 0.25 <= r <= 2.0 / 3.0
