"""Noise measure, heat/boundary identity, low-degree influences and tails.

Coordinates are 0-based here (``j`` is bit ``j``), matching the bitmask
encoding of :mod:`cubequot.cube`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube import CubeFunction, Spectrum, check_invariance, convolve, popcount, spectrum, variance, wht
from .quotient import PermGroup, QuotientSpace, inverse

TOL = 1e-9
SYMMETRY_TOL = 1e-12
DIRECT_LIMIT = 14
DEFAULT_BETA = 0.25
LEMMA_MIN_K = 55


@dataclass(frozen=True)
class NoiseParam:
    """A bit-flip rate p, optionally derived from beta as p = 1/(beta log2 k).

    ``clamped`` is set when beta log2 k <= 2, where the derived rate would not
    lie below 1/2; the rate is then pinned to 1/2.
    """

    p: float
    beta: float | None = None
    k: int | None = None
    clamped: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @classmethod
    def from_beta(cls, beta: float, k: int, clamp: bool = False) -> "NoiseParam":
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {beta}")
        scale = beta * math.log2(k)
        if scale <= 2.0:
            if not clamp:
                raise ValueError(
                    f"beta*log2(k) = {scale:.4g} <= 2: p = 1/(beta log k) is not below 1/2"
                )
            return cls(0.5, beta, k, clamped=True)
        return cls(1.0 / scale, beta, k)


def level_cutoff(beta: float, k: int) -> int:
    """m = ceil(beta * log2 k), at least 1."""
    return max(1, math.ceil(beta * math.log2(k) - 1e-12))


def _levels(k: int) -> np.ndarray:
    return popcount(np.arange(1 << k, dtype=np.int64))


def _as_mask(omega, k: int | None) -> tuple[np.ndarray, int]:
    if isinstance(omega, CubeFunction):
        vals = omega.values
        if not np.all((vals == 0) | (vals == 1)):
            raise ValueError("boundary_measure expects a 0/1 indicator function")
        return vals.astype(bool), omega.k
    mask = np.asarray(omega, dtype=bool)
    if k is None:
        k = mask.size.bit_length() - 1
    if mask.shape != (1 << k,):
        raise ValueError(f"mask must have 2^k = {1 << k} entries")
    return mask, k


def boundary_fourier(mask: np.ndarray, k: int, p: float) -> float:
    """(1/4) sum_A (1 - (1-2p)^|A|) c_A^2 with c the spectrum of (-1)^1_Omega."""
    c = spectrum(CubeFunction.sign_of(k, mask)).coeffs
    damp = 1.0 - (1.0 - 2.0 * p) ** _levels(k)
    return float(0.25 * np.sum(damp * c**2))


def boundary_direct(mask: np.ndarray, k: int, p: float) -> float:
    """theta^p(Omega x complement) as an explicit double sum over pairs."""
    inside = np.flatnonzero(mask)
    outside = np.flatnonzero(~mask)
    if inside.size == 0 or outside.size == 0:
        return 0.0
    hist = np.zeros(k + 1, dtype=np.int64)
    chunk = max(1, (1 << 22) // outside.size)
    for s in range(0, inside.size, chunk):
        d = popcount(inside[s : s + chunk, None] ^ outside[None, :])
        hist += np.bincount(d.ravel(), minlength=k + 1)
    ell = np.arange(k + 1)
    kernel = p**ell * (1.0 - p) ** (k - ell)
    return float(hist @ kernel) / float(1 << k)


def boundary_measure(omega, p: float, k: int | None = None, direct_limit: int = DIRECT_LIMIT, tol: float = TOL) -> float:
    """theta^p(Omega x (F_2^k minus Omega)) via the Fourier form.

    For ``k <= direct_limit`` the pair sum is evaluated as well and the two
    must agree to ``tol``; a disagreement means a bug, so it raises.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    mask, k = _as_mask(omega, k)
    fourier = boundary_fourier(mask, k, p)
    if k <= direct_limit:
        direct = boundary_direct(mask, k, p)
        if abs(direct - fourier) > tol:
            raise ArithmeticError(f"heat identity violated: Fourier {fourier!r} vs direct {direct!r}")
    return fourier


@dataclass(frozen=True)
class InfluenceProfile:
    k: int
    m: int
    per_coordinate: np.ndarray
    total: float


def _low_degree_mask(k: int, m: int) -> np.ndarray:
    return _levels(k) <= m


def influences(f: CubeFunction, m: int, spec: Spectrum | None = None) -> InfluenceProfile:
    """Level-m influences of every coordinate, from the spectrum."""
    if not 1 <= m <= f.k:
        raise ValueError(f"level m must lie in 1..{f.k}, got {m}")
    c2 = (spec or spectrum(f)).coeffs ** 2
    A = np.arange(f.size, dtype=np.int64)
    low = c2 * _low_degree_mask(f.k, m)
    per = np.array([low[(A >> j) & 1 == 1].sum() for j in range(f.k)])
    return InfluenceProfile(f.k, m, per, float(per.sum()))


def influence_kernel(k: int, j: int, m: int) -> CubeFunction:
    """Sum of W_{A u {j}} over A not containing j with |A| <= m - 1."""
    A = np.arange(1 << k, dtype=np.int64)
    sel = ((A >> j) & 1 == 1) & _low_degree_mask(k, m)
    return wht(Spectrum(k, sel.astype(np.float64)), "synthesis")


def level_influence(f: CubeFunction, j: int, m: int, tol: float = TOL) -> float:
    """Inf_j^{<=m}[f], checked against the squared norm of f * R_j^{<=m}."""
    if not 0 <= j < f.k:
        raise ValueError(f"coordinate j must lie in 0..{f.k - 1}, got {j}")
    spectral = float(influences(f, m).per_coordinate[j])
    conv = convolve(f, influence_kernel(f.k, j, m)).l2_norm() ** 2
    if abs(conv - spectral) > tol * max(1.0, spectral):
        raise ArithmeticError(f"influence forms disagree: {spectral!r} vs {conv!r}")
    return spectral


def influence_sum_check(f: CubeFunction, m: int, tol: float = TOL) -> tuple[float, float, bool]:
    """(sum_j Inf_j^{<=m}, m Var f, whether the former is at most the latter)."""
    spec = spectrum(f)
    prof = influences(f, m, spec)
    lev = _levels(f.k)
    by_level = float(np.sum(np.where((lev > 0) & (lev <= m), lev * spec.coeffs**2, 0.0)))
    if abs(by_level - prof.total) > tol * max(1.0, prof.total):
        raise ArithmeticError(f"influence total {prof.total!r} != level-weighted mass {by_level!r}")
    bound = m * variance(f)
    return prof.total, bound, prof.total <= bound + tol


def transitive_influence_bound(
    f: CubeFunction, G: PermGroup, m: int, tol: float = TOL, symmetry_tol: float = SYMMETRY_TOL
) -> tuple[float, float, bool]:
    """max_j Inf_j^{<=m}[f] against (m/k) Var f for G-invariant f and transitive G.

    Also checks Inf_j = Inf_{g^-1 j} for every generator g and raises if
    that symmetry fails.
    """
    if G.k != f.k:
        raise ValueError("group and function live in different dimensions")
    if not G.transitive:
        raise ValueError("group does not act transitively on the coordinates")
    for g in G.generators:
        if not check_invariance(f, g):
            raise ValueError(f"function is not invariant under generator {g}")
    per = influences(f, m).per_coordinate
    for g in G.generators:
        ginv = inverse(g)
        moved = per[list(ginv)]
        if np.max(np.abs(moved - per), initial=0.0) > symmetry_tol:
            raise ArithmeticError("influences are not constant along generator orbits")
    top = float(per.max())
    bound = m / f.k * variance(f)
    return top, bound, top <= bound + tol


def tail_mass(f: CubeFunction, m: int) -> float:
    """Fourier mass above level m; equals Var f at m = 0."""
    if not 0 <= m <= f.k:
        raise ValueError(f"m must lie in 0..{f.k}, got {m}")
    c = spectrum(f).coeffs
    return float(np.sum(c[_levels(f.k) > m] ** 2))


def kko_condition(f: CubeFunction, m: int, C: float) -> bool:
    """max_j Inf_j^{<=m}[f] <= Var(f)^4 / C^m."""
    if C <= 1:
        raise ValueError("C must exceed 1")
    top = float(influences(f, m).per_coordinate.max())
    return top <= variance(f) ** 4 / C**m


def snowflaked_averages(Q: QuotientSpace, eps: float) -> tuple[float, float]:
    """Averages of d^(1-eps) over all pairs and over coordinate edges.

    ``mean_pair`` averages d(Gx, Gy)^(1-eps) over (x, y) uniform;
    ``mean_edge`` is (1/k) sum_j E_x d(G(x+e_j), Gx)^(1-eps) and never exceeds 1.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    D = Q.ensure_distances().astype(np.float64)
    Dp = D ** (1.0 - eps)
    mu = Q.measure
    mean_pair = float(mu @ Dp @ mu)
    mean_edge = float(np.sum(Q.edge_weights() * Dp))
    return mean_pair, mean_edge


def balanced_invariant_set(Q: QuotientSpace, seed: int = 0) -> np.ndarray:
    """Orbit indices whose union has measure at most 1/2, filled greedily.

    Orbits are visited in a seeded random order and kept whenever they still
    fit under half the cube.
    """
    rng = np.random.default_rng(seed)
    half = 1 << (Q.k - 1)
    order = rng.permutation(Q.q)
    chosen, total = [], 0
    for a in order:
        s = int(Q.orbit_sizes[a])
        if total + s <= half:
            chosen.append(int(a))
            total += s
    return np.array(sorted(chosen), dtype=np.int64)


def invariant_sign_function(Q: QuotientSpace, orbits) -> CubeFunction:
    """(-1)^{1_Z} for Z the union of the given orbits."""
    return CubeFunction.sign_of(Q.k, Q.lift(orbits))
