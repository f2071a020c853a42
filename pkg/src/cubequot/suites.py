"""Verification suites shared by the command line tool, tests and demos.

Each suite returns a list of :class:`~cubequot.report.Record`.  Quantities
whose pass threshold would depend on unspecified universal constants are
emitted as "reported" records and never graded.
"""

from __future__ import annotations

import math

import numpy as np

from . import analysis as an
from .cube import CubeFunction, convolve, permutation_of_points, popcount, spectrum, variance, wht
from .embed import (
    C1_CAP,
    CUT_CAP,
    FiniteMetric,
    SUBSET_CAP,
    alpha_from_c1,
    best_subset_poincare,
    distortion_lower_bound,
    exact_c1,
    hilbert_sqrt_embed,
    negative_type_test,
    quotient_forms,
    quotient_metric,
    ratio_condition,
    snowflake,
)
from .quotient import (
    EXACT_PAIR_K,
    QuotientSpace,
    far_pair_estimate,
    is_metric,
    pushforward_theta,
    quotient_distance_bfs,
    theta_mass,
)
from .report import Record, check, reported
from .sketch import MIN_TRIALS, THRESHOLD, sketch_negative_type

TOL = 1e-9
EXACT = 0.0
DIRECT_ORACLE_K = 10
METRIC_CHECK_ORBITS = 1024
HEAT_PS = (0.01, 0.1, 0.3, 0.5)
SKETCH_MARGIN_SE = 2.0

_FOURIER, _HEAT, _INFL, _QUOT, _INV, _LEMMA = range(6)


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag])


def _dense_walsh(k: int) -> np.ndarray:
    x = np.arange(1 << k, dtype=np.int64)
    return np.where(popcount(x[:, None] & x[None, :]) & 1, -1.0, 1.0)


# ----------------------------------------------------------------------------
# cube and analysis


def fourier_suite(k: int, seed: int, samples: int = 20) -> list[Record]:
    rng = _rng(seed, _FOURIER)
    out = []
    fs = [CubeFunction(k, rng.standard_normal(1 << k)) for _ in range(samples)]

    rt = max(float(np.abs(wht(wht(f), "synthesis").values - f.values).max()) for f in fs)
    out.append(check("wht_roundtrip", "walsh-basis", rt <= TOL, TOL, {"max_abs_error": rt}, k=k, functions=samples))

    pv = max(abs(spectrum(f).energy() - float(np.mean(f.values**2))) for f in fs)
    out.append(check("parseval", "walsh-basis", pv <= TOL, TOL, {"max_abs_error": pv}, k=k, functions=samples))

    if k <= DIRECT_ORACLE_K:
        H = _dense_walsh(k)
        err = max(float(np.abs(H @ f.values / (1 << k) - spectrum(f).coeffs).max()) for f in fs)
        out.append(check("wht_vs_dense_oracle", "walsh-basis", err <= TOL, TOL, {"max_abs_error": err}, k=k))

        x = np.arange(1 << k, dtype=np.int64)
        xor = x[:, None] ^ x[None, :]
        err = 0.0
        for f, g in zip(fs[::2], fs[1::2]):
            direct = g.values[xor] @ f.values / (1 << k)
            err = max(err, float(np.abs(convolve(f, g).values - direct).max()))
        out.append(check("convolution_theorem", "convolution", err <= TOL, TOL, {"max_abs_error": err}, k=k, pairs=samples // 2))

    var_err = 0.0
    for f in fs:
        direct = float(np.var(f.values))
        var_err = max(var_err, abs(direct - variance(f)))
    out.append(check("variance_two_routes", "variance", var_err <= TOL, TOL, {"max_abs_error": var_err}, k=k))
    return out


def heat_suite(k: int, seed: int, subsets: int = 20, ps=HEAT_PS) -> list[Record]:
    rng = _rng(seed, _HEAT)
    out = []
    if k <= an.DIRECT_LIMIT:
        err = 0.0
        for _ in range(subsets):
            mask = rng.random(1 << k) < rng.uniform(0.05, 0.95)
            for p in ps:
                err = max(err, abs(an.boundary_fourier(mask, k, p) - an.boundary_direct(mask, k, p)))
        out.append(
            check("heat_identity", "heat-identity", err <= TOL, TOL, {"max_abs_error": err}, k=k, subsets=subsets, p=list(ps))
        )
    x = np.arange(1 << k, dtype=np.int64)
    err = max(abs(an.boundary_measure((x & 1).astype(bool), p, k) - p / 2) for p in ps)
    out.append(check("dictator_boundary", "heat-identity", err <= 1e-12, 1e-12, {"max_abs_error": err}, k=k, p=list(ps)))
    return out


def influence_suite(k: int, seed: int, functions: int = 20) -> list[Record]:
    rng = _rng(seed, _INFL)
    out = []
    worst_slack = np.inf
    ok = True
    for _ in range(functions):
        f = CubeFunction(k, rng.standard_normal(1 << k))
        for m in range(1, k + 1):
            total, bound, good = an.influence_sum_check(f, m)
            ok &= good
            worst_slack = min(worst_slack, bound - total)
    out.append(
        check("influence_sum_bound", "influence-variance-bound", ok, TOL, {"min_slack": worst_slack}, k=k, functions=functions)
    )

    f = CubeFunction(k, rng.standard_normal(1 << k))
    m = max(1, k // 2)
    err = 0.0
    for j in range(k):
        spectral = float(an.influences(f, m).per_coordinate[j])
        conv = convolve(f, an.influence_kernel(k, j, m)).l2_norm() ** 2
        err = max(err, abs(spectral - conv))
    out.append(check("level_influence_two_routes", "level-influence", err <= TOL, TOL, {"max_abs_error": err}, k=k, m=m))

    tails = [an.tail_mass(f, mm) for mm in range(k + 1)]
    mono = all(a >= b - TOL for a, b in zip(tails, tails[1:]))
    start = abs(tails[0] - variance(f))
    out.append(
        check("tail_monotone", "fourier-tail", mono and start <= TOL and abs(tails[-1]) <= TOL, TOL,
              {"tail_at_0_minus_var": start, "tail_at_k": tails[-1]}, k=k)
    )
    return out


def random_invariant_sign(Q: QuotientSpace, rng: np.random.Generator) -> CubeFunction:
    """(-1)^{1_Z} for a random nonempty proper union Z of orbits."""
    while True:
        chosen = np.flatnonzero(rng.random(Q.q) < 0.5)
        if 0 < chosen.size < Q.q:
            return an.invariant_sign_function(Q, chosen)


def invariant_suite(Q: QuotientSpace, seed: int, functions: int = 20, beta: float = an.DEFAULT_BETA) -> list[Record]:
    rng = _rng(seed, _INV)
    G, k = Q.group, Q.k
    out = []
    fs = [random_invariant_sign(Q, rng) for _ in range(functions)]

    # an invariant function has a spectrum constant along group orbits of sets
    err = 0.0
    for f in fs:
        c = spectrum(f).coeffs
        for g in G.generators:
            err = max(err, float(np.abs(c[permutation_of_points(g, k)] - c).max()))
    out.append(
        check("invariant_spectrum", "invariance-identity", err <= 1e-12, 1e-12, {"max_abs_error": err}, k=k, functions=functions)
    )

    if G.transitive:
        m = an.level_cutoff(beta, k)
        worst, ok = -np.inf, True
        spread = 0.0
        for f in fs:
            top, bound, good = an.transitive_influence_bound(f, G, m)
            per = an.influences(f, m).per_coordinate
            spread = max(spread, float(per.max() - per.min()))
            ok &= good
            worst = max(worst, top - bound)
        out.append(
            check("transitive_influence_bound", "transitive-influence-bound", ok and spread <= 1e-12, TOL,
                  {"max_excess": worst, "max_influence_spread": spread}, k=k, m=m, functions=functions)
        )
    return out


# ----------------------------------------------------------------------------
# quotient


def quotient_suite(Q: QuotientSpace, eta: float, seed: int, samples: int = 10**6) -> list[Record]:
    k = Q.k
    out = []
    sizes_ok = int(Q.orbit_sizes.sum()) == 1 << k
    out.append(
        reported("orbit_structure", "quotient-metric",
                 {"orbit_count": Q.q, "group_order": Q.group.order, "transitive": Q.group.transitive, "sizes_sum_to_2k": sizes_ok},
                 k=k)
    )
    if Q.q <= METRIC_CHECK_ORBITS:
        D = Q.ensure_distances()
        B = quotient_distance_bfs(Q)
        mism = int(np.count_nonzero(D != B))
        out.append(check("distance_vs_bfs", "quotient-metric", mism == 0, EXACT, {"mismatched_pairs": mism, "diameter": int(D.max())}, k=k))
        out.append(check("metric_axioms", "quotient-metric", is_metric(D) and sizes_ok, EXACT, {"integer_metric": is_metric(D)}, k=k))
    else:
        out.append(reported("distance_vs_bfs", "quotient-metric",
                            {"skipped": f"{Q.q} orbits exceed the all-pairs check limit {METRIC_CHECK_ORBITS}"}, k=k))

    if k <= EXACT_PAIR_K:
        errs = {}
        for p in (0.0,) + HEAT_PS:
            W = pushforward_theta(Q, p).weights
            r, c = W.sum(1), W.sum(0)
            errs[repr(p)] = float(max(np.abs(r - Q.measure).max(), np.abs(c - Q.measure).max()))
            if p == 0.0:
                errs["p0_offdiag"] = float(np.abs(W - np.diag(Q.measure)).max())
        worst = max(errs.values())
        out.append(check("pushforward_marginals", "noise-marginals", worst <= 1e-12, 1e-12, errs, k=k))

    pf = far_pair_estimate(Q, eta, samples=samples, seed=seed)
    vals = {"fraction": pf.value, "stderr": pf.stderr, "bound": pf.bound, "exact": pf.exact,
            "samples": pf.samples, "group_order_within_2^(k/2)": pf.hypothesis_holds}
    if pf.hypothesis_holds:
        ok = pf.value + 3 * pf.stderr <= pf.bound
        out.append(check("close_pair_fraction", "far-pair-count", ok, 3 * pf.stderr, vals, k=k, eta=eta))
    else:
        out.append(reported("close_pair_fraction", "far-pair-count", vals, k=k, eta=eta))
    return out


def kkl_chain_suite(Q: QuotientSpace, seed: int, beta: float = an.DEFAULT_BETA, eps: float = 0.25) -> list[Record]:
    """The finite chain behind the tail and expansion estimates for one balanced Z."""
    k = Q.k
    out = []
    noise = an.NoiseParam.from_beta(beta, k, clamp=True)
    p, m = noise.p, an.level_cutoff(beta, k)
    Z = an.balanced_invariant_set(Q, seed)
    zmask = Q.lift(Z)
    f = an.invariant_sign_function(Q, Z)
    var = variance(f)
    tail = an.tail_mass(f, m)
    inputs = dict(k=k, beta=beta, p=p, m=m, p_clamped=noise.clamped)
    out.append(
        reported("tail_ratio", "tail-assumption",
                 {"tail_mass": tail, "variance": var, "tail_sqrt_m_over_var": tail * math.sqrt(m) / var,
                  "mu_Z": float(zmask.mean())}, **inputs)
    )
    # expansion of Z inside the whole space, three ways
    fourier = 2.0 * an.boundary_fourier(zmask, k, p)
    kernel = 2.0 * theta_mass(k, p, zmask, ~zmask)
    routes = {"fourier": fourier, "product_kernel": kernel}
    if k <= EXACT_PAIR_K:
        W = pushforward_theta(Q, p).weights
        inZ = np.zeros(Q.q, dtype=bool)
        inZ[Z] = True
        routes["orbit_pushforward"] = 2.0 * float(W[np.ix_(inZ, ~inZ)].sum())
    err = max(abs(v - fourier) for v in routes.values())
    out.append(check("expansion_ratio_routes", "heat-identity", err <= TOL, TOL, dict(routes, max_abs_error=err), **inputs))
    out.append(reported("expansion_ratio", "expansion-ratio", {"ratio": fourier, "mu_Z": float(zmask.mean())}, **inputs))
    mean_pair, mean_edge = an.snowflaked_averages(Q, eps)
    out.append(reported("snowflaked_averages", "kkl-chain", {"mean_pair": mean_pair, "mean_edge": mean_edge}, k=k, epsilon=eps))
    return out


# ----------------------------------------------------------------------------
# distortion and certificates


def conversion_suite(c1_grid=(1.0, 1.1, 4 / 3, 2.0, 7.5), eps_grid=(0.01, 0.1, 0.25, 0.4, 0.49, 0.9)) -> list[Record]:
    err = 0.0
    for c in c1_grid:
        for e in eps_grid:
            err = max(err, abs(alpha_from_c1(c, e) ** (1 - e) - c))
    return [check("alpha_roundtrip", "snowflake-conversion", err <= 1e-12, 1e-12, {"max_abs_error": err},
                  c1=list(c1_grid), epsilon=list(eps_grid))]


def distortion_suite(M: FiniteMetric, epsilons, exact: bool = True, cap: int = C1_CAP) -> list[Record]:
    out = []
    for eps in epsilons:
        Ms = snowflake(M, 1.0 - eps)
        res = exact_c1(Ms, cap=cap, exact=exact)
        res.epsilon = eps
        vals = res.to_dict()
        if eps > 0:
            vals["alpha_for_l1"] = alpha_from_c1(res.value, eps)
        if exact:
            cert = res.certificate
            ok = cert is not None and cert.optimal and abs(max(float(cert.objective), 1.0) - res.value) <= 1e-6
            out.append(check(f"c1[eps={eps!r}]", "distortion", bool(ok), 1e-6, vals, n=M.n, epsilon=eps))
        else:
            out.append(reported(f"c1[eps={eps!r}]", "distortion", vals, n=M.n, epsilon=eps))
    return out


def certificate_suite(Q: QuotientSpace, epsilons, c1_cap: int = C1_CAP, cut_cap: int = CUT_CAP) -> list[Record]:
    out = []
    M = quotient_metric(Q)
    w1, w2 = quotient_forms(Q)
    for eps in epsilons:
        lb = distortion_lower_bound(M, w1, w2, eps, cap=cut_cap)
        vals = lb.to_dict()
        if Q.q <= c1_cap:
            c1 = exact_c1(snowflake(M, 1.0 - eps), cap=c1_cap).value
            vals["exact_c1"] = c1
            out.append(check(f"lower_bound_sound[eps={eps!r}]", "poincare-inequality", lb.value <= c1 + 1e-6, 1e-6, vals,
                             k=Q.k, epsilon=eps))
        else:
            out.append(reported(f"lower_bound[eps={eps!r}]", "poincare-inequality", vals, k=Q.k, epsilon=eps))
    return out


def subset_suite(Q: QuotientSpace, beta: float = an.DEFAULT_BETA, cap: int = SUBSET_CAP) -> list[Record]:
    """Best orbit subset for the uniform-versus-noise Poincare form, among balanced subsets."""
    noise = an.NoiseParam.from_beta(beta, Q.k, clamp=True)
    Y, C = best_subset_poincare(Q, noise.p, (0.25, 2.0 / 3.0), cap=cap)
    ratio, ok = ratio_condition(Q, Y)
    return [
        reported("best_balanced_subset", "subset-poincare",
                 {"orbits": [int(a) for a in Y], "C_opt": C, "mass_ratio": ratio, "ratio_in_range": ok},
                 k=Q.k, p=noise.p, p_clamped=noise.clamped, mass_bounds=[0.25, 2.0 / 3.0])
    ]


# ----------------------------------------------------------------------------
# negative type and sketching


def sketch_suite(M: FiniteMetric, r: float, D: float, s: int, trials: int, seed: int) -> list[Record]:
    out = []
    ok, lam = negative_type_test(M)
    out.append(check("schoenberg", "negative-type", ok, 1e-9, {"min_eigenvalue": lam}, n=M.n))
    if not ok:
        return out
    V = hilbert_sqrt_embed(M)
    sq = ((V[:, None, :] - V[None, :, :]) ** 2).sum(-1)
    err = float(np.abs(sq - M.d).max())
    out.append(check("sqrt_embedding", "embedding-transfer", err <= 1e-7, 1e-7, {"max_abs_error": err}, n=M.n))

    trials = max(trials, MIN_TRIALS)
    rep = sketch_negative_type(M, r, D, s, seed, trials)
    vals = rep.to_dict()
    inputs = dict(n=M.n, r=r, D=D, s=s, trials=trials, seed=seed)
    for side in ("near", "far"):
        rate = vals[f"{side}_success"]
        if rate is None:
            out.append(reported(f"{side}_success", "sketchability", dict(vals, note=f"no {side} pairs at this scale"), **inputs))
            continue
        margin = rep.margin(side)
        vals_side = dict(vals, margin_se=margin)
        out.append(check(f"{side}_success", "sketchability", rate >= THRESHOLD and margin > SKETCH_MARGIN_SE,
                         SKETCH_MARGIN_SE, vals_side, **inputs))
    return out
