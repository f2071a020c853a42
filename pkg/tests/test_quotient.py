import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubequot.quotient import (
    act,
    build_quotient,
    compose,
    cycles_to_perm,
    cyclic_group,
    cyclic_shift,
    dihedral_group,
    far_pair_estimate,
    far_pair_fraction,
    format_cycles,
    group_from_generators,
    inverse,
    is_metric,
    make_group,
    parse_permutation,
    pushforward_theta,
    quotient_distance,
    quotient_distance_bfs,
    quotient_distance_matrix,
    read_generators,
    symmetric_group,
    theta_mass,
    trivial_group,
)


def brute_orbits(k, perms):
    """Orbits by direct application of every listed permutation."""
    seen, orbits = set(), []
    for x in range(1 << k):
        if x in seen:
            continue
        orb = {act(g, x) for g in perms}
        seen |= orb
        orbits.append(orb)
    return orbits


def hamming(x, y):
    return bin(x ^ y).count("1")


def test_group_orders_and_transitivity():
    G = group_from_generators(4, [cyclic_shift(4)])
    assert G.order == 4 and G.transitive
    H = group_from_generators(3, [cycles_to_perm([(1, 2)], 3)])
    assert H.order == 2 and not H.transitive
    S = group_from_generators(4, [cycles_to_perm([(1, 2)], 4), cycles_to_perm([(1, 2, 3, 4)], 4)])
    assert S.order == 24 and S.transitive
    assert set(S.elements) == set(itertools.permutations(range(4)))


def test_group_closed_under_composition_and_inverse():
    G = dihedral_group(6)
    els = set(G.elements)
    assert G.order == 12
    assert tuple(range(6)) in els
    for g in G.elements:
        assert inverse(g) in els
        for h in G.elements:
            assert compose(g, h) in els


def test_order_cap_raises():
    with pytest.raises(OverflowError):
        symmetric_group(7, order_cap=1000)


def test_act_examples():
    assert act(tuple(range(5)), 0b10110) == 0b10110
    assert act(cyclic_shift(4), 0b0001) == 0b0010


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 9).flatmap(lambda k: st.tuples(st.just(k), st.permutations(range(k)), st.permutations(range(k)), st.integers(0, (1 << k) - 1))))
def test_action_is_a_homomorphism(args):
    k, g, h, x = args
    g, h = tuple(g), tuple(h)
    assert act(compose(g, h), x) == act(g, act(h, x))
    assert act(inverse(g), act(g, x)) == x
    # direct oracle: coordinate g[i] of gx is coordinate i of x
    y = act(g, x)
    assert all(((y >> g[i]) & 1) == ((x >> i) & 1) for i in range(k))


def test_parse_permutation_forms():
    assert parse_permutation("(1 2 3)", 4) == (1, 2, 0, 3)
    assert parse_permutation("(1,2)(3,4)", 4) == (1, 0, 3, 2)
    assert parse_permutation("2 3 1 4", 4) == (1, 2, 0, 3)
    assert parse_permutation(format_cycles((1, 2, 0, 3)), 4) == (1, 2, 0, 3)
    with pytest.raises(ValueError):
        parse_permutation("1 1 2", 3)
    with pytest.raises(ValueError):
        parse_permutation("(1 5)", 4)


def test_read_generators(tmp_path):
    p = tmp_path / "gens.txt"
    p.write_text("# cyclic shift and a reflection\n(1 2 3 4 5 6)\n6 5 4 3 2 1  # reversal\n\n")
    G = make_group("file", 6, p)
    assert G.order == 12 and set(G.elements) == set(dihedral_group(6).elements)
    gens = read_generators(p, 6)
    assert len(gens) == 2


def test_make_group_rejects_unknown():
    with pytest.raises(ValueError):
        make_group("alternating", 5)


def test_c4_orbits():
    Q = build_quotient(cyclic_group(4))
    assert sorted(Q.orbit_sizes.tolist()) == sorted([1, 4, 4, 2, 4, 1])
    assert Q.q == 6
    brute = brute_orbits(4, cyclic_group(4).elements)
    assert sorted(min(o) for o in brute) == sorted(Q.reps.tolist())


def test_s4_orbits_are_weight_classes():
    Q = build_quotient(symmetric_group(4))
    assert Q.q == 5
    assert sorted(Q.orbit_sizes.tolist()) == [1, 1, 4, 4, 6]
    w = np.array([bin(int(r)).count("1") for r in Q.reps])
    assert sorted(w.tolist()) == [0, 1, 2, 3, 4]


def test_trivial_quotient_is_the_cube():
    k = 5
    Q = build_quotient(trivial_group(k), with_distances=True)
    assert Q.q == 1 << k and np.all(Q.orbit_sizes == 1)
    x = np.arange(1 << k)
    H = np.array([[hamming(a, b) for b in x] for a in x])
    assert np.array_equal(Q.dist, H)
    assert np.array_equal(quotient_distance_bfs(Q), H)


@pytest.mark.parametrize("maker", [cyclic_group, dihedral_group, symmetric_group])
@pytest.mark.parametrize("k", [3, 5, 6])
def test_reps_are_orbit_minima(maker, k):
    G = maker(k)
    Q = build_quotient(G)
    for orb in brute_orbits(k, G.elements):
        a = Q.orbit_of[min(orb)]
        assert all(Q.orbit_of[x] == a for x in orb)
        assert Q.reps[a] == min(orb)
    assert Q.orbit_sizes.sum() == 1 << k


def test_quotient_distance_examples():
    G = cyclic_group(4)
    assert quotient_distance(G, 0b0001, 0b0111) == 2
    assert quotient_distance(G, 0b0011, 0b1001) == 0
    S = symmetric_group(4)
    for x in range(16):
        for y in range(16):
            brute = min(hamming(act(g, x), y) for g in itertools.permutations(range(4)))
            assert quotient_distance(S, x, y) == brute == abs(bin(x).count("1") - bin(y).count("1"))


@pytest.mark.parametrize("maker", [cyclic_group, dihedral_group, symmetric_group])
@pytest.mark.parametrize("k", range(2, 9))
def test_bfs_equals_min_over_group(maker, k):
    Q = build_quotient(maker(k))
    D = quotient_distance_matrix(Q)
    assert np.array_equal(D, quotient_distance_bfs(Q))
    assert is_metric(D)


def test_is_metric_catches_violation():
    D = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert not is_metric(D)
    assert is_metric(np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]]))


def test_pushforward_p0_is_diagonal():
    Q = build_quotient(cyclic_group(6))
    W = pushforward_theta(Q, 0.0).weights
    assert np.array_equal(W, np.diag(Q.measure))


@pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.9])
def test_pushforward_trivial_group_matches_formula(p):
    k = 4
    Q = build_quotient(trivial_group(k))
    W = pushforward_theta(Q, p).weights
    for a in range(Q.q):
        for b in range(Q.q):
            d = hamming(int(Q.reps[a]), int(Q.reps[b]))
            assert abs(W[a, b] - p**d * (1 - p) ** (k - d) / 2**k) <= 1e-15


@pytest.mark.parametrize("maker", [cyclic_group, dihedral_group])
def test_pushforward_marginals(maker):
    Q = build_quotient(maker(7))
    for p in (0.01, 0.2, 0.5):
        W = pushforward_theta(Q, p)
        r, c = W.marginals()
        assert np.abs(r - Q.measure).max() <= 1e-12
        assert np.abs(c - Q.measure).max() <= 1e-12
        assert np.allclose(W.weights, W.weights.T, atol=1e-15)


def test_pushforward_sampled_agrees_with_exact():
    Q = build_quotient(cyclic_group(8))
    exact = pushforward_theta(Q, 0.2).weights
    mc = pushforward_theta(Q, 0.2, exact_limit=0, samples=400_000, seed=3)
    assert not mc.exact
    z = np.abs(mc.weights - exact) / np.maximum(mc.stderr, 1e-12)
    assert np.all(z[exact > 1e-4] < 5.5)


def test_theta_mass_matches_pair_sum():
    k, p = 6, 0.17
    rng = np.random.default_rng(0)
    a, b = rng.random(64) < 0.4, rng.random(64) < 0.6
    x = np.arange(64)
    d = np.array([[hamming(i, j) for j in x] for i in x])
    direct = (p**d * (1 - p) ** (k - d))[np.ix_(a, b)].sum() / 64
    assert abs(theta_mass(k, p, a, b) - direct) <= 1e-15


def test_far_pair_fraction_examples():
    Q = build_quotient(cyclic_group(6))
    assert far_pair_fraction(Q, 1.0) == 1.0
    assert abs(far_pair_fraction(Q, 0.0) - np.sum(Q.measure**2)) <= 1e-15


def test_far_pair_monte_carlo_agrees_with_exact():
    Q = build_quotient(cyclic_group(10))
    exact = far_pair_estimate(Q, 0.2)
    Q2 = build_quotient(cyclic_group(10))
    mc = far_pair_estimate(Q2, 0.2, exact_limit=0, samples=200_000, seed=1)
    assert exact.exact and not mc.exact
    assert abs(mc.value - exact.value) <= 5 * mc.stderr


def test_far_pair_flags_large_groups():
    assert not far_pair_estimate(build_quotient(symmetric_group(6)), 0.02).hypothesis_holds
    assert far_pair_estimate(build_quotient(cyclic_group(8)), 0.02).hypothesis_holds


def test_far_pair_exact_k12_within_counting_bound():
    pf = far_pair_estimate(build_quotient(cyclic_group(12)), 0.02)
    # eta * k < 1, so only same-orbit pairs count
    Q = build_quotient(cyclic_group(12))
    assert pf.value == pytest.approx(np.sum(Q.measure**2), abs=1e-15)
    assert pf.value <= 2 ** (-12 / 3)


def test_lift_and_members():
    Q = build_quotient(cyclic_group(5))
    a = int(Q.orbit_of[0b00011])
    assert set(Q.members(a).tolist()) == {0b00011, 0b00110, 0b01100, 0b11000, 0b10001}
    m = Q.lift([a])
    assert m.sum() == 5 and m[0b00110]
