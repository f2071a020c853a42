import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubequot.analysis import (
    NoiseParam,
    balanced_invariant_set,
    boundary_direct,
    boundary_fourier,
    boundary_measure,
    influence_kernel,
    influence_sum_check,
    influences,
    invariant_sign_function,
    kko_condition,
    level_cutoff,
    level_influence,
    snowflaked_averages,
    tail_mass,
    transitive_influence_bound,
)
from cubequot.cube import CubeFunction, popcount, variance, walsh_function
from cubequot.quotient import build_quotient, cyclic_group, group_from_generators, trivial_group

# mean of d^(3/4) over all 4^6 pairs for the rotation quotient of F_2^6,
# from a brute-force loop over pairs and rotations
C6_MEAN_PAIR_075 = 1.4321748603883906


def hamming(x, y):
    return bin(x ^ y).count("1")


def test_noise_param_from_beta():
    p = NoiseParam.from_beta(0.5, 64)
    assert p.p == pytest.approx(1 / 3) and not p.clamped
    with pytest.raises(ValueError):
        NoiseParam.from_beta(0.25, 8)
    c = NoiseParam.from_beta(0.25, 8, clamp=True)
    assert c.p == 0.5 and c.clamped
    with pytest.raises(ValueError):
        NoiseParam(1.5)


def test_level_cutoff():
    assert level_cutoff(0.25, 8) == 1
    assert level_cutoff(0.25, 16) == 1
    assert level_cutoff(0.25, 32) == 2
    assert level_cutoff(0.5, 1024) == 5


def test_boundary_empty_and_dictator():
    k = 6
    assert boundary_measure(np.zeros(64, bool), 0.3, k) == 0.0
    x = np.arange(1 << k)
    dictator = (x & 1) == 0
    for p in (0.0, 0.01, 0.1, 0.3, 0.5, 1.0):
        # direct enumeration of pairs, independent of the package
        direct = sum(
            p ** hamming(a, b) * (1 - p) ** (k - hamming(a, b)) for a in x[dictator] for b in x[~dictator]
        ) / 2**k
        assert abs(direct - p / 2) <= 1e-12
        assert abs(boundary_measure(dictator, p, k) - p / 2) <= 1e-12


def test_boundary_accepts_indicator_function():
    f = CubeFunction.indicator(4, [0, 3, 5])
    assert boundary_measure(f, 0.2) == pytest.approx(boundary_direct(f.values.astype(bool), 4, 0.2), abs=1e-15)
    with pytest.raises(ValueError):
        boundary_measure(CubeFunction(2, [0, 0.5, 1, 1]), 0.1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.floats(0, 1), st.data())
def test_heat_identity_property(k, p, data):
    bits = data.draw(st.lists(st.booleans(), min_size=1 << k, max_size=1 << k))
    mask = np.array(bits)
    assert abs(boundary_fourier(mask, k, p) - boundary_direct(mask, k, p)) <= 1e-9


def test_heat_identity_random_k10():
    rng = np.random.default_rng(0)
    for _ in range(5):
        mask = rng.random(1024) < 0.3
        for p in (0.01, 0.3):
            assert abs(boundary_fourier(mask, 10, p) - boundary_direct(mask, 10, p)) <= 1e-9


def majority3():
    return CubeFunction.from_callable(3, lambda x: 1.0 if bin(x).count("1") <= 1 else -1.0)


def test_majority_influences():
    f = majority3()
    # spectrum of majority: 1/2 on each singleton, -1/2 on {1,2,3}
    assert np.allclose(influences(f, 1).per_coordinate, 0.25)
    assert np.allclose(influences(f, 2).per_coordinate, 0.25)
    assert np.allclose(influences(f, 3).per_coordinate, 0.5)
    for j in range(3):
        assert level_influence(f, j, 3) == pytest.approx(0.5, abs=1e-12)


def test_influence_kernel_is_a_walsh_sum():
    k, j, m = 5, 2, 2
    R = influence_kernel(k, j, m).values
    expect = sum(
        walsh_function(A, k).values for A in range(1 << k) if (A >> j) & 1 and bin(A).count("1") <= m
    )
    assert np.allclose(R, expect, atol=1e-12)


def test_level_influence_two_routes_random_k8():
    rng = np.random.default_rng(1)
    f = CubeFunction(8, rng.standard_normal(256))
    for j in range(8):
        for m in (1, 3, 8):
            level_influence(f, j, m)  # raises if the two forms disagree


def test_influence_rejects_bad_arguments():
    f = majority3()
    with pytest.raises(ValueError):
        influences(f, 0)
    with pytest.raises(ValueError):
        level_influence(f, 3, 1)


def test_influence_sum_examples():
    k, m = 6, 3
    total, bound, ok = influence_sum_check(walsh_function(0b010011, k), m)
    assert total == pytest.approx(3) and bound == pytest.approx(3) and ok
    total, bound, ok = influence_sum_check(CubeFunction(k, np.ones(64)), m)
    assert total == 0 and bound == 0 and ok


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.data())
def test_influence_sum_property(k, data):
    vals = data.draw(st.lists(st.floats(-100, 100), min_size=1 << k, max_size=1 << k))
    f = CubeFunction(k, np.array(vals))
    for m in range(1, k + 1):
        assert influence_sum_check(f, m)[2]


def test_transitive_bound_parity():
    k = 8
    f = walsh_function((1 << k) - 1, k)
    top, bound, ok = transitive_influence_bound(f, cyclic_group(k), 3)
    assert top == 0 and ok


def test_transitive_bound_random_invariant_sets():
    Q = build_quotient(cyclic_group(8))
    rng = np.random.default_rng(2)
    for _ in range(10):
        orbits = np.flatnonzero(rng.random(Q.q) < 0.5)
        f = invariant_sign_function(Q, orbits)
        per_m = []
        for m in range(1, 9):
            top, bound, ok = transitive_influence_bound(f, Q.group, m)
            assert ok
            per = influences(f, m).per_coordinate
            assert per.max() - per.min() <= 1e-12
            per_m.append(top)


def test_transitive_bound_preconditions():
    f = walsh_function(1, 4)
    with pytest.raises(ValueError):
        transitive_influence_bound(f, cyclic_group(4), 1)
    H = group_from_generators(4, [(1, 0, 2, 3)])
    with pytest.raises(ValueError):
        transitive_influence_bound(CubeFunction(4, np.ones(16)), H, 1)


def test_tail_mass_examples():
    k = 6
    for A in (0b1, 0b111, 0b111111):
        f = walsh_function(A, k)
        for m in range(k + 1):
            assert tail_mass(f, m) == pytest.approx(1.0 if bin(A).count("1") > m else 0.0)
    rng = np.random.default_rng(3)
    g = CubeFunction(k, rng.standard_normal(64))
    assert tail_mass(g, k) == 0
    assert tail_mass(g, 0) == pytest.approx(variance(g), abs=1e-12)


def test_kko_examples():
    assert kko_condition(CubeFunction(4, np.ones(16)), 2, 1.5)
    assert not kko_condition(walsh_function(1, 4), 1, 2.0)
    with pytest.raises(ValueError):
        kko_condition(walsh_function(1, 4), 1, 1.0)


def test_kko_balanced_invariant_k16_evaluates():
    Q = build_quotient(cyclic_group(16))
    f = invariant_sign_function(Q, balanced_invariant_set(Q, seed=0))
    assert isinstance(kko_condition(f, 2, 1.1), bool)


def test_snowflaked_averages():
    k = 5
    mp, me = snowflaked_averages(build_quotient(trivial_group(k)), 0.0)
    assert mp == pytest.approx(k / 2) and me == pytest.approx(1.0)
    mp, me = snowflaked_averages(build_quotient(cyclic_group(6)), 0.25)
    assert mp == pytest.approx(C6_MEAN_PAIR_075, abs=1e-12)
    assert me == pytest.approx(1.0)
    for eps in (0.0, 0.4, 0.9):
        assert snowflaked_averages(build_quotient(cyclic_group(7)), eps)[1] <= 1 + 1e-12


def test_balanced_set_has_at_most_half_mass():
    for k in (6, 8, 10):
        Q = build_quotient(cyclic_group(k))
        Z = balanced_invariant_set(Q, seed=k)
        mass = Q.orbit_sizes[Z].sum()
        assert 0 < mass <= 1 << (k - 1)
        assert mass >= (1 << (k - 1)) - k  # greedy fill stops within one orbit of half
