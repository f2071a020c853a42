import numpy as np
import pytest

from cubequot.embed import FiniteMetric, hamming_metric, hilbert_sqrt_embed, path_metric
from cubequot.sketch import (
    THRESHOLD,
    bit_disagreement_rate,
    build_euclidean_sketch,
    simulate,
    sketch_negative_type,
)


def test_identical_points_sketch_identically():
    pts = np.array([[0.3, -1.2], [0.3, -1.2]])
    scheme = build_euclidean_sketch(pts, 1.0, 4.0, 32, seed=1)
    for t in range(20):
        draw = scheme.draw(t)
        a, b = draw.sketch(pts)
        assert np.array_equal(a, b)
        assert draw.decide(a, b) == 0


def test_parameter_validation():
    with pytest.raises(ValueError):
        build_euclidean_sketch(np.zeros((2, 2)), 0.0, 4.0, 8, 0)
    with pytest.raises(ValueError):
        build_euclidean_sketch(np.zeros((2, 2)), 1.0, 0.5, 8, 0)
    with pytest.raises(ValueError):
        build_euclidean_sketch(np.zeros((2, 2)), 1.0, 4.0, 0, 0)
    scheme = build_euclidean_sketch(np.zeros((2, 2)), 1.0, 4.0, 8, 0)
    with pytest.raises(ValueError):
        simulate(scheme, np.zeros((2, 2)), trials=10)
    with pytest.raises(ValueError):
        simulate(scheme, np.zeros((2, 3)), trials=100)


def test_distant_points_look_independent():
    pts = np.array([[0.0, 0.0], [1000.0, 0.0]])
    rates = []
    for s in (8, 64, 256):
        scheme = build_euclidean_sketch(pts, 1.0, 4.0, s, seed=2)
        rep = simulate(scheme, pts, trials=200, r=1.0, D=4.0)
        rates.append(rep.far_success)
    assert rates[-1] >= 0.95
    assert rates[0] <= rates[-1]
    mean, se = bit_disagreement_rate(build_euclidean_sketch(pts, 1.0, 4.0, 64, 2), 1000.0, trials=100)
    assert abs(mean - 0.5) < 4 * se + 0.02


def test_two_scales_d8():
    # one pair at distance r, one at 8r
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 8.0001]])
    scheme = build_euclidean_sketch(pts, 1.0, 8.0, 64, seed=3)
    rep = simulate(scheme, pts, trials=1000)
    assert rep.near_pairs == 1 and rep.far_pairs == 2
    assert rep.near_success >= THRESHOLD and rep.far_success >= THRESHOLD


def test_reproducible_bit_for_bit():
    M = hamming_metric(4)
    a = sketch_negative_type(M, 1.0, 3.0, 32, seed=9, trials=200).to_dict()
    b = sketch_negative_type(M, 1.0, 3.0, 32, seed=9, trials=200).to_dict()
    c = sketch_negative_type(M, 1.0, 3.0, 32, seed=10, trials=200).to_dict()
    assert a == b
    assert a != c


def test_single_point_is_vacuous():
    M = FiniteMetric(np.zeros((1, 1)))
    scheme = build_euclidean_sketch(np.zeros((1, 0)), 1.0, 2.0, 8, 0)
    rep = simulate(scheme, M, trials=100)
    assert rep.near_vacuous and rep.far_vacuous
    assert rep.near_success is None and rep.margin("far") is None


def test_equilateral_all_far():
    n = 6
    M = FiniteMetric(10.0 * (np.ones((n, n)) - np.eye(n)))
    rep = sketch_negative_type(M, 1.0, 4.0, 64, seed=5, trials=300)
    assert rep.near_vacuous and rep.far_pairs == n * (n - 1) // 2
    assert rep.far_success >= THRESHOLD


def test_two_point_metric():
    M = FiniteMetric([[0.0, 100.0], [100.0, 0.0]])
    far = sketch_negative_type(M, 1.0, 4.0, 64, seed=1, trials=200)
    assert far.far_success >= 0.99
    # separated scales: the pair sits far inside r
    near = sketch_negative_type(M, 1e6, 4.0, 64, seed=1, trials=200)
    assert near.near_success >= 0.99


def test_gap_pairs_are_excluded():
    M = path_metric([(0, 1), (1, 2), (2, 3)], 4)
    rep = sketch_negative_type(M, 1.0, 2.0, 16, seed=0, trials=100)
    # distances 1 (3 pairs), 2 (2 pairs, in the gap), 3 (1 pair)
    assert rep.near_pairs == 3 and rep.far_pairs == 1


def test_power_transfer():
    # sketching sqrt(d) at gap D is a scheme for d at gap D^2 with the same randomness
    M = hamming_metric(5)
    a = sketch_negative_type(M, 1.0, 9.0, 64, seed=4, trials=300)
    V = hilbert_sqrt_embed(M)
    scheme = build_euclidean_sketch(V, 1.0, 3.0, 64, 4)
    b = simulate(scheme, V, 300, kernel=np.sqrt(M.d), r=1.0, D=3.0)
    assert a.near_success == b.near_success and a.far_success == b.far_success


def test_monotone_in_s():
    M = hamming_metric(5)
    small = sketch_negative_type(M, 1.0, 4.0, 64, seed=6, trials=400)
    large = sketch_negative_type(M, 1.0, 4.0, 256, seed=6, trials=400)
    for side in ("near", "far"):
        a = getattr(small, f"{side}_success")
        b = getattr(large, f"{side}_success")
        se = getattr(small, f"{side}_stderr")
        assert b >= a - 2 * se


def test_collision_decreases_with_distance():
    scheme = build_euclidean_sketch(np.zeros((1, 3)), 1.0, 4.0, 64, seed=8)
    rates = [bit_disagreement_rate(scheme, t, trials=100, seed=1) for t in (0.5, 1.0, 2.0, 4.0, 8.0)]
    for (m0, s0), (m1, s1) in zip(rates, rates[1:]):
        assert m1 >= m0 - 2 * np.hypot(s0, s1)


def test_rejects_non_negative_type():
    M = path_metric([(i, j) for i in range(2) for j in range(2, 5)], 5)
    with pytest.raises(ValueError):
        sketch_negative_type(M, 1.0, 2.0, 16, seed=0, trials=100)


def test_report_fields():
    rep = sketch_negative_type(hamming_metric(3), 1.0, 2.5, 32, seed=0, trials=100)
    d = rep.to_dict()
    assert 0 <= d["near_success"] <= 1 and 0 <= d["far_success"] <= 1
    p = d["near_success"]
    assert d["near_stderr"] == pytest.approx(np.sqrt(p * (1 - p) / 100))
