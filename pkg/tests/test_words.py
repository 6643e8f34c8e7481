import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ifsdim as F
from ifsdim.errors import TooFewPoints


def test_compose_forward_examples(cantor):
    half = F.IfsSystem(1, [F.Affine1D(0.5, 0.0)], F.ConstantField([1.0]))
    assert F.compose_forward(half, (), 5.0) == 5.0
    assert F.compose_forward(half, (1, 1), 8.0) == 2.0
    # first symbol acts first: word (1,2) is h2(h1(x))
    assert F.compose_forward(cantor.system, (1, 2), 0.0) == pytest.approx(2 / 3, abs=1e-15)


def test_compose_backward_examples(cantor):
    assert F.compose_backward(cantor.system, (1, 2), 0.0) == pytest.approx(2 / 9, abs=1e-15)
    assert F.compose_backward(cantor.system, (), 1.23) == 1.23
    # hand-iterated: 0 -> 2/3 -> 8/9 -> 26/27
    assert F.compose_backward(cantor.system, (2, 2, 2), 0.0) == pytest.approx(26 / 27, abs=1e-15)


def test_word_probability_constant_fields(cantor):
    assert F.word_probability(cantor.system, (1, 2, 1), 0.3) == pytest.approx(0.125, abs=1e-15)
    dec = F.decade_band_system(0.7)
    assert F.word_probability(dec.system, (1, 2, 1), 2.0) == pytest.approx(0.7 * 0.3 * 0.7, abs=1e-15)
    assert F.word_probability(cantor.system, (), 0.0) == 1.0


def test_word_probability_place_dependent_matches_stepwise_oracle():
    field = F.SmoothField([F.GaussianWeight(base=1.0),
                           F.GaussianWeight(base=0.2, amp=1.0, center=0.3, width=0.7)],
                          p_min=0.05)
    sys1 = F.IfsSystem(1, [F.Affine1D(0.5, 0.0), F.Affine1D(0.5, 0.5)], field)
    word = (2, 1, 2, 2, 1)
    # brute-force product along the orbit
    x = 0.0
    expected = 1.0
    for s in word:
        expected *= sys1.probability_vector(x)[s - 1]
        x = sys1.eval_map(s, x)
    assert F.word_probability(sys1, word, 0.0) == pytest.approx(expected, rel=1e-12)


@given(st.lists(st.integers(1, 2), min_size=0, max_size=6),
       st.lists(st.integers(1, 2), min_size=0, max_size=6))
@settings(max_examples=40, deadline=None)
def test_word_probability_concatenation_identity(head, tail):
    field = F.SmoothField([F.GaussianWeight(base=1.0),
                           F.GaussianWeight(base=0.2, amp=1.0, center=0.3, width=0.7)],
                          p_min=0.05)
    sys1 = F.IfsSystem(1, [F.Affine1D(0.5, 0.0), F.Affine1D(0.5, 0.5)], field)
    x = 0.1
    p_head = F.word_probability(sys1, head, x)
    mid = F.compose_forward(sys1, head, x)
    p_tail = F.word_probability(sys1, tail, mid)
    p_full = F.word_probability(sys1, tuple(head) + tuple(tail), x)
    if p_full > 0 and p_head * p_tail > 0:
        assert abs(math.log(p_full) - math.log(p_head) - math.log(p_tail)) <= 1e-12


def test_parse_format_word_roundtrip():
    assert F.parse_word("121") == (1, 2, 1)
    assert F.format_word((1, 2, 1)) == "121"
    assert F.parse_word("") == ()
    with pytest.raises(ValueError):
        F.parse_word("1,2")


@given(st.lists(st.integers(1, 9), min_size=0, max_size=12))
@settings(max_examples=50, deadline=None)
def test_word_serialization_roundtrip(symbols):
    w = tuple(symbols)
    assert F.parse_word(F.format_word(w)) == w


def test_coding_map_fixed_points(cantor):
    half_up = F.IfsSystem(1, [F.Affine1D(0.5, 1.0)], F.ConstantField([1.0]))
    res = F.coding_map(half_up, F.FixedStream([1]), 0.0, tol=1e-10, max_n=200)
    assert res.converged
    assert res.point == pytest.approx(2.0, abs=1e-9)
    res2 = F.coding_map(cantor.system, F.FixedStream([2]), 0.0, tol=1e-10, max_n=200)
    assert res2.point == pytest.approx(1.0, abs=1e-9)


def test_coding_map_two_cycle(cantor):
    # alternating symbols converge to the fixed point of h1 o h2: x = 1/4
    res = F.coding_map(cantor.system, F.FixedStream([1, 2], tail="cycle"), 0.0,
                       tol=1e-12, max_n=300)
    assert res.converged
    assert res.point == pytest.approx(0.25, abs=1e-10)


def test_coding_map_equivariance(cantor):
    tol = 1e-12
    for seed in (3, 11, 42):
        stream = F.RandomStream(2, seed=seed)
        for sym in (1, 2):
            pi = F.coding_map(cantor.system, stream, 0.0, tol=tol, max_n=400)
            pre = F.coding_map(cantor.system, F.PrependedStream(sym, stream), 0.0,
                               tol=tol, max_n=400)
            assert pi.converged and pre.converged
            assert abs(pre.point - cantor.system.eval_map(sym, pi.point)) <= 10 * tol


def test_coding_map_x0_independent(cantor):
    tol = 1e-12
    a = F.coding_map(cantor.system, F.RandomStream(2, seed=8), 0.0, tol=tol, max_n=400)
    b = F.coding_map(cantor.system, F.RandomStream(2, seed=8), 100.0, tol=tol, max_n=400)
    assert a.converged and b.converged
    assert abs(a.point - b.point) <= 10 * tol


def test_coding_map_not_converged_is_a_value(cantor):
    res = F.coding_map(cantor.system, F.RandomStream(2, seed=1), 50.0, tol=1e-14, max_n=3)
    assert not res.converged
    assert res.last_increment > 1e-14


def test_coding_map_converges_on_the_band_system(decade):
    res = F.coding_map(decade.system, F.RandomStream(2, seed=5, weights=[0.7, 0.3]),
                       2.0, tol=1e-9, max_n=2000)
    assert res.converged
    lo, hi = 1.0, 3.0e6
    assert lo < res.point < hi


def test_image_diameter(cantor):
    half = F.IfsSystem(1, [F.Affine1D(0.5, 0.0)], F.ConstantField([1.0]))
    assert F.image_diameter(half, (1, 1), [0.0, 1.0]) == pytest.approx(0.25, abs=1e-15)
    assert F.image_diameter(half, (), [0.0, 3.0]) == 3.0
    for n in (3, 7, 12):
        assert F.image_diameter(half, (1,) * n, [0.0, 1.0]) == pytest.approx(2.0 ** -n, rel=1e-12)
    with pytest.raises(TooFewPoints):
        F.image_diameter(half, (1,), [0.5])


def test_cylinder_measure_constant_field_exact(cantor, cantor_measure_1m):
    for n in (1, 2, 5):
        est = F.cylinder_measure_plus(cantor.system, (1,) * n, cantor_measure_1m)
        assert est.value == pytest.approx(2.0 ** -n, abs=1e-12)
        assert est.stderr <= 1e-12
    dec = F.decade_band_system(0.7)
    est = F.cylinder_measure_plus(dec.system, (1, 1), cantor_measure_1m)
    assert est.value == pytest.approx(0.49, abs=1e-12)


def test_cylinder_sum_over_words_is_one(cantor, cantor_measure_1m):
    from itertools import product
    for n in (1, 3, 6):
        total = 0.0
        pooled_var = 0.0
        for word in product((1, 2), repeat=n):
            est = F.cylinder_measure_plus(cantor.system, word, cantor_measure_1m)
            total += est.value
            pooled_var += est.stderr ** 2
        assert abs(total - 1.0) <= max(3.0 * math.sqrt(pooled_var), 1e-9)


def test_cylinder_reversal_identity(cantor, cantor_measure_1m):
    # the mirror measure is defined as the reversed-word mass: bitwise equal
    plus_rev = F.cylinder_measure_plus(cantor.system, (2, 1), cantor_measure_1m)
    minus = F.cylinder_measure_minus(cantor.system, (1, 2), cantor_measure_1m)
    assert minus.value == plus_rev.value
    # constant fields make the product order-independent
    plus = F.cylinder_measure_plus(cantor.system, (1, 2), cantor_measure_1m)
    assert minus.value == pytest.approx(plus.value, abs=1e-12)
    # palindromes coincide with their own reversal
    pal_p = F.cylinder_measure_plus(cantor.system, (1, 2, 1), cantor_measure_1m)
    pal_m = F.cylinder_measure_minus(cantor.system, (1, 2, 1), cantor_measure_1m)
    assert pal_m.value == pal_p.value


def test_cylinder_place_dependent_against_direct_average():
    field = F.SmoothField([F.GaussianWeight(base=1.0),
                           F.GaussianWeight(base=0.2, amp=1.0, center=0.3, width=0.7)],
                          p_min=0.05)
    sys1 = F.IfsSystem(1, [F.Affine1D(0.5, 0.0), F.Affine1D(0.5, 0.5)], field)
    traj = F.chaos_game(sys1, 0.5, n_steps=40_000, burn_in=2_000, seed=21)
    measure = F.empirical_measure([traj])
    est = F.cylinder_measure_plus(sys1, (1,), measure)
    # independent oracle: the same integral from a fresh trajectory
    traj2 = F.chaos_game(sys1, 0.25, n_steps=40_000, burn_in=2_000, seed=77)
    direct = sys1.prob_matrix(traj2.points)[:, 0]
    se = math.sqrt(est.stderr ** 2 + np.var(direct) / len(direct)) * 3 + 3e-3
    assert abs(est.value - direct.mean()) <= se


def test_random_stream_prefix_stability_and_split():
    s = F.RandomStream(3, seed=5)
    first = s.prefix(10).copy()
    np.testing.assert_array_equal(s.prefix(4), first[:4])
    np.testing.assert_array_equal(s.prefix(10), first)
    assert set(np.unique(s.prefix(200))) <= {1, 2, 3}
    child = s.split(0)
    assert not np.array_equal(child.prefix(20), s.prefix(20))


def test_fixed_stream_tails():
    cyc = F.FixedStream([1, 2], tail="cycle")
    np.testing.assert_array_equal(cyc.prefix(5), [1, 2, 1, 2, 1])
    rep = F.FixedStream([1, 2], tail="repeat_last")
    np.testing.assert_array_equal(rep.prefix(5), [1, 2, 2, 2, 2])
