import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipfree.metric import Molecule
from lipfree.netmaps import (check_net, cluster_instance, in_model_set, l1_sum_check,
                             large_distance_lipschitz, norm_retraction_r, peak_retraction_s,
                             product_case, product_retraction_R, quadrant_map, quadrant_map_inv,
                             separation_hypothesis, sup_norm, three_point_instance,
                             verify_quadrant_constants)

vectors = st.lists(st.floats(-60, 60, allow_nan=False), min_size=1, max_size=6).map(np.array)


class TestQuadrant:
    @pytest.mark.parametrize("z,w", [((1, 0), (1, 0)), ((0, 1), (-1, 0)), ((1, 1), (0, math.sqrt(2)))])
    def test_values(self, z, w):
        assert quadrant_map(z) == pytest.approx(w, abs=1e-15)

    def test_inverse_values(self):
        assert quadrant_map_inv((-1, 0)) == pytest.approx((0, 1), abs=1e-15)

    def test_origin_rejected(self):
        with pytest.raises(ValueError):
            quadrant_map((0, 0))
        with pytest.raises(ValueError):
            quadrant_map_inv((0, 0))

    def test_outside_domain_rejected(self):
        with pytest.raises(ValueError):
            quadrant_map((-1, 1))
        with pytest.raises(ValueError):
            quadrant_map_inv((1, -1))

    def test_axis_pair_ratio(self):
        a, b = quadrant_map((1, 0)), quadrant_map((0, 1))
        assert np.linalg.norm(a - b) / math.sqrt(2) == pytest.approx(math.sqrt(2))

    @settings(max_examples=200)
    @given(st.floats(1e-3, 1e3), st.floats(0, math.pi / 2))
    def test_round_trip_and_modulus(self, r, t):
        z = np.array([r * math.cos(t), r * math.sin(t)])
        w = quadrant_map(z)
        assert np.linalg.norm(w) == pytest.approx(r, rel=1e-12)
        assert quadrant_map_inv(w) == pytest.approx(z, rel=1e-12, abs=1e-12 * r)

    def test_constants(self):
        rep = verify_quadrant_constants(20_000, seed=3)
        assert rep.passed, rep.summary()


class TestPeak:
    @pytest.mark.parametrize("x,expected", [
        ((5, 1, 0), (4, 0, 0)),
        ((2, 2, 0), (0, 0, 0)),
        ((0.5, 0, 0), (0, 0, 0)),
        ((1, 5, 0), (0, 4, 0)),
        ((3.7,), (3,)),
        ((-1, -2), (0, 0)),
    ])
    def test_values(self, x, expected):
        assert tuple(peak_retraction_s(x)) == expected

    def test_implicit_zero_caps_the_multiple(self):
        # a small peak beside large negative entries only counts up from 0
        assert tuple(peak_retraction_s((-47.0, 1.5))) == (0, 1)

    def test_pair_from_docs(self):
        a, b = peak_retraction_s((5, 1, 0)), peak_retraction_s((1, 5, 0))
        assert sup_norm(a - b) / sup_norm(np.subtract((5, 1, 0), (1, 5, 0))) == 1

    @settings(max_examples=300)
    @given(vectors)
    def test_shape(self, x):
        out = peak_retraction_s(x)
        assert np.count_nonzero(out) <= 1
        assert out.min() >= 0 and np.all(out == np.floor(out))
        assert sup_norm(out) <= max(x.max(), 0) + 1e-9


class TestNormRetraction:
    @settings(max_examples=300)
    @given(vectors)
    def test_constraints(self, x):
        p = norm_retraction_r(x)
        n = sup_norm(x)
        assert math.floor(n + 1e-9) - 1e-9 <= sup_norm(p) <= n + 1e-9
        assert sup_norm(p - x) <= 4
        assert np.all(p == np.round(p))

    def test_integer_norm_kept(self):
        p = norm_retraction_r((3.0, -1.4, 2.9))
        assert sup_norm(p) == 3

    def test_net_points_fixed(self):
        for x in [(0, 0), (3, -2), (-5, 5)]:
            assert tuple(norm_retraction_r(x)) == x

    def test_explicit_net(self):
        net = np.array([(0, 0), (2, 0), (0, 2), (4, 4), (2, 2)], dtype=float)
        check_net(net, 1.0)
        assert tuple(norm_retraction_r((2.3, 1.1), net)) == (2, 2)
        with pytest.raises(ValueError):
            norm_retraction_r((9.5, 9.5), net)

    def test_bad_net(self):
        with pytest.raises(ValueError):
            check_net(np.array([(0, 0), (0.5, 0)]))


class TestProduct:
    def test_zero_cases(self):
        for y, x in [((0, 0), (3, 1)), ((5, 1), (0, 0))]:
            a, b = product_retraction_R(y, x)
            assert not a.any() and not b.any()

    def test_model_set_is_fixed(self):
        y, x = np.array([0.0, 4, 0]), np.array([4.0, -2])
        a, b = product_retraction_R(y, x)
        assert np.array_equal(a, y) and np.array_equal(b, x)

    def test_second_case(self):
        y, x = (7, 1, 0), (5, 2.5)
        assert product_case(y, x) == 2
        a, b = product_retraction_R(y, x)
        assert sup_norm(a) == sup_norm(b) == 5
        assert in_model_set(a, b)

    def test_first_case(self):
        y, x = (3, 0), (10.2, -4)
        assert product_case(y, x) == 1
        a, b = product_retraction_R(y, x)
        assert sup_norm(a) == 3 and sup_norm(b) == 3
        assert in_model_set(a, b)

    @settings(max_examples=200)
    @given(vectors, vectors)
    def test_always_in_model_set(self, y, x):
        a, b = product_retraction_R(y, x)
        assert in_model_set(a, b)
        assert sup_norm(a) <= min(sup_norm(y), sup_norm(x)) + 1e-9


@pytest.mark.parametrize("map_id", ["s", "r", "R"])
def test_large_distance_bounds(map_id):
    rep = large_distance_lipschitz(map_id, 1.0, 2000, seed=11)
    assert rep.passed, rep.summary()


def test_large_distance_threshold_guard():
    with pytest.raises(ValueError):
        large_distance_lipschitz("s", 0.5)


class TestL1Sum:
    def test_three_points_tight(self):
        rep = l1_sum_check(*three_point_instance(0.5), 0.5)
        assert rep.passed
        assert rep.extras["A"] == 2 and rep.extras["B"] == 1

    def test_three_points_same_sign(self):
        rep = l1_sum_check(*three_point_instance(0.5, sign=1), 0.5)
        assert rep.extras["B"] == rep.extras["A"] == 2

    def test_single_cluster(self):
        sp, N, cl, mols = three_point_instance(1.0)
        rep = l1_sum_check(sp, N, cl[:1], mols[:1], 1.0)
        assert rep.extras["A"] == rep.extras["B"]

    def test_zero_molecules(self):
        sp, N, cl, _ = three_point_instance(1.0)
        rep = l1_sum_check(sp, N, cl, [Molecule(), Molecule()], 1.0)
        assert rep.extras["A"] == rep.extras["B"] == 0

    def test_hypothesis_violation(self):
        sp, N, cl, mols = three_point_instance(0.5)
        assert separation_hypothesis(sp, N, cl, 2.0) is not None
        with pytest.raises(ValueError):
            l1_sum_check(sp, N, cl, mols, 2.0)

    def test_overlapping_clusters(self):
        sp, N, _, _ = three_point_instance(1.0)
        with pytest.raises(ValueError):
            l1_sum_check(sp, N, [[1, 2], [2]], [Molecule.dirac(1), Molecule.dirac(2)], 1.0)

    @pytest.mark.parametrize("K", [0.5, 1, 2, 4])
    def test_generated_instances(self, K):
        rng = np.random.default_rng(int(K * 10))
        for _ in range(5):
            sp, N, cl, mols = cluster_instance(rng, K)
            assert separation_hypothesis(sp, N, cl, K) is None
            assert l1_sum_check(sp, N, cl, mols, K).passed
