import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from fbm_link.estimator import (PairAccumulator, accumulate, finalize, inter_terms, intra_terms,
                                predict)
from fbm_link.graph import Graph, load_bundled, parse_edge_list
from fbm_link.partition import COMMUNITY, RESIDUAL, Block, Partition, sample_partitions

from conftest import make_graph
from oracles import beta_exact, exact_scores
from test_graph import graphs

valid_nm = st.integers(1, 500).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n)))


class TestIntraTerms:
    def test_three_clique(self):
        assert intra_terms(3, 3).ratio == pytest.approx(4 / 5, rel=1e-12)

    def test_two_node_community(self):
        # int p^2 dp / int p dp = (1/3) / (1/2)
        assert intra_terms(1, 1).ratio == pytest.approx(2 / 3, rel=1e-12)

    def test_empty_block_is_symmetric(self):
        assert intra_terms(6, 0).ratio == pytest.approx(0.5, rel=1e-12)

    def test_corrupt_stats(self):
        with pytest.raises(ValueError):
            intra_terms(3, 4)
        with pytest.raises(ValueError):
            intra_terms(0, 0)

    @given(valid_nm)
    def test_closed_form(self, nm):
        n, m = nm
        assert intra_terms(n, m).ratio == pytest.approx((n + 1) / (2 * n - m + 2), rel=1e-12)

    @settings(max_examples=60)
    @given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
    def test_numeric_integration(self, nm):
        n, m = nm
        t = intra_terms(n, m)
        num, _ = quad(lambda p: p ** (n + 1) * (1 - p) ** (n - m), 0, 1, epsabs=0, epsrel=1e-13, limit=200)
        den, _ = quad(lambda p: p ** n * (1 - p) ** (n - m), 0, 1, epsabs=0, epsrel=1e-13, limit=200)
        assert t.log_numerator == pytest.approx(math.log(num), rel=1e-8)
        assert t.log_denominator == pytest.approx(math.log(den), rel=1e-8)

    @given(valid_nm)
    def test_exact_rational(self, nm):
        n, m = nm
        if n > 60:
            return
        t = intra_terms(n, m)
        assert t.log_numerator == pytest.approx(math.log(beta_exact(n + 2, n - m + 1)), rel=1e-12)
        assert t.log_numerator <= t.log_denominator

    @given(st.integers(1, 400))
    def test_monotone_in_m(self, n):
        ratios = [intra_terms(n, m).ratio for m in range(n + 1)]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))


class TestInterTerms:
    @pytest.mark.parametrize("m,n,expected", [(0, 6, 1 / 8), (1, 6, 2 / 9), (6, 6, 0.5), (40, 40, 0.5)])
    def test_examples(self, m, n, expected):
        assert inter_terms(n, m).ratio == pytest.approx(expected, rel=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            inter_terms(0, 0)
        with pytest.raises(ValueError):
            inter_terms(3, -1)

    @given(valid_nm)
    def test_closed_form(self, nm):
        n, m = nm
        t = inter_terms(n, m)
        assert t.ratio == pytest.approx((m + 1) / (n + m + 2), rel=1e-12)
        assert t.log_numerator <= t.log_denominator

    @settings(max_examples=60)
    @given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
    def test_numeric_integration(self, nm):
        n, m = nm
        num, _ = quad(lambda p: p ** (m + 1) * (1 - p) ** n, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
        assert inter_terms(n, m).log_numerator == pytest.approx(math.log(num), rel=1e-8)

    @given(st.integers(1, 300), st.integers(0, 300))
    def test_monotone(self, n, m):
        assert inter_terms(n, m + 1).ratio > inter_terms(n, m).ratio
        assert inter_terms(n + 1, m).ratio < inter_terms(n, m).ratio

    def test_huge_blocks_finite(self):
        for n in (10**4, 10**6):
            t = inter_terms(n, 3)
            assert np.isfinite(t.log_numerator) and np.isfinite(t.log_denominator)
            assert 0 < t.ratio < 1
            assert np.isfinite(intra_terms(n, n - 1).log_numerator)


def _path_plus_triangle():
    # block {0,1,2}: path 0-1-2 (n=3, m=2); block {3,4,5}: triangle; no crossing links
    g = make_graph(6, [(0, 1), (1, 2), (3, 4), (4, 5), (3, 5)])
    p = Partition((Block((0, 1, 2), 2, COMMUNITY), Block((3, 4, 5), 3, COMMUNITY)),
                  (0, 0, 0, 1, 1, 1), 0, 0.6)
    return g, p


class TestAccumulate:
    def test_pair_inside_community(self):
        g, p = _path_plus_triangle()
        acc = accumulate(PairAccumulator(g), p, g)
        # (n + 1) / (2n - m + 2) with n = 3, m = 2
        assert finalize(acc).score_index(0, 2) == pytest.approx(4 / 6, rel=1e-12)

    def test_pair_across_blocks(self):
        g, p = _path_plus_triangle()
        acc = accumulate(PairAccumulator(g), p, g)
        assert finalize(acc).score_index(0, 3) == pytest.approx(1 / 11, rel=1e-12)  # n = 9, m = 0

    def test_cross_six_pairs(self):
        g = make_graph(5, [(0, 1), (2, 3), (3, 4), (2, 4)])
        p = Partition((Block((0, 1), 1, COMMUNITY), Block((2, 3, 4), 3, COMMUNITY)), (0, 0, 1, 1, 1), 0, 1.0)
        scores = finalize(accumulate(PairAccumulator(g), p, g))
        assert scores.score_index(0, 2) == pytest.approx(1 / 8, rel=1e-12)

    def test_residual_pairs_use_sparse_form(self):
        g = make_graph(4, [(0, 1)])
        p = Partition((Block((0, 1), 1, COMMUNITY), Block((2, 3), 0, RESIDUAL)), (0, 0, 1, 1), 0, 1.0)
        scores = finalize(accumulate(PairAccumulator(g), p, g))
        assert scores.score_index(2, 3) == pytest.approx(1 / 3, rel=1e-12)  # 1 / (n + 2), n = 1

    def test_two_identical_samples(self):
        g, p = _path_plus_triangle()
        one = finalize(accumulate(PairAccumulator(g), p, g)).scores
        acc = PairAccumulator(g)
        accumulate(accumulate(acc, p, g), p, g)
        assert acc.sample_count == 2
        np.testing.assert_allclose(finalize(acc).scores, one, rtol=1e-12)

    def test_uncovered_pair(self, karate):
        g, p = _path_plus_triangle()
        with pytest.raises(ValueError):
            accumulate(PairAccumulator(karate), p, karate)

    def test_merge_matches_sequential(self, karate):
        parts = sample_partitions(karate, 1.0, 6, 4)
        seq = PairAccumulator(karate)
        for p in parts:
            accumulate(seq, p, karate)
        left, right = PairAccumulator(karate), PairAccumulator(karate)
        for p in parts[:3]:
            accumulate(left, p, karate)
        for p in parts[3:]:
            accumulate(right, p, karate)
        merged = left.merge(right)
        assert merged.sample_count == 6
        np.testing.assert_allclose(finalize(merged).scores, finalize(seq).scores, rtol=1e-12)


class TestFinalize:
    def test_empty(self, karate):
        with pytest.raises(ValueError):
            finalize(PairAccumulator(karate))

    def test_equal_weights_mean(self):
        g = make_graph(2, [])
        acc = PairAccumulator(g)
        d = -3.0
        acc.add_terms(np.array([math.log(0.5) + d]), np.array([d]))
        acc.add_terms(np.array([math.log(0.125) + d]), np.array([d]))
        assert finalize(acc).scores[0] == pytest.approx(5 / 16, rel=1e-12)

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.booleans(), st.integers(1, 10), st.integers(0, 10)), min_size=1, max_size=8))
    def test_unequal_weights_exact(self, draws):
        g = make_graph(2, [])
        acc = PairAccumulator(g)
        num = den = Fraction(0)
        for dense, n, m in draws:
            m = min(m, n)
            if dense:
                t = intra_terms(n, m)
                num += beta_exact(n + 2, n - m + 1)
                den += beta_exact(n + 1, n - m + 1)
            else:
                t = inter_terms(n, m)
                num += beta_exact(m + 2, n + 1)
                den += beta_exact(m + 1, n + 1)
            acc.add_terms(np.array([t.log_numerator]), np.array([t.log_denominator]))
        assert finalize(acc).scores[0] == pytest.approx(float(num / den), rel=1e-9)


class TestPredict:
    def test_triangle_empty(self, triangle):
        table = predict(triangle, 1.0, 5, 0)
        assert len(table) == 0
        assert table.to_csv() == "node_a,node_b,score\n"

    def test_empty_graph(self):
        with pytest.raises(ValueError):
            predict(Graph([], []), 1.0, 5, 0)

    def test_symmetric_lookup(self, karate):
        table = predict(karate, 1.0, 10, 0)
        assert table.score("1", "10") == table.score("10", "1")

    def test_covers_non_edges(self, karate):
        table = predict(karate, 1.0, 10, 0)
        assert len(table) == 34 * 33 // 2 - 78
        assert {tuple(p) for p in table.pairs.tolist()} == {tuple(p) for p in karate.non_edges().tolist()}
        assert np.all((table.scores > 0) & (table.scores < 1))

    def test_deterministic(self, karate):
        a = predict(karate, 0.8, 20, 5)
        b = predict(karate, 0.8, 20, 5)
        assert np.array_equal(a.scores, b.scores)

    @settings(max_examples=30, deadline=None)
    @given(graphs(max_nodes=12), st.integers(1, 5), st.sampled_from([0.5, 0.8, 1.0]), st.integers(0, 2**32))
    def test_matches_exact_oracle(self, g, samples, threshold, seed):
        if g.node_count < 2:
            return
        parts = sample_partitions(g, threshold, samples, seed)
        table = predict(g, threshold, samples, seed)
        expected = exact_scores(g, parts)
        assert len(expected) == len(table)
        for (i, j), frac in expected.items():
            assert table.score_index(i, j) == pytest.approx(float(frac), rel=1e-9)

    def test_csv_sorted_descending(self, karate):
        table = predict(karate, 1.0, 10, 0)
        lines = table.to_csv().splitlines()
        assert lines[0] == "node_a,node_b,score"
        values = [float(line.split(",")[2]) for line in lines[1:]]
        assert values == sorted(values, reverse=True)
