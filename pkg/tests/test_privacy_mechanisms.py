# -*- coding: utf-8 -*-
"""
privacy_mechanisms 测试：边翻转、成对边翻转、离散拉普拉斯与预算组合
"""
import math

import numpy as np
import pytest
from scipy import stats

from modules.errors import DomainError
from modules.graph_core import BiDegreeSequence, DirectedGraph, bi_degree_sequence
from modules.p0_model import Theta, edge_probability_matrix, sample_graph
from modules.privacy_mechanisms import (PairwiseFlipSpec, PrivacyBudget, compose_budgets,
                                        discrete_laplace_pmf, discrete_laplace_sample, discrete_laplace_variance,
                                        dyad_ratio_from_edge_flip, edge_flip, edge_flip_ratio, epsilon_schedule,
                                        flip_transition_matrix, laplace_release, pairwise_edge_flip,
                                        pairwise_transition_matrix, verify_pairwise_ldp)


def dyad_state_counts(released: DirectedGraph) -> np.ndarray:
    """统计每个无序对输出状态 (0,0), (0,1), (1,0), (1,1) 的次数"""
    rows, cols = np.triu_indices(released.n, k=1)
    states = 2 * released.adjacency[rows, cols].astype(int) + released.adjacency[cols, rows].astype(int)
    return np.bincount(states, minlength=4)


class TestPrivacyBudget:

    def test_derived_quantities(self):
        budget = PrivacyBudget(2.0)
        assert budget.flip_keep_prob == pytest.approx(1 / (1 + math.exp(-2)))
        assert budget.flip_prob == pytest.approx(math.exp(-2) / (1 + math.exp(-2)))
        assert budget.laplace_scale == pytest.approx(math.exp(-1))

    @pytest.mark.parametrize('epsilon', [0.0, -1.0, math.inf, math.nan])
    def test_invalid_budget(self, epsilon):
        with pytest.raises(DomainError):
            PrivacyBudget(epsilon)

    def test_from_laplace_scale(self):
        assert PrivacyBudget.from_laplace_scale(math.exp(-1)).epsilon == pytest.approx(2.0)
        with pytest.raises(DomainError):
            PrivacyBudget.from_laplace_scale(1.0)


class TestEdgeFlip:

    @pytest.mark.parametrize('epsilon', [0.5, 1.0, 2.0, 3.0])
    def test_transition_ratio_is_exp_epsilon(self, epsilon):
        assert edge_flip_ratio(PrivacyBudget(epsilon)) == pytest.approx(math.exp(epsilon), rel=1e-12)
        assert dyad_ratio_from_edge_flip(PrivacyBudget(epsilon)) == pytest.approx(math.exp(2 * epsilon), rel=1e-12)

    def test_transition_matrix_rows(self):
        Q = flip_transition_matrix(0.8)
        np.testing.assert_allclose(Q.sum(axis=1), [1.0, 1.0])
        assert Q[0, 0] / Q[0, 1] == pytest.approx(4.0)

    def test_huge_budget_is_identity(self, rng):
        g = sample_graph(Theta.zeros(30), rng)
        for seed in range(5):
            released = edge_flip(g, PrivacyBudget(50.0), seed)
            np.testing.assert_array_equal(released.adjacency, g.adjacency)

    def test_output_is_simple(self, rng):
        released = edge_flip(DirectedGraph.complete(20), PrivacyBudget(0.1), rng)
        assert not released.adjacency.diagonal().any()

    def test_seeded_determinism(self):
        g = DirectedGraph.empty(25)
        first = edge_flip(g, PrivacyBudget(1.0), 99)
        second = edge_flip(g, PrivacyBudget(1.0), 99)
        np.testing.assert_array_equal(first.adjacency, second.adjacency)

    def test_flipped_out_degree_mean(self):
        n, reps = 100, 200
        budget = PrivacyBudget(2.0)
        p = budget.flip_keep_prob
        rng = np.random.default_rng(5)
        theta = Theta.zeros(n)
        draws = np.array([bi_degree_sequence(edge_flip(sample_graph(theta, rng), budget, rng)).out_degrees
                          for _ in range(reps)])
        expected = (1 - p) * (n - 1) + (2 * p - 1) * (n - 1) / 2
        stderr = math.sqrt((n - 1) / 4 / reps)
        assert abs(draws.mean() - expected) < 3 * stderr / math.sqrt(n)
        assert np.all(np.abs(draws.mean(axis=0) - expected) < 5 * stderr)

    def test_half_keep_probability_erases_input(self):
        """p = 1/2 时两种输入的条件分布都是 Bernoulli(1/2)，输出与输入无关"""
        Q = flip_transition_matrix(0.5)
        np.testing.assert_array_equal(Q, np.full((2, 2), 0.5))
        assert edge_flip_ratio(0.5) == 1.0

        budget = PrivacyBudget(1e-300)
        assert budget.flip_keep_prob == 0.5 and budget.flip_prob == 0.5
        n, reps = 40, 50
        trials = n * (n - 1) * reps
        rng = np.random.default_rng(12)
        for source in (DirectedGraph.empty(n), DirectedGraph.complete(n)):
            ones = sum(edge_flip(source, budget, rng).num_edges for _ in range(reps))
            assert abs(ones / trials - 0.5) < 4 * math.sqrt(0.25 / trials)

    def test_flipped_entry_variance_not_smaller(self):
        """Var(a′_ij) = q(1−q) ≥ P(1−P)，其中 q = pP + (1−p)(1−P)，蒙特卡洛与闭式一致"""
        rng = np.random.default_rng(21)
        n, reps = 12, 4000
        theta = Theta(np.linspace(-2, 2, n), np.concatenate([np.linspace(1.5, -1.5, n - 1), [0.0]]))
        budget = PrivacyBudget(1.0)
        p = budget.flip_keep_prob
        P = edge_probability_matrix(theta)
        closed_original = P * (1 - P)
        q = p * P + (1 - p) * (1 - P)
        closed_flipped = q * (1 - q)
        off = ~np.eye(n, dtype=bool)
        assert np.all(closed_flipped[off] >= closed_original[off])

        originals = np.empty((reps, n, n))
        flipped = np.empty((reps, n, n))
        for r in range(reps):
            g = sample_graph(theta, rng)
            originals[r] = g.adjacency
            flipped[r] = edge_flip(g, budget, rng).adjacency
        empirical_original = originals.var(axis=0)[off]
        empirical_flipped = flipped.var(axis=0)[off]
        # Bernoulli 方差的估计误差不超过 0.25/sqrt(reps) 的若干倍
        band = 5 * 0.25 / math.sqrt(reps)
        assert np.all(np.abs(empirical_flipped - closed_flipped[off]) < band)
        assert np.all(np.abs(empirical_original - closed_original[off]) < band)
        assert empirical_flipped.mean() > empirical_original.mean()

    def test_empty_graph_flip_rate(self):
        n = 200
        budget = PrivacyBudget(1.0)
        released = edge_flip(DirectedGraph.empty(n), budget, 17)
        trials = n * (n - 1)
        rate = released.num_edges / trials
        q = budget.flip_prob
        assert abs(rate - q) < 4 * math.sqrt(q * (1 - q) / trials)


class TestPairwiseEdgeFlip:

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            PairwiseFlipSpec(0.5, 0.2, 0.2)
        with pytest.raises(DomainError):
            PairwiseFlipSpec(1.2, -0.1, 0.0)

    def test_identity_spec(self, rng):
        g = sample_graph(Theta.zeros(15), rng)
        released = pairwise_edge_flip(g, PairwiseFlipSpec(1.0, 0.0, 0.0), rng)
        np.testing.assert_array_equal(released.adjacency, g.adjacency)

    def test_transition_matrix_by_hamming_distance(self):
        spec = PairwiseFlipSpec(0.4, 0.25, 0.1)
        T = pairwise_transition_matrix(spec)
        np.testing.assert_allclose(T.sum(axis=1), np.ones(4))
        assert T[0, 0] == 0.4 and T[0, 3] == 0.1 and T[1, 2] == 0.1 and T[1, 3] == 0.25

    def test_edge_flip_equivalence(self):
        p = 0.7
        spec = PairwiseFlipSpec.from_edge_flip(p)
        # 450 个节点的空图约有 10⁵ 个二元组，初始状态均为 (0,0)
        released = pairwise_edge_flip(DirectedGraph.empty(450), spec, 2024)
        counts = dyad_state_counts(released)
        expected = counts.sum() * np.array([p * p, p * (1 - p), (1 - p) * p, (1 - p) ** 2])
        assert stats.chisquare(counts, expected).pvalue > 1e-3

        independent = dyad_state_counts(edge_flip(DirectedGraph.empty(450), PrivacyBudget(math.log(p / (1 - p))), 2025))
        assert stats.chisquare(independent, expected).pvalue > 1e-3

    def test_uniform_spec(self):
        released = pairwise_edge_flip(DirectedGraph.complete(300), PairwiseFlipSpec(0.25, 0.25, 0.25), 3)
        counts = dyad_state_counts(released)
        assert stats.chisquare(counts).pvalue > 1e-3


class TestVerifyPairwiseLdp:

    @pytest.mark.parametrize('epsilon', [0.0, 0.5, 3.0])
    def test_uniform_always_passes(self, epsilon):
        assert verify_pairwise_ldp(PairwiseFlipSpec(0.25, 0.25, 0.25), epsilon)

    def test_ratios_within_bound(self):
        assert verify_pairwise_ldp(PairwiseFlipSpec(0.4, 0.25, 0.1), math.log(4))

    def test_ratio_exceeds_bound(self):
        assert not verify_pairwise_ldp(PairwiseFlipSpec(0.7, 0.1, 0.1), 1.0)

    def test_zero_denominator(self):
        assert not verify_pairwise_ldp(PairwiseFlipSpec(1.0, 0.0, 0.0), 10.0)

    def test_edge_flip_spec_needs_double_budget(self):
        budget = PrivacyBudget(1.0)
        spec = PairwiseFlipSpec.from_edge_flip(budget.flip_keep_prob)
        assert not verify_pairwise_ldp(spec, 1.5)
        assert verify_pairwise_ldp(spec, 2.0)


class TestDiscreteLaplace:

    def test_pmf_normalizes(self):
        xs = np.arange(-200, 201)
        assert discrete_laplace_pmf(xs, 0.6).sum() == pytest.approx(1.0, abs=1e-12)

    def test_sampler_fidelity(self):
        lam = math.exp(-1)
        draws = discrete_laplace_sample(lam, np.random.default_rng(31415), size=1_000_000)
        cut = 8
        observed = [np.count_nonzero(draws <= -cut)]
        observed += [np.count_nonzero(draws == x) for x in range(-cut + 1, cut)]
        observed += [np.count_nonzero(draws >= cut)]
        tail = discrete_laplace_pmf(np.arange(cut, 400), lam).sum()
        probs = np.concatenate([[tail], discrete_laplace_pmf(np.arange(-cut + 1, cut), lam), [tail]])
        assert stats.chisquare(observed, probs / probs.sum() * draws.size).pvalue > 0.01
        assert draws.var() == pytest.approx(discrete_laplace_variance(lam), rel=0.01)

    def test_scalar_draw(self):
        assert isinstance(discrete_laplace_sample(0.5, 1), int)

    @pytest.mark.parametrize('lam', [0.0, 1.0, -0.5])
    def test_invalid_scale(self, lam):
        with pytest.raises(DomainError):
            discrete_laplace_sample(lam, 1)

    def test_release_without_noise(self, rng):
        d = bi_degree_sequence(sample_graph(Theta.zeros(20), rng))
        z = laplace_release(d, PrivacyBudget(80.0), rng)
        np.testing.assert_array_equal(z.as_vector(), d.as_vector())

    def test_release_noise_is_uncorrelated(self):
        """2n 个噪声独立同分布：出入度块之间、相邻坐标之间的样本相关系数都接近 0"""
        n = 250_000
        d = BiDegreeSequence(np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64))
        noise = laplace_release(d, PrivacyBudget(2.0), np.random.default_rng(99)).as_vector()
        out_noise, in_noise = noise[:n], noise[n:]
        assert abs(np.corrcoef(out_noise, in_noise)[0, 1]) < 0.01
        assert abs(np.corrcoef(noise[:-1], noise[1:])[0, 1]) < 0.01
        variance = discrete_laplace_variance(math.exp(-1))
        assert out_noise.var() == pytest.approx(variance, rel=0.03)
        assert in_noise.var() == pytest.approx(variance, rel=0.03)

    def test_release_is_unconstrained(self, rng):
        d = bi_degree_sequence(DirectedGraph.empty(50))
        z = laplace_release(d, PrivacyBudget(0.5), rng)
        assert z.n == 50
        assert (z.as_vector() < 0).any()


class TestBudgets:

    def test_composition(self):
        assert compose_budgets([1, 2]) == 3.0
        assert compose_budgets([0.5, 0.5, 0.5, 0.5]) == 2.0

    def test_empty_composition_warns(self):
        with pytest.warns(RuntimeWarning):
            assert compose_budgets([]) == 0.0

    def test_non_positive_budget(self):
        with pytest.raises(DomainError):
            compose_budgets([1.0, 0.0])

    def test_schedule_tokens(self):
        assert epsilon_schedule('logn_q', 100) == pytest.approx(math.log(100) / 100 ** 0.25)
        assert epsilon_schedule('logn_h', 100) == pytest.approx(math.log(100) / 10)
        assert epsilon_schedule('2', 100) == 2.0
        assert epsilon_schedule(3, 100) == 3.0
        with pytest.raises(DomainError):
            epsilon_schedule('huge', 100)
        with pytest.raises(DomainError):
            epsilon_schedule('-1', 100)
