import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphonfit import (
    AdjacencyMatrix,
    CommunityAssignment,
    DomainError,
    EdgeProbabilityMatrix,
    FitResult,
    ModelError,
    Partition,
    StepGraphon,
    bernoulli_kl,
    block_stats,
    build_estimator,
    edge_density,
    edge_probabilities,
    graphon_by_name,
    graphon_mse,
    kl_quadratic_bound,
    kl_taylor_check,
    mple_search,
    normalized_kl_risk,
    oracle_rank_assignment,
    oracle_risk,
    profile_log_likelihood,
    sample_adjacency,
    sample_latents,
)
from graphonfit.graphons import midpoint_grid


def fit_at(a, z):
    """FitResult for a fixed assignment (no search)."""
    return FitResult(
        assignment=z,
        stats=block_stats(a, z),
        profile_loglik=profile_log_likelihood(a, z),
        rho_hat=edge_density(a),
        restarts_used=0,
        swap_count=0,
        ties=False,
    )


def probabilities(pm, rho=0.5):
    pm = np.asarray(pm, dtype=float)
    np.fill_diagonal(pm, 0.0)
    return EdgeProbabilityMatrix(p=pm, rho_n=rho)


class TestBuildEstimator:
    def test_complete_graph(self):
        a = AdjacencyMatrix(a=(np.ones((4, 4)) - np.eye(4)).astype(np.uint8))
        z = CommunityAssignment(z=np.ones(4, dtype=int), k=1)
        est = build_estimator(fit_at(a, z))
        assert est.step.values[0, 0] == 1.0
        assert est(0.3, 0.7) == 1.0

    def test_planted_heights(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        for i, j in [(0, 1), (2, 3), (0, 2), (0, 3)]:
            a[i, j] = a[j, i] = 1
        z = CommunityAssignment(z=np.array([1, 1, 2, 2]), k=2)
        est = build_estimator(fit_at(AdjacencyMatrix(a=a), z))
        # block averages (1, 1, 0.5) over density 4/6
        assert est.step.values[0, 0] == pytest.approx(1.5)
        assert est.step.values[1, 1] == pytest.approx(1.5)
        assert est.step.values[0, 1] == pytest.approx(0.75)

    def test_empty_graph_rejected(self):
        a = AdjacencyMatrix(a=np.zeros((4, 4), dtype=np.uint8))
        z = CommunityAssignment(z=np.array([1, 1, 2, 2]), k=2)
        with pytest.raises(ModelError):
            build_estimator(fit_at(a, z))


class TestNormalizedKLRisk:
    def single_block_fit(self, n, abar):
        """A FitResult with one block whose average is pinned to abar."""
        a = np.zeros((n, n), dtype=np.uint8)
        a[0, 1] = a[1, 0] = 1
        z = CommunityAssignment(z=np.ones(n, dtype=int), k=1)
        fit = fit_at(AdjacencyMatrix(a=a), z)
        stats = fit.stats
        doctored = type(stats)(
            pair_counts=stats.pair_counts,
            edge_sums=stats.pair_counts * abar,
            averages=np.array([[abar]]),
            saturated=np.array([[abar in (0.0, 1.0)]]),
        )
        return FitResult(
            assignment=z, stats=doctored, profile_loglik=0.0,
            rho_hat=fit.rho_hat, restarts_used=0, swap_count=0, ties=False,
        )

    def test_perfect_fit_zero(self):
        fit = self.single_block_fit(6, 0.5)
        p = probabilities(np.full((6, 6), 0.5))
        assert normalized_kl_risk(p, fit) == pytest.approx(0.0, abs=1e-14)

    def test_frozen_single_block_value(self):
        fit = self.single_block_fit(6, 0.25)
        p = probabilities(np.full((6, 6), 0.5))
        # D(0.5 || 0.25) / 0.5
        assert normalized_kl_risk(p, fit) == pytest.approx(0.287682072452, abs=1e-10)

    def test_nonnegative(self):
        rng = np.random.default_rng(1)
        for seed in range(5):
            xi = sample_latents(20, seed)
            p = edge_probabilities(graphon_by_name("cosine"), xi, 0.4)
            a = sample_adjacency(p, seed)
            fit = mple_search(a, 2, restarts=2, seed=seed)
            assert normalized_kl_risk(p, fit) >= 0.0

    def test_all_saturated_rejected(self):
        fit = self.single_block_fit(6, 1.0)
        p = probabilities(np.full((6, 6), 0.5))
        with pytest.raises(ModelError):
            normalized_kl_risk(p, fit)


class TestOracleRisk:
    def test_block_constant_zero(self):
        labels = np.array([1, 1, 2, 2])
        pm = np.where(labels[:, None] == labels[None, :], 0.6, 0.2)
        p = probabilities(pm.astype(float))
        z = CommunityAssignment(z=labels, k=2)
        assert oracle_risk(p, z) == pytest.approx(0.0, abs=1e-14)

    def test_constant_zero_any_assignment(self):
        p = probabilities(np.full((6, 6), 0.3))
        z = CommunityAssignment(z=np.array([1, 2, 1, 2, 1, 2]), k=2)
        assert oracle_risk(p, z) == pytest.approx(0.0, abs=1e-14)

    def test_cross_block_brute_force(self):
        pm = np.full((4, 4), 0.5)
        cross = {(0, 2): 0.1, (0, 3): 0.2, (1, 2): 0.3, (1, 3): 0.4}
        for (i, j), v in cross.items():
            pm[i, j] = pm[j, i] = v
        p = probabilities(pm)
        z = CommunityAssignment(z=np.array([1, 1, 2, 2]), k=2)
        # independent scalar oracle: within pairs contribute 0, cross vs 0.25
        expect_num = sum(bernoulli_kl(v, 0.25) for v in cross.values())
        expect_den = 0.5 * 2 + sum(cross.values())
        assert oracle_risk(p, z) == pytest.approx(expect_num / expect_den, abs=1e-12)


def brute_force_mse(truth, step, order, grid):
    g = midpoint_grid(grid)
    h = np.asarray(step.partition.h)[list(order)]
    v = step.values[np.ix_(order, order)]
    permuted = StepGraphon(Partition(tuple(int(x) for x in h)), v)
    diff = truth(g[:, None], g[None, :]) - permuted(g[:, None], g[None, :])
    return float((diff * diff).mean())


class TestGraphonMSE:
    def test_self_zero(self):
        step = StepGraphon(Partition((3, 5)), np.array([[1.2, 0.4], [0.4, 0.9]]))
        assert graphon_mse(step.as_graphon(), step, grid=128, alignment="identity") == 0.0

    def test_constants(self):
        truth = graphon_by_name("constant")
        step = StepGraphon(Partition((4, 4)), np.full((2, 2), 0.5))
        for al in ("identity", "degree_sort", "block_permutation_search"):
            assert graphon_mse(truth, step, grid=128, alignment=al) == pytest.approx(0.25)

    def test_label_swap_recovered(self):
        # Distinct diagonal values so a label swap actually changes the picture
        # (a [[a,b],[b,a]] matrix is invariant under simultaneous permutation).
        v = np.array([[1.5, 0.5], [0.5, 0.9]])
        truth = StepGraphon(Partition((5, 5)), v).as_graphon()
        swapped = StepGraphon(Partition((5, 5)), v[::-1, ::-1].copy())
        ident = graphon_mse(truth, swapped, grid=128, alignment="identity")
        aligned = graphon_mse(truth, swapped, grid=128, alignment="block_permutation_search")
        assert ident > 0.05
        assert aligned == pytest.approx(0.0, abs=1e-12)
        # Unequal widths: permutation must also reorder the interval lengths.
        truth2 = StepGraphon(Partition((4, 6)), v).as_graphon()
        uneven = StepGraphon(Partition((6, 4)), v[::-1, ::-1].copy())
        ident2 = graphon_mse(truth2, uneven, grid=256, alignment="identity")
        aligned2 = graphon_mse(truth2, uneven, grid=256, alignment="block_permutation_search")
        assert ident2 > 0.05
        assert aligned2 == pytest.approx(0.0, abs=1e-12)

    def test_prefix_sums_match_brute_force(self):
        rng = np.random.default_rng(4)
        truth = graphon_by_name("cosine")
        for _ in range(5):
            k = int(rng.integers(2, 5))
            sizes = tuple(int(s) for s in rng.integers(2, 7, size=k))
            v = rng.uniform(0, 2, size=(k, k))
            step = StepGraphon(Partition(sizes), (v + v.T) / 2)
            fast = graphon_mse(truth, step, grid=128, alignment="identity")
            slow = brute_force_mse(truth, step, tuple(range(k)), 128)
            assert fast == pytest.approx(slow, abs=1e-10)
            best_fast = graphon_mse(truth, step, grid=128,
                                    alignment="block_permutation_search")
            best_slow = min(
                brute_force_mse(truth, step, perm, 128)
                for perm in itertools.permutations(range(k))
            )
            assert best_fast == pytest.approx(best_slow, abs=1e-10)

    def test_greedy_beyond_eight_blocks(self):
        rng = np.random.default_rng(5)
        k = 10
        sizes = tuple([3] * k)
        v = rng.uniform(0, 2, size=(k, k))
        step = StepGraphon(Partition(sizes), (v + v.T) / 2)
        truth = graphon_by_name("bilinear")
        ident = graphon_mse(truth, step, grid=128, alignment="identity")
        greedy = graphon_mse(truth, step, grid=128, alignment="block_permutation_search")
        assert greedy <= ident + 1e-12

    def test_validation(self):
        step = StepGraphon(Partition((2, 2)), np.eye(2))
        with pytest.raises(DomainError):
            graphon_mse(graphon_by_name("constant"), step, grid=32)
        with pytest.raises(DomainError):
            graphon_mse(graphon_by_name("constant"), step, alignment="spectral")

    def test_stepfunction_truth_recovery(self):
        # fitting the true labels of a 2-block truth drives the MSE to the
        # sampling-noise floor
        truth = graphon_by_name("step")
        n, rho, seed = 100, 0.3, 21
        xi = sample_latents(n, seed)
        p = edge_probabilities(truth, xi, rho)
        a = sample_adjacency(p, seed)
        true_z = CommunityAssignment(z=np.where(xi.xi < 0.5, 1, 2), k=2)
        fit = fit_at(a, true_z)
        est = build_estimator(fit)
        mse = graphon_mse(truth, est, grid=256, alignment="block_permutation_search")
        # noise floor: 3x the worst per-block binomial variance of the
        # rescaled block averages
        stats = fit.stats
        pbar = stats.averages
        floor = 3.0 * float(
            np.max(pbar * (1 - pbar) / stats.pair_counts) / rho**2
        )
        boundary = 4.0 / n  # latent/interval mismatch near the block edge
        assert mse <= floor + boundary


class TestKLTaylor:
    def test_zero_delta(self):
        lhs, bound, ok = kl_taylor_check(0.5, 0.0)
        assert (lhs, bound, ok) == (0.0, 0.0, True)

    def test_frozen_bound(self):
        lhs, bound, ok = kl_taylor_check(0.5, 0.1)
        assert ok
        quad = 0.01 / (2 * 0.5 * 0.5)
        # forward-form envelope: (2/3) * 0.2 / 0.8^3, relative to quad
        assert bound / quad == pytest.approx(0.2604166667, abs=1e-9)

    def test_asymmetric_point(self):
        lhs, bound, ok = kl_taylor_check(0.1, 0.05)
        assert ok
        assert lhs <= bound

    def test_grid(self):
        for p100 in range(5, 100, 5):
            p = p100 / 100.0
            m = min(p, 1 - p)
            for c in (0.1, 0.5, 0.9):
                for s in (1, -1):
                    _, _, ok = kl_taylor_check(p, s * c * m)
                    assert ok, (p, s * c * m)

    def test_domain(self):
        with pytest.raises(DomainError):
            kl_taylor_check(0.2, 0.25)
        with pytest.raises(DomainError):
            kl_taylor_check(1.1, 0.0)


class TestKLQuadraticBound:
    @given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.1, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_holds_when_first_argument_larger(self, f, g, rho):
        f, g = max(f, g), min(f, g)
        lhs, rhs, ok = kl_quadratic_bound(f, g, rho)
        assert ok, (f, g, rho, lhs, rhs)

    def test_known_violation_when_first_argument_smaller(self):
        lhs, rhs, ok = kl_quadratic_bound(0.2, 0.8, 1.0)
        assert not ok
        assert lhs == pytest.approx(0.36)
        assert rhs == pytest.approx(2 * 0.2 * bernoulli_kl(0.2, 0.8))

    def test_max_variant_holds(self):
        rng = np.random.default_rng(6)
        for _ in range(2000):
            rho = rng.uniform(0.05, 0.99)
            f, g = rng.uniform(0.01, 1.0 / rho - 0.01, size=2)
            lhs, rhs, _ = kl_quadratic_bound(f, g, rho)
            scaled = rhs / (2 * f) * (2 * max(f, g))
            assert lhs <= scaled * (1 + 1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            kl_quadratic_bound(0.5, 2.5, 0.5)


class TestOrderedUniformCloseness:
    def test_expected_rank_gap(self):
        # |E xi_(i) - i/(n+1)| stays under the stated envelope
        for n in (50, 200):
            reps = 300
            gaps = np.zeros(n)
            for r in range(reps):
                xi = np.sort(sample_latents(n, 3000 + r).xi)
                gaps += np.abs(xi - np.arange(1, n + 1) / (n + 1))
            gaps /= reps
            envelope = (2 * (n + 2)) ** -0.5
            se = 4.0 / math.sqrt(12 * reps)  # crude per-position standard error
            assert gaps.max() <= envelope + se


class TestLatticeContainment:
    def test_small_partitions(self):
        rng = np.random.default_rng(7)
        for n in (10, 20, 35):
            for _ in range(30):
                k = int(rng.integers(1, n // 2 + 1))
                sizes = np.full(k, 2, dtype=int)
                for _ in range(n - 2 * k):
                    sizes[int(rng.integers(0, k))] += 1
                cum = np.concatenate([[0], np.cumsum(sizes)])
                for i in range(1, n + 1):
                    a = int(np.searchsorted(np.cumsum(sizes), i, side="left")) + 1
                    assert cum[a - 1] * (n + 1) < i * n <= cum[a] * (n + 1)


class TestOracleRankRisk:
    def test_decreases_with_n(self):
        # best-blockmodel risk under the latent-rank assignment shrinks in n
        from graphonfit import balanced_partition

        wins = 0
        trials = 15
        for s in range(trials):
            risks = {}
            for n in (100, 400):
                k = math.ceil(math.sqrt(n))
                xi = sample_latents(n, 900 + s)
                p = edge_probabilities(graphon_by_name("cosine"), xi, 0.3)
                z = oracle_rank_assignment(xi, balanced_partition(n, k))
                risks[n] = oracle_risk(p, z)
            if risks[400] < risks[100]:
                wins += 1
        assert wins >= int(0.8 * trials)
