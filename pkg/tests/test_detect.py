import itertools
import math

import numpy as np
import pytest

from graphcorr.errors import ExactLimitError
from graphcorr.graphs import BinaryGraph, Permutation, WeightedGraph, relabel
from graphcorr.detect import (
    TestOutcome as Outcome,
    all_statistic_values,
    edge_count_test,
    edge_count_threshold,
    kernel_er,
    kernel_gaussian,
    likelihood_ratio_exact,
    qap_exact,
    qap_local_search,
    statistic_given_pi,
    threshold_er,
    threshold_gaussian,
)
from graphcorr.sampling import (
    ErParams,
    GaussianParams,
    SeedSpec,
    sample_null_er,
    sample_null_gaussian,
    sample_planted_er,
    sample_planted_gaussian,
)


def brute_lr(a, b, params):
    """Permutation-average of kernel products, computed directly."""
    n = a.n
    am, bm = a.to_dense(), b.to_dense()
    if isinstance(params, ErParams):
        kern = lambda x, y: kernel_er(int(x), int(y), params.p, params.s)
    else:
        kern = lambda x, y: kernel_gaussian(x, y, params.rho)
    total = 0.0
    for pi in itertools.permutations(range(n)):
        prod = 1.0
        for i in range(n):
            for j in range(i + 1, n):
                prod *= kern(am[i, j], bm[pi[i], pi[j]])
        total += prod
    return total / math.factorial(n)


class TestKernels:
    def test_gaussian_rho_zero(self):
        for a, b in [(0.0, 0.0), (1.5, -2.0), (3.0, 3.0)]:
            assert kernel_gaussian(a, b, 0.0) == 1.0

    def test_gaussian_symmetry(self):
        for a in np.linspace(-2, 2, 5):
            for b in np.linspace(-2, 2, 5):
                assert kernel_gaussian(a, b, 0.6) == pytest.approx(
                    kernel_gaussian(b, a, 0.6), abs=1e-15
                )

    def test_gaussian_normalization_by_quadrature(self):
        # integral of L(a,b) phi(a) phi(b) over the plane equals 1
        nodes, weights = np.polynomial.hermite.hermgauss(60)
        x = math.sqrt(2) * nodes
        w = weights / math.sqrt(math.pi)
        for rho in (0.2, 0.5, 0.7):
            vals = np.array([[kernel_gaussian(ai, bi, rho) for bi in x] for ai in x])
            integral = w @ vals @ w
            assert integral == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_domain(self):
        with pytest.raises(ValueError):
            kernel_gaussian(0.0, 0.0, 1.0)

    def test_er_values(self):
        assert kernel_er(1, 1, 0.5, 0.9) == 2.0
        # (1 - 2ps + ps^2) / (1 - ps)^2 at p = s = 1/2 is 0.625/0.5625 = 10/9
        assert kernel_er(0, 0, 0.5, 0.5) == pytest.approx(10 / 9, abs=1e-15)
        assert kernel_er(1, 0, 0.3, 0.4) == kernel_er(0, 1, 0.3, 0.4)

    def test_er_normalization_exact(self):
        for p, s in [(0.2, 0.3), (0.5, 0.5), (0.7, 0.9)]:
            q = p * s
            total = sum(
                kernel_er(a, b, p, s) * q ** (a + b) * (1 - q) ** (2 - a - b)
                for a in (0, 1)
                for b in (0, 1)
            )
            assert total == pytest.approx(1.0, abs=1e-14)


class TestStatistic:
    def test_identity_self(self):
        g = BinaryGraph(5, frozenset({(0, 1), (2, 3), (3, 4)}))
        assert statistic_given_pi(g, g, Permutation.identity(5)) == 3

    def test_matches_dense_computation(self):
        a, b, pi = sample_planted_er(ErParams(12, 0.4, 0.8), SeedSpec(1, 0))
        expected = float(np.triu(a.to_dense() * relabel(b, pi).to_dense(), 1).sum())
        assert statistic_given_pi(a, b, pi) == expected

    def test_planted_er_mean(self):
        params = ErParams(40, 0.3, 0.6)
        m = 40 * 39 // 2
        vals = [
            statistic_given_pi(*sample_planted_er(params, SeedSpec(2, t))[0:2],
                               sample_planted_er(params, SeedSpec(2, t))[2])
            for t in range(60)
        ]
        mu = m * params.p * params.s**2
        sd = math.sqrt(m * params.p * params.s**2)  # binomial scale
        assert abs(np.mean(vals) - mu) < 4 * sd / math.sqrt(60)

    def test_planted_gaussian_mean(self):
        params = GaussianParams(30, 0.7)
        m = 30 * 29 // 2
        vals = []
        for t in range(60):
            a, b, pi = sample_planted_gaussian(params, SeedSpec(3, t))
            vals.append(statistic_given_pi(a, b, pi))
        assert abs(np.mean(vals) - params.rho * m) < 4 * math.sqrt(2 * m / 60)


class TestQapExact:
    def test_n2_single_edge(self):
        a = BinaryGraph(2, frozenset({(0, 1)}))
        val, _ = qap_exact(a, a)
        assert val == 1

    def test_small_instance(self):
        a = BinaryGraph(3, frozenset({(0, 1), (0, 2)}))
        b = BinaryGraph(3, frozenset({(0, 1), (1, 2)}))
        val, arg = qap_exact(a, b)
        assert val == 2
        # brute-force cross-check
        best = max(
            statistic_given_pi(a, b, Permutation(p))
            for p in itertools.permutations(range(3))
        )
        assert val == best

    def test_self_match(self):
        g = BinaryGraph(5, frozenset({(0, 1), (1, 2), (3, 4)}))
        val, arg = qap_exact(g, g)
        assert val == g.edge_count
        assert statistic_given_pi(g, g, arg) == val

    def test_lexicographic_tie_break(self):
        empty = BinaryGraph.empty(3)
        _, arg = qap_exact(empty, empty)
        assert arg == Permutation.identity(3)

    def test_refusal_beyond_limit(self):
        g = BinaryGraph.empty(12)
        with pytest.raises(ExactLimitError, match="local_search"):
            qap_exact(g, g)

    def test_isomorphism_invariance(self):
        params = ErParams(6, 0.4, 0.7)
        a, b = sample_null_er(params, SeedSpec(4, 0))
        tau = Permutation((3, 1, 0, 5, 4, 2))
        ups = Permutation((2, 0, 4, 1, 5, 3))
        v1, _ = qap_exact(a, b)
        v2, _ = qap_exact(relabel(a, tau), relabel(b, ups))
        assert v1 == v2


class TestQapLocalSearch:
    def test_self_match_attains_edge_count(self):
        g = BinaryGraph(8, frozenset({(0, 1), (1, 2), (2, 3), (4, 5), (6, 7)}))
        val, _ = qap_local_search(g, g, restarts=5, seed=0)
        assert val == g.edge_count

    def test_never_exceeds_exact_and_often_matches(self):
        hits = 0
        for t in range(100):
            a, b = sample_null_er(ErParams(8, 0.4, 0.8), SeedSpec(5, t))
            exact, _ = qap_exact(a, b)
            approx, _ = qap_local_search(a, b, restarts=20, seed=SeedSpec(6, t), rounds=3)
            assert approx <= exact + 1e-9
            hits += abs(approx - exact) < 1e-9
        assert hits >= 80

    def test_at_least_identity(self):
        a, b = sample_null_er(ErParams(10, 0.5, 0.8), SeedSpec(7, 0))
        val, _ = qap_local_search(a, b, restarts=1, seed=0, rounds=2)
        assert val >= statistic_given_pi(a, b, Permutation.identity(10))

    def test_deterministic(self):
        a, b = sample_null_gaussian(GaussianParams(9, 0.0), SeedSpec(8, 0))
        r1 = qap_local_search(a, b, restarts=10, seed=42, rounds=4)
        r2 = qap_local_search(a, b, restarts=10, seed=42, rounds=4)
        assert r1 == r2


class TestLikelihoodRatio:
    def test_n2_equals_kernel(self):
        params = ErParams(2, 0.4, 0.6)
        a = BinaryGraph(2, frozenset({(0, 1)}))
        b = BinaryGraph.empty(2)
        assert likelihood_ratio_exact(a, b, params) == pytest.approx(
            kernel_er(1, 0, 0.4, 0.6), rel=1e-12
        )

    def test_rho_zero_is_one(self):
        params = GaussianParams(4, 0.0)
        a, b = sample_null_gaussian(params, SeedSpec(9, 0))
        assert likelihood_ratio_exact(a, b, params) == 1.0

    def test_er_against_brute(self):
        params = ErParams(3, 0.5, 0.5)
        a = BinaryGraph(3, frozenset({(0, 1)}))
        b = BinaryGraph(3, frozenset({(0, 1)}))
        assert likelihood_ratio_exact(a, b, params) == pytest.approx(
            brute_lr(a, b, params), rel=1e-12
        )

    def test_gaussian_against_brute(self):
        params = GaussianParams(4, 0.6)
        a, b, _ = sample_planted_gaussian(params, SeedSpec(10, 0))
        assert likelihood_ratio_exact(a, b, params) == pytest.approx(
            brute_lr(a, b, params), rel=1e-10
        )

    def test_s_one_matches_brute_on_match(self):
        params = ErParams(3, 0.4, 1.0)
        a, b, _ = sample_planted_er(params, SeedSpec(11, 0))
        got = likelihood_ratio_exact(a, b, params)
        # direct count of exact matches
        n = 3
        hits = sum(
            1
            for p in itertools.permutations(range(n))
            if relabel(b, Permutation(p)) == a
        )
        m, e = 3, a.edge_count
        want = hits / 6 * (1 / 0.4) ** e * (1 / 0.6) ** (m - e)
        assert got == pytest.approx(want, rel=1e-12)

    def test_refusal(self):
        params = ErParams(8, 0.4, 0.5)
        g = BinaryGraph.empty(8)
        with pytest.raises(ExactLimitError):
            likelihood_ratio_exact(g, g, params)

    def test_argmax_equivalence_er(self):
        # maximizers of the kernel product coincide with maximizers of T_pi
        params = ErParams(5, 0.3, 0.6)
        for t in range(6):
            a, b = sample_null_er(params, SeedSpec(12, t))
            tvals = all_statistic_values(a, b)
            prods = []
            am, bm = a.to_dense(), b.to_dense()
            for p in itertools.permutations(range(5)):
                prod = 1.0
                for i in range(5):
                    for j in range(i + 1, 5):
                        prod *= kernel_er(int(am[i, j]), int(bm[p[i], p[j]]), 0.3, 0.6)
                prods.append(prod)
            prods = np.array(prods)
            assert set(np.flatnonzero(tvals == tvals.max())) == set(
                np.flatnonzero(np.isclose(prods, prods.max(), rtol=1e-10))
            )

    def test_argmax_equivalence_gaussian(self):
        params = GaussianParams(5, 0.5)
        for t in range(4):
            a, b, _ = sample_planted_gaussian(params, SeedSpec(13, t))
            tvals = all_statistic_values(a, b)
            prods = []
            am, bm = a.to_dense(), b.to_dense()
            for p in itertools.permutations(range(5)):
                logp = 0.0
                for i in range(5):
                    for j in range(i + 1, 5):
                        logp += math.log(kernel_gaussian(am[i, j], bm[p[i], p[j]], 0.5))
                prods.append(logp)
            prods = np.array(prods)
            assert int(np.argmax(tvals)) == int(np.argmax(prods))


class TestThresholds:
    def test_gaussian_value(self):
        assert threshold_gaussian(10, 0.5) == pytest.approx(0.5 * 45 - 10**1.1, abs=1e-12)
        assert threshold_gaussian(10, 0.0) == -(10**1.1)

    def test_gaussian_monotone_in_rho(self):
        taus = [threshold_gaussian(20, r) for r in np.linspace(0, 0.9, 10)]
        assert all(x < y for x, y in zip(taus, taus[1:]))

    def test_gaussian_custom_slack(self):
        assert threshold_gaussian(10, 0.5, a_n=7.0) == 0.5 * 45 - 7.0

    def test_er_value_and_domain(self):
        n, p, s = 100, 0.5, 0.5
        mu = (100 * 99 // 2) * p * s * s
        assert threshold_er(n, p, s) == pytest.approx(mu * (1 - mu**-0.4), rel=1e-12)
        delta = (threshold_er(n, p, s) / mu - 1) * -1
        assert 0 < delta < 1
        with pytest.raises(ValueError):
            threshold_er(4, 0.1, 0.1)

    def test_er_full_density(self):
        m = 10 * 9 // 2
        assert threshold_er(10, 1 - 1e-12, 1.0) == pytest.approx(m * (1 - m**-0.4), rel=1e-6)


class TestEdgeCountTest:
    def test_s_one_decides_planted(self):
        params = ErParams(40, 0.3, 1.0)
        a, b, _ = sample_planted_er(params, SeedSpec(14, 0))
        out = edge_count_test(a, b, params)
        assert out.decision == "planted" and out.statistic == 0.0

    def test_outcome_invariant(self):
        with pytest.raises(ValueError):
            Outcome(1.0, 2.0, "planted")

    def test_variance_laws(self):
        params = ErParams(100, 0.3, 0.5)
        m = 100 * 99 // 2
        q = params.p * params.s
        diffs_null, diffs_planted = [], []
        for t in range(3000):
            a, b = sample_null_er(params, SeedSpec(15, (t, 0)))
            diffs_null.append(a.edge_count - b.edge_count)
            a, b, _ = sample_planted_er(params, SeedSpec(15, (t, 1)))
            diffs_planted.append(a.edge_count - b.edge_count)
        v_null = np.var(diffs_null)
        v_planted = np.var(diffs_planted)
        assert v_null == pytest.approx(2 * m * q * (1 - q), rel=0.12)
        assert v_planted == pytest.approx(2 * m * q * (1 - params.s), rel=0.12)

    def test_threshold_between_scales(self):
        tau = edge_count_threshold(100, 0.3, 0.5)
        m = 100 * 99 // 2
        v1 = 2 * m * 0.15 * 0.5
        v0 = 2 * m * 0.15 * 0.85
        assert math.sqrt(v1) < tau < math.sqrt(v0) * 2

    def test_requires_er(self):
        a, b = sample_null_gaussian(GaussianParams(5, 0.0), SeedSpec(16, 0))
        with pytest.raises(TypeError):
            edge_count_test(a, b, GaussianParams(5, 0.0))
