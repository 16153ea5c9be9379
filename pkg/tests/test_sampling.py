import math

import numpy as np
import pytest
from scipy import stats

from graphcorr.graphs import intersect, relabel
from graphcorr.sampling import (
    ErParams,
    GaussianParams,
    SeedSpec,
    er_joint_pmf,
    rho_er,
    rng_from_seed,
    sample_null_er,
    sample_null_gaussian,
    sample_planted_er,
    sample_planted_er_parent,
    sample_planted_gaussian,
)


def aligned_pairs_er(params, seed, sampler, draws):
    """Pooled (A_ij, B_{pi(i)pi(j)}) cell counts over several planted draws."""
    counts = np.zeros((2, 2), dtype=np.int64)
    for t in range(draws):
        a, b, pi = sampler(params, SeedSpec(seed, t))
        bpi = relabel(b, pi)
        both = len(a.edges & bpi.edges)
        a_only = a.edge_count - both
        b_only = bpi.edge_count - both
        m = params.n * (params.n - 1) // 2
        counts += np.array([[m - a.edge_count - b_only, b_only], [a_only, both]])
    return counts


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            GaussianParams(5, 1.0)
        with pytest.raises(ValueError):
            ErParams(5, 0.0, 0.5)
        with pytest.raises(ValueError):
            ErParams(5, 0.5, 0.0)
        ErParams(5, 0.5, 1.0)  # s = 1 allowed

    def test_rho_er_values(self):
        assert rho_er(0.5, 1.0) == 1.0
        assert abs(rho_er(0.5, 0.5) - 1 / 3) < 1e-15
        assert rho_er(0.5, 0.0) == 0.0
        with pytest.raises(ValueError):
            rho_er(1.0, 0.5)

    def test_er_joint_pmf_sums_to_one(self):
        pmf = er_joint_pmf(0.4, 0.7)
        assert abs(sum(pmf.values()) - 1) < 1e-15
        assert abs(pmf[(1, 1)] - 0.4 * 0.49) < 1e-15


class TestDeterminism:
    def test_bit_identical_reproduction(self):
        for sampler, params in [
            (sample_null_gaussian, GaussianParams(20, 0.0)),
            (sample_planted_gaussian, GaussianParams(20, 0.5)),
            (sample_null_er, ErParams(30, 0.3, 0.5)),
            (sample_planted_er, ErParams(30, 0.3, 0.5)),
        ]:
            one = sampler(params, SeedSpec(123, 7))
            two = sampler(params, SeedSpec(123, 7))
            for x, y in zip(one, two):
                if hasattr(x, "edges"):
                    assert x.edges == y.edges
                elif hasattr(x, "weight"):
                    assert np.array_equal(x.weight, y.weight)
                else:
                    assert x == y

    def test_distinct_streams_differ(self):
        params = ErParams(30, 0.3, 0.5)
        a1, _ = sample_null_er(params, SeedSpec(123, 0))
        a2, _ = sample_null_er(params, SeedSpec(123, 1))
        assert a1.edges != a2.edges

    def test_tuple_stream_ids(self):
        g1 = rng_from_seed(SeedSpec(5, (1, 2, 3))).integers(0, 1 << 30, 4)
        g2 = rng_from_seed(SeedSpec(5, (1, 2, 3))).integers(0, 1 << 30, 4)
        g3 = rng_from_seed(SeedSpec(5, (1, 2, 4))).integers(0, 1 << 30, 4)
        assert np.array_equal(g1, g2) and not np.array_equal(g1, g3)


class TestGaussian:
    def test_null_moments(self):
        # ~1.3e5 weight pairs pooled over draws
        n, draws = 80, 42
        a_vals, b_vals = [], []
        for t in range(draws):
            a, b = sample_null_gaussian(GaussianParams(n, 0.0), SeedSpec(1, t))
            iu = np.triu_indices(n, 1)
            a_vals.append(a.weight[iu])
            b_vals.append(b.weight[iu])
        a_vals = np.concatenate(a_vals)
        b_vals = np.concatenate(b_vals)
        n_pairs = len(a_vals)
        assert n_pairs >= 10**5
        assert abs(a_vals.mean()) < 0.01
        assert abs(np.corrcoef(a_vals, b_vals)[0, 1]) < 0.01

    def test_planted_correlation(self):
        n, draws, rho = 80, 42, 0.8
        prods = []
        b_vals = []
        for t in range(draws):
            a, b, pi = sample_planted_gaussian(GaussianParams(n, rho), SeedSpec(2, t))
            bpi = relabel(b, pi)
            iu = np.triu_indices(n, 1)
            x, y = a.weight[iu], bpi.weight[iu]
            prods.append((x, y))
            b_vals.append(b.weight[iu])
        x = np.concatenate([p[0] for p in prods])
        y = np.concatenate([p[1] for p in prods])
        assert abs(np.corrcoef(x, y)[0, 1] - rho) < 0.01
        # marginal of B stays standard
        bv = np.concatenate(b_vals)
        assert abs(bv.var() - 1) < 0.02

    def test_rho_zero_equals_null_law(self):
        # same machinery, independence at rho = 0
        a, b, pi = sample_planted_gaussian(GaussianParams(60, 0.0), SeedSpec(3, 0))
        iu = np.triu_indices(60, 1)
        x = a.weight[iu]
        y = relabel(b, pi).weight[iu]
        assert abs(np.corrcoef(x, y)[0, 1]) < 0.05


class TestEr:
    def test_null_density_and_independence(self):
        n, p, s, draws = 100, 0.5, 0.5, 21
        m = n * (n - 1) // 2
        dens = []
        joint11 = []
        for t in range(draws):
            a, b = sample_null_er(ErParams(n, p, s), SeedSpec(4, t))
            dens.append(a.edge_count / m)
            joint11.append(len(a.edges & b.edges) / m)
        total = draws * m
        hw = 3 * math.sqrt(0.25 * 0.75 / total)
        assert abs(np.mean(dens) - 0.25) < max(hw, 0.01)
        assert abs(np.mean(joint11) - 0.25**2) < 0.01

    def test_planted_joint_pmf(self):
        params = ErParams(100, 0.5, 0.5)
        counts = aligned_pairs_er(params, 5, sample_planted_er, draws=21)
        total = counts.sum()
        pmf = er_joint_pmf(0.5, 0.5)
        assert total >= 10**5
        for (a, b), prob in pmf.items():
            assert abs(counts[a, b] / total - prob) < 0.01
        # exact cell probabilities: (0.625, 0.125, 0.125, 0.125)
        assert pmf[(0, 0)] == 0.625

    def test_both_planted_routes_same_law(self):
        # chi-square goodness of fit for each route; reject only below 1e-4
        params = ErParams(100, 0.4, 0.6)
        pmf = er_joint_pmf(params.p, params.s)
        for sampler in (sample_planted_er, sample_planted_er_parent):
            counts = aligned_pairs_er(params, 6, sampler, draws=21)
            total = counts.sum()
            expected = np.array([[pmf[(0, 0)], pmf[(0, 1)]], [pmf[(1, 0)], pmf[(1, 1)]]])
            chi2 = ((counts - total * expected) ** 2 / (total * expected)).sum()
            pval = stats.chi2.sf(chi2, df=3)
            assert pval > 1e-4, f"{sampler.__name__}: chi2={chi2:.2f}"

    def test_s_one_gives_isomorphic_pair(self):
        a, b, pi = sample_planted_er(ErParams(40, 0.3, 1.0), SeedSpec(7, 0))
        assert intersect(a, relabel(b, pi)) == a
        assert a.edge_count == b.edge_count

    def test_marginal_of_b(self):
        params = ErParams(100, 0.4, 0.6)
        m = 100 * 99 // 2
        dens = []
        for t in range(21):
            _, b, _ = sample_planted_er(params, SeedSpec(8, t))
            dens.append(b.edge_count / m)
        assert abs(np.mean(dens) - 0.24) < 0.01

    def test_intersection_density(self):
        params = ErParams(150, 0.4, 0.5)
        m = 150 * 149 // 2
        vals = []
        for t in range(10):
            a, b, pi = sample_planted_er(params, SeedSpec(9, t))
            vals.append(intersect(a, relabel(b, pi)).edge_count / m)
        assert abs(np.mean(vals) - 0.4 * 0.25) < 0.01

    def test_tiny_density_nearly_empty(self):
        a, b = sample_null_er(ErParams(50, 1e-6, 1e-3), SeedSpec(10, 0))
        assert a.edge_count == 0 and b.edge_count == 0
