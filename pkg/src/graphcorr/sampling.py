"""Samplers for the null and planted models, Gaussian and Erdos-Renyi.

Under the null model the two observations are independent with matched
marginals; under the planted model a uniform latent permutation pi aligns
them so that the pairs (A_ij, B_{pi(i)pi(j)}) are i.i.d. and correlated.

All samplers are pure functions of (params, seed).  Streams are produced by
a counter-based Philox generator keyed by (master_seed, stream_id), so the
same seed reproduces bit-identical samples and distinct stream ids give
independent streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import BinaryGraph, Permutation, WeightedGraph, pairs_from_indices

__all__ = [
    "GaussianParams",
    "ErParams",
    "SeedSpec",
    "rng_from_seed",
    "rho_er",
    "er_joint_pmf",
    "sample_null_gaussian",
    "sample_planted_gaussian",
    "sample_null_er",
    "sample_planted_er",
    "sample_planted_er_parent",
    "random_permutation",
]


@dataclass(frozen=True)
class GaussianParams:
    """Correlated Gaussian weight model: n nodes, correlation rho in [0, 1)."""

    n: int
    rho: float

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise ValueError("rho must lie in [0, 1)")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class ErParams:
    """Subsampled Erdos-Renyi model: parent density p, subsampling probability s.

    Both observed graphs are marginally G(n, p*s).
    """

    n: int
    p: float
    s: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not 0 < self.s <= 1:
            raise ValueError("s must lie in (0, 1]")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic stream address: a master seed plus a trial index.

    ``stream_id`` may be an int or a tuple of ints (nested substreams).
    """

    master_seed: int
    stream_id: int | tuple = 0


def rng_from_seed(seed: SeedSpec | int, *extra: int) -> np.random.Generator:
    """Philox generator for a seed spec; ``extra`` indices address substreams."""
    if isinstance(seed, SeedSpec):
        sid = seed.stream_id if isinstance(seed.stream_id, tuple) else (seed.stream_id,)
        key = sid + extra
        entropy = seed.master_seed
    else:
        entropy = int(seed)
        key = extra
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def rho_er(p: float, s: float) -> float:
    """Edge-weight correlation of the planted Erdos-Renyi model: s(1-p)/(1-ps)."""
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    if not 0 <= p < 1 or p * s >= 1:
        raise ValueError("need p in [0, 1) and ps < 1")
    return s * (1 - p) / (1 - p * s)


def er_joint_pmf(p: float, s: float) -> dict[tuple[int, int], float]:
    """Joint pmf of an aligned edge pair (a, b) under the planted model."""
    return {
        (1, 1): p * s * s,
        (1, 0): p * s * (1 - s),
        (0, 1): p * s * (1 - s),
        (0, 0): 1 - 2 * p * s + p * s * s,
    }


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(int(v) for v in rng.permutation(n)))


def _symmetric_from_flat(n: int, flat: np.ndarray) -> np.ndarray:
    w = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    w[iu] = flat
    return w + w.T


def sample_null_gaussian(params: GaussianParams, seed: SeedSpec | int):
    """Independent standard Gaussian weight matrices (A, B)."""
    rng = rng_from_seed(seed)
    n, m = params.n, params.n * (params.n - 1) // 2
    a = rng.standard_normal(m)
    b = rng.standard_normal(m)
    return WeightedGraph(_symmetric_from_flat(n, a)), WeightedGraph(_symmetric_from_flat(n, b))


def sample_planted_gaussian(params: GaussianParams, seed: SeedSpec | int):
    """Correlated pair (A, B) with latent alignment pi.

    Conditional on pi, the pairs (A_ij, B_{pi(i)pi(j)}) are bivariate normal
    with unit variances and correlation rho; B is built as
    rho * A + sqrt(1 - rho^2) * Z placed at the relabeled positions.
    """
    rng = rng_from_seed(seed)
    n, m, rho = params.n, params.n * (params.n - 1) // 2, params.rho
    pi = random_permutation(n, rng)
    a_flat = rng.standard_normal(m)
    z = rng.standard_normal(m)
    matched = rho * a_flat + math.sqrt(1 - rho * rho) * z
    a = _symmetric_from_flat(n, a_flat)
    # B_{pi(i)pi(j)} = matched(i, j)
    b = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    p = np.asarray(pi.mapping)
    b[p[iu], p[ju]] = matched
    b = b + b.T
    return WeightedGraph(a), WeightedGraph(b), pi


def _sample_pair_indices(m: int, count: int, rng: np.random.Generator, forbidden=None) -> np.ndarray:
    """``count`` distinct linear pair indices in [0, m), avoiding ``forbidden``.

    Batched rejection sampling that accepts first occurrences in draw order,
    which keeps the resulting set uniform among admissible count-subsets.
    """
    taken = np.asarray(forbidden if forbidden is not None else [], dtype=np.int64)
    if count > m - len(taken):
        raise ValueError("not enough admissible pairs")
    picked = np.empty(0, dtype=np.int64)
    need = count
    while need > 0:
        draw = rng.integers(0, m, size=max(64, int(1.2 * need) + 16))
        uniq, first_pos = np.unique(draw, return_index=True)
        if len(taken):
            keep = ~np.isin(uniq, taken)
            uniq, first_pos = uniq[keep], first_pos[keep]
        accepted = uniq[np.argsort(first_pos)][:need]
        picked = np.concatenate([picked, accepted])
        taken = np.concatenate([taken, accepted])
        need -= len(accepted)
    return picked


def _sparse_gnp_indices(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    m = n * (n - 1) // 2
    k = int(rng.binomial(m, q))
    return _sample_pair_indices(m, k, rng)


def _indices_to_graph(n: int, idx: np.ndarray) -> BinaryGraph:
    i, j = pairs_from_indices(idx, n)
    return BinaryGraph._from_canonical(n, frozenset(zip(i.tolist(), j.tolist())))


def sample_null_er(params: ErParams, seed: SeedSpec | int):
    """Two independent G(n, ps) graphs."""
    rng = rng_from_seed(seed)
    q = params.p * params.s
    a = _indices_to_graph(params.n, _sparse_gnp_indices(params.n, q, rng))
    b = _indices_to_graph(params.n, _sparse_gnp_indices(params.n, q, rng))
    return a, b


def sample_planted_er(params: ErParams, seed: SeedSpec | int):
    """Correlated pair (A, B) with latent alignment pi, conditional form.

    A is G(n, ps); aligned with A, the second graph keeps an A-edge with
    probability s and creates a non-A edge with probability ps(1-s)/(1-ps),
    realizing the planted joint law in a single pass.
    """
    rng = rng_from_seed(seed)
    n, p, s = params.n, params.p, params.s
    m = n * (n - 1) // 2
    pi = random_permutation(n, rng)
    a_idx = _sparse_gnp_indices(n, p * s, rng)
    keep = a_idx[rng.random(len(a_idx)) < s]
    q0 = p * s * (1 - s) / (1 - p * s)
    k0 = int(rng.binomial(m - len(a_idx), q0))
    fresh = _sample_pair_indices(m, k0, rng, forbidden=a_idx)
    matched = np.concatenate([keep, fresh])
    b = _push_through(n, matched, pi)
    return _indices_to_graph(n, a_idx), b, pi


def _push_through(n: int, matched_idx: np.ndarray, pi: Permutation) -> BinaryGraph:
    """Graph whose value at (pi(i), pi(j)) is the matched value at (i, j)."""
    i, j = pairs_from_indices(matched_idx, n)
    pm = np.asarray(pi.mapping)
    u, v = pm[i], pm[j]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return BinaryGraph._from_canonical(n, frozenset(zip(lo.tolist(), hi.tolist())))


def sample_planted_er_parent(params: ErParams, seed: SeedSpec | int):
    """Correlated pair via the parent-graph construction (cross-check oracle).

    A parent G(n, p) is drawn and independently subsampled twice with
    probability s; the second subsample is pushed through pi.  Realizes the
    same per-edge joint law as :func:`sample_planted_er`.
    """
    rng = rng_from_seed(seed)
    n, p, s = params.n, params.p, params.s
    pi = random_permutation(n, rng)
    parent = _sparse_gnp_indices(n, p, rng)
    a_idx = parent[rng.random(len(parent)) < s]
    matched = parent[rng.random(len(parent)) < s]
    return _indices_to_graph(n, a_idx), _push_through(n, matched, pi), pi
