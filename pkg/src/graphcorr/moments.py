"""Second-moment calculus over edge orbits.

The squared likelihood ratio factorizes over the edge orbits of the relative
permutation between two latent alignments; each orbit of length k
contributes 1/(1 - rho^(2k)) in the Gaussian model and 1 + rho^(2k) in the
Erdos-Renyi model.  This module computes those factors with independent
oracles, exact second moments at small n, brute-force and closed-form bounds
for the generating function of orbit pseudoforests, and the Lambert-W /
Poisson utilities used by the conditional arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import ExactLimitError
from .graphs import BinaryGraph, Permutation
from .orbits import (
    CycleType,
    EdgeOrbit,
    census_from_cycle_type,
    cycle_type,
    is_pseudoforest,
    orbits_up_to,
)
from .sampling import ErParams, GaussianParams, rho_er, rng_from_seed
from .detect import kernel_er

__all__ = [
    "orbit_moment_gaussian",
    "orbit_moment_er",
    "orbit_moment_er_oracle",
    "orbit_moment_gaussian_mc",
    "er_transition_matrix",
    "incomplete_orbit_moment_er",
    "incomplete_orbit_moment_er_oracle",
    "SecondMomentReport",
    "second_moment_exact",
    "second_moment_mc",
    "second_moment_bruteforce_er",
    "partitions_as_cycle_types",
    "gf_orbit_pseudoforests_bruteforce",
    "gf_orbit_forests_bruteforce",
    "gf_orbit_pseudoforests_unpruned",
    "enumerate_orbit_pseudoforests",
    "gf_bound_pseudoforest",
    "gf_bound_forest",
    "lambert_w",
    "planted_intersection_edge_bound",
    "poisson_cycle_moment",
    "cycle_count_product_average",
    "poisson_truncation_bound",
    "TvCheckResult",
    "cycle_type_tv_check",
]

GF_ORBIT_LIMIT = 24


# -- per-orbit second-moment factors -------------------------------------------


def orbit_moment_gaussian(k: int, rho: float) -> float:
    """Expected orbit factor 1 / (1 - rho^(2k)) for a k-edge orbit."""
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    if k < 1:
        raise ValueError("orbit length must be >= 1")
    return 1.0 / (1.0 - rho ** (2 * k))


def orbit_moment_er(k: int, p: float, s: float) -> float:
    """Expected orbit factor 1 + rho^(2k) with rho = s(1-p)/(1-ps)."""
    if k < 1:
        raise ValueError("orbit length must be >= 1")
    return 1.0 + rho_er(p, s) ** (2 * k)


def er_transition_matrix(p: float, s: float) -> np.ndarray:
    """Row-stochastic conditional law of an aligned edge given the other.

    Rows and columns are indexed by {0, 1}; the eigenvalues are 1 and the
    model correlation rho.
    """
    q = p * s
    return np.array(
        [
            [(1 - q * (2 - s)) / (1 - q), q * (1 - s) / (1 - q)],
            [1 - s, s],
        ]
    )


def orbit_moment_er_oracle(k: int, p: float, s: float) -> float:
    """Exhaustive-sum oracle for the Erdos-Renyi orbit factor.

    Sums the orbit product over all 2^(2k) binary assignments on the orbit;
    must equal 1 + rho^(2k).
    """
    if k > 6:
        raise ExactLimitError(f"oracle enumerates 4^k configurations; k={k} > 6")
    q = p * s
    total = 0.0
    for a in product((0, 1), repeat=k):
        pa = math.prod(q if x else 1 - q for x in a)
        for b in product((0, 1), repeat=k):
            pb = math.prod(q if x else 1 - q for x in b)
            x = math.prod(
                kernel_er(a[l], b[l], p, s) * kernel_er(a[l], b[(l + 1) % k], p, s)
                for l in range(k)
            )
            total += pa * pb * x
    return total


def orbit_moment_gaussian_mc(
    k: int, rho: float, samples: int = 10**6, seed=0
) -> tuple[float, float]:
    """Monte-Carlo oracle for the Gaussian orbit factor: (estimate, std error)."""
    rng = rng_from_seed(seed)
    a = rng.standard_normal((samples, k))
    b = rng.standard_normal((samples, k))
    d = 1 - rho * rho
    logx = np.zeros(samples)
    for l in range(k):
        for bb in (b[:, l], b[:, (l + 1) % k]):
            logx += (-rho * rho * (a[:, l] ** 2 + bb**2) + 2 * rho * a[:, l] * bb) / (2 * d)
    x = np.exp(logx) / d**k
    est = float(x.mean())
    return est, float(x.std(ddof=1) / math.sqrt(samples))


def incomplete_orbit_moment_er(k: int, p: float, s: float) -> float:
    """Orbit factor conditioned on the orbit not sitting inside the intersection.

    Equals (1 + rho^(2k) - s^(2k)) / (1 - (ps)^(2k)) and stays below 1 for
    p, s <= 1/2.
    """
    if k < 1:
        raise ValueError("orbit length must be >= 1")
    if p * s >= 1:
        raise ValueError("need ps < 1")
    rho = rho_er(p, s)
    return (1 + rho ** (2 * k) - s ** (2 * k)) / (1 - (p * s) ** (2 * k))


def incomplete_orbit_moment_er_oracle(k: int, p: float, s: float) -> float:
    """Exhaustive conditional sum excluding the all-ones configuration."""
    if k > 3:
        raise ExactLimitError("conditional oracle supports k <= 3")
    q = p * s
    total = 0.0
    ones = (1,) * k
    for a in product((0, 1), repeat=k):
        pa = math.prod(q if x else 1 - q for x in a)
        for b in product((0, 1), repeat=k):
            if a == ones and b == ones:
                continue
            pb = math.prod(q if x else 1 - q for x in b)
            x = math.prod(
                kernel_er(a[l], b[l], p, s) * kernel_er(a[l], b[(l + 1) % k], p, s)
                for l in range(k)
            )
            total += pa * pb * x
    return total / (1 - q ** (2 * k))


# -- exact second moments --------------------------------------------------------


def partitions_as_cycle_types(n: int):
    """Yield (CycleType, weight) over all cycle types of S_n.

    The weight is the exact fraction of permutations with that type,
    1 / prod(l^(n_l) n_l!).
    """

    def parts(remaining, max_part):
        if remaining == 0:
            yield {}
            return
        for part in range(min(remaining, max_part), 0, -1):
            for rest in parts(remaining - part, part):
                counts = dict(rest)
                counts[part] = counts.get(part, 0) + 1
                yield counts

    for counts in parts(n, n):
        weight = Fraction(1)
        for l, c in counts.items():
            weight /= Fraction(l) ** c * math.factorial(c)
        yield CycleType.from_counts(n, counts), weight


@dataclass(frozen=True)
class SecondMomentReport:
    """Second moment of the likelihood ratio under the null.

    ``value`` is exact when computed by cycle-type enumeration; Monte-Carlo
    reports carry a half-width instead.  ``contributions`` maps each cycle
    type to (probability weight, orbit-product factor).
    """

    model: str
    n: int
    value: float
    contributions: tuple = ()
    mc_halfwidth: float | None = None

    @property
    def is_exact(self) -> bool:
        return self.mc_halfwidth is None


def _orbit_factor_log(params, census: dict[int, int]) -> float:
    if isinstance(params, GaussianParams):
        f = lambda k: orbit_moment_gaussian(k, params.rho)
    elif isinstance(params, ErParams):
        f = lambda k: orbit_moment_er(k, params.p, params.s)
    else:
        raise TypeError(f"unsupported params type {type(params)!r}")
    return sum(nk * math.log(f(k)) for k, nk in census.items())


def second_moment_exact(params, limit: int = 8) -> SecondMomentReport:
    """Exact null second moment of the likelihood ratio.

    Averages the orbit-factor product over the uniform relative permutation,
    grouped by cycle type.  Refuses n above ``limit``.
    """
    n = params.n
    if n > limit:
        raise ExactLimitError(
            f"exact second moment enumerates cycle types of S_n up to n={limit}; "
            "use second_moment_mc for larger n"
        )
    model = "gaussian" if isinstance(params, GaussianParams) else "er"
    total = Fraction(0)  # exact accumulation; the rho = 0 value is exactly 1
    contribs = []
    for ct, weight in partitions_as_cycle_types(n):
        factor = math.exp(_orbit_factor_log(params, census_from_cycle_type(ct)))
        total += weight * Fraction(factor)
        contribs.append((ct.counts, float(weight), factor))
    return SecondMomentReport(model, n, float(total), tuple(contribs))


def second_moment_mc(params, trials: int = 2000, seed=0) -> SecondMomentReport:
    """Monte-Carlo estimate of the null second moment over random permutations."""
    rng = rng_from_seed(seed)
    model = "gaussian" if isinstance(params, GaussianParams) else "er"
    vals = np.empty(trials)
    for t in range(trials):
        sigma = Permutation(tuple(int(v) for v in rng.permutation(params.n)))
        census = census_from_cycle_type(cycle_type(sigma))
        vals[t] = math.exp(_orbit_factor_log(params, census))
    hw = 1.96 * float(vals.std(ddof=1)) / math.sqrt(trials)
    return SecondMomentReport(model, params.n, float(vals.mean()), (), hw)


def _er_kernel_code_matrix(m: int, p: float, s: float) -> np.ndarray:
    """K[cA, cB] = product over edges of L(bit(cA,e), bit(cB,e)) for 2^m codes."""
    base = np.array(
        [
            [kernel_er(0, 0, p, s), kernel_er(0, 1, p, s)],
            [kernel_er(1, 0, p, s), kernel_er(1, 1, p, s)],
        ]
    )
    k = np.ones((1, 1))
    for _ in range(m):
        k = np.kron(base, k)
    return k


def _code_weights(m: int, q: float) -> np.ndarray:
    pop = np.array([bin(c).count("1") for c in range(1 << m)])
    return q**pop * (1 - q) ** (m - pop)


def _edge_perm_codes(n: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """For each permutation pi, the code map cB -> code of pi-gathered bits."""
    from .detect import _perm_array
    from .graphs import all_pairs, pair_index

    pairs = list(all_pairs(n))
    m = len(pairs)
    perms = _perm_array(n)
    codes = np.arange(1 << m, dtype=np.int64)
    bit = [(codes >> e) & 1 for e in range(m)]
    out = np.empty((len(perms), 1 << m), dtype=np.int64)
    for t, pm in enumerate(perms):
        acc = np.zeros(1 << m, dtype=np.int64)
        for e, (i, j) in enumerate(pairs):
            src = pair_index(int(pm[i]), int(pm[j]), n)
            acc |= bit[src] << e
        out[t] = acc
    return out, pairs


def exact_er_lr_table(params: ErParams) -> tuple[np.ndarray, np.ndarray]:
    """Likelihood-ratio and null-probability tables over all graph-pair codes.

    Returns (lr, q) where lr[cA, cB] is the exact likelihood ratio and q[c]
    the null probability of the graph with edge code c.  Feasible for n <= 4.
    """
    n = params.n
    if n > 4:
        raise ExactLimitError("exact enumeration over graph pairs supports n <= 4")
    m = n * (n - 1) // 2
    kmat = _er_kernel_code_matrix(m, params.p, params.s)
    gcodes, _ = _edge_perm_codes(n)
    lr = np.zeros_like(kmat)
    for row in gcodes:
        lr += kmat[:, row]
    lr /= len(gcodes)
    return lr, _code_weights(m, params.p * params.s)


def second_moment_bruteforce_er(params: ErParams, limit: int = 4) -> float:
    """Null second moment by direct summation over all graph pairs.

    Cross-checks :func:`second_moment_exact`; the likelihood ratio comes from
    the exact permutation average, independently of the orbit calculus.
    """
    if params.n > limit:
        raise ExactLimitError(f"graph-pair brute force supports n <= {limit}")
    lr, q = exact_er_lr_table(params)
    return float(q @ (lr**2) @ q)


# -- generating functions of orbit (pseudo)forests -------------------------------


class _OrbitUnion:
    """Union-find over vertices with per-component vertex/edge counts and undo."""

    def __init__(self):
        self.parent: dict[int, int] = {}
        self.verts: dict[int, int] = {}
        self.edges: dict[int, int] = {}
        self.log: list = []

    def find(self, v: int) -> int:
        while self.parent[v] != v:
            v = self.parent[v]
        return v

    def snapshot(self) -> int:
        return len(self.log)

    def rollback(self, mark: int) -> None:
        while len(self.log) > mark:
            op = self.log.pop()
            if op[0] == "new":
                _, v = op
                del self.parent[v], self.verts[v], self.edges[v]
            elif op[0] == "merge":
                _, child, rv, re = op
                root = self.parent[child]
                self.parent[child] = child
                self.verts[root] -= self.verts[child]
                self.edges[root] -= self.edges[child]
                self.verts[child], self.edges[child] = rv, re
            else:  # edge count bump
                _, root = op
                self.edges[root] -= 1

    def add_edge(self, u: int, v: int) -> int:
        """Insert an edge, activating endpoints as needed; returns the new root."""
        for w in (u, v):
            if w not in self.parent:
                self.parent[w] = w
                self.verts[w] = 1
                self.edges[w] = 0
                self.log.append(("new", w))
        ru, rv = self.find(u), self.find(v)
        if ru != rv:
            if self.verts[ru] < self.verts[rv]:
                ru, rv = rv, ru
            self.log.append(("merge", rv, self.verts[rv], self.edges[rv]))
            self.parent[rv] = ru
            self.verts[ru] += self.verts[rv]
            self.edges[ru] += self.edges[rv]
        self.log.append(("edge", ru))
        self.edges[ru] += 1
        return ru

    def component_excess(self, v: int) -> int:
        r = self.find(v)
        return self.edges[r] - self.verts[r]


def _try_add_orbit(uf: _OrbitUnion, orbit: EdgeOrbit, max_excess: int) -> int | None:
    """Add a whole orbit if the touched components keep excess <= max_excess.

    Returns a rollback mark on success, None (state restored) on failure.
    """
    mark = uf.snapshot()
    touched = set()
    for u, v in orbit.edges:
        uf.add_edge(u, v)
        touched.add(u)
    if all(uf.component_excess(v) <= max_excess for v in touched):
        return mark
    uf.rollback(mark)
    return None


def _gf_dfs(orbits: list[EdgeOrbit], s: float, max_excess: int, collect=None) -> float:
    total = 1.0  # the empty union
    uf = _OrbitUnion()
    chosen: list[int] = []
    edge_count = 0

    def rec(start: int, edge_count: int):
        nonlocal total
        for j in range(start, len(orbits)):
            mark = _try_add_orbit(uf, orbits[j], max_excess)
            if mark is None:
                continue
            chosen.append(j)
            new_count = edge_count + len(orbits[j])
            total += s ** (2 * new_count)
            if collect is not None:
                collect(tuple(chosen))
            rec(j + 1, new_count)
            chosen.pop()
            uf.rollback(mark)

    rec(0, edge_count)
    return total


def _short_orbits_checked(sigma: Permutation, k: int, limit: int) -> list[EdgeOrbit]:
    orbits = orbits_up_to(sigma, k)
    if len(orbits) > limit:
        raise ExactLimitError(
            f"{len(orbits)} short orbits exceed the brute-force limit {limit}"
        )
    return orbits


def gf_orbit_pseudoforests_bruteforce(
    sigma: Permutation, k: int, s: float, limit: int = GF_ORBIT_LIMIT
) -> float:
    """Generating function sum of s^(2 e(H)) over orbit pseudoforests H.

    Enumerates subsets of the short orbits by depth-first search, pruning any
    branch whose union already has a component of positive excess.
    """
    return _gf_dfs(_short_orbits_checked(sigma, k, limit), s, max_excess=0)


def gf_orbit_forests_bruteforce(
    sigma: Permutation, k: int, s: float, limit: int = GF_ORBIT_LIMIT
) -> float:
    """Forest-restricted variant of the orbit generating function."""
    return _gf_dfs(_short_orbits_checked(sigma, k, limit), s, max_excess=-1)


def gf_orbit_pseudoforests_unpruned(sigma: Permutation, k: int, s: float) -> float:
    """Independent oracle: test every subset of short orbits without pruning."""
    orbits = orbits_up_to(sigma, k)
    if len(orbits) > 16:
        raise ExactLimitError("unpruned oracle supports at most 16 orbits")
    total = 0.0
    for mask in range(1 << len(orbits)):
        edges = set()
        for j in range(len(orbits)):
            if mask >> j & 1:
                edges |= orbits[j].edge_set()
        g = BinaryGraph(sigma.n, frozenset(edges))
        if is_pseudoforest(g):
            total += s ** (2 * len(edges))
    return total


def enumerate_orbit_pseudoforests(sigma: Permutation, k: int, limit: int = GF_ORBIT_LIMIT):
    """Yield every orbit pseudoforest (as a list of orbits) assembled from short orbits.

    The empty union is not yielded.
    """
    orbits = _short_orbits_checked(sigma, k, limit)
    found: list[tuple[int, ...]] = []
    _gf_dfs(orbits, 0.0, max_excess=0, collect=found.append)
    for subset in found:
        yield [orbits[j] for j in subset]


def gf_bound_pseudoforest(ct: CycleType, k: int, s: float) -> float:
    """Closed-form upper bound on the orbit-pseudoforest generating function.

    prod over m <= k of
    (1 + s^m n_m [m even] + 2 s^(2m) sum_{l<=m} l n_l + s^(4m) m n_{2m} [2m<=k])^(n_m).
    """
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    log_total = 0.0
    for m in range(1, k + 1):
        nm = ct.count(m)
        if nm == 0:
            continue
        base = 1.0 + 2 * s ** (2 * m) * sum(l * ct.count(l) for l in range(1, m + 1))
        if m % 2 == 0:
            base += s**m * nm
        if 2 * m <= k:
            base += s ** (4 * m) * m * ct.count(2 * m)
        log_total += nm * math.log(base)
    return math.exp(log_total)


def gf_bound_forest(ct: CycleType, k: int, s: float) -> float:
    """Closed-form upper bound on the orbit-forest generating function.

    prod over m <= k of (1 + s^m [m even] + s^(2m) sum_{l<=m} l n_l)^(n_m).
    """
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    log_total = 0.0
    for m in range(1, k + 1):
        nm = ct.count(m)
        if nm == 0:
            continue
        base = 1.0 + s ** (2 * m) * sum(l * ct.count(l) for l in range(1, m + 1))
        if m % 2 == 0:
            base += s**m
        log_total += nm * math.log(base)
    return math.exp(log_total)


# -- Lambert W and the intersection-density ceiling ------------------------------


_BRANCH_POINT = -math.exp(-1)


def lambert_w(x: float, tol: float = 1e-13, max_iter: int = 80) -> float:
    """Principal branch of the Lambert W function on [-1/e, inf).

    Solves w * exp(w) = x by Halley iteration from a series or asymptotic
    initial guess.
    """
    if x < _BRANCH_POINT - 1e-12:
        raise ValueError(f"lambert_w is defined for x >= -1/e, got {x}")
    if x <= _BRANCH_POINT:
        return -1.0
    if x == 0:
        return 0.0
    if x > math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    elif x > -0.25:
        # series around 0
        w = x * (1 - x + 1.5 * x * x)
    else:
        # series around the branch point
        pz = math.sqrt(2 * (math.e * x + 1))
        w = -1 + pz - pz * pz / 3 + 11 * pz**3 / 72
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if w != -1:
            denom = ew * (w + 1) - (w + 2) * f / (2 * w + 2)
        else:
            denom = ew * (w + 1)
        step = f / denom
        w -= step
        if abs(step) <= tol * (1 + abs(w)):
            break
    return w


def planted_intersection_edge_bound(k: int, n: int, p: float, s: float) -> float:
    """High-probability ceiling on intersection edges within any k-node subset.

    Inverts the multiplicative Chernoff bound for Binom(C(k,2), ps^2) at the
    union-bound tail level via the Lambert W function.
    """
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    mu = math.comb(k, 2) * p * s * s
    arg = 2 * math.log(2 * math.e * n / k) / (math.e * (k - 1) * p * s * s) - 1 / math.e
    return mu * math.exp(1 + lambert_w(arg))


# -- Poisson facts about random cycle counts --------------------------------------


def poisson_cycle_moment(a) -> float:
    """Expected product of binomials of cycle counts: 1 / prod(l^(a_l) a_l!).

    ``a[l-1]`` prescribes the falling order of the count of l-cycles; the
    identity is exact whenever sum(l * a_l) <= n.
    """
    denom = 1
    for l, al in enumerate(a, start=1):
        if al < 0:
            raise ValueError("orders must be nonnegative")
        denom *= l**al * math.factorial(al)
    return 1.0 / denom


def cycle_count_product_average(n: int, a) -> Fraction:
    """Exact S_n average of prod(C(n_l, a_l)) by cycle-type enumeration."""
    total = Fraction(0)
    for ct, weight in partitions_as_cycle_types(n):
        prodval = 1
        for l, al in enumerate(a, start=1):
            prodval *= math.comb(ct.count(l), al)
            if prodval == 0:
                break
        total += weight * prodval
    return total


def poisson_truncation_bound(x: float) -> float:
    """Decay bound F(x) for the TV distance between cycle counts and Poissons."""
    m = math.ceil(x)
    return (
        math.sqrt(2 * math.pi * m) * 2 ** (m - 1) / math.factorial(m - 1)
        + 1 / math.factorial(m)
        + 3 * (x / math.e) ** (-x)
    )


@dataclass(frozen=True)
class TvCheckResult:
    tv_estimate: float
    poisson_bound: float
    trials: int


def cycle_type_tv_check(
    n: int, k: int, trials: int, seed=0, cutoff: int = 30
) -> TvCheckResult:
    """Empirical TV distance between sampled (n_1..n_k) and independent Poissons.

    The product-Poisson reference has means 1/l; mass beyond ``cutoff`` per
    coordinate is folded into the estimate.  The asymptotic decay bound
    F(n/k) is reported for context.
    """
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng_from_seed(seed)
    counts: dict[tuple[int, ...], int] = {}
    for _ in range(trials):
        perm = rng.permutation(n)
        cvec = [0] * k
        seen = np.zeros(n, dtype=bool)
        for start in range(n):
            if seen[start]:
                continue
            length = 0
            v = start
            while not seen[v]:
                seen[v] = True
                v = perm[v]
                length += 1
            if length <= k:
                cvec[length - 1] += 1
        key = tuple(cvec)
        counts[key] = counts.get(key, 0) + 1

    pmf_1d = []
    for l in range(1, k + 1):
        lam = 1.0 / l
        row = np.array([math.exp(-lam) * lam**z / math.factorial(z) for z in range(cutoff + 1)])
        pmf_1d.append(row)

    tv = 0.0
    pmf_mass = 0.0
    emp_seen = 0
    for key in product(range(cutoff + 1), repeat=k):
        pmf = math.prod(pmf_1d[l][key[l]] for l in range(k))
        emp = counts.get(key, 0) / trials
        tv += abs(emp - pmf)
        pmf_mass += pmf
        if key in counts:
            emp_seen += counts[key]
    # fold in any mass outside the box
    tv += (1 - pmf_mass) + (trials - emp_seen) / trials
    return TvCheckResult(0.5 * tv, poisson_truncation_bound(n / k), trials)
