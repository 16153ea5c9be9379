"""Graph and permutation value types.

Binary graphs are stored as frozen sets of canonically ordered vertex pairs,
weighted graphs as read-only symmetric numpy arrays, permutations as tuples.
All values are immutable after construction and safe to share across threads.

Vertices are 0-based internally; the text file formats are 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Permutation",
    "BinaryGraph",
    "WeightedGraph",
    "canonical_pair",
    "pair_index",
    "pair_from_index",
    "pairs_from_indices",
    "all_pairs",
    "relabel",
    "intersect",
    "induced_edge_weight",
    "read_binary_graph",
    "write_binary_graph",
    "read_weighted_graph",
    "write_weighted_graph",
    "read_permutation",
    "write_permutation",
]


def canonical_pair(i: int, j: int) -> tuple[int, int]:
    """Return the unordered pair ``{i, j}`` as ``(min, max)``."""
    return (i, j) if i < j else (j, i)


def pair_index(i: int, j: int, n: int) -> int:
    """Dense linear index of the pair ``i < j`` in ``[0, C(n,2))``.

    Pairs are ranked lexicographically: (0,1), (0,2), ..., (n-2,n-1).
    """
    if i > j:
        i, j = j, i
    if not (0 <= i < j < n):
        raise ValueError(f"invalid pair ({i}, {j}) for n={n}")
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def pair_from_index(idx: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    if not 0 <= idx < n * (n - 1) // 2:
        raise ValueError(f"pair index {idx} out of range for n={n}")
    i, j = pairs_from_indices(np.asarray([idx]), n)
    return (int(i[0]), int(j[0]))


def pairs_from_indices(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized inverse of :func:`pair_index` for arrays of linear indices."""
    idx = np.asarray(idx, dtype=np.int64)
    m = n * (n - 1) // 2
    if idx.size and (idx.min() < 0 or idx.max() >= m):
        raise ValueError("pair index out of range")
    t = m - idx
    u = np.ceil((1 + np.sqrt(1 + 8 * t.astype(np.float64))) / 2).astype(np.int64)
    # settle float rounding at triangular-number boundaries
    u -= (u - 1) * (u - 2) // 2 >= t
    u += u * (u - 1) // 2 < t
    i = n - u
    j = idx - (m - u * (u - 1) // 2) + i + 1
    return i, j


def all_pairs(n: int):
    """Iterate the unordered pairs of ``[n]`` in linear-index order."""
    return itertools.combinations(range(n), 2)


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``{0, ..., n-1}`` in one-line notation.

    ``mapping[i]`` is the image of node ``i``.  The composition convention is
    ``(pi o tau)(i) = pi(tau(i))``.
    """

    mapping: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.mapping)
        object.__setattr__(self, "mapping", m)
        if sorted(m) != list(range(len(m))):
            raise ValueError("mapping is not a bijection on {0,...,n-1}")

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def __len__(self) -> int:
        return len(self.mapping)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(n)))

    @staticmethod
    def from_cycles(n: int, cycles) -> "Permutation":
        """Build a permutation from disjoint cycles of 0-based nodes."""
        m = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + type(cyc)((cyc[0],))):
                m[a] = b
        return Permutation(tuple(m))

    def invert(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.mapping):
            inv[v] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self o other``, i.e. ``i -> self(other(i))``."""
        if self.n != other.n:
            raise ValueError("size mismatch in composition")
        return Permutation(tuple(self.mapping[other.mapping[i]] for i in range(self.n)))

    def to_one_based(self) -> tuple[int, ...]:
        return tuple(v + 1 for v in self.mapping)


@dataclass(frozen=True)
class BinaryGraph:
    """A simple undirected graph on ``n`` labeled vertices, no self-loops."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        canon = frozenset(canonical_pair(int(i), int(j)) for i, j in self.edges)
        for i, j in canon:
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", canon)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return canonical_pair(i, j) in self.edges

    @classmethod
    def _from_canonical(cls, n: int, edges: frozenset) -> "BinaryGraph":
        """Trusted fast path: edges must already be canonical (i < j) pairs."""
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "edges", edges)
        return g

    @staticmethod
    def empty(n: int) -> "BinaryGraph":
        return BinaryGraph(n, frozenset())

    @staticmethod
    def complete(n: int) -> "BinaryGraph":
        return BinaryGraph(n, frozenset(all_pairs(n)))

    @staticmethod
    def from_dense(a: np.ndarray) -> "BinaryGraph":
        n = a.shape[0]
        edges = frozenset((i, j) for i, j in all_pairs(n) if a[i, j])
        return BinaryGraph(n, edges)

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a


@dataclass(frozen=True)
class WeightedGraph:
    """A weighted undirected graph: symmetric real matrix, zero diagonal."""

    weight: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight must be a square matrix")
        if not np.allclose(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        if not np.allclose(np.diag(w), 0.0):
            raise ValueError("weight matrix must have zero diagonal")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weight", w)

    @property
    def n(self) -> int:
        return self.weight.shape[0]

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        return np.asarray(self.weight, dtype=dtype)


Graph = BinaryGraph | WeightedGraph


def relabel(g: Graph, pi: Permutation) -> Graph:
    """Return the relabeled graph with entries ``result[i][j] = g[pi(i)][pi(j)]``."""
    if pi.n != g.n:
        raise ValueError(f"permutation size {pi.n} != graph size {g.n}")
    if isinstance(g, BinaryGraph):
        inv = pi.invert()
        edges = frozenset(canonical_pair(inv(u), inv(v)) for u, v in g.edges)
        return BinaryGraph(g.n, edges)
    p = np.asarray(pi.mapping)
    return WeightedGraph(g.weight[np.ix_(p, p)])


def intersect(a: Graph, b: Graph) -> Graph:
    """Entrywise product of two graphs; edge-set intersection for binary ones."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} != {b.n}")
    if isinstance(a, BinaryGraph) and isinstance(b, BinaryGraph):
        return BinaryGraph(a.n, a.edges & b.edges)
    return WeightedGraph(a.to_dense() * b.to_dense())


def induced_edge_weight(g: Graph, nodes) -> float:
    """Total edge weight of the subgraph induced by the node set."""
    s = set(nodes)
    if any(not 0 <= v < g.n for v in s):
        raise ValueError("node set not contained in [n]")
    if isinstance(g, BinaryGraph):
        return float(sum(1 for i, j in g.edges if i in s and j in s))
    idx = sorted(s)
    sub = g.weight[np.ix_(idx, idx)]
    return float(np.triu(sub, 1).sum())


# -- text file formats (1-based on disk) --------------------------------------


def write_binary_graph(g: BinaryGraph, path) -> None:
    with open(path, "w") as f:
        f.write(f"{g.n}\n")
        for i, j in sorted(g.edges):
            f.write(f"{i + 1} {j + 1}\n")


def read_binary_graph(path) -> BinaryGraph:
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    n = int(lines[0])
    edges = set()
    for ln in lines[1:]:
        i, j = (int(t) for t in ln.split())
        edges.add(canonical_pair(i - 1, j - 1))
    return BinaryGraph(n, frozenset(edges))


def write_weighted_graph(g: WeightedGraph, path) -> None:
    with open(path, "w") as f:
        f.write(f"{g.n}\n")
        for row in g.weight:
            f.write(",".join(repr(float(x)) for x in row) + "\n")


def read_weighted_graph(path) -> WeightedGraph:
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    n = int(lines[0])
    rows = [[float(t) for t in ln.split(",")] for ln in lines[1 : n + 1]]
    return WeightedGraph(np.asarray(rows))


def write_permutation(pi: Permutation, path) -> None:
    with open(path, "w") as f:
        f.write(" ".join(str(v) for v in pi.to_one_based()) + "\n")


def read_permutation(path) -> Permutation:
    with open(path) as f:
        tokens = f.read().split()
    return Permutation(tuple(int(t) - 1 for t in tokens))
