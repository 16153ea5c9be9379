"""Permutation orbit algebra on nodes and edges.

A node permutation sigma acts on the unordered pairs of [n] by permuting
endpoints; the cycles of that induced action are the *edge orbits*.  This
module computes cycle decompositions, the edge-orbit census, the four-way
structural classification of edge orbits (matching / bridge / cycle / split),
the backbone multigraph summary of a union of orbits, and the forest /
pseudoforest predicates that drive the second-moment enumeration machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graphs import BinaryGraph, Permutation, all_pairs, canonical_pair, intersect

__all__ = [
    "CycleType",
    "EdgeOrbit",
    "OrbitClass",
    "EdgeOrbitCensus",
    "GiantNode",
    "GiantEdge",
    "BackboneGraph",
    "node_cycles",
    "cycle_type",
    "edge_permutation",
    "edge_orbits",
    "census_predict_small",
    "census_from_cycle_type",
    "classify_orbit",
    "orbit_label",
    "orbits_up_to",
    "complete_orbits",
    "backbone",
    "reconstruct_orbit_graph",
    "orbit_from_backbone_edge",
    "excess",
    "connected_components",
    "is_forest",
    "is_pseudoforest",
]


# -- cycle decomposition -------------------------------------------------------


@dataclass(frozen=True)
class CycleType:
    """Cycle type of a permutation: ``counts[m-1]`` is the number of m-node orbits."""

    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise ValueError("orbit counts must be nonnegative")

    @property
    def n(self) -> int:
        return sum((m + 1) * c for m, c in enumerate(self.counts))

    def count(self, m: int) -> int:
        """Number of m-node orbits (0 when m exceeds the stored range)."""
        if m < 1:
            raise ValueError("orbit length must be >= 1")
        return self.counts[m - 1] if m <= len(self.counts) else 0

    @staticmethod
    def from_counts(n: int, counts: dict[int, int]) -> "CycleType":
        arr = [0] * n
        for m, c in counts.items():
            arr[m - 1] = c
        ct = CycleType(tuple(arr))
        if ct.n != n:
            raise ValueError("orbit lengths do not sum to n")
        return ct


def node_cycles(sigma: Permutation) -> tuple[list[tuple[int, ...]], CycleType]:
    """Decompose sigma into node orbits.

    Each orbit is listed starting from its minimal element and following
    sigma; orbits are sorted by their minimal element.  Also returns the
    cycle type.
    """
    n = sigma.n
    seen = [False] * n
    orbits = []
    counts = [0] * n
    for start in range(n):
        if seen[start]:
            continue
        orbit = [start]
        seen[start] = True
        v = sigma(start)
        while v != start:
            orbit.append(v)
            seen[v] = True
            v = sigma(v)
        orbits.append(tuple(orbit))
        counts[len(orbit) - 1] += 1
    return orbits, CycleType(tuple(counts))


def cycle_type(sigma: Permutation) -> CycleType:
    return node_cycles(sigma)[1]


def edge_permutation(sigma: Permutation) -> dict[tuple[int, int], tuple[int, int]]:
    """The induced permutation on unordered pairs: (i,j) -> (sigma(i), sigma(j))."""
    return {
        (i, j): canonical_pair(sigma(i), sigma(j)) for i, j in all_pairs(sigma.n)
    }


@dataclass(frozen=True)
class EdgeOrbit:
    """One cycle of the induced edge permutation.

    ``edges`` lists the orbit in traversal order starting from the
    lexicographically smallest pair; the edge permutation maps each listed
    edge to the next, cyclically.
    """

    edges: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def representative(self) -> tuple[int, int]:
        return self.edges[0]

    def edge_set(self) -> frozenset:
        return frozenset(self.edges)


@dataclass(frozen=True)
class EdgeOrbitCensus:
    """Counts of edge orbits by length: ``by_length[k]`` is the number of k-edge orbits."""

    n: int
    by_length: dict[int, int] = field(default_factory=dict)

    def count(self, k: int) -> int:
        return self.by_length.get(k, 0)

    def total_weight(self) -> int:
        """Sum of k * N_k; always equals C(n, 2)."""
        return sum(k * c for k, c in self.by_length.items())


def _orbit_of_pair(sigma: Permutation, pair: tuple[int, int]) -> tuple[tuple[int, int], ...]:
    edges = [pair]
    cur = canonical_pair(sigma(pair[0]), sigma(pair[1]))
    while cur != pair:
        edges.append(cur)
        cur = canonical_pair(sigma(cur[0]), sigma(cur[1]))
    # rotate so the lexicographically smallest pair leads
    k = edges.index(min(edges))
    return tuple(edges[k:] + edges[:k])


def edge_orbits(sigma: Permutation) -> tuple[list[EdgeOrbit], EdgeOrbitCensus]:
    """All edge orbits of sigma, sorted by representative pair, plus the census."""
    n = sigma.n
    seen = set()
    orbits = []
    by_length: dict[int, int] = {}
    for pair in all_pairs(n):
        if pair in seen:
            continue
        cyc = _orbit_of_pair(sigma, pair)
        seen.update(cyc)
        orbits.append(EdgeOrbit(cyc))
        by_length[len(cyc)] = by_length.get(len(cyc), 0) + 1
    orbits.sort(key=lambda o: o.representative)
    return orbits, EdgeOrbitCensus(n, by_length)


def census_predict_small(ct: CycleType) -> tuple[int, int]:
    """Predicted counts (N_1, N_2) of 1- and 2-edge orbits from the cycle type.

    N_1 = C(n_1, 2) + n_2 and N_2 = 2 C(n_2, 2) + n_1 n_2 + n_4.
    """
    n1, n2, n4 = ct.count(1), ct.count(2), ct.count(4)
    return (math.comb(n1, 2) + n2, 2 * math.comb(n2, 2) + n1 * n2 + n4)


def census_from_cycle_type(ct: CycleType) -> dict[int, int]:
    """Full edge-orbit census {k: N_k} determined by the node cycle type.

    A single m-orbit contributes floor((m-1)/2) orbits of length m plus, for
    even m, one orbit of length m/2.  A pair of orbits with lengths l <= m
    contributes gcd(l, m) orbits of length lcm(l, m).
    """
    lengths = [m for m in range(1, len(ct.counts) + 1) if ct.count(m) > 0]
    census: dict[int, int] = {}

    def add(k: int, c: int):
        if c:
            census[k] = census.get(k, 0) + c

    for m in lengths:
        nm = ct.count(m)
        add(m, nm * ((m - 1) // 2))
        if m % 2 == 0:
            add(m // 2, nm)
        add(m, math.comb(nm, 2) * m)
    for i, l in enumerate(lengths):
        for m in lengths[i + 1 :]:
            add(math.lcm(l, m), ct.count(l) * ct.count(m) * math.gcd(l, m))
    return census


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class OrbitClass:
    """Structural class of an edge orbit.

    kind 'M': perfect matching between two distinct node orbits of equal
    length m.  kind 'B': bridge between node orbits of lengths ell < m; the
    orbit graph is gcd(ell, m) disjoint copies of a complete bipartite graph
    and has lcm(ell, m) edges.  kind 'C': within one node orbit, offset not
    equal to m/2; a disjoint union of cycles with m edges in total.  kind
    'S': the antipodal pairing within one even node orbit; a perfect matching
    with m/2 edges.
    """

    kind: str
    m: int
    ell: int | None = None

    @property
    def orbit_length(self) -> int:
        if self.kind == "M" or self.kind == "C":
            return self.m
        if self.kind == "B":
            return math.lcm(self.ell, self.m)
        if self.kind == "S":
            return self.m // 2
        raise ValueError(f"unknown kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "B":
            return f"B_{{{self.m},{self.ell}}}"
        return f"{self.kind}_{self.m}"


def _orbit_lookup(sigma: Permutation):
    orbits, _ = node_cycles(sigma)
    of_node = {}
    for idx, orb in enumerate(orbits):
        for v in orb:
            of_node[v] = idx
    return orbits, of_node


def classify_orbit(sigma: Permutation, orbit: EdgeOrbit) -> OrbitClass:
    """Classify an edge orbit of sigma as M, B, C, or S."""
    node_orbits, of_node = _orbit_lookup(sigma)
    i, j = orbit.representative
    oi, oj = node_orbits[of_node[i]], node_orbits[of_node[j]]
    cls = _classify_endpoints(sigma, i, j, oi, oj)
    if cls.orbit_length != len(orbit):
        raise ValueError(
            f"edge set of size {len(orbit)} is not an orbit of the given permutation"
        )
    _check_is_orbit(sigma, orbit)
    return cls


def _check_is_orbit(sigma: Permutation, orbit: EdgeOrbit) -> None:
    expected = _orbit_of_pair(sigma, orbit.representative)
    if frozenset(expected) != orbit.edge_set():
        raise ValueError("edge set is not an orbit of the given permutation")


def _classify_endpoints(sigma, i, j, oi, oj) -> OrbitClass:
    if oi is not oj:
        l, m = len(oi), len(oj)
        if l == m:
            return OrbitClass("M", m)
        return OrbitClass("B", max(l, m), min(l, m))
    m = len(oi)
    d = (oi.index(j) - oi.index(i)) % m
    if m % 2 == 0 and d == m // 2:
        return OrbitClass("S", m)
    return OrbitClass("C", m)


def orbit_label(sigma: Permutation, orbit: EdgeOrbit) -> int | None:
    """Canonical integer label of an edge orbit within its class.

    The canonical traversal of each node orbit starts at its minimal element.
    For a C orbit on traversal (v_0, ..., v_{m-1}) the label is the offset
    min(d, m - d) in [floor((m-1)/2)].  For an M orbit between traversals P
    (smaller minimum) and R, the label is 1 + the R-index paired with p_0.
    For a B orbit between the shorter traversal P and longer R the label is
    1 + (min R-index paired with p_0 mod gcd).  Splits carry no label.
    """
    node_orbits, of_node = _orbit_lookup(sigma)
    i, j = orbit.representative
    oi, oj = node_orbits[of_node[i]], node_orbits[of_node[j]]
    cls = _classify_endpoints(sigma, i, j, oi, oj)
    if cls.kind == "S":
        return None
    if cls.kind == "C":
        m = len(oi)
        d = (oi.index(j) - oi.index(i)) % m
        return min(d, m - d)
    # two distinct node orbits; orient: P = shorter, ties by smaller minimum
    if (len(oi), oi[0]) <= (len(oj), oj[0]):
        pp, rr = oi, oj
    else:
        pp, rr = oj, oi
    r_index = {v: t for t, v in enumerate(rr)}
    partners = []
    for a, b in orbit.edges:
        if a == pp[0]:
            partners.append(r_index[b])
        elif b == pp[0]:
            partners.append(r_index[a])
    if cls.kind == "M":
        return 1 + partners[0]
    g = math.gcd(len(pp), len(rr))
    return 1 + min(p % g for p in partners)


def orbits_up_to(sigma: Permutation, k: int) -> list[EdgeOrbit]:
    """Edge orbits of length <= k whose endpoint node orbits have length <= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    node_orbits, of_node = _orbit_lookup(sigma)
    out = []
    for orbit in edge_orbits(sigma)[0]:
        if len(orbit) > k:
            continue
        i, j = orbit.representative
        if len(node_orbits[of_node[i]]) <= k and len(node_orbits[of_node[j]]) <= k:
            out.append(orbit)
    return out


def complete_orbits(
    sigma: Permutation, a: BinaryGraph, b_pi: BinaryGraph, k: int
) -> tuple[list[EdgeOrbit], BinaryGraph]:
    """Short orbits fully contained in the intersection graph, and their union.

    ``b_pi`` must already be relabeled by the same latent permutation used to
    align the planted pair.  Returns the list of complete orbits and the
    orbit graph they span.
    """
    inter = intersect(a, b_pi)
    complete = [
        o for o in orbits_up_to(sigma, k) if o.edge_set() <= inter.edges
    ]
    union = frozenset().union(*(o.edge_set() for o in complete)) if complete else frozenset()
    return complete, BinaryGraph(a.n, union)


# -- backbone graphs -----------------------------------------------------------


@dataclass(frozen=True)
class GiantNode:
    """A node orbit in a backbone graph.

    ``gid = (length, index)`` identifies the node; ``split`` marks the
    presence of the antipodal split orbit; ``members`` holds the concrete
    node-orbit traversal when the backbone came from an actual permutation.
    """

    gid: tuple[int, int]
    split: bool = False
    members: tuple[int, ...] | None = None

    @property
    def length(self) -> int:
        return self.gid[0]


@dataclass(frozen=True)
class GiantEdge:
    """A labeled giant edge: kind 'M', 'B', or 'C' (self-loop, u == v)."""

    kind: str
    u: tuple[int, int]
    v: tuple[int, int]
    label: int

    def endpoints_key(self):
        return tuple(sorted((self.u, self.v)))


@dataclass(frozen=True)
class BackboneGraph:
    """Labeled multigraph summary of an orbit graph.

    One giant node per node orbit of length <= k (isolated giant nodes are
    kept), one giant edge per matching/bridge/cycle orbit, and a split flag
    per antipodal-split orbit.  ``roots`` is optional per-component rooting
    metadata used by the generation algorithms; it is ignored by equality.
    """

    nodes: tuple[GiantNode, ...]
    edges: tuple[GiantEdge, ...]
    roots: tuple[tuple[int, int], ...] = ()

    def node_by_gid(self, gid) -> GiantNode:
        for nd in self.nodes:
            if nd.gid == gid:
                return nd
        raise KeyError(gid)

    def level_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for nd in self.nodes:
            counts[nd.length] = counts.get(nd.length, 0) + 1
        return counts

    def split_gids(self) -> set:
        return {nd.gid for nd in self.nodes if nd.split}

    def level_edges(self, m: int) -> list[GiantEdge]:
        """M edges and C self-loops among the level-m giant nodes."""
        return [
            e
            for e in self.edges
            if e.kind in ("M", "C") and e.u[0] == m and e.v[0] == m
        ]

    def bridges_from(self, m: int) -> list[GiantEdge]:
        """B edges whose longer side is level m (oriented longer -> shorter)."""
        return [e for e in self.edges if e.kind == "B" and max(e.u[0], e.v[0]) == m]

    def canonical_key(self):
        """Hashable form ignoring roots and member sets; used for stream containment."""
        nodes = tuple(sorted((nd.gid, nd.split) for nd in self.nodes))
        edges = tuple(sorted((e.kind, e.endpoints_key(), e.label) for e in self.edges))
        return (nodes, edges)


def backbone(sigma: Permutation, h: BinaryGraph, k: int) -> BackboneGraph:
    """Backbone graph of an orbit graph ``h`` assembled from orbits of length <= k.

    Raises if ``h`` is not a union of complete edge orbits drawn from the
    short-orbit set.
    """
    node_orbits, of_node = _orbit_lookup(sigma)
    short = [orb for orb in node_orbits if len(orb) <= k]
    gid_of_orbit = {}
    by_level: dict[int, list] = {}
    for orb in short:
        by_level.setdefault(len(orb), []).append(orb)
    for m, orbs in by_level.items():
        orbs.sort(key=lambda o: o[0])
        for idx, orb in enumerate(orbs):
            gid_of_orbit[orb] = (m, idx)

    remaining = set(h.edges)
    splits = set()
    giant_edges = []
    while remaining:
        pair = min(remaining)
        cyc = _orbit_of_pair(sigma, pair)
        if not frozenset(cyc) <= remaining:
            raise ValueError("graph is not a union of complete edge orbits")
        remaining -= frozenset(cyc)
        orbit = EdgeOrbit(cyc)
        i, j = orbit.representative
        oi, oj = node_orbits[of_node[i]], node_orbits[of_node[j]]
        if max(len(oi), len(oj), len(orbit)) > k:
            raise ValueError("graph contains an orbit outside the length-k window")
        cls = _classify_endpoints(sigma, i, j, oi, oj)
        if cls.kind == "S":
            splits.add(gid_of_orbit[oi])
            continue
        label = orbit_label(sigma, orbit)
        if cls.kind == "C":
            gid = gid_of_orbit[oi]
            giant_edges.append(GiantEdge("C", gid, gid, label))
        else:
            u, v = sorted((gid_of_orbit[oi], gid_of_orbit[oj]))
            giant_edges.append(GiantEdge(cls.kind, u, v, label))

    nodes = tuple(
        GiantNode(gid_of_orbit[orb], gid_of_orbit[orb] in splits, orb)
        for orb in sorted(short, key=lambda o: (len(o), o[0]))
    )
    return BackboneGraph(nodes, tuple(sorted(giant_edges, key=lambda e: (e.endpoints_key(), e.kind, e.label))))


def orbit_from_backbone_edge(
    members_u: tuple[int, ...], members_v: tuple[int, ...] | None, kind: str, label: int | None
) -> frozenset:
    """Concrete edge set of a single labeled orbit given node-orbit traversals."""
    if kind == "S":
        m = len(members_u)
        return frozenset(
            canonical_pair(members_u[t], members_u[t + m // 2]) for t in range(m // 2)
        )
    if kind == "C":
        m = len(members_u)
        return frozenset(
            canonical_pair(members_u[t], members_u[(t + label) % m]) for t in range(m)
        )
    # matching or bridge between two distinct orbits; orient shorter/min first
    if (len(members_u), members_u[0]) <= (len(members_v), members_v[0]):
        pp, rr = members_u, members_v
    else:
        pp, rr = members_v, members_u
    l, m = len(pp), len(rr)
    b = label - 1
    return frozenset(
        canonical_pair(pp[t % l], rr[(b + t) % m]) for t in range(math.lcm(l, m))
    )


def reconstruct_orbit_graph(sigma: Permutation, gamma: BackboneGraph) -> BinaryGraph:
    """Inverse of :func:`backbone`: rebuild the orbit graph from its backbone."""
    edges = set()
    for nd in gamma.nodes:
        if nd.split:
            edges |= orbit_from_backbone_edge(nd.members, None, "S", None)
    for e in gamma.edges:
        mu = gamma.node_by_gid(e.u).members
        mv = gamma.node_by_gid(e.v).members if e.v != e.u else None
        edges |= orbit_from_backbone_edge(mu, mv, e.kind, e.label)
    return BinaryGraph(sigma.n, frozenset(edges))


# -- excess and (pseudo)forest predicates --------------------------------------


def connected_components(g: BinaryGraph) -> list[tuple[frozenset, int]]:
    """Components over non-isolated vertices as (vertex set, edge count) pairs."""
    adj: dict[int, list[int]] = {}
    for i, j in g.edges:
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    seen = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        stack = [start]
        verts = set()
        while stack:
            v = stack.pop()
            if v in verts:
                continue
            verts.add(v)
            stack.extend(w for w in adj[v] if w not in verts)
        seen |= verts
        ecount = sum(1 for i, j in g.edges if i in verts)
        comps.append((frozenset(verts), ecount))
    return comps


def excess(g: BinaryGraph, include_isolated: bool = False) -> int:
    """Edges minus vertices.

    By default only non-isolated vertices count; with ``include_isolated``
    the full vertex set [n] is used.
    """
    if include_isolated:
        return g.edge_count - g.n
    touched = {v for e in g.edges for v in e}
    return g.edge_count - len(touched)


def is_forest(g: BinaryGraph) -> bool:
    """True when the graph is acyclic."""
    return all(e == len(v) - 1 for v, e in connected_components(g))


def is_pseudoforest(g: BinaryGraph) -> bool:
    """True when every connected component has at most one cycle (excess <= 0)."""
    return all(e <= len(v) for v, e in connected_components(g))
