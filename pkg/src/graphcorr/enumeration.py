"""Counting and generating backbone forests and pseudoforests.

The generation algorithms build candidate backbone graphs for a given cycle
type level by level: a rooted (pseudo)forest of matchings per level, then
splits, then bridges attached at component roots (pseudoforests additionally
bridge backward into the doubled level).  The streams deliberately
over-generate; every emitted graph carries the verdict of the structural
validator, and the stream length is bounded by the closed-form product
formulas that drive the generating-function bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .graphs import Permutation
from .orbits import (
    BackboneGraph,
    CycleType,
    EdgeOrbit,
    GiantEdge,
    GiantNode,
    classify_orbit,
    node_cycles,
)

__all__ = [
    "ConstructionParams",
    "GeneratedBackbone",
    "count_rooted_forests",
    "pseudoforest_count_bound",
    "enumerate_rooted_forests",
    "enumerate_rooted_pseudoforests",
    "algorithm1_forests",
    "algorithm2_pseudoforests",
    "stream_bound_forest",
    "stream_bound_pseudoforest",
    "validate_forest",
    "validate_pseudoforest",
    "params_from_backbone",
    "ComponentState",
    "excess_operations_check",
]


# -- closed-form counts and their brute-force twins ------------------------------


def count_rooted_forests(n: int, a: int) -> int:
    """Number of rooted forests on n labeled vertices with a edges: C(n-1, a) n^a."""
    if not 0 <= a <= n - 1:
        raise ValueError(f"need 0 <= a <= n-1, got a={a}, n={n}")
    return math.comb(n - 1, a) * n**a


def pseudoforest_count_bound(n: int, a: int) -> int:
    """Upper bound C(n, a) (2n)^a on rooted pseudoforests with a edges.

    Self-loops and parallel edges are allowed in the counted multigraphs.
    """
    if a < 0:
        raise ValueError("a must be nonnegative")
    return math.comb(n, a) * (2 * n) ** a


def _components_of(n: int, edges) -> list[tuple[int, ...]]:
    """Connected components (as sorted tuples) of a multigraph on [n], loops allowed."""
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[rv] = ru
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [tuple(sorted(g)) for g in sorted(groups.values())]


def _is_acyclic(n: int, edges) -> bool:
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[rv] = ru
    return True


def enumerate_rooted_forests(n: int, a: int):
    """Yield (edges, roots) for every rooted forest on [n] with a edges."""
    for edges in itertools.combinations(itertools.combinations(range(n), 2), a):
        if not _is_acyclic(n, edges):
            continue
        comps = _components_of(n, edges)
        for roots in itertools.product(*comps):
            yield edges, roots


def _pseudoforest_ok(n: int, edges) -> bool:
    """Per-component excess <= 0, loops and multiplicities counted as edges."""
    comps = _components_of(n, edges)
    for comp in comps:
        cs = set(comp)
        e = sum(1 for u, v in edges if u in cs)
        if e > len(comp):
            return False
    return True


def enumerate_rooted_pseudoforests(n: int, a: int):
    """Yield (edges, roots) over rooted pseudoforest multigraphs with a edges.

    Edges are multisets over unordered pairs and self-loops; each component
    carries at most one cycle and one root.
    """
    slots = [(i, i) for i in range(n)] + list(itertools.combinations(range(n), 2))
    for chosen in itertools.combinations_with_replacement(range(len(slots)), a):
        edges = tuple(slots[i] for i in chosen)
        if any(edges.count(e) > 2 for e in set(edges)):
            continue
        if not _pseudoforest_ok(n, edges):
            continue
        comps = _components_of(n, edges)
        for roots in itertools.product(*comps):
            yield edges, roots


# -- construction parameters and streams -----------------------------------------


@dataclass(frozen=True)
class ConstructionParams:
    """Per-length stage counts for the generation algorithms.

    ``a[t]`` matchings/cycles, ``b[t]`` split components, ``c[t]`` forward
    bridges, ``d[t]`` backward bridges (forests take no ``d``).  Missing keys
    mean zero.
    """

    a: dict = field(default_factory=dict)
    b: dict = field(default_factory=dict)
    c: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)

    def at(self, t: int) -> tuple[int, int, int, int]:
        return (
            self.a.get(t, 0),
            self.b.get(t, 0),
            self.c.get(t, 0),
            self.d.get(t, 0),
        )

    def check(self, ct: CycleType, k: int, allow_backward: bool) -> bool:
        """Stage feasibility for the cycle type; infeasible params give empty streams."""
        for t in range(1, k + 1):
            a, b, c, d = self.at(t)
            if min(a, b, c, d) < 0:
                return False
            if b and t % 2:
                return False
            if d and (not allow_backward or 2 * t > k):
                return False
            if a + b + c + d > ct.count(t) or (a and a > ct.count(t)):
                return False
        return True


@dataclass(frozen=True)
class GeneratedBackbone:
    """A stream item: the generated backbone plus its validator verdict."""

    backbone: BackboneGraph
    valid: bool
    violations: tuple[str, ...]


def stream_bound_forest(ct: CycleType, k: int, params: ConstructionParams) -> int:
    """Product bound on the forest stream length for the given parameters."""
    total = 1
    for t in range(1, k + 1):
        nt = ct.count(t)
        a, b, c, _ = params.at(t)
        if b and t % 2:
            return 0
        lower = sum(l * ct.count(l) for l in range(1, t))
        total *= (
            math.comb(nt, a)
            * math.comb(nt - a, b)
            * math.comb(nt - a - b, c)
            * (t * nt) ** a
            * lower**c
        )
    return total


def stream_bound_pseudoforest(ct: CycleType, k: int, params: ConstructionParams) -> int:
    """Product bound on the pseudoforest stream length for the given parameters."""
    total = 1
    for t in range(1, k + 1):
        nt = ct.count(t)
        a, b, c, d = params.at(t)
        if (b and t % 2) or (d and 2 * t > k):
            return 0
        lower = sum(l * ct.count(l) for l in range(1, t))
        total *= (
            math.comb(nt, a)
            * math.comb(nt - a, b)
            * math.comb(nt - a - b, c)
            * math.comb(nt - a - b - c, d)
            * (2 * t * nt) ** a
            * nt**b
            * lower**c
            * (t * ct.count(2 * t)) ** d
        )
    return total


def _bridge_targets(ct: CycleType, t: int) -> list[tuple[int, int, int]]:
    """Forward-bridge options from level t: (shorter length, node index, label)."""
    out = []
    for l in range(1, t):
        if t % l or ct.count(l) == 0:
            continue
        for v in range(ct.count(l)):
            for lab in range(1, l + 1):
                out.append((l, v, lab))
    return out


def _edge_label_assignments(edges, loops, t: int):
    """All label assignments: distinct labels on parallel edges, loops from the C range."""
    groups: dict[tuple[int, int], int] = {}
    for e in edges:
        groups[e] = groups.get(e, 0) + 1
    keys = sorted(groups)
    per_group = [
        list(itertools.combinations(range(1, t + 1), groups[e])) for e in keys
    ]
    loop_groups: dict[int, int] = {}
    for v in loops:
        loop_groups[v] = loop_groups.get(v, 0) + 1
    loop_keys = sorted(loop_groups)
    loop_range = (t - 1) // 2
    per_loop = [
        list(itertools.combinations(range(1, loop_range + 1), loop_groups[v]))
        for v in loop_keys
    ]
    for edge_combo in itertools.product(*per_group):
        edge_labels = tuple(
            (e, lab) for e, labs in zip(keys, edge_combo) for lab in labs
        )
        for loop_combo in itertools.product(*per_loop):
            loop_labels = tuple(
                (v, lab) for v, labs in zip(loop_keys, loop_combo) for lab in labs
            )
            yield edge_labels, loop_labels


def _level_plans(ct, k, t, a, b, c, d, pseudo: bool):
    """Enumerate all stage choices at level t.

    Yields dicts with labeled matchings/loops, split node indices, rooted
    components, and bridge assignments (targets resolved across levels).
    """
    nt = ct.count(t)
    if pseudo:
        slots = [(i, i) for i in range(nt)] + list(itertools.combinations(range(nt), 2))
        stage1 = []
        for chosen in itertools.combinations_with_replacement(range(len(slots)), a):
            edges = tuple(slots[i] for i in chosen)
            if any(edges.count(e) > 2 for e in set(edges)):
                continue
            if not _pseudoforest_ok(nt, edges):
                continue
            stage1.append(edges)
    else:
        stage1 = [
            edges
            for edges in itertools.combinations(itertools.combinations(range(nt), 2), a)
            if _is_acyclic(nt, edges)
        ]

    fwd_targets = _bridge_targets(ct, t)
    bwd_range = ct.count(2 * t)

    for edges in stage1:
        plain_edges = [e for e in edges if e[0] != e[1]]
        loops = [e[0] for e in edges if e[0] == e[1]]
        comps = _components_of(nt, edges)
        tree_idx = []
        for ci, comp in enumerate(comps):
            cs = set(comp)
            ecount = sum(1 for u, v in edges if u in cs)
            if ecount == len(comp) - 1:
                tree_idx.append(ci)
        if b + c + d > len(tree_idx):
            continue
        for labels in _edge_label_assignments(tuple(plain_edges), loops, t):
            edge_labels, loop_labels = labels
            for roots in itertools.product(*comps):
                for split_cis in itertools.combinations(tree_idx, b):
                    split_nodes_opts = []
                    for ci in split_cis:
                        if pseudo:
                            split_nodes_opts.append(list(comps[ci]))
                        else:
                            split_nodes_opts.append([roots[ci]])
                    for split_choice in itertools.product(*split_nodes_opts):
                        splits = set()
                        for ci, chosen_node in zip(split_cis, split_choice):
                            splits.add(roots[ci])
                            splits.add(chosen_node)
                        rem = [ci for ci in tree_idx if ci not in split_cis]
                        for fwd_cis in itertools.combinations(rem, c):
                            for fwd_assign in itertools.product(fwd_targets, repeat=c):
                                rem2 = [ci for ci in rem if ci not in fwd_cis]
                                for bwd_cis in itertools.combinations(rem2, d):
                                    bwd_opts = itertools.product(
                                        itertools.product(range(bwd_range), range(1, t + 1)),
                                        repeat=d,
                                    )
                                    for bwd_assign in bwd_opts:
                                        yield {
                                            "edges": tuple(edge_labels),
                                            "loops": tuple(loop_labels),
                                            "roots": roots,
                                            "splits": frozenset(splits),
                                            "fwd": tuple(
                                                (roots[ci], tgt)
                                                for ci, tgt in zip(fwd_cis, fwd_assign)
                                            ),
                                            "bwd": tuple(
                                                (roots[ci], tgt)
                                                for ci, tgt in zip(bwd_cis, bwd_assign)
                                            ),
                                        }


def _assemble(ct: CycleType, k: int, plans: dict) -> BackboneGraph:
    nodes = []
    split_sets = {t: plan["splits"] for t, plan in plans.items()}
    for t in range(1, k + 1):
        for i in range(ct.count(t)):
            nodes.append(GiantNode((t, i), i in split_sets.get(t, frozenset())))
    edges = []
    roots = []
    for t, plan in plans.items():
        for (u, v), lab in plan["edges"]:
            edges.append(GiantEdge("M", (t, u), (t, v), lab))
        for v, lab in plan["loops"]:
            edges.append(GiantEdge("C", (t, v), (t, v), lab))
        for src, (l, v, lab) in plan["fwd"]:
            edges.append(GiantEdge("B", (l, v), (t, src), lab))
        for src, (v, lab) in plan["bwd"]:
            edges.append(GiantEdge("B", (t, src), (2 * t, v), lab))
        roots.extend((t, r) for r in plan["roots"])
    edges.sort(key=lambda e: (e.endpoints_key(), e.kind, e.label))
    return BackboneGraph(tuple(nodes), tuple(edges), tuple(sorted(roots)))


def _stream(ct: CycleType, k: int, params: ConstructionParams, pseudo: bool):
    if not params.check(ct, k, allow_backward=pseudo):
        return
    validate = validate_pseudoforest if pseudo else validate_forest
    levels = [t for t in range(1, k + 1)]
    per_level = []
    for t in levels:
        a, b, c, d = params.at(t)
        if not pseudo:
            d = 0
        per_level.append(list(_level_plans(ct, k, t, a, b, c, d, pseudo)))
    for combo in itertools.product(*per_level):
        plans = dict(zip(levels, combo))
        gamma = _assemble(ct, k, plans)
        ok, violations = validate(gamma)
        yield GeneratedBackbone(gamma, ok, violations)


def algorithm1_forests(ct: CycleType, k: int, params: ConstructionParams):
    """Stream of candidate backbone forests for the given stage counts.

    Each item carries the forest-validator verdict; the stream length never
    exceeds :func:`stream_bound_forest`.
    """
    return _stream(ct, k, params, pseudo=False)


def algorithm2_pseudoforests(ct: CycleType, k: int, params: ConstructionParams):
    """Stream of candidate backbone pseudoforests for the given stage counts.

    Over-generates by design; items carry the pseudoforest-validator verdict
    and the stream length never exceeds :func:`stream_bound_pseudoforest`.
    """
    return _stream(ct, k, params, pseudo=True)


# -- structural validators --------------------------------------------------------


def _level_structure(gamma: BackboneGraph, m: int):
    """Components of the level-m subgraph with per-component bookkeeping."""
    nodes = [nd.gid for nd in gamma.nodes if nd.length == m]
    index = {gid: i for i, gid in enumerate(nodes)}
    level_edges = gamma.level_edges(m)
    merge_edges = [
        (index[e.u], index[e.v]) for e in level_edges if e.u != e.v
    ]
    comps = _components_of(len(nodes), merge_edges)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for i in comp:
            comp_of[nodes[i]] = ci
    info = []
    splits = gamma.split_gids()
    for comp in comps:
        members = {nodes[i] for i in comp}
        ecount = sum(
            1 for e in level_edges if e.u in members
        )
        info.append(
            {
                "members": members,
                "edges": ecount,
                "is_tree": ecount == len(members) - 1,
                "splits": sum(1 for g in members if g in splits),
                "loops": sum(1 for e in level_edges if e.u == e.v and e.u in members),
            }
        )
    return comp_of, info


def _is_plain_tree(gamma: BackboneGraph, m: int, comp_of, info, gid) -> bool:
    ci = comp_of[gid]
    c = info[ci]
    if not c["is_tree"] or c["splits"]:
        return False
    members = c["members"]
    return not any(
        max(e.u[0], e.v[0]) == m and (e.u in members or e.v in members)
        for e in gamma.bridges_from(m)
    )


def _common_checks(gamma: BackboneGraph) -> list[str]:
    violations = []
    for e in gamma.edges:
        if e.kind == "B":
            lo, hi = sorted((e.u[0], e.v[0]))
            if lo == hi or hi % lo:
                violations.append("bridge-between-non-divisor-lengths")
            if not 1 <= e.label <= lo:
                violations.append("bridge-label-out-of-range")
        elif e.kind == "M":
            if e.u[0] != e.v[0] or e.u == e.v:
                violations.append("matching-endpoints-not-distinct-equal-length")
            if not 1 <= e.label <= e.u[0]:
                violations.append("matching-label-out-of-range")
        elif e.kind == "C":
            if e.u != e.v:
                violations.append("self-loop-endpoints-differ")
            if not 1 <= e.label <= (e.u[0] - 1) // 2:
                violations.append("self-loop-label-out-of-range")
    for nd in gamma.nodes:
        if nd.split and nd.length % 2:
            violations.append("split-on-odd-length-orbit")
    return violations


def validate_forest(gamma: BackboneGraph) -> tuple[bool, tuple[str, ...]]:
    """Necessary conditions for the orbit graph of ``gamma`` to be a forest.

    Checks, per level: the level graph is a simple forest; bridges connect
    divisor lengths; no self-loops; and no component carries more than one
    split-or-bridge attachment in total.
    """
    violations = _common_checks(gamma)
    if any(e.kind == "C" for e in gamma.edges):
        violations.append("self-loop-present")
    lengths = sorted({nd.length for nd in gamma.nodes})
    for m in lengths:
        level_edges = gamma.level_edges(m)
        seen = set()
        for e in level_edges:
            key = e.endpoints_key()
            if key in seen:
                violations.append("parallel-giant-edges")
            seen.add(key)
        comp_of, info = _level_structure(gamma, m)
        for c in info:
            if c["edges"] > len(c["members"]) - 1:
                violations.append("level-graph-not-forest")
        bridges = gamma.bridges_from(m)
        per_comp_bridges: dict[int, int] = {}
        for e in bridges:
            u = e.u if e.u[0] == m else e.v
            ci = comp_of[u]
            per_comp_bridges[ci] = per_comp_bridges.get(ci, 0) + 1
        for ci, c in enumerate(info):
            if c["splits"] + per_comp_bridges.get(ci, 0) > 1:
                violations.append("split-or-bridge-overload")
    violations = sorted(set(violations))
    return (not violations, tuple(violations))


def validate_pseudoforest(gamma: BackboneGraph) -> tuple[bool, tuple[str, ...]]:
    """Necessary conditions for the orbit graph of ``gamma`` to be a pseudoforest.

    Per level: the level multigraph is a pseudoforest; bridges connect
    divisor lengths; unicyclic components are plain; tree components carry
    at most two splits; components with several bridges, or with a split and
    a bridge, only bridge into the half length, and such bridges end in
    pairwise distinct plain tree components there.
    """
    violations = _common_checks(gamma)
    lengths = sorted({nd.length for nd in gamma.nodes})
    structure = {m: _level_structure(gamma, m) for m in lengths}
    for m in lengths:
        comp_of, info = structure[m]
        for c in info:
            if c["edges"] > len(c["members"]):
                violations.append("level-graph-not-pseudoforest")
        bridges = gamma.bridges_from(m)
        per_comp: dict[int, list[GiantEdge]] = {}
        for e in bridges:
            u = e.u if e.u[0] == m else e.v
            per_comp.setdefault(comp_of[u], []).append(e)
        double_endpoints = []
        for ci, c in enumerate(info):
            blist = per_comp.get(ci, [])
            if not c["is_tree"] and (c["splits"] or blist):
                violations.append("unicyclic-component-not-plain")
            if c["is_tree"] and c["splits"] > 2:
                violations.append("component-with-more-than-two-splits")
            half_ok = m % 2 == 0
            if len(blist) >= 2:
                if not (half_ok and all(min(e.u[0], e.v[0]) == m // 2 for e in blist)):
                    violations.append("sibling-bridges-not-half-length")
            if c["splits"] and blist:
                for e in blist:
                    l = min(e.u[0], e.v[0])
                    v = e.u if e.u[0] == l else e.v
                    if not (half_ok and l == m // 2):
                        violations.append("split-component-bridge-not-half-length")
                    elif m // 2 in structure and not _is_plain_tree(
                        gamma, m // 2, *structure[m // 2], v
                    ):
                        violations.append("split-component-bridge-endpoint-not-plain-tree")
            if c["splits"] or len(blist) >= 2:
                double_endpoints.extend(blist)
        endpoint_comps = []
        for e in double_endpoints:
            l = min(e.u[0], e.v[0])
            if m % 2 or l != m // 2 or l not in structure:
                continue
            v = e.u if e.u[0] == l else e.v
            comp_of_l, info_l = structure[l]
            if not _is_plain_tree(gamma, l, comp_of_l, info_l, v):
                violations.append("double-bridge-endpoint-not-plain-tree")
            endpoint_comps.append(comp_of_l[v])
        if len(endpoint_comps) != len(set(endpoint_comps)):
            violations.append("double-bridge-endpoints-share-component")
    violations = sorted(set(violations))
    return (not violations, tuple(violations))


def params_from_backbone(gamma: BackboneGraph, k: int) -> ConstructionParams:
    """Stage counts that let the pseudoforest stream regenerate ``gamma``.

    Bridges whose start component carries a split or further bridges are
    counted backward (at the half length); the rest count forward.
    """
    a: dict[int, int] = {}
    b: dict[int, int] = {}
    c: dict[int, int] = {}
    d: dict[int, int] = {}
    lengths = sorted({nd.length for nd in gamma.nodes})
    for m in lengths:
        a[m] = len(gamma.level_edges(m))
        comp_of, info = _level_structure(gamma, m)
        b[m] = sum(1 for ci in info if ci["splits"] > 0)
        per_comp: dict[int, list[GiantEdge]] = {}
        for e in gamma.bridges_from(m):
            u = e.u if e.u[0] == m else e.v
            per_comp.setdefault(comp_of[u], []).append(e)
        for ci, blist in per_comp.items():
            busy = info[ci]["splits"] > 0 or len(blist) >= 2
            for e in blist:
                if busy:
                    d[m // 2] = d.get(m // 2, 0) + 1
                else:
                    c[m] = c.get(m, 0) + 1
    return ConstructionParams(
        {t: v for t, v in a.items() if v},
        {t: v for t, v in b.items() if v},
        {t: v for t, v in c.items() if v},
        {t: v for t, v in d.items() if v},
    )


# -- excess bookkeeping for component operations ----------------------------------


@dataclass(frozen=True)
class ComponentState:
    """A level-m backbone component made concrete: node orbits plus edge orbits."""

    node_orbits: tuple[tuple[int, ...], ...]
    edge_orbits: tuple[EdgeOrbit, ...]


def _orbit_graph_excess(node_orbit_sets, edge_orbits) -> int:
    verts = set()
    for orb in node_orbit_sets:
        verts.update(orb)
    edges = set()
    for o in edge_orbits:
        edges.update(o.edge_set())
    return len(edges) - len(verts)


def excess_operations_check(
    sigma: Permutation, component: ComponentState, op: EdgeOrbit
) -> int:
    """Exact excess change from adding one orbit to a component's orbit graph.

    Splits raise the excess by exactly m/2; bridges by at least
    lcm(l, m) - l, with equality when the shorter orbit arrives fresh.
    Violating either law raises, as it indicates ``op`` is not a legal
    operation on the component.
    """
    node_orbits, of_node = {}, {}
    orbits, _ = node_cycles(sigma)
    for idx, orb in enumerate(orbits):
        node_orbits[idx] = orb
        for v in orb:
            of_node[v] = idx

    cls = classify_orbit(sigma, op)
    before_nodes = list(component.node_orbits)
    for o in component.edge_orbits:
        for i, j in o.edges:
            for v in (i, j):
                orb = orbits[of_node[v]]
                if orb not in before_nodes:
                    before_nodes.append(orb)
    before = _orbit_graph_excess(before_nodes, component.edge_orbits)
    after_nodes = list(before_nodes)
    for i, j in op.edges:
        for v in (i, j):
            orb = orbits[of_node[v]]
            if orb not in after_nodes:
                after_nodes.append(orb)
    after = _orbit_graph_excess(after_nodes, component.edge_orbits + (op,))
    delta = after - before

    if cls.kind == "S":
        if delta != cls.m // 2:
            raise ValueError(f"split changed excess by {delta}, expected {cls.m // 2}")
    elif cls.kind == "B":
        floor = math.lcm(cls.ell, cls.m) - cls.ell
        if delta < floor:
            raise ValueError(f"bridge changed excess by {delta}, expected >= {floor}")
    elif cls.kind == "C":
        if delta != cls.m:
            raise ValueError(f"cycle orbit changed excess by {delta}, expected {cls.m}")
    else:
        raise ValueError("only split, bridge, or cycle operations are supported")
    return delta
