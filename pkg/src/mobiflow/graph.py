"""Weighted-graph analytics over mobility interaction graphs.

The graph view is undirected with strictly positive edge weights and no
self-loops. Metrics follow the weighted conventions of Barrat-style local
clustering, triplet-based global clustering, and strength-based modularity;
community detection is the plain greedy pairwise-join agglomeration, which
is adequate at the ~100-node scale of political areas.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .errors import EmptyGraph, NoTriplets, PartialPartition, UnknownNode


class MobilityGraph:
    """Undirected weighted graph over region ids.

    Nodes are kept sorted for deterministic iteration. Weights must be
    strictly positive; self-loops are rejected.
    """

    def __init__(self, edges: Iterable[tuple[str, str, float]], nodes: Iterable[str] = ()):
        adj: dict[str, dict[str, float]] = {n: {} for n in nodes}
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if not w > 0.0:
                raise ValueError(f"non-positive weight {w} on edge {u!r}-{v!r}")
            adj.setdefault(u, {})
            adj.setdefault(v, {})
            adj[u][v] = adj[u].get(v, 0.0) + w
            adj[v][u] = adj[v].get(u, 0.0) + w
        self._adj = {n: adj[n] for n in sorted(adj)}
        self.nodes: tuple[str, ...] = tuple(self._adj)

    def neighbors(self, m: str) -> dict[str, float]:
        try:
            return self._adj[m]
        except KeyError:
            raise UnknownNode(m) from None

    def strength(self, m: str) -> float:
        return sum(self.neighbors(m).values())

    def degree(self, m: str) -> int:
        return len(self.neighbors(m))

    def weight(self, m: str, n: str) -> float:
        return self._adj.get(m, {}).get(n, 0.0)

    def has_edge(self, m: str, n: str) -> bool:
        return n in self._adj.get(m, {})

    def edges(self) -> list[tuple[str, str, float]]:
        """Each undirected edge once, (u, v) with u < v, sorted."""
        out = []
        for u in self.nodes:
            for v, w in self._adj[u].items():
                if u < v:
                    out.append((u, v, w))
        out.sort()
        return out

    def total_weight(self) -> float:
        """Sum of edge weights, each edge counted once."""
        return sum(w for _, _, w in self.edges())

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, slots=True)
class Partition:
    """Assignment of every node to a community id, ids dense from 0."""

    assignment: Mapping[str, int]

    @property
    def community_count(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> list[set[str]]:
        groups: dict[int, set[str]] = {}
        for node, cid in self.assignment.items():
            groups.setdefault(cid, set()).add(node)
        return [groups[cid] for cid in sorted(groups)]


@dataclass(frozen=True, slots=True)
class DendrogramStep:
    """One greedy join: the merged community-id pair and the modularity after."""

    merged: tuple[int, int]
    modularity: float


def local_clustering(g: MobilityGraph, m: str) -> float:
    """Weighted local clustering coefficient of node m.

    Over unordered neighbor pairs {n, h}, sums (A_mn + A_mh) for pairs that
    are themselves connected, normalized by s_m * (k_m - 1). The pairwise
    half-weight of the ordered-sum convention cancels against counting each
    pair once (the unit-weight triangle evaluates to exactly 1). Nodes with
    fewer than two neighbors score 0.
    """
    nbrs = g.neighbors(m)
    k = len(nbrs)
    if k < 2:
        return 0.0
    s = sum(nbrs.values())
    acc = 0.0
    items = sorted(nbrs.items())
    for (n, w_mn), (h, w_mh) in combinations(items, 2):
        if g.has_edge(n, h):
            acc += w_mn + w_mh
    return acc / (s * (k - 1))


def global_clustering(g: MobilityGraph) -> float:
    """Share of triplet weight that is closed.

    A triplet is a middle node with an unordered pair of neighbors; its
    weight is the arithmetic mean of the two tie weights, and it is closed
    when the outer pair is itself connected.
    """
    closed = 0.0
    total = 0.0
    for m in g.nodes:
        items = sorted(g.neighbors(m).items())
        for (n, w_mn), (h, w_mh) in combinations(items, 2):
            w = (w_mn + w_mh) / 2.0
            total += w
            if g.has_edge(n, h):
                closed += w
    if total == 0.0:
        raise NoTriplets("graph has no connected triple")
    return closed / total


def modularity(g: MobilityGraph, p: Partition) -> float:
    """Strength-weighted modularity of the partition.

    Q = (1/2M) * sum over ordered node pairs (including m = n, whose
    adjacency term is zero) of (A_mn - s_m s_n / 2M) for pairs in the same
    community, with 2M the total strength. The trivial one-community
    partition scores exactly 0.
    """
    missing = [n for n in g.nodes if n not in p.assignment]
    if missing:
        raise PartialPartition(f"nodes without community: {missing[:5]}")
    two_m = sum(g.strength(n) for n in g.nodes)
    if two_m == 0.0:
        return 0.0
    strength_per_comm: dict[int, float] = {}
    for n in g.nodes:
        cid = p.assignment[n]
        strength_per_comm[cid] = strength_per_comm.get(cid, 0.0) + g.strength(n)
    internal = 0.0
    for u, v, w in g.edges():
        if p.assignment[u] == p.assignment[v]:
            internal += w
    q = 2.0 * internal / two_m
    for s_c in strength_per_comm.values():
        q -= (s_c / two_m) ** 2
    return q


def greedy_communities(g: MobilityGraph) -> tuple[Partition, list[DendrogramStep]]:
    """Greedy pairwise agglomeration maximizing modularity.

    Starts from singleton communities (ids = node positions in sorted
    order), repeatedly merges the connected pair with the largest positive
    modularity gain (ties: smallest id pair), and stops when no join
    improves Q. Because Q strictly increases along the path, the final
    partition is the max-Q partition visited.
    """
    if len(g) == 0:
        raise EmptyGraph("no nodes")
    two_m = sum(g.strength(n) for n in g.nodes)
    node_comm = {n: i for i, n in enumerate(g.nodes)}
    if two_m == 0.0:
        return _dense_partition(node_comm), []

    # community-level aggregates
    comm_strength = {i: g.strength(n) for n, i in node_comm.items()}
    between: dict[int, dict[int, float]] = {i: {} for i in comm_strength}
    for u, v, w in g.edges():
        cu, cv = node_comm[u], node_comm[v]
        between[cu][cv] = between[cu].get(cv, 0.0) + w
        between[cv][cu] = between[cv].get(cu, 0.0) + w

    q = -sum((s / two_m) ** 2 for s in comm_strength.values())
    steps: list[DendrogramStep] = []
    while True:
        # lexicographic scan + strict comparison keeps the smallest pair on ties
        best: tuple[int, int] | None = None
        best_gain = 0.0
        for i in sorted(between):
            for j in sorted(between[i]):
                if j <= i:
                    continue
                gain = 2.0 * (
                    between[i][j] / two_m - (comm_strength[i] / two_m) * (comm_strength[j] / two_m)
                )
                if gain > best_gain:
                    best, best_gain = (i, j), gain
        if best is None:
            break
        i, j = best
        q += best_gain
        # fold community j into i
        comm_strength[i] += comm_strength.pop(j)
        for k, w in between.pop(j).items():
            if k == i:
                continue
            between[k].pop(j, None)
            between[k][i] = between[k].get(i, 0.0) + w
            between[i][k] = between[i].get(k, 0.0) + w
        between[i].pop(j, None)
        for n, c in node_comm.items():
            if c == j:
                node_comm[n] = i
        steps.append(DendrogramStep(merged=(i, j), modularity=q))
    return _dense_partition(node_comm), steps


def _dense_partition(node_comm: Mapping[str, int]) -> Partition:
    """Renumber community ids densely from 0, ordered by smallest member."""
    first_member: dict[int, str] = {}
    for n in sorted(node_comm):
        first_member.setdefault(node_comm[n], n)
    order = sorted(first_member, key=first_member.__getitem__)
    remap = {old: new for new, old in enumerate(order)}
    return Partition({n: remap[c] for n, c in node_comm.items()})
