"""Random-walk agglomerative community detection on weighted graphs.

Vertices are merged bottom-up by the Ward-style rule of Pons & Latapy:
communities adjacent in the graph are fused in the order that least
increases the within-community spread of t-step random-walk profiles.
The returned partition is the dendrogram cut with maximum weighted
Newman modularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightedGraph",
    "CommunityPartition",
    "Merge",
    "walktrap_communities",
    "modularity",
]

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric non-negative adjacency with optional node labels."""

    adjacency: np.ndarray
    node_labels: tuple = None

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if a.size and np.max(np.abs(a - a.T)) > 1e-12:
            raise ValueError("adjacency must be symmetric")
        if np.any(a < 0):
            raise ValueError("weights must be non-negative")
        if np.any(np.diag(a) != 0):
            raise ValueError("diagonal must be zero (no self-loops)")
        labels = self.node_labels
        if labels is None:
            labels = tuple(range(a.shape[0]))
        elif len(labels) != a.shape[0]:
            raise ValueError("node_labels length must match adjacency order")
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "node_labels", tuple(labels))

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]


@dataclass(frozen=True)
class Merge:
    """One agglomeration step: communities ``left`` and ``right`` fuse
    into a new community ``new_id`` at the given height (squared-distance
    increase)."""

    left: int
    right: int
    new_id: int
    height: float


@dataclass(frozen=True)
class CommunityPartition:
    """Item-to-community assignment plus the full merge dendrogram.

    Community ids are contiguous starting at 1, numbered by first
    appearance in node order.
    """

    membership: np.ndarray
    n_communities: int
    modularity: float
    dendrogram: tuple


def modularity(g: WeightedGraph | np.ndarray, membership) -> float:
    """Weighted Newman modularity of a node partition.

    Q = sum_c [w_c / w - (s_c / 2w)^2] with w the total edge weight,
    w_c the within-community weight and s_c the community strength.
    Returns 0.0 for a graph with no edges.
    """
    a = np.asarray(getattr(g, "adjacency", g), dtype=float)
    labels = np.asarray(membership)
    if labels.shape[0] != a.shape[0]:
        raise ValueError("membership must cover every node")
    two_w = float(a.sum())
    if two_w == 0.0:
        return 0.0
    strength = a.sum(axis=1)
    q = 0.0
    for c in np.unique(labels):
        nodes = labels == c
        within = float(a[np.ix_(nodes, nodes)].sum())  # counts both directions
        s_c = float(strength[nodes].sum())
        q += within / two_w - (s_c / two_w) ** 2
    return q


def _canonical_membership(groups: list[list[int]], n: int) -> np.ndarray:
    # Contiguous ids from 1, ordered by each group's smallest node index.
    member = np.zeros(n, dtype=int)
    order = sorted(range(len(groups)), key=lambda gi: min(groups[gi]))
    for new_id, gi in enumerate(order, start=1):
        for node in groups[gi]:
            member[node] = new_id
    return member


def walktrap_communities(g: WeightedGraph | np.ndarray, steps: int = 4) -> CommunityPartition:
    """Detect communities by t-step random-walk agglomeration.

    Connected components never merge; nodes without edges are left as
    singleton communities. All dendrogram cuts (from all-singletons to
    fully merged components) are scored with :func:`modularity`; the
    best cut is returned, ties resolved toward fewer communities.

    Raises
    ------
    ValueError
        If the graph has no nodes or ``steps < 1``.
    """
    if not isinstance(g, WeightedGraph):
        g = WeightedGraph(adjacency=np.asarray(g, dtype=float))
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    a = g.adjacency
    n = g.n_nodes
    if n == 0:
        raise ValueError("graph has no nodes")

    strength = a.sum(axis=1)
    active = np.flatnonzero(strength > 0)
    merges: list[Merge] = []

    if active.size:
        sub = a[np.ix_(active, active)]
        d = sub.sum(axis=1)
        pt = sub / d[:, None]
        for _ in range(steps - 1):
            pt = pt @ (sub / d[:, None])
        inv_d = 1.0 / d

        # Community state, indexed by community id; merged ids stay as None.
        profiles = {i: pt[i] for i in range(active.size)}
        sizes = {i: 1 for i in range(active.size)}
        members = {i: [int(active[i])] for i in range(active.size)}
        neighbors = {i: set(np.flatnonzero(sub[i] > 0)) - {i} for i in range(active.size)}
        next_id = active.size

        def delta_sigma(c1: int, c2: int) -> float:
            diff = profiles[c1] - profiles[c2]
            r2 = float(np.sum(diff * diff * inv_d))
            n1, n2 = sizes[c1], sizes[c2]
            return (n1 * n2) / (n1 + n2) * r2 / active.size

        costs = {}
        for c1 in range(active.size):
            for c2 in neighbors[c1]:
                if c1 < c2:
                    costs[(c1, c2)] = delta_sigma(c1, c2)

        while costs:
            pair = min(costs, key=lambda k: (costs[k], k))
            height = costs[pair]
            c1, c2 = pair
            new = next_id
            next_id += 1
            merges.append(Merge(left=c1, right=c2, new_id=new, height=height))

            n1, n2 = sizes[c1], sizes[c2]
            profiles[new] = (n1 * profiles[c1] + n2 * profiles[c2]) / (n1 + n2)
            sizes[new] = n1 + n2
            members[new] = members[c1] + members[c2]
            neighbors[new] = (neighbors[c1] | neighbors[c2]) - {c1, c2}
            for other in neighbors[new]:
                neighbors[other].discard(c1)
                neighbors[other].discard(c2)
                neighbors[other].add(new)
                key = (min(new, other), max(new, other))
                costs[key] = delta_sigma(new, other)
            for stale in (c1, c2):
                for other in list(neighbors[stale]):
                    costs.pop((min(stale, other), max(stale, other)), None)
                costs.pop((min(c1, c2), max(c1, c2)), None)
                del profiles[stale], sizes[stale], neighbors[stale]
            costs.pop(pair, None)
    else:
        members = {}
        next_id = 0

    # Scan every cut: start from singletons, replay merges, keep max Q.
    groups = {i: [i] for i in range(n)}
    alias = {}  # merge-id -> current key in groups
    for i, node in enumerate(active):
        alias[i] = int(node)

    def snapshot() -> list[list[int]]:
        return [list(v) for v in groups.values()]

    best_groups = snapshot()
    best_q = modularity(a, _canonical_membership(best_groups, n))
    best_count = len(best_groups)
    for merge in merges:
        k1, k2 = alias[merge.left], alias[merge.right]
        merged = groups.pop(k1) + groups.pop(k2)
        key = min(merged)
        groups[key] = merged
        alias[merge.new_id] = key
        q = modularity(a, _canonical_membership(snapshot(), n))
        count = len(groups)
        if q > best_q + _TIE_TOL or (q >= best_q - _TIE_TOL and count < best_count):
            best_q = q
            best_groups = snapshot()
            best_count = count

    membership = _canonical_membership(best_groups, n)
    return CommunityPartition(membership=membership,
                              n_communities=int(membership.max()),
                              modularity=float(best_q),
                              dendrogram=tuple(merges))
