"""Filtered graphs and complexes over an ep-metric space, and their clusters.

Three filtered objects are built from a space and a neighbourhood system:
the Vietoris-Rips complex, the neighbourhood complex (all subsets of some
neighbourhood) and the ray graph (edges from each base point to its
neighbourhood members). Clusters at scale ``s`` are the path components of
the 1-skeleton restricted to weights ``<= s``.
"""

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._format import fmt_float, json_float
from ._unionfind import UnionFind
from .epspace import EPS
from .exceptions import DomainError, EnumerationLimitError, NotSubcomplexError

#: Cap on materialised simplices in :func:`rips_complex` and
#: :func:`neighborhood_complex`.
SIMPLEX_CAP = 1_000_000


@dataclass(frozen=True, eq=False)
class FilteredGraph:
    """Undirected weighted graph on ``0..n-1``; edge ``{i, j}`` appears at scale ``w``.

    Edges are stored once with ``i < j``, keeping the minimum weight when the
    same pair is offered more than once, and sorted by ``(w, i, j)``.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_edges(cls, n, edges):
        best = {}
        for i, j, w in edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise DomainError(f"self-loop at {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise DomainError(f"edge ({i}, {j}) outside 0..{n - 1}")
            if not np.isfinite(w) or w < 0:
                raise DomainError(f"edge weight must be finite and non-negative, got {w}")
            key = (i, j) if i < j else (j, i)
            if key not in best or w < best[key]:
                best[key] = w
        items = sorted(best.items(), key=lambda kv: (kv[1], kv[0]))
        src = np.array([k[0] for k, _ in items], dtype=np.int64)
        dst = np.array([k[1] for k, _ in items], dtype=np.int64)
        weight = np.array([w for _, w in items], dtype=np.float64)
        return cls(int(n), src, dst, weight)

    def __len__(self):
        return len(self.weight)

    def edges(self):
        return list(zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()))

    def at_scale(self, s):
        """Edges active at scale ``s``: weight ``<= s + EPS``."""
        k = int(np.searchsorted(self.weight, s + EPS, side="right"))
        return list(zip(self.src[:k].tolist(), self.dst[:k].tolist()))

    def edge_set(self, s):
        return set(self.at_scale(s))

    def max_weight(self):
        return float(self.weight[-1]) if len(self.weight) else 0.0

    def to_csv(self, fh):
        fh.write("i,j,weight\n")
        for i, j, w in self.edges():
            fh.write(f"{i},{j},{fmt_float(w)}\n")

    def to_dot(self, s=None, name="G"):
        """Graphviz snapshot; with ``s`` given only the active edges are drawn."""
        lines = [f"graph {name} {{"]
        lines += [f"  p{i};" for i in range(self.n)]
        for i, j, w in self.edges():
            if s is None or w <= s + EPS:
                lines.append(f'  p{i} -- p{j} [label="{fmt_float(w)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Simplices (as frozensets) with birth scales, closed under faces."""

    n: int
    simplices: dict
    dim_cap: int

    def one_skeleton(self):
        return FilteredGraph.from_edges(
            self.n, ((*sorted(s), b) for s, b in self.simplices.items() if len(s) == 2)
        )

    def at_scale(self, s):
        return {sig for sig, b in self.simplices.items() if b <= s + EPS}

    def count(self, dim):
        return sum(1 for sig in self.simplices if len(sig) == dim + 1)


def _birth(dist, sigma):
    return max((dist[a, b] for a, b in itertools.combinations(sigma, 2)), default=0.0)


def rips_graph(space):
    """One edge per pair at finite distance, weighted by that distance."""
    d = space.dist
    iu, ju = np.triu_indices(space.n, k=1)
    w = d[iu, ju]
    keep = np.isfinite(w)
    return FilteredGraph.from_edges(space.n, zip(iu[keep], ju[keep], w[keep]))


def rips_complex(space, dim_cap=2, cap=SIMPLEX_CAP):
    """Vietoris-Rips complex up to dimension ``dim_cap``.

    Every subset of at most ``dim_cap + 1`` points with finite diameter is a
    simplex born at its diameter.
    """
    if dim_cap < 1:
        raise DomainError("dimension cap must be at least 1")
    d = space.dist
    n = space.n
    finite = np.isfinite(d)
    simplices = {frozenset([i]): 0.0 for i in range(n)}
    layer = [(i,) for i in range(n)]
    for _ in range(dim_cap):
        nxt = []
        for sigma in layer:
            for v in range(sigma[-1] + 1, n):
                if all(finite[u, v] for u in sigma):
                    tau = sigma + (v,)
                    nxt.append(tau)
                    simplices[frozenset(tau)] = float(_birth(d, tau))
                    if len(simplices) > cap:
                        raise EnumerationLimitError(
                            f"Rips complex exceeds {cap} simplices", partial=simplices
                        )
        layer = nxt
    return FilteredComplex(n, simplices, dim_cap)


def ray_complex(system):
    """The ray graph: ``{x, y}`` for ``y`` in a neighbourhood of ``x``, weight ``d(x, y)``."""
    return FilteredGraph.from_edges(system.n, system.rays())


def neighborhood_graph(system):
    """1-skeleton of the neighbourhood complex, without higher simplices."""
    d = system.space.dist

    def pairs():
        for nb in system:
            for a, b in itertools.combinations(nb.sorted_members(), 2):
                yield a, b, d[a, b]

    return FilteredGraph.from_edges(system.n, pairs())


def neighborhood_complex(system, dim_cap=2, cap=SIMPLEX_CAP):
    """Union of the Rips complexes of the individual neighbourhoods."""
    if dim_cap < 1:
        raise DomainError("dimension cap must be at least 1")
    d = system.space.dist
    simplices = {frozenset([i]): 0.0 for i in range(system.n)}
    for nb in system:
        members = nb.sorted_members()
        for size in range(2, min(dim_cap + 1, len(members)) + 1):
            for sigma in itertools.combinations(members, size):
                key = frozenset(sigma)
                if key not in simplices:
                    simplices[key] = float(_birth(d, sigma))
                    if len(simplices) > cap:
                        raise EnumerationLimitError(
                            f"neighbourhood complex exceeds {cap} simplices", partial=simplices
                        )
    return FilteredComplex(system.n, simplices, dim_cap)


def _as_graph(obj):
    if isinstance(obj, FilteredComplex):
        return obj.one_skeleton()
    return obj


def pi0(graph, s):
    """Cluster labels at scale ``s``; each point is labelled by the least index in its component."""
    graph = _as_graph(graph)
    uf = UnionFind(graph.n)
    for i, j in graph.at_scale(s):
        uf.union(i, j)
    return uf.labels()


def partition(labels):
    """Partition as a sorted tuple of sorted tuples."""
    groups = {}
    for i, lab in enumerate(np.asarray(labels).tolist()):
        groups.setdefault(lab, []).append(i)
    return tuple(sorted(tuple(g) for g in groups.values()))


def n_components(labels):
    return len(set(np.asarray(labels).tolist()))


@dataclass(frozen=True)
class MergeEvent:
    """At ``threshold`` the components with representatives ``parts`` fuse."""

    threshold: float
    parts: tuple

    @property
    def into(self):
        return min(self.parts)


@dataclass(frozen=True, eq=False)
class MergeTree:
    """Single-linkage dendrogram over the distinct edge weights of a graph.

    ``partitions[i]`` are the labels at ``thresholds[i]``; below the first
    threshold the partition is discrete.
    """

    n: int
    thresholds: tuple
    partitions: tuple
    events: tuple = field(default=())

    def labels_at(self, s):
        k = int(np.searchsorted(np.asarray(self.thresholds), s + EPS, side="right"))
        if k == 0:
            return np.arange(self.n, dtype=np.int64)
        return self.partitions[k - 1].copy()

    def to_json(self):
        return {
            "n": self.n,
            "leaves": list(range(self.n)),
            "thresholds": [json_float(t) for t in self.thresholds],
            "merges": [
                {"threshold": json_float(e.threshold), "components": list(e.parts), "into": e.into}
                for e in self.events
            ],
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def to_dot(self, name="dendrogram"):
        lines = [f"digraph {name} {{", "  rankdir=BT;"]
        lines += [f'  p{i} [label="{i}", shape=box];' for i in range(self.n)]
        current = {i: f"p{i}" for i in range(self.n)}
        for k, e in enumerate(self.events):
            node = f"m{k}"
            lines.append(f'  {node} [label="{fmt_float(e.threshold)}"];')
            for rep in e.parts:
                lines.append(f"  {current[rep]} -> {node};")
            for rep in e.parts:
                current.pop(rep)
            current[e.into] = node
        lines.append("}")
        return "\n".join(lines) + "\n"


def merge_tree(graph):
    """Sweep the edges once in weight order, recording every fusion of components."""
    graph = _as_graph(graph)
    uf = UnionFind(graph.n)
    thresholds, partitions, events = [], [], []
    w = graph.weight
    pos = 0
    for t in np.unique(w).tolist():
        end = int(np.searchsorted(w, t + EPS, side="right"))
        batch = [(int(graph.src[k]), int(graph.dst[k])) for k in range(pos, end)]
        pos = max(pos, end)
        before = {v: uf.find(v) for e in batch for v in e}
        for a, b in batch:
            uf.union(a, b)
        fused = {}
        for v, old in before.items():
            fused.setdefault(uf.find(v), set()).add(old)
        for root in sorted(fused):
            if len(fused[root]) > 1:
                events.append(MergeEvent(float(t), tuple(sorted(fused[root]))))
        thresholds.append(float(t))
        partitions.append(uf.labels())
    return MergeTree(graph.n, tuple(thresholds), tuple(partitions), tuple(events))


@dataclass(frozen=True)
class Pi0Comparison:
    """The map on clusters induced by an inclusion of filtered objects."""

    scale: float
    mapping: dict
    n_source: int
    n_target: int

    @property
    def surjective(self):
        return len(set(self.mapping.values())) == self.n_target

    @property
    def bijective(self):
        return self.surjective and self.n_source == self.n_target


def compare_pi0(a, b, s):
    """Induced map ``pi0(a)_s -> pi0(b)_s`` for ``a`` contained in ``b``.

    Raises
    ------
    NotSubcomplexError
        Some edge of ``a`` active at ``s`` is not active in ``b``.
    """
    ga, gb = _as_graph(a), _as_graph(b)
    if ga.n != gb.n:
        raise NotSubcomplexError("compared objects have different vertex sets")
    eb = gb.edge_set(s)
    missing = [e for e in ga.at_scale(s) if e not in eb]
    if missing:
        raise NotSubcomplexError(f"edge {missing[0]} present in the first object only at scale {s}")
    la, lb = pi0(ga, s), pi0(gb, s)
    mapping = {}
    for v in range(ga.n):
        mapping.setdefault(int(la[v]), int(lb[v]))
    return Pi0Comparison(float(s), mapping, n_components(la), n_components(lb))


def neighborhood_path_exists(system, x, y, s=None):
    """Chain of neighbourhoods from ``x`` to ``y`` with pairwise-meeting members.

    With ``s`` given, each neighbourhood is first cut down to the members
    within ``s`` of its base point. Returns ``(True, chain)`` with ``chain``
    the list of base points ``x = x_0, ..., x_r = y``, or ``(False, None)``.
    """
    space = system.space
    restricted = []
    holders = {}
    for nb in system:
        members = nb.members if s is None else nb.restricted(space, s)
        restricted.append((nb.base, members))
        for m in members:
            holders.setdefault(m, set()).add(nb.base)
    by_base = {}
    for base, members in restricted:
        by_base.setdefault(base, []).append(members)
    parent = {x: None}
    queue = deque([x])
    while queue:
        b = queue.popleft()
        if b == y:
            chain = []
            while b is not None:
                chain.append(b)
                b = parent[b]
            return True, chain[::-1]
        for members in by_base.get(b, ()):
            for m in sorted(members):
                for c in sorted(holders[m]):
                    if c not in parent:
                        parent[c] = b
                        queue.append(c)
    return False, None


def mapper_coequalizer_check(system, s):
    """Compare pi0 of the neighbourhood complex with its mapper-style gluing.

    The right-hand side computes clusters inside every neighbourhood
    separately, then identifies local clusters that share a point. Returns
    ``True`` when the resulting partition of the points equals pi0 of the
    neighbourhood complex at ``s``.
    """
    d = system.space.dist
    direct = pi0(neighborhood_graph(system), s)
    local = []
    for nb in system:
        members = nb.sorted_members()
        idx = {m: t for t, m in enumerate(members)}
        uf = UnionFind(len(members))
        for a, b in itertools.combinations(members, 2):
            if d[a, b] <= s + EPS:
                uf.union(idx[a], idx[b])
        local.append({m: uf.find(idx[m]) for m in members})
    offsets = np.cumsum([0] + [len(set(c.values())) for c in local])
    keys = []
    for t, comp in enumerate(local):
        relabel = {r: k for k, r in enumerate(sorted(set(comp.values())))}
        keys.append({m: int(offsets[t]) + relabel[r] for m, r in comp.items()})
    glue = UnionFind(int(offsets[-1]))
    first_seen = {}
    for comp in keys:
        for m, cls in comp.items():
            if m in first_seen:
                glue.union(first_seen[m], cls)
            else:
                first_seen[m] = cls
    classes = [glue.find(first_seen[v]) for v in range(system.n)]
    return partition(classes) == partition(direct)


__all__ = [
    "FilteredComplex",
    "FilteredGraph",
    "MergeEvent",
    "MergeTree",
    "Pi0Comparison",
    "compare_pi0",
    "mapper_coequalizer_check",
    "merge_tree",
    "n_components",
    "neighborhood_complex",
    "neighborhood_graph",
    "neighborhood_path_exists",
    "partition",
    "pi0",
    "ray_complex",
    "rips_complex",
    "rips_graph",
]
