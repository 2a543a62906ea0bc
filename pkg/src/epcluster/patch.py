"""Local-to-global patching of weighted neighbourhoods.

Each base point ``x`` with weighted rays ``(x, y, w)`` gives a star-shaped
ep-metric ``D_x`` on the whole point set (points off the star are at
infinity). Gluing all the ``D_x`` along the common points gives the global
ep-metric ``D``. The clusters of the Rips complex of ``D`` coincide with the
clusters of the plain ray graph at every finite scale; :func:`verify_excision`
checks that by computing both sides independently.
"""

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

from ._format import json_float, parse_float
from ._unionfind import UnionFind
from .epspace import EPS, INF, EpSpace, amalgamate
from .exceptions import DomainError
from .filtration import FilteredGraph, partition, pi0, rips_graph
from .regimes import CheckResult


@dataclass(frozen=True, eq=False)
class WeightedRaySystem:
    """Rays ``(x, y, w)`` on points ``0..n-1``, listed grouped by base point ``x``.

    Weights must be positive and finite. The same unordered pair may occur
    several times (from different neighbourhoods, or both directions); only
    the smallest weight matters downstream.
    """

    n: int
    rays: tuple

    def __post_init__(self):
        rays = tuple((int(x), int(y), float(w)) for x, y, w in self.rays)
        for x, y, w in rays:
            if not (0 <= x < self.n and 0 <= y < self.n):
                raise DomainError(f"ray ({x}, {y}) outside 0..{self.n - 1}")
            if x == y:
                raise DomainError(f"ray from {x} to itself")
            if not (np.isfinite(w) and w > 0):
                raise DomainError(f"ray ({x}, {y}) needs a positive finite weight, got {w}")
        object.__setattr__(self, "rays", rays)

    def __len__(self):
        return len(self.rays)

    def rays_of(self, x):
        """Ray ends of ``x`` with the minimal weight per end."""
        best = {}
        for a, b, w in self.rays:
            if a == x and w < best.get(b, INF):
                best[b] = w
        return best

    def pair_weights(self):
        """Minimal weight per unordered pair."""
        best = {}
        for a, b, w in self.rays:
            key = (a, b) if a < b else (b, a)
            if w < best.get(key, INF):
                best[key] = w
        return best

    def to_json(self):
        return {"n": self.n, "rays": [[x, y, json_float(w)] for x, y, w in self.rays]}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["n"]), tuple((x, y, parse_float(w)) for x, y, w in obj["rays"]))

    @classmethod
    def from_neighborhoods(cls, system):
        """Rays of a neighbourhood system weighted by the ambient distance."""
        return cls(system.n, tuple(system.rays()))


def ray_graph(system):
    """The ray complex as a filtered graph (coincident rays keep the smaller weight)."""
    return FilteredGraph.from_edges(system.n, system.rays)


def local_metric(system, x):
    """Star metric of the rays at ``x``, extended by infinity to all points."""
    ends = system.rays_of(x)
    d = np.full((system.n, system.n), INF)
    np.fill_diagonal(d, 0.0)
    for y, w in ends.items():
        d[x, y] = d[y, x] = w
    for y, wy in ends.items():
        for z, wz in ends.items():
            if y != z:
                d[y, z] = wy + wz
    return EpSpace.trusted(d)


def _dijkstra_metric(system):
    adj = [[] for _ in range(system.n)]
    for (a, b), w in system.pair_weights().items():
        adj[a].append((b, w))
        adj[b].append((a, w))
    out = np.full((system.n, system.n), INF)
    for src in range(system.n):
        dist = out[src]
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist[u]:
                continue
            for v, w in adj[u]:
                nd = du + w
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
    # Sums along a path and its reverse can round differently.
    return EpSpace.trusted(np.minimum(out, out.T))


def global_metric(system, method="dijkstra"):
    """The glued ep-metric ``D`` on all points.

    ``method="dijkstra"`` runs shortest paths over the deduplicated ray
    graph; ``method="colimit"`` builds every local star metric and glues
    them with the generic :func:`~epcluster.epspace.amalgamate`. The two
    agree up to rounding.
    """
    if method == "dijkstra":
        return _dijkstra_metric(system)
    if method == "colimit":
        return amalgamate(local_metric(system, x) for x in range(system.n))
    raise ValueError(f"unknown method {method!r}")


def umap_complex_pi0(system, s):
    """Clusters at scale ``s`` of the glued complex of all local star metrics."""
    uf = UnionFind(system.n)
    for x in range(system.n):
        ends = sorted(system.rays_of(x).items())
        for y, w in ends:
            if w <= s + EPS:
                uf.union(x, y)
        for i, (y, wy) in enumerate(ends):
            for z, wz in ends[i + 1 :]:
                if wy + wz <= s + EPS:
                    uf.union(y, z)
    return uf.labels()


def default_scales(system, count=20):
    """``count`` scales spread over the ray weights, including each end."""
    weights = sorted({w for _, _, w in system.rays})
    if not weights:
        return [0.0]
    lo, hi = 0.0, weights[-1] * 1.25
    grid = np.linspace(lo, hi, count - min(len(weights), count // 2))
    pick = np.array(weights)[np.linspace(0, len(weights) - 1, min(len(weights), count // 2)).astype(int)]
    return sorted(set(grid.tolist()) | set(pick.tolist()))[:count]


@dataclass
class ExcisionReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def _witness(a, b):
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if (a[i] == a[j]) != (b[i] == b[j]):
                return f"points {i} and {j} are split differently"
    return ""


def verify_excision(system, scales=None, check_colimit=True):
    """Check that ray graph, glued complex and glued metric give the same clusters.

    At each scale the partitions of (a) the glued complex, (b) the ray graph
    and (c) the Rips graph of the glued metric are computed separately and
    compared. With ``check_colimit`` the shortest-path metric is also compared
    with the generic colimit construction.
    """
    if scales is None:
        scales = default_scales(system)
    metric = global_metric(system)
    rips = rips_graph(metric)
    rays = ray_graph(system)
    report = ExcisionReport()
    if check_colimit:
        ok = metric.allclose(global_metric(system, method="colimit"))
        report.checks.append(CheckResult("colimit_metric", INF, ok, "" if ok else "metrics differ"))
    for t in scales:
        target = pi0(rips, t)
        via_complex = umap_complex_pi0(system, t)
        via_rays = pi0(rays, t)
        ok_glued = partition(via_complex) == partition(target)
        ok_rays = partition(via_rays) == partition(target)
        report.checks.append(CheckResult("glued_complex", t, ok_glued, "" if ok_glued else _witness(via_complex, target)))
        report.checks.append(CheckResult("ray_graph", t, ok_rays, "" if ok_rays else _witness(via_rays, target)))
    return report


__all__ = [
    "ExcisionReport",
    "WeightedRaySystem",
    "default_scales",
    "global_metric",
    "local_metric",
    "ray_graph",
    "umap_complex_pi0",
    "verify_excision",
]
