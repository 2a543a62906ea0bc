"""Weighted neighbourhoods from sparse weighted graphs.

A path is a sequence of edges, each starting where the previous one ended.
Vertices may repeat along a path; edges may not, so a cheap cycle cannot be
traversed twice and enumeration is finite. Parallel edges are distinct
edges, and so give distinct paths.
"""

import csv
import io
import math
from collections import deque
from dataclasses import dataclass

from ._format import parse_float
from .exceptions import DomainError, EmptyInputError, EnumerationLimitError, ShapeError
from .patch import WeightedRaySystem

#: Cap on enumerated paths per weight-sum query.
PATH_CAP = 1_000_000

_SMALLEST = math.ulp(0.0)


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Directed multigraph on ``0..n-1`` with positive edge weights.

    ``labels`` optionally names the vertices (account ids, timestamps...).
    """

    n: int
    src: tuple
    dst: tuple
    weight: tuple
    labels: tuple = None

    def __post_init__(self):
        if not (len(self.src) == len(self.dst) == len(self.weight)):
            raise ShapeError("edge arrays must have equal length")
        object.__setattr__(self, "src", tuple(int(v) for v in self.src))
        object.__setattr__(self, "dst", tuple(int(v) for v in self.dst))
        object.__setattr__(self, "weight", tuple(float(v) for v in self.weight))
        for a, b, w in zip(self.src, self.dst, self.weight):
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise DomainError(f"edge ({a}, {b}) outside 0..{self.n - 1}")
            if not (w > 0 and math.isfinite(w)):
                raise DomainError(f"edge weights must be positive, got {w}")
        if self.labels is not None and len(self.labels) != self.n:
            raise ShapeError("need one label per vertex")

    @classmethod
    def from_edges(cls, edges, labels=None):
        """Build from ``(src, dst, weight)`` triples over arbitrary hashable vertex names.

        Vertex names are sorted to fix the indexing; they become ``labels``.
        """
        edges = list(edges)
        if not edges:
            raise EmptyInputError("graph has no edges")
        names = labels if labels is not None else sorted({e[0] for e in edges} | {e[1] for e in edges})
        index = {name: i for i, name in enumerate(names)}
        return cls(
            len(names),
            tuple(index[a] for a, _, _ in edges),
            tuple(index[b] for _, b, _ in edges),
            tuple(w for _, _, w in edges),
            tuple(names),
        )

    def __len__(self):
        return len(self.weight)

    def out_edges(self):
        out = [[] for _ in range(self.n)]
        for e, a in enumerate(self.src):
            out[a].append(e)
        return out

    def in_edges(self):
        inc = [[] for _ in range(self.n)]
        for e, b in enumerate(self.dst):
            inc[b].append(e)
        return inc

    def incident_edges(self):
        inc = [[] for _ in range(self.n)]
        for e, (a, b) in enumerate(zip(self.src, self.dst)):
            inc[a].append(e)
            if b != a:
                inc[b].append(e)
        return inc


def _hops(n, start, step):
    seen = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in step(u):
            if v not in seen:
                seen[v] = seen[u] + 1
                queue.append(v)
    return seen


def neighborhood_k(graph, x, k, directed=True):
    """Vertices on some path of at most ``k`` edges that passes through ``x``.

    Such a path contains a sub-path between ``x`` and the vertex, so this is
    everything within ``k`` hops of ``x`` forwards or backwards. ``x`` is
    always included.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    if directed:
        out_e, in_e = graph.out_edges(), graph.in_edges()
        fwd = _hops(graph.n, x, lambda u: (graph.dst[e] for e in out_e[u]))
        bwd = _hops(graph.n, x, lambda u: (graph.src[e] for e in in_e[u]))
        near = {v for v, h in fwd.items() if h <= k} | {v for v, h in bwd.items() if h <= k}
    else:
        inc = graph.incident_edges()
        other = lambda u, e: graph.dst[e] if graph.src[e] == u else graph.src[e]  # noqa: E731
        hops = _hops(graph.n, x, lambda u: (other(u, e) for e in inc[u]))
        near = {v for v, h in hops.items() if h <= k}
    return frozenset(near | {x})


def _path_weight(weights, mode):
    if mode == "min":
        return min(weights)
    if mode == "sum":
        return sum(weights)
    raise ValueError(f"unknown path weight mode {mode!r}")


def _paths_between(graph, a, b, k, mode, directed, cap, counter):
    """Sum of path weights over edge-distinct paths a -> b with at most k edges."""
    if directed:
        out_e = graph.out_edges()

        def steps(u):
            for e in out_e[u]:
                yield e, graph.dst[e]

    else:
        inc = graph.incident_edges()

        def steps(u):
            for e in inc[u]:
                yield e, graph.dst[e] if graph.src[e] == u else graph.src[e]

    total = 0.0
    used = set()
    trail = []

    def walk(u, depth):
        nonlocal total
        for e, v in steps(u):
            if e in used:
                continue
            used.add(e)
            trail.append(graph.weight[e])
            if v == b:
                counter[0] += 1
                if counter[0] > cap:
                    raise EnumerationLimitError(f"more than {cap} paths enumerated", partial=total)
                total += _path_weight(trail, mode)
            if depth + 1 < k:
                walk(v, depth + 1)
            trail.pop()
            used.discard(e)

    walk(a, 0)
    return total


def weight_sum(graph, x, y, k, path_weight="min", cap=PATH_CAP):
    """Total weight of paths ``x -> y`` plus paths ``y -> x``, each of at most ``k`` edges.

    A path weighs the minimum of its edge weights (``path_weight="min"``) or
    their sum (``"sum"``).

    Raises
    ------
    EnumerationLimitError
        More than ``cap`` paths would be enumerated.
    """
    if x == y:
        raise DomainError("weight sums are defined between distinct vertices")
    if k < 1:
        raise DomainError("k must be a positive integer")
    counter = [0]
    there = _paths_between(graph, x, y, k, path_weight, True, cap, counter)
    back = _paths_between(graph, y, x, k, path_weight, True, cap, counter)
    return there + back


def undirected_weight_sum(graph, x, y, k, path_weight="min", cap=PATH_CAP):
    """Sum of path weights over undirected paths from ``x`` to ``y`` of at most ``k`` edges."""
    if x == y:
        raise DomainError("weight sums are defined between distinct vertices")
    if k < 1:
        raise DomainError("k must be a positive integer")
    return _paths_between(graph, x, y, k, path_weight, False, cap, [0])


def _to_distance(sigma):
    d = math.exp(-sigma)
    # exp underflows to 0 for sums beyond ~745; keep the ray with the least
    # positive weight instead of silently turning it into a zero-length edge.
    return d if d > 0.0 else _SMALLEST


def ray_weights(graph, x, k, path_weight="min", cap=PATH_CAP):
    """``[(y, exp(-weight_sum(x, y)))]`` for ``y`` in the k-neighbourhood of ``x``."""
    out = []
    for y in sorted(neighborhood_k(graph, x, k) - {x}):
        sigma = weight_sum(graph, x, y, k, path_weight, cap)
        if sigma > 0:
            out.append((y, _to_distance(sigma)))
    return out


def undirected_ray_weights(graph, x, k, path_weight="min", cap=PATH_CAP):
    """As :func:`ray_weights`, treating every edge as undirected."""
    out = []
    for y in sorted(neighborhood_k(graph, x, k, directed=False) - {x}):
        sigma = undirected_weight_sum(graph, x, y, k, path_weight, cap)
        if sigma > 0:
            out.append((y, _to_distance(sigma)))
    return out


def graph_ray_system(graph, k, directed=True, path_weight="min", cap=PATH_CAP):
    """Weighted ray system over all vertices, ready for :mod:`epcluster.patch`."""
    fn = ray_weights if directed else undirected_ray_weights
    rays = []
    for x in range(graph.n):
        rays.extend((x, y, w) for y, w in fn(graph, x, k, path_weight, cap))
    return WeightedRaySystem(graph.n, tuple(rays))


@dataclass(frozen=True)
class TransferRecord:
    """One data transfer between two different accounts."""

    src_account: str
    dst_account: str
    bytes: float
    src_ts: int
    dst_ts: int

    def __post_init__(self):
        if self.src_account == self.dst_account:
            raise DomainError("a transfer needs two different accounts")
        if not self.bytes > 0:
            raise DomainError("transfer size must be positive")
        if not self.src_ts < self.dst_ts:
            raise DomainError(f"source timestamp {self.src_ts} must precede target {self.dst_ts}")


def transfer_graph(records):
    """Transfer graph on ``(account, timestamp)`` vertices.

    Each account's timestamps (source or target, over all records) are
    sorted. A record ``e`` yields an edge ``(x, s) -> (y, t)`` for every
    timestamp ``s <= s(e)`` of ``x`` and ``t >= t(e)`` of ``y``, weighted by
    the bytes moved.
    """
    records = list(records)
    if not records:
        raise EmptyInputError("no transfer records")
    stamps = {}
    for r in records:
        stamps.setdefault(r.src_account, set()).add(r.src_ts)
        stamps.setdefault(r.dst_account, set()).add(r.dst_ts)
    names = sorted((acct, ts) for acct, tss in stamps.items() for ts in tss)
    index = {v: i for i, v in enumerate(names)}
    src, dst, weight = [], [], []
    for r in records:
        for s in sorted(stamps[r.src_account]):
            if s > r.src_ts:
                break
            for t in sorted(stamps[r.dst_account]):
                if t >= r.dst_ts:
                    src.append(index[(r.src_account, s)])
                    dst.append(index[(r.dst_account, t)])
                    weight.append(r.bytes)
    return WeightedDigraph(len(names), tuple(src), tuple(dst), tuple(weight), tuple(names))


def _rows(source):
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not _is_number(rows[0][-1]):
        rows = rows[1:]
    if not rows:
        raise EmptyInputError("CSV input has no data rows")
    return rows


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_edgelist_csv(source):
    """``src,dst,weight`` rows (optional header). Vertex names are kept as strings."""
    edges = []
    for row in _rows(source):
        if len(row) != 3:
            raise ShapeError(f"edge row needs 3 fields, got {row}")
        edges.append((row[0].strip(), row[1].strip(), parse_float(row[2])))
    return WeightedDigraph.from_edges(edges)


def read_transfers_csv(source):
    """``src_account,dst_account,bytes,src_ts,dst_ts`` rows (optional header)."""
    out = []
    for row in _rows(source):
        if len(row) != 5:
            raise ShapeError(f"transfer row needs 5 fields, got {row}")
        a, b, size, s, t = (c.strip() for c in row)
        out.append(TransferRecord(a, b, float(size), int(s), int(t)))
    return out


__all__ = [
    "PATH_CAP",
    "TransferRecord",
    "WeightedDigraph",
    "graph_ray_system",
    "neighborhood_k",
    "ray_weights",
    "read_edgelist_csv",
    "read_transfers_csv",
    "transfer_graph",
    "undirected_ray_weights",
    "undirected_weight_sum",
    "weight_sum",
]
