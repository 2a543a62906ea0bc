"""Executable comparison checks between ray, neighbourhood and Rips clusters.

Each ``check_*`` function returns a list of :class:`CheckResult`, one per
scale examined, so callers (tests, the ``verify`` subcommand) can report
exactly which regime failed.

The k-bounded complexes are never enumerated here. For ``k >= 2`` a pair
``{a, b}`` lies in some k-bounded neighbourhood exactly when both points are
within ``S`` of a common base point, and for ``k = 1`` exactly when
``d(a, b) <= S``; rays of k-bounded neighbourhoods of ``x`` are all pairs
``{x, y}`` with ``d(x, y) <= S``.
"""

from dataclasses import dataclass

import numpy as np

from ._format import json_float
from .epspace import EPS
from .exceptions import DomainError
from .filtration import (
    FilteredGraph,
    compare_pi0,
    neighborhood_graph,
    neighborhood_path_exists,
    partition,
    pi0,
    ray_complex,
    rips_graph,
)
from .neighborhoods import NeighborhoodSystem, ball, complete_system, k_bounded_maximal


@dataclass(frozen=True)
class CheckResult:
    name: str
    scale: float
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "scale": json_float(self.scale), "passed": self.passed, "detail": self.detail}


def _edges_with(space, mask):
    d = space.dist
    iu, ju = np.nonzero(np.triu(mask, k=1))
    return FilteredGraph.from_edges(space.n, zip(iu, ju, d[iu, ju]))


def k_bounded_ray_graph(space, S):
    """Ray graph of the family of all k-bounded neighbourhoods (any ``k >= 1``)."""
    return _edges_with(space, space.dist <= S + EPS)


def k_bounded_neighborhood_graph(space, k, S):
    """1-skeleton of the complex generated by all k-bounded neighbourhoods."""
    if k < 1:
        raise DomainError("k-bounded neighbourhoods need k >= 1")
    near = space.dist <= S + EPS
    if k == 1:
        return _edges_with(space, near)
    shared = (near.astype(np.int64).T @ near.astype(np.int64)) > 0
    return _edges_with(space, shared)


def k_bounded_system(space, k, S, cap=None):
    """Explicit system of all maximal k-bounded neighbourhoods (small inputs only)."""
    kwargs = {} if cap is None else {"cap": cap}
    return NeighborhoodSystem(space, [k_bounded_maximal(space, x, k, S, **kwargs) for x in range(space.n)])


def _same_edges(a, b, t):
    return a.edge_set(t) == b.edge_set(t)


def check_containment(system, scales):
    """Ray graph inside neighbourhood complex inside Rips, with surjective pi0 maps."""
    r, v, z = ray_complex(system), neighborhood_graph(system), rips_graph(system.space)
    out = []
    for t in scales:
        ok = r.edge_set(t) <= v.edge_set(t) <= z.edge_set(t)
        ok = ok and compare_pi0(r, v, t).surjective and compare_pi0(v, z, t).surjective
        out.append(CheckResult("containment", t, ok))
    return out


def check_bounded_small_scale(space, k, S, scales):
    """``t <= S``: k-bounded neighbourhood complex and Rips share 1-skeleta."""
    v, z = k_bounded_neighborhood_graph(space, k, S), rips_graph(space)
    out = []
    for t in scales:
        if t > S + EPS:
            continue
        same = _same_edges(v, z, t)
        ok = same and compare_pi0(v, z, t).bijective
        out.append(CheckResult("bounded_small_scale", t, ok, "" if same else "1-skeleta differ"))
    return out


def check_bounded_large_scale(space, k, S, scales):
    """``t >= S``: ray and k-bounded neighbourhood clusters agree, and ray clusters are stable."""
    r, v = k_bounded_ray_graph(space, S), k_bounded_neighborhood_graph(space, k, S)
    stable = partition(pi0(r, S))
    out = []
    for t in scales:
        if t < S - EPS:
            continue
        ok = compare_pi0(r, v, t).bijective
        out.append(CheckResult("bounded_large_scale", t, ok))
        out.append(CheckResult("bounded_ray_stable", t, partition(pi0(r, t)) == stable))
    return out


def _star_graphs(space, x, S):
    members = sorted(ball(space, x, S))
    sub = space.subspace(members)
    local = members.index(x)
    star_n = rips_graph(sub)
    star_r = FilteredGraph.from_edges(
        sub.n, ((local, j, sub.dist[local, j]) for j in range(sub.n) if j != local)
    )
    return sub, star_r, star_n


def check_star(space, x, k, S, scales):
    """Star complexes around ``x`` against the Rips complex of the ``S``-ball.

    For ``k >= 2`` any two points of the ball together with ``x`` form a
    k-bounded neighbourhood, so the star neighbourhood complex has every
    pair of the ball as an edge.
    """
    if k < 2:
        raise DomainError("the star comparison needs k >= 2")
    sub, star_r, star_n = _star_graphs(space, x, S)
    ball_rips = rips_graph(sub)
    out = []
    for t in scales:
        if t <= S + EPS:
            ok = compare_pi0(star_n, ball_rips, t).bijective
            out.append(CheckResult("star_small_scale", t, ok))
        if t >= S - EPS:
            counts = [len(set(pi0(g, t).tolist())) for g in (star_r, star_n, ball_rips)]
            out.append(CheckResult("star_large_scale", t, counts == [1, 1, 1], f"components {counts}"))
    return out


def check_complete_regimes(space, radii, scales, S=None):
    """Regimes for complete neighbourhoods ``N_x = Z(x, r_x)``."""
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (space.n,))
    system = complete_system(space, radii)
    r, v, z = ray_complex(system), neighborhood_graph(system), rips_graph(space)
    # N_x is also the ball of its own (possibly smaller) radius, so the upper
    # regimes may start at the attained radii.
    lo = float(np.min(radii))
    hi = max(nb.radius for nb in system)
    out = []
    for t in scales:
        if t <= lo + EPS:
            same = _same_edges(r, v, t) and _same_edges(v, z, t)
            ok = same and compare_pi0(r, v, t).bijective and compare_pi0(v, z, t).bijective
            out.append(CheckResult("complete_small_scale", t, ok, "" if same else "1-skeleta differ"))
        if t >= hi - EPS:
            out.append(CheckResult("complete_large_scale", t, compare_pi0(r, v, t).bijective))
        if S is not None and S >= hi - EPS and t >= S - EPS:
            ok3 = partition(pi0(r, S)) == partition(pi0(r, t))
            out.append(CheckResult("complete_ray_stable", t, ok3))
            ok21 = partition(pi0(v, S)) == partition(pi0(v, t))
            out.append(CheckResult("complete_nbhd_stable", t, ok21))
    return out


def check_singletons(space, radii, scales):
    """Points whose neighbourhood is just themselves split off as singletons."""
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (space.n,))
    system = complete_system(space, radii)
    lonely = [nb.base for nb in system if len(nb) == 1]
    rest = [x for x in range(space.n) if x not in set(lonely)]
    lo = float(np.min(radii))
    graphs = {"rips": rips_graph(space), "nbhd": neighborhood_graph(system), "ray": ray_complex(system)}
    sub = space.subspace(rest) if rest else None
    out = []
    for t in scales:
        if t > lo + EPS:
            continue
        expected_rest = ()
        if sub is not None:
            expected_rest = tuple(tuple(rest[i] for i in g) for g in partition(pi0(rips_graph(sub), t)))
        expected = tuple(sorted([(x,) for x in lonely] + list(expected_rest)))
        for name, g in graphs.items():
            got = partition(pi0(g, t))
            if name == "rips":
                ok = got == expected
            else:
                ok = all((x,) in got for x in lonely)
            out.append(CheckResult(f"singletons.{name}", t, ok))
    return out


def check_chains(system, scales, pairs=None):
    """Neighbourhood chains connect exactly the points the ray graph connects."""
    r = ray_complex(system)
    n = system.n
    if pairs is None:
        pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    out = []
    for t in scales:
        labels = pi0(r, t)
        bad = [(x, y) for x, y in pairs if neighborhood_path_exists(system, x, y, t)[0] != (labels[x] == labels[y])]
        out.append(CheckResult("neighborhood_chains", t, not bad, f"disagree at {bad[0]}" if bad else ""))
    return out


__all__ = [
    "CheckResult",
    "check_containment",
    "check_chains",
    "check_bounded_small_scale",
    "check_bounded_large_scale",
    "check_star",
    "check_complete_regimes",
    "check_singletons",
    "k_bounded_neighborhood_graph",
    "k_bounded_ray_graph",
    "k_bounded_system",
]
