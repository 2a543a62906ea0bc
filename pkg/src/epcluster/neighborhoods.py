"""Neighbourhoods of points in a finite ep-metric space.

Most functions accept an optional ``within`` argument that restricts the
ambient set to a subset of point indices. That is how samples and unions of
samples are handled without materialising subspaces.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .epspace import EPS
from .exceptions import DomainError, EnumerationLimitError, InsufficientPointsError

#: Default cap on the number of subsets :func:`k_bounded_maximal` will list.
K_BOUNDED_CAP = 10_000


@dataclass(frozen=True)
class Neighborhood:
    """A base point, its member set (base included) and the radius."""

    base: int
    members: frozenset
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        if self.base not in self.members:
            raise DomainError(f"neighbourhood of {self.base} must contain its base point")
        if not math.isfinite(self.radius):
            raise DomainError("neighbourhood radius must be finite")

    def __len__(self):
        return len(self.members)

    def sorted_members(self):
        return sorted(self.members)

    def restricted(self, space, s):
        """Members within distance ``s`` of the base point."""
        row = space.dist[self.base]
        return frozenset(m for m in self.members if row[m] <= s + EPS)

    def to_json(self):
        return {"base": self.base, "members": self.sorted_members(), "radius": float(self.radius)}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["base"]), frozenset(obj["members"]), float(obj["radius"]))


def make_neighborhood(space, x, members):
    """Build a :class:`Neighborhood` of ``x``, computing its radius from ``space``."""
    members = frozenset(int(m) for m in members) | {int(x)}
    radius = max(float(space.dist[x, m]) for m in members)
    if not math.isfinite(radius):
        raise DomainError(f"neighbourhood of {x} contains a point at infinite distance")
    return Neighborhood(int(x), members, radius)


def _candidates(space, x, within):
    if not 0 <= x < space.n:
        raise DomainError(f"point {x} out of range for a space of {space.n} points")
    if within is None:
        return np.arange(space.n)
    idx = np.unique(np.asarray(list(within), dtype=np.int64))
    if x not in set(idx.tolist()):
        raise DomainError(f"restricting set must contain the base point {x}")
    return idx


def ball(space, x, s, within=None):
    """Closed ball ``{y : d(x, y) <= s}`` (with slack ``EPS``)."""
    cand = _candidates(space, x, within)
    d = space.dist[x, cand]
    if math.isinf(s):
        return frozenset(cand.tolist())
    return frozenset(cand[d <= s + EPS].tolist())


def fibres(space, x, within=None):
    """Group the finite values of ``d(x, .)`` into fibres.

    Returns a list of ``(value, members)`` in increasing order. Values closer
    than ``EPS`` (chained) form one fibre, whose value is its largest
    distance.
    """
    cand = _candidates(space, x, within)
    return _fibres_from_distances(cand, space.dist[x, cand])


def _fibres_from_distances(ids, dists):
    finite = np.isfinite(dists)
    ids, dists = np.asarray(ids)[finite], np.asarray(dists)[finite]
    order = np.lexsort((ids, dists))
    ids, dists = ids[order], dists[order]
    out = []
    start = 0
    for i in range(1, len(dists) + 1):
        if i == len(dists) or dists[i] - dists[i - 1] > EPS:
            out.append((float(dists[i - 1]), frozenset(ids[start:i].tolist())))
            start = i
    return out


def k_complete_from_distances(ids, dists, k):
    """Smallest complete ball with at least ``k`` members, from raw distances.

    ``ids`` are point labels (any hashable ints) and ``dists`` their
    distances from the base point, which must itself be among ``ids``.
    Returns ``(members, radius)``.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    members = set()
    for value, fibre in _fibres_from_distances(ids, dists):
        members |= fibre
        if len(members) >= k:
            return frozenset(members), value
    raise InsufficientPointsError(
        f"only {len(members)} points at finite distance, k={k} requested"
    )


def k_complete(space, x, k, within=None):
    """The unique k-complete neighbourhood of ``x``.

    This is the ball ``Z(x, s_i)`` for the smallest distance value ``s_i``
    with ``|Z(x, s_i)| >= k``. Ties at the threshold are all included, so
    the result may have more than ``k`` members.

    Raises
    ------
    InsufficientPointsError
        Fewer than ``k`` points lie at finite distance from ``x``.
    """
    cand = _candidates(space, x, within)
    members, radius = k_complete_from_distances(cand, space.dist[x, cand], k)
    return Neighborhood(int(x), members, radius)


def is_complete(space, nbhd, within=None):
    return nbhd.members == ball(space, nbhd.base, nbhd.radius, within=within)


def is_nearest_neighbor_set(space, nbhd, within=None):
    """True iff every point outside ``nbhd`` is at distance >= its radius."""
    cand = _candidates(space, nbhd.base, within)
    row = space.dist[nbhd.base]
    return all(row[z] >= nbhd.radius - EPS for z in cand.tolist() if z not in nbhd.members)


def nn_sequence(space, x, k, within=None):
    """A sequence of k nearest neighbours of ``x`` (``x`` itself excluded).

    Ties are broken by the smaller index. Returns ``(points, distances)``.
    """
    cand = _candidates(space, x, within)
    cand = cand[cand != x]
    d = space.dist[x, cand]
    finite = np.isfinite(d)
    if finite.sum() < k:
        raise InsufficientPointsError(
            f"only {int(finite.sum())} other points at finite distance, k={k} requested"
        )
    cand, d = cand[finite], d[finite]
    order = np.lexsort((cand, d))[:k]
    return [int(c) for c in cand[order]], [float(v) for v in d[order]]


def k_bounded_maximal(space, x, k, S, cap=K_BOUNDED_CAP):
    """Maximal subsets of ``Z(x, S)`` containing ``x`` with at most ``k+1`` points.

    When the ball is small enough it is the only maximal one; otherwise every
    ``(k+1)``-subset containing ``x`` is listed, in lexicographic order.

    Raises
    ------
    EnumerationLimitError
        More than ``cap`` subsets would be produced; ``partial`` holds the
        first ``cap``.
    """
    if k < 1:
        raise DomainError("k-bounded neighbourhoods need k >= 1")
    if not math.isfinite(S):
        raise DomainError("S must be finite")
    b = ball(space, x, S)
    if len(b) <= k + 1:
        return [make_neighborhood(space, x, b)]
    others = sorted(b - {x})
    out = []
    for combo in itertools.combinations(others, k):
        if len(out) >= cap:
            raise EnumerationLimitError(
                f"more than {cap} maximal {k}-bounded neighbourhoods of {x}", partial=out
            )
        out.append(make_neighborhood(space, x, combo))
    return out


def complete_k_bounded(space, x, k, S):
    """``Z(x, s_x) & Z(x, S)`` where ``Z(x, s_x)`` is the k-complete neighbourhood.

    When fewer than ``k`` points are at finite distance the k-complete ball
    does not exist; the whole S-ball is then returned, which has fewer than
    ``k`` points and so agrees with the second branch of the definition.
    """
    if k <= 1:
        raise DomainError("complete k-bounded neighbourhoods need k > 1")
    if not math.isfinite(S):
        raise DomainError("S must be finite")
    s_ball = ball(space, x, S)
    try:
        kc = k_complete(space, x, k)
    except InsufficientPointsError:
        return make_neighborhood(space, x, s_ball)
    return make_neighborhood(space, x, kc.members & s_ball)


def merge_k_complete(space, x, samples, k):
    """k-complete neighbourhood of ``x`` in the union of ``samples``.

    Only the per-sample k-complete neighbourhoods are retained and the final
    answer is computed inside their union, which is much smaller than the
    union of samples but gives the same result. A sample with fewer than
    ``k`` finite-distance points contributes all of them.
    """
    pieces = set()
    for sample in samples:
        cand = _candidates(space, x, sample)
        d = space.dist[x, cand]
        try:
            members, _ = k_complete_from_distances(cand, d, k)
        except InsufficientPointsError:
            members = frozenset(cand[np.isfinite(d)].tolist())
        pieces |= members
    if not pieces:
        raise InsufficientPointsError("no samples given")
    return k_complete(space, x, k, within=pieces)


@dataclass(frozen=True, eq=False)
class NeighborhoodSystem:
    """One or more neighbourhoods for every point of ``space``."""

    space: object
    neighborhoods: tuple

    def __post_init__(self):
        per_point = tuple(tuple(group) for group in self.neighborhoods)
        object.__setattr__(self, "neighborhoods", per_point)
        if len(per_point) != self.space.n:
            raise DomainError("a neighbourhood system needs an entry for every point")
        for x, group in enumerate(per_point):
            if not group:
                raise DomainError(f"point {x} has no neighbourhood")
            if any(nb.base != x for nb in group):
                raise DomainError(f"neighbourhood listed under {x} has a different base")

    @property
    def n(self):
        return self.space.n

    def __iter__(self):
        for group in self.neighborhoods:
            yield from group

    def rays(self):
        """``(x, y, d(x, y))`` for each ``y`` in a neighbourhood of ``x``, ``y != x``."""
        d = self.space.dist
        for nb in self:
            for y in nb.sorted_members():
                if y != nb.base:
                    yield nb.base, y, float(d[nb.base, y])

    @classmethod
    def from_members(cls, space, members_per_point):
        """One neighbourhood per point, given as member index sets (base added)."""
        return cls(space, [[make_neighborhood(space, x, m)] for x, m in enumerate(members_per_point)])

    def to_json(self):
        return [nb.to_json() for nb in self]

    @classmethod
    def from_json(cls, space, obj):
        groups = [[] for _ in range(space.n)]
        for item in obj:
            nb = Neighborhood.from_json(item)
            groups[nb.base].append(nb)
        return cls(space, groups)


def k_complete_system(space, k):
    return NeighborhoodSystem(space, [[k_complete(space, x, k)] for x in range(space.n)])


def complete_k_bounded_system(space, k, S):
    return NeighborhoodSystem(space, [[complete_k_bounded(space, x, k, S)] for x in range(space.n)])


def complete_system(space, radii):
    """Complete neighbourhoods ``Z(x, r_x)`` for the given per-point radii."""
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (space.n,))
    return NeighborhoodSystem(
        space, [[make_neighborhood(space, x, ball(space, x, r))] for x, r in enumerate(radii)]
    )


def singleton_system(space):
    return NeighborhoodSystem(space, [[Neighborhood(x, frozenset([x]), 0.0)] for x in range(space.n)])


__all__ = [
    "K_BOUNDED_CAP",
    "Neighborhood",
    "NeighborhoodSystem",
    "ball",
    "complete_k_bounded",
    "complete_k_bounded_system",
    "complete_system",
    "fibres",
    "is_complete",
    "is_nearest_neighbor_set",
    "k_bounded_maximal",
    "k_complete",
    "k_complete_from_distances",
    "k_complete_system",
    "make_neighborhood",
    "merge_k_complete",
    "nn_sequence",
    "singleton_system",
]
