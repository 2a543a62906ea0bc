"""Neighbourhood discovery in a universe that is only reachable by sampling.

The universe is an :class:`UniverseOracle`: a distance callback plus a
sampler returning random subsets of at most ``M`` points that contain a
required point. Every estimate keeps the invariant that its neighbourhood is
the k-complete neighbourhood of the base within everything seen so far.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._format import json_float
from .epspace import EpSpace
from .exceptions import ConfigError, DomainError, InsufficientPointsError
from .filtration import merge_tree, ray_complex
from .neighborhoods import Neighborhood, k_complete_from_distances, k_complete_system
from .patch import ExcisionReport, WeightedRaySystem, verify_excision

DEFAULT_MAX_SAMPLE = 1024
DEFAULT_SAMPLE_COUNT = 8
DEFAULT_ROUNDS = 3

# Above this many points the generic colimit cross-check is skipped: it
# glues one star metric per point and costs O(n^4).
_COLIMIT_CHECK_LIMIT = 200


class UniverseOracle:
    """Distance callback and sampler over point ids ``0..size-1``.

    Parameters
    ----------
    distance : callable
        ``distance(x, ids)`` returns the distances from ``x`` to each id in
        the integer array ``ids``. Must be safe to call from several threads.
    size : int
        Number of points in the universe.
    max_sample : int, default=1024
        Cardinality bound ``M`` on samples.
    sampler : callable, optional
        ``sampler(rng, required, m)`` returning an id array of length at
        most ``m`` containing ``required``. Defaults to a uniform subset.
    """

    def __init__(self, distance, size, max_sample=DEFAULT_MAX_SAMPLE, sampler=None):
        if size < 1:
            raise DomainError("universe must contain at least one point")
        if max_sample < 1:
            raise ConfigError("max_sample must be positive")
        self._distance = distance
        self.size = int(size)
        self.max_sample = int(max_sample)
        self._sampler = sampler

    def distances(self, x, ids):
        return np.asarray(self._distance(int(x), np.asarray(ids, dtype=np.int64)), dtype=np.float64)

    def distance_matrix(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        return np.vstack([self.distances(x, ids) for x in ids])

    def sample(self, rng, required):
        m = min(self.max_sample, self.size)
        if self._sampler is not None:
            ids = np.unique(np.asarray(self._sampler(rng, int(required), m), dtype=np.int64))
            if required not in ids or len(ids) > m:
                raise DomainError("sampler must return at most M ids including the required point")
            return ids
        others = rng.choice(self.size - 1, size=m - 1, replace=False)
        others = others + (others >= required)
        return np.sort(np.r_[required, others]).astype(np.int64)


class SyntheticUniverse(UniverseOracle):
    """Euclidean point cloud universe with full knowledge for ground truth."""

    def __init__(self, points, max_sample=DEFAULT_MAX_SAMPLE, labels=None):
        self.points = np.asarray(points, dtype=np.float64)
        if self.points.ndim != 2:
            raise DomainError("points must be a 2-d array")
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        super().__init__(self._euclidean, len(self.points), max_sample)

    def _euclidean(self, x, ids):
        return np.linalg.norm(self.points[ids] - self.points[x], axis=1)

    def true_k_complete(self, x, k):
        """``(members, radius)`` of the k-complete neighbourhood of ``x`` in the whole universe."""
        ids = np.arange(self.size)
        return k_complete_from_distances(ids, self.distances(x, ids), k)

    @classmethod
    def from_spec(cls, spec):
        """Build from ``{"kind", "dim", "size", "seed", ...}``.

        Kinds: ``grid`` (integer lattice points in lexicographic order),
        ``blobs`` (``centers`` Gaussian blobs of std ``spread`` spaced
        ``separation`` apart along the first axis) and ``planted`` (uniform
        background in ``[0, extent]^dim`` with ``planted`` points placed
        within ``radius`` of point 0 at the centre).
        """
        if isinstance(spec, str):
            spec = json.loads(spec)
        try:
            kind = spec["kind"]
            dim = int(spec.get("dim", 2))
            size = int(spec["size"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad universe spec: {exc}") from None
        if dim < 1 or size < 1:
            raise ConfigError("universe dim and size must be positive")
        rng = np.random.default_rng(spec.get("seed", 0))
        max_sample = int(spec.get("max_sample", DEFAULT_MAX_SAMPLE))
        labels = None
        if kind == "grid":
            side = int(np.ceil(size ** (1.0 / dim) - 1e-9))
            while side**dim < size:
                side += 1
            axes = np.meshgrid(*[np.arange(side)] * dim, indexing="ij")
            pts = np.stack([a.ravel() for a in axes], axis=1)[:size].astype(np.float64)
        elif kind == "blobs":
            centers = int(spec.get("centers", 2))
            spread = float(spec.get("spread", 0.5))
            sep = float(spec.get("separation", 20.0))
            labels = np.arange(size) % centers
            offsets = np.zeros((centers, dim))
            offsets[:, 0] = sep * np.arange(centers)
            pts = offsets[labels] + rng.normal(0.0, spread, size=(size, dim))
        elif kind == "planted":
            planted = int(spec.get("planted", 16))
            radius = float(spec.get("radius", 0.5))
            extent = float(spec.get("extent", 100.0))
            if not 0 <= planted < size:
                raise ConfigError("planted count must be below the universe size")
            center = np.full(dim, extent / 2)
            pts = rng.uniform(0.0, extent, size=(size, dim))
            pts[0] = center
            direction = rng.normal(size=(planted, dim))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            pts[1 : planted + 1] = center + direction * rng.uniform(0.1, 1.0, (planted, 1)) * radius
            labels = np.zeros(size, dtype=np.int64)
            labels[: planted + 1] = 1
        else:
            raise ConfigError(f"unknown universe kind {kind!r}")
        return cls(pts, max_sample=max_sample, labels=labels)


@dataclass(frozen=True)
class NeighborhoodEstimate:
    """Current k-complete neighbourhood of ``base`` within ``support``.

    ``samples`` keeps every drawn sample when requested, so the merge can be
    checked against the full union.
    """

    base: int
    members: frozenset
    radius: float
    support: frozenset
    history: tuple
    samples: tuple = None

    @property
    def neighborhood(self):
        return Neighborhood(self.base, self.members, self.radius)

    def recall(self, truth):
        truth = frozenset(truth)
        return len(self.members & truth) / len(truth) if truth else 1.0


def _k_complete_in(oracle, x, ids, k):
    ids = np.asarray(sorted(ids), dtype=np.int64)
    if len(ids) < k:
        raise InsufficientPointsError(f"sample of {len(ids)} points is smaller than k={k}")
    return k_complete_from_distances(ids, oracle.distances(x, ids), k)


def _check_k(oracle, k):
    if k < 1:
        raise DomainError("k must be a positive integer")
    if oracle.max_sample < k:
        raise ConfigError(f"sample bound M={oracle.max_sample} is below k={k}")


def estimate_once(oracle, x, k, p=DEFAULT_SAMPLE_COUNT, rng=None, keep_samples=False):
    """Draw ``p`` samples containing ``x`` and merge their k-complete neighbourhoods."""
    _check_k(oracle, k)
    if p < 1:
        raise DomainError("need at least one sample")
    rng = np.random.default_rng(rng)
    samples = [oracle.sample(rng, x) for _ in range(p)]
    pool = set()
    for z in samples:
        pool |= _k_complete_in(oracle, x, z, k)[0]
    members, radius = _k_complete_in(oracle, x, pool, k)
    support = frozenset(int(v) for z in samples for v in z)
    kept = tuple(frozenset(z.tolist()) for z in samples) if keep_samples else None
    return NeighborhoodEstimate(x, members, radius, support, (radius,), kept)


def refine_neighbor_expansion(oracle, estimate, k, rng=None):
    """One round: draw a sample around each current member and absorb it into the support."""
    _check_k(oracle, k)
    rng = np.random.default_rng(rng)
    x = estimate.base
    grown = set(estimate.support)
    drawn = []
    for y in sorted(estimate.members):
        z = oracle.sample(rng, y)
        drawn.append(frozenset(z.tolist()))
        grown.update(z.tolist())
    members, radius = _k_complete_in(oracle, x, grown, k)
    kept = None if estimate.samples is None else estimate.samples + tuple(drawn)
    return NeighborhoodEstimate(x, members, radius, frozenset(grown), estimate.history + (radius,), kept)


def refine_accumulate(oracle, estimate, extra_samples, k, rng=None):
    """Draw ``extra_samples`` more samples around the base and merge them in."""
    _check_k(oracle, k)
    if extra_samples == 0:
        return estimate
    rng = np.random.default_rng(rng)
    x = estimate.base
    pool = set(estimate.members)
    support = set(estimate.support)
    drawn = []
    for _ in range(extra_samples):
        z = oracle.sample(rng, x)
        drawn.append(frozenset(z.tolist()))
        support.update(z.tolist())
        pool |= _k_complete_in(oracle, x, z, k)[0]
    members, radius = _k_complete_in(oracle, x, pool, k)
    kept = None if estimate.samples is None else estimate.samples + tuple(drawn)
    return NeighborhoodEstimate(x, members, radius, frozenset(support), estimate.history + (radius,), kept)


@dataclass
class SampledClustering:
    """Clusters of the union of samples.

    ``ids[i]`` is the universe id of local point ``i``; ``excision`` is
    ``None`` when some ray has length zero (the patched metric needs
    positive weights).
    """

    ids: np.ndarray
    space: EpSpace
    system: object
    merge_tree: object
    excision: ExcisionReport = field(default=None)


def cluster_sampled(oracle, samples, k, scales=None):
    """k-complete neighbourhoods of every point of the union of ``samples`` and their clusters."""
    ids = np.asarray(sorted({int(v) for z in samples for v in z}), dtype=np.int64)
    if len(ids) == 0:
        raise InsufficientPointsError("no sampled points")
    space = EpSpace(oracle.distance_matrix(ids))
    system = k_complete_system(space, min(k, space.n))
    tree = merge_tree(ray_complex(system))
    rays = list(system.rays())
    excision = None
    if all(w > 0 for _, _, w in rays):
        weighted = WeightedRaySystem(space.n, tuple(rays))
        excision = verify_excision(weighted, scales, check_colimit=space.n <= _COLIMIT_CHECK_LIMIT)
    return SampledClustering(ids, space, system, tree, excision)


def run_report(oracle, x, k, p=DEFAULT_SAMPLE_COUNT, rounds=DEFAULT_ROUNDS, strategy="accumulate", seed=0):
    """Estimate then refine for ``rounds`` rounds, recording radius, support and recall.

    ``strategy`` is ``"accumulate"`` (``p`` more samples per round) or
    ``"expand"`` (sample around every member). Recall against the true
    neighbourhood is reported when the oracle knows it.
    """
    if strategy not in ("accumulate", "expand"):
        raise ConfigError(f"unknown refinement strategy {strategy!r}")
    if not 0 <= x < oracle.size:
        raise ConfigError(f"base point {x} outside the universe")
    rng = np.random.default_rng(seed)
    truth = oracle.true_k_complete(x, k) if hasattr(oracle, "true_k_complete") else None
    est = estimate_once(oracle, x, k, p, rng)
    history = [est]
    for _ in range(rounds):
        if strategy == "accumulate":
            est = refine_accumulate(oracle, est, p, k, rng)
        else:
            est = refine_neighbor_expansion(oracle, est, k, rng)
        history.append(est)
    out = {
        "base": int(x),
        "k": int(k),
        "samples_per_round": int(p),
        "max_sample": oracle.max_sample,
        "strategy": strategy,
        "seed": seed,
        "rounds": [],
        "members": sorted(int(v) for v in est.members),
    }
    for i, e in enumerate(history):
        row = {"round": i, "radius": json_float(e.radius), "support": len(e.support), "size": len(e.members)}
        if truth is not None:
            row["recall"] = json_float(e.recall(truth[0]))
        out["rounds"].append(row)
    if truth is not None:
        out["truth"] = {"radius": json_float(truth[1]), "members": sorted(int(v) for v in truth[0])}
    return out


__all__ = [
    "DEFAULT_MAX_SAMPLE",
    "DEFAULT_ROUNDS",
    "DEFAULT_SAMPLE_COUNT",
    "NeighborhoodEstimate",
    "SampledClustering",
    "SyntheticUniverse",
    "UniverseOracle",
    "cluster_sampled",
    "estimate_once",
    "refine_accumulate",
    "refine_neighbor_expansion",
    "run_report",
]
