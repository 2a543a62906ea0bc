"""scikit-learn style front end for neighbourhood clustering."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.metrics import pairwise_distances
from sklearn.utils.validation import check_array, check_is_fitted

from .epspace import EpSpace, validate
from .exceptions import ConfigError
from .filtration import merge_tree, pi0, ray_complex, rips_graph
from .filtration import neighborhood_graph as _neighborhood_graph
from .neighborhoods import complete_k_bounded_system, k_complete_system
from .regimes import k_bounded_neighborhood_graph, k_bounded_ray_graph

STRATEGIES = ("k-complete", "k-bounded", "complete-k-bounded")
COMPLEXES = ("ray", "neighborhood", "rips")


class NeighborhoodClustering(ClusterMixin, BaseEstimator):
    """Single-linkage style clusters from a system of neighbourhoods.

    Parameters
    ----------
    strategy : {"k-complete", "k-bounded", "complete-k-bounded"}, default="k-complete"
        How each point's neighbourhood is chosen.
    n_neighbors : int, default=5
        The ``k`` of the strategy (the base point counts as a member).
    max_radius : float, optional
        The bound ``S``; required by the two bounded strategies.
    complex : {"ray", "neighborhood", "rips"}, default="ray"
        Filtered graph whose components are the clusters. ``"rips"``
        ignores the neighbourhoods altogether.
    scale : float, optional
        Scale at which ``labels_`` are read. Defaults to the largest edge
        weight, i.e. the final components of the chosen graph.
    metric : str, default="euclidean"
        Anything :func:`sklearn.metrics.pairwise_distances` accepts, or
        ``"precomputed"`` for an ep-metric distance matrix (``inf`` allowed).

    Attributes
    ----------
    space_ : EpSpace
    system_ : NeighborhoodSystem or None
        ``None`` for ``k-bounded``, whose graphs are built implicitly.
    graph_ : FilteredGraph
    merge_tree_ : MergeTree
    labels_ : ndarray of shape (n_samples,)
        Clusters numbered ``0..n_clusters_-1`` in order of their least member.
    n_clusters_ : int
    """

    def __init__(
        self,
        strategy="k-complete",
        n_neighbors=5,
        max_radius=None,
        complex="ray",
        scale=None,
        metric="euclidean",
    ):
        self.strategy = strategy
        self.n_neighbors = n_neighbors
        self.max_radius = max_radius
        self.complex = complex
        self.scale = scale
        self.metric = metric

    def _space(self, X):
        if self.metric == "precomputed":
            X = check_array(X, ensure_all_finite=False, dtype=np.float64)
            return validate(X)
        X = check_array(X, dtype=np.float64)
        return EpSpace.trusted(pairwise_distances(X, metric=self.metric))

    def _graph(self, space):
        k, S = self.n_neighbors, self.max_radius
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.complex not in COMPLEXES:
            raise ConfigError(f"unknown complex {self.complex!r}")
        if self.strategy != "k-complete" and S is None:
            raise ConfigError(f"strategy {self.strategy!r} needs max_radius")
        if self.complex == "rips":
            return None, rips_graph(space)
        if self.strategy == "k-bounded":
            if self.complex == "ray":
                return None, k_bounded_ray_graph(space, S)
            return None, k_bounded_neighborhood_graph(space, k, S)
        if self.strategy == "k-complete":
            system = k_complete_system(space, min(k, space.n))
        else:
            system = complete_k_bounded_system(space, k, S)
        graph = ray_complex(system) if self.complex == "ray" else _neighborhood_graph(system)
        return system, graph

    def fit(self, X, y=None):
        """Build neighbourhoods, the filtered graph and its merge tree."""
        self.space_ = self._space(X)
        self.system_, self.graph_ = self._graph(self.space_)
        self.merge_tree_ = merge_tree(self.graph_)
        s = self.scale if self.scale is not None else self.graph_.max_weight()
        roots, self.labels_ = np.unique(pi0(self.graph_, s), return_inverse=True)
        self.n_clusters_ = len(roots)
        return self

    def labels_at(self, s):
        """Cluster labels at scale ``s`` (least member index labels each cluster)."""
        check_is_fitted(self, "graph_")
        return pi0(self.graph_, s)


__all__ = ["NeighborhoodClustering"]
