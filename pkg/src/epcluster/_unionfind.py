"""Disjoint-set forest used by every pi0 computation."""

import numpy as np


class UnionFind:
    """Union-find over ``0..n-1`` whose roots are always the least member.

    Keeping the least index as root makes component labels canonical without
    a relabelling pass.
    """

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True

    def labels(self):
        return np.array([self.find(i) for i in range(len(self.parent))], dtype=np.int64)
