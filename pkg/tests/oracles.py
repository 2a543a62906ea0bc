"""Slow, literal reference implementations used only by the tests.

Nothing here calls into ``epcluster``'s algorithms; inputs are plain lists
and numpy arrays so each oracle can be read against its definition.
"""

import itertools
import math

import numpy as np

INF = math.inf
TOL = 1e-9


# ---------------------------------------------------------------- spaces


def random_space(rng, n, p_inf=0.15, p_zero=0.1, integer=True, groups=None):
    """Random ep-metric: shortest-path closure of random symmetric weights.

    Small integer weights make ties common; some pairs get weight 0, and
    points are split into up to ``groups`` mutually infinitely far groups
    (random count 1..3 by default).
    """
    if groups is None:
        groups = int(rng.integers(1, 4))
    group = rng.integers(0, groups, size=n)
    w = np.full((n, n), INF)
    for i in range(n):
        w[i, i] = 0.0
        for j in range(i + 1, n):
            u = rng.random()
            if group[i] != group[j] or u < p_inf:
                continue
            if u < p_inf + p_zero:
                v = 0.0
            else:
                v = float(rng.integers(1, 6)) if integer else float(rng.uniform(0.1, 5.0))
            w[i, j] = w[j, i] = v
    return naive_closure(w)


def naive_closure(w):
    d = [list(map(float, row)) for row in w]
    n = len(d)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    c = d[i][k] + d[k][j]
                    if c < d[i][j]:
                        d[i][j] = c
                        changed = True
    return np.array(d)


def satisfies_axioms(d):
    n = len(d)
    for i in range(n):
        if d[i][i] != 0:
            return False
        for j in range(n):
            if d[i][j] != d[j][i] or d[i][j] < 0:
                return False
            for k in range(n):
                if d[i][k] > d[i][j] + d[j][k] + TOL:
                    return False
    return True


def quotient_by_chains(d, labels, max_pairs=None):
    """Infimum over fibre-respecting chains of sum d(x_i, y_i), evaluated by chain length.

    ``best[L][z][w]`` is the cheapest chain of at most ``L`` pairs from
    fibre ``z`` to fibre ``w``; chains with more than ``n`` pairs never
    help since weights are non-negative.
    """
    n = len(d)
    m = max(labels) + 1
    max_pairs = n if max_pairs is None else max_pairs
    one = [[INF] * m for _ in range(m)]
    for x in range(n):
        for y in range(n):
            a, b = labels[x], labels[y]
            one[a][b] = min(one[a][b], d[x][y])
    best = [[0.0 if a == b else one[a][b] for b in range(m)] for a in range(m)]
    for _ in range(max_pairs):
        nxt = [row[:] for row in best]
        for a in range(m):
            for c in range(m):
                for b in range(m):
                    nxt[a][b] = min(nxt[a][b], best[a][c] + one[c][b])
        best = nxt
    return np.array(best)


def quotient_by_enumeration(d, labels, max_pairs):
    """Literal enumeration of every chain of up to ``max_pairs`` pairs (tiny inputs only)."""
    n = len(d)
    m = max(labels) + 1
    out = [[0.0 if a == b else INF for b in range(m)] for a in range(m)]
    pairs = [(x, y) for x in range(n) for y in range(n)]
    for length in range(1, max_pairs + 1):
        for chain in itertools.product(pairs, repeat=length):
            if any(labels[chain[i][1]] != labels[chain[i + 1][0]] for i in range(length - 1)):
                continue
            z, w = labels[chain[0][0]], labels[chain[-1][1]]
            out[z][w] = min(out[z][w], sum(d[x][y] for x, y in chain))
    return np.array(out)


def simple_path_metric(*metrics):
    """min over all simple point sequences of the summed pointwise-min weights."""
    n = len(metrics[0])
    w = [[min(m[i][j] for m in metrics) for j in range(n)] for i in range(n)]
    out = [[0.0 if i == j else INF for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            others = [v for v in range(n) if v not in (i, j)]
            for r in range(len(others) + 1):
                for mid in itertools.permutations(others, r):
                    seq = (i,) + mid + (j,)
                    out[i][j] = min(out[i][j], sum(w[a][b] for a, b in zip(seq, seq[1:])))
    return np.array(out)


# ---------------------------------------------------------- neighbourhoods


def ball(d, x, s, within=None):
    pts = range(len(d)) if within is None else within
    return {y for y in pts if d[x][y] <= s + TOL}


def k_complete(d, x, k, within=None):
    pts = list(range(len(d))) if within is None else sorted(within)
    values = sorted({d[x][y] for y in pts if d[x][y] < INF})
    for s in values:
        b = ball(d, x, s, pts)
        if len(b) >= k:
            return b, max(d[x][y] for y in b)
    return None


def is_nn_set(d, x, members, within=None):
    pts = range(len(d)) if within is None else within
    radius = max(d[x][y] for y in members)
    return all(d[x][z] >= radius - TOL for z in pts if z not in members)


# ------------------------------------------------------------- clusters


def components(n, edges):
    """Partition of ``0..n-1`` as sorted tuples, by depth-first search."""
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, parts = set(), []
    for v in range(n):
        if v in seen:
            continue
        stack, comp = [v], []
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        parts.append(tuple(sorted(comp)))
    return tuple(sorted(parts))


def rips_components(d, s):
    n = len(d)
    return components(n, [(i, j) for i in range(n) for j in range(i + 1, n) if d[i][j] <= s + TOL])


# ---------------------------------------------------------------- graphs


def all_path_sums(edges, k, mode="min", directed=True):
    """``{(start, end): total path weight}`` over every edge sequence of length <= k.

    Each sequence of distinct edges is walked from every admissible start
    vertex; it counts as a path when consecutive edges chain up.
    """
    totals = {}
    for length in range(1, k + 1):
        for seq in itertools.permutations(range(len(edges)), length):
            a, b, _ = edges[seq[0]]
            starts = {a} if directed else {a, b}
            ws = [edges[e][2] for e in seq]
            weight = min(ws) if mode == "min" else sum(ws)
            for s in starts:
                end = _walk(edges, seq, s, directed)
                if end is not None:
                    totals[(s, end)] = totals.get((s, end), 0.0) + weight
    return totals


def _walk(edges, seq, start, directed):
    at = start
    for e in seq:
        a, b, _ = edges[e]
        if a == at:
            at = b
        elif not directed and b == at:
            at = a
        else:
            return None
    return at


# ------------------------------------------------------------------ words


def pair_sum(docs, v, w, r):
    """Sum of |x - y| over occurrence pairs within r, positions 1-based."""
    total = 0
    for doc in docs:
        for x, a in enumerate(doc, start=1):
            for y, b in enumerate(doc, start=1):
                if a == v and b == w and abs(x - y) <= r:
                    total += abs(x - y)
    return total


def random_members(rng, d, x, p=0.4):
    """Random subset of the points at finite distance from ``x``, with ``x``."""
    return {x} | {y for y in range(len(d)) if y != x and d[x][y] < INF and rng.random() < p}


def random_rays(rng, n, max_degree=6, integer=False):
    """Rays ``(x, y, w)`` with up to ``max_degree`` ends per base point and positive weights.

    Integer weights produce duplicate and tied weights.
    """
    rays = []
    for x in range(n):
        if n == 1:
            break
        deg = int(rng.integers(0, max_degree + 1))
        ends = rng.choice([y for y in range(n) if y != x], size=min(deg, n - 1), replace=False)
        for y in ends.tolist():
            w = float(rng.integers(1, 5)) if integer else float(rng.uniform(0.05, 3.0))
            rays.append((x, int(y), w))
    return rays
