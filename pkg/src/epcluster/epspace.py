"""Extended pseudo-metric spaces and the colimits built from them.

An ep-metric allows distinct points at distance zero and allows infinite
distances. Finite spaces are stored as dense ``float64`` matrices with
``numpy.inf`` as the infinite value; IEEE arithmetic already makes ``inf``
absorb addition and compare as maximal.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from ._format import fmt_float, json_float, parse_float
from .exceptions import AxiomViolation, DomainError, EmptyInputError, ShapeError

INF = math.inf

#: Absolute tolerance for every comparison between computed distances.
EPS = 1e-9


@dataclass(frozen=True)
class Violation:
    """First failed axiom, with the indices that witness it."""

    axiom: int
    indices: tuple
    detail: str

    def __str__(self):
        names = {1: "zero self-distance", 2: "symmetry", 3: "triangle inequality"}
        return f"axiom {self.axiom} ({names[self.axiom]}) fails at {self.indices}: {self.detail}"


@dataclass(frozen=True, eq=False)
class EpSpace:
    """A finite ep-metric space on points ``0..n-1``.

    Construct through :func:`validate` (checks the axioms) or
    :meth:`EpSpace.trusted` (no checks, for outputs of colimits that are
    correct by construction). The matrix is made read-only.
    """

    dist: np.ndarray

    def __post_init__(self):
        dist = np.array(self.dist, dtype=np.float64, copy=True)
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)

    @classmethod
    def trusted(cls, matrix):
        return cls(matrix)

    @property
    def n(self):
        return self.dist.shape[0]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, EpSpace):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.dist, other.dist))

    __hash__ = None

    def allclose(self, other, atol=EPS):
        """Equality up to ``atol`` with infinities required to coincide."""
        a, b = self.dist, other.dist
        if a.shape != b.shape:
            return False
        inf_a, inf_b = np.isinf(a), np.isinf(b)
        if not np.array_equal(inf_a, inf_b):
            return False
        finite = ~inf_a
        return bool(np.all(np.abs(a[finite] - b[finite]) <= atol))

    def subspace(self, indices):
        idx = np.asarray(indices, dtype=np.int64)
        return EpSpace.trusted(self.dist[np.ix_(idx, idx)])

    def to_json(self):
        return {"n": self.n, "dist": [[json_float(v) for v in row] for row in self.dist]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        dist = [[parse_float(v) for v in row] for row in obj["dist"]]
        space = validate(dist)
        if space.n != obj["n"]:
            raise ShapeError(f"declared n={obj['n']} but matrix has {space.n} rows")
        return space


def _as_square(matrix):
    try:
        arr = np.array(matrix, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"cannot read distance matrix: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"distance matrix must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInputError("distance matrix is empty")
    if np.isnan(arr).any():
        raise DomainError("distance matrix contains NaN")
    if (arr < 0).any():
        i, j = map(int, np.argwhere(arr < 0)[0])
        raise DomainError(f"negative distance {arr[i, j]} at ({i}, {j})")
    return arr


def check_axioms(matrix, eps=EPS):
    """Return the first :class:`Violation` of ``matrix``, or ``None``.

    Axioms are tested in order (self-distance, symmetry, triangle); within
    an axiom the lexicographically first witness is reported. The triangle
    check allows slack ``eps``.
    """
    d = _as_square(matrix)
    diag = np.diag(d)
    bad = np.flatnonzero(diag != 0)
    if bad.size:
        i = int(bad[0])
        return Violation(1, (i,), f"d({i},{i}) = {diag[i]}")
    asym = np.argwhere(d != d.T)
    if asym.size:
        i, j = map(int, asym[0])
        return Violation(2, (i, j), f"d({i},{j}) = {d[i, j]} but d({j},{i}) = {d[j, i]}")
    n = d.shape[0]
    first = None
    for j in range(n):
        via = d[:, j, None] + d[None, j, :]
        hits = np.argwhere(d > via + eps)
        if hits.size:
            i, k = map(int, hits[0])
            cand = (i, j, k)
            if first is None or cand < first:
                first = cand
    if first is not None:
        i, j, k = first
        return Violation(
            3, (i, j, k), f"d({i},{k}) = {d[i, k]} > d({i},{j}) + d({j},{k}) = {d[i, j] + d[j, k]}"
        )
    return None


def validate(matrix, eps=EPS):
    """Check the ep-metric axioms and wrap ``matrix`` as an :class:`EpSpace`.

    Raises
    ------
    ShapeError
        Input is not a square 2-d array.
    DomainError
        Negative or NaN entries.
    AxiomViolation
        One of the three axioms fails; the violation is attached.
    """
    violation = check_axioms(matrix, eps=eps)
    if violation is not None:
        raise AxiomViolation(violation)
    return EpSpace.trusted(matrix)


def coproduct(spaces):
    """Disjoint union, with infinite distance between different summands."""
    spaces = list(spaces)
    if not spaces:
        raise EmptyInputError("coproduct of an empty list")
    sizes = [s.n for s in spaces]
    total = sum(sizes)
    out = np.full((total, total), INF)
    offset = 0
    for s in spaces:
        out[offset : offset + s.n, offset : offset + s.n] = s.dist
        offset += s.n
    return EpSpace.trusted(out)


@dataclass(frozen=True)
class Surjection:
    """A surjective map ``{0..source_size-1} -> {0..target_size-1}``."""

    map: tuple
    target_size: int

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        object.__setattr__(self, "map", m)
        if any(v < 0 or v >= self.target_size for v in m):
            raise DomainError(f"surjection values must lie in [0, {self.target_size})")
        if len(set(m)) != self.target_size:
            raise DomainError("map is not surjective")

    @property
    def source_size(self):
        return len(self.map)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)), n)

    @classmethod
    def from_labels(cls, labels):
        """Compress arbitrary labels to ``0..m-1`` in order of first appearance."""
        seen = {}
        out = [seen.setdefault(lab, len(seen)) for lab in labels]
        return cls(tuple(out), len(seen))


def shortest_path_closure(weights):
    """All-pairs shortest paths over a dense non-negative weight matrix.

    Floyd-Warshall, vectorised over rows. Zero weights are real edges and
    ``inf`` means no edge, which is exactly ep-metric semantics.
    """
    d = np.array(weights, dtype=np.float64, copy=True)
    np.fill_diagonal(d, 0.0)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def _contract(dist, labels, m):
    """``W[z, w] = min d(x, y)`` over ``p(x) = z``, ``p(y) = w``."""
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    starts = np.flatnonzero(np.r_[True, sorted_labels[1:] != sorted_labels[:-1]])
    d = dist[np.ix_(order, order)]
    d = np.minimum.reduceat(d, starts, axis=0)
    d = np.minimum.reduceat(d, starts, axis=1)
    return d


def quotient(space, p):
    """Quotient ep-metric along a surjection ``p``.

    ``D(z, w)`` is the infimum over chains ``(x_0, y_0), ..., (x_n, y_n)``
    with ``p(x_0) = z``, ``p(y_n) = w`` and ``p(y_i) = p(x_{i+1})`` of
    ``sum d(x_i, y_i)``. Collapsing each fibre to a node with edge weight the
    minimum cross-fibre distance and closing under shortest paths computes
    exactly that infimum, since the chain may hop freely inside a fibre.
    """
    if not isinstance(p, Surjection):
        p = Surjection.from_labels(p)
    if p.source_size != space.n:
        raise DomainError(f"surjection has source size {p.source_size}, space has {space.n} points")
    labels = np.asarray(p.map, dtype=np.int64)
    w = _contract(space.dist, labels, p.target_size)
    return EpSpace.trusted(shortest_path_closure(w))


def wedge(space_a, space_b, identified_points):
    """Amalgamate two spaces along a partial bijection of their points.

    ``identified_points`` is a sequence of ``(i, j)`` pairs meaning point
    ``i`` of ``space_a`` is glued to point ``j`` of ``space_b``. The result
    lists the points of ``space_a`` first, in order, followed by the
    unglued points of ``space_b`` in their original order.
    """
    pairs = [(int(i), int(j)) for i, j in identified_points]
    left = [i for i, _ in pairs]
    right = [j for _, j in pairs]
    if len(set(left)) != len(left) or len(set(right)) != len(right):
        raise DomainError("pairing must be injective on both sides")
    if any(i < 0 or i >= space_a.n for i in left) or any(j < 0 or j >= space_b.n for j in right):
        raise DomainError("pairing references points outside the spaces")
    glue = dict((j, i) for i, j in pairs)
    labels = list(range(space_a.n))
    nxt = space_a.n
    for j in range(space_b.n):
        if j in glue:
            labels.append(glue[j])
        else:
            labels.append(nxt)
            nxt += 1
    return quotient(coproduct([space_a, space_b]), Surjection(tuple(labels), nxt))


def amalgamate(spaces):
    """Wedge of ep-metrics on one common point set, glued pointwise.

    Equivalent to the shortest-path metric over ``min`` of all the input
    distances; computed here by iterating :func:`wedge` so that it exercises
    the general colimit machinery.
    """
    spaces = list(spaces)
    if not spaces:
        raise EmptyInputError("amalgamation of an empty list")
    n = spaces[0].n
    if any(s.n != n for s in spaces):
        raise ShapeError("amalgamated spaces must share one point set")
    diagonal = [(i, i) for i in range(n)]
    out = spaces[0]
    for s in spaces[1:]:
        out = wedge(out, s, diagonal)
    return out


def read_matrix_csv(source):
    """Read an ``n x n`` CSV matrix; ``inf`` in any case denotes infinity.

    ``source`` is a path, ``"-"`` is not handled here (the CLI passes
    ``sys.stdin``), and any text file object is accepted.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, newline="", encoding="utf-8") as fh:
            text = fh.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyInputError("distance CSV is empty")
    try:
        matrix = [[parse_float(c) for c in row] for row in rows]
    except ValueError as exc:
        raise ShapeError(f"unparseable distance entry: {exc}") from exc
    if any(len(r) != len(rows) for r in matrix):
        raise ShapeError("distance CSV must have n rows of n columns")
    return validate(matrix)


def write_matrix_csv(space, fh):
    writer = csv.writer(fh, lineterminator="\n")
    for row in space.dist:
        writer.writerow([fmt_float(v) for v in row])
