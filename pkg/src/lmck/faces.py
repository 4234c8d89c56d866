"""Colex indexing of d-faces and signed boundaries.

A d-face is a strictly increasing (d+1)-tuple of 0-based vertices.  Its id is
its rank in the combinatorial number system,

    rank(v0 < v1 < ... < vd) = sum_i C(v_i, i + 1),

so ids do not depend on n and grow with the largest vertex.

Boundaries used by the linear algebra live in *cone coordinates*: the
(d-1)-faces that avoid vertex 0.  Projecting a (d-1)-chain onto those faces
is an isomorphism from the (d-1)-cycles of the complete skeleton onto
Z^{C(n-1, d)}, so ranks and cokernels of boundary matrices are unchanged.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import ValidationError

INT63 = 2**63


@lru_cache(maxsize=64)
def _binomial_table(n, kmax):
    """Rows k = 0..kmax of C(v, k) for v = 0..n, as int64 arrays."""
    if comb(n, kmax) >= INT63:
        raise ValidationError(f"C({n},{kmax}) does not fit in a signed 64-bit integer")
    table = np.zeros((kmax + 1, n + 1), dtype=np.int64)
    for k in range(kmax + 1):
        for v in range(n + 1):
            table[k, v] = comb(v, k)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class ComplexSpec:
    """Vertex count n and dimension d of a complex with complete (d-1)-skeleton."""

    n: int
    d: int
    _table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not isinstance(self.d, (int, np.integer)):
            raise ValidationError("n and d must be integers")
        if self.d < 1:
            raise ValidationError(f"d must be >= 1, got {self.d}")
        if self.n < self.d + 2:
            raise ValidationError(f"n must be >= d+2 = {self.d + 2}, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "_table", _binomial_table(self.n, self.d + 1))

    def face_count(self):
        """C(n, d+1), the number of possible d-faces."""
        return int(self._table[self.d + 1, self.n])

    def facet_count(self):
        """C(n, d), the number of (d-1)-faces."""
        return int(self._table[self.d, self.n])

    def cycle_dim(self):
        """C(n-1, d): dimension of the (d-1)-cycles of the complete skeleton."""
        return int(self._table[self.d, self.n - 1])

    # cone coordinates are indexed 0..cycle_dim()-1
    row_count = cycle_dim


def rank(spec, vertices):
    """Colex id of a sorted vertex tuple."""
    verts = tuple(vertices)
    if len(verts) != spec.d + 1:
        raise ValidationError(f"expected {spec.d + 1} vertices, got {len(verts)}")
    prev = -1
    for v in verts:
        if not isinstance(v, (int, np.integer)):
            raise ValidationError(f"vertex {v!r} is not an integer")
        if v <= prev:
            raise ValidationError(f"vertices must be strictly increasing: {verts}")
        prev = v
    if prev >= spec.n:
        raise ValidationError(f"vertex {prev} out of range for n={spec.n}")
    table = spec._table
    return int(sum(int(table[i + 1, v]) for i, v in enumerate(verts)))


def unrank(spec, face_id):
    """Sorted vertex tuple of a colex id."""
    if not isinstance(face_id, (int, np.integer)) or not 0 <= face_id < spec.face_count():
        raise ValidationError(f"face id {face_id} out of range [0, {spec.face_count()})")
    rest = int(face_id)
    table = spec._table
    out = []
    for k in range(spec.d + 1, 0, -1):
        v = bisect_right(table[k], rest) - 1
        out.append(v)
        rest -= int(table[k, v])
    return tuple(reversed(out))


def unrank_many(spec, ids):
    """Vectorized unrank: returns an int64 array of shape (len(ids), d+1)."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= spec.face_count()):
        raise ValidationError("face id out of range")
    rest = ids.copy()
    out = np.empty((ids.size, spec.d + 1), dtype=np.int64)
    table = spec._table
    for k in range(spec.d + 1, 0, -1):
        v = np.searchsorted(table[k], rest, side="right") - 1
        out[:, k - 1] = v
        rest -= table[k, v]
    return out


def rank_many(spec, tuples):
    tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, spec.d + 1)
    table = spec._table
    ids = np.zeros(len(tuples), dtype=np.int64)
    for i in range(spec.d + 1):
        ids += table[i + 1, tuples[:, i]]
    return ids


def boundary(spec, face):
    """Signed facets of a face: facet i drops vertex i and carries sign (-1)^i."""
    face = tuple(face)
    rank(spec, face)  # validation only
    return [((-1) ** i, face[:i] + face[i + 1:]) for i in range(len(face))]


def cone_boundary(spec, ids):
    """Boundaries of faces in cone coordinates.

    Returns (rows, signs), both int64 arrays of shape (len(ids), d+1).  Facets
    through vertex 0 are projected away and get row -1 and sign 0.
    """
    verts = unrank_many(spec, ids)
    d = spec.d
    table = spec._table
    rows = np.zeros((len(verts), d + 1), dtype=np.int64)
    signs = np.empty((len(verts), d + 1), dtype=np.int64)
    for i in range(d + 1):
        facet = np.delete(verts, i, axis=1)
        r = np.zeros(len(verts), dtype=np.int64)
        for j in range(d):
            # shift to vertex set {1..n-1} -> {0..n-2}; vertex 0 yields index -1
            r += table[j + 1, np.maximum(facet[:, j] - 1, 0)]
        through_zero = facet[:, 0] == 0
        r[through_zero] = -1
        rows[:, i] = r
        signs[:, i] = np.where(through_zero, 0, 1 if i % 2 == 0 else -1)
    return rows, signs
