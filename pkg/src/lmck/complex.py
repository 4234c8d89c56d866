"""The d-complex value type and the ``lmck v1`` text format."""

from __future__ import annotations

import numpy as np

from . import faces as _faces
from .errors import ParseError, ValidationError
from .faces import ComplexSpec

FORMAT_HEADER = "lmck v1"

# above this density a boolean membership mask replaces binary search
_DENSE_FRACTION = 1 / 64


class DComplex:
    """A d-complex with complete (d-1)-skeleton, given by its sorted d-face ids.

    Instances are immutable; ``add_face`` returns a new complex.
    """

    __slots__ = ("spec", "_ids", "_mask")

    def __init__(self, spec, ids=()):
        arr = np.array(ids, dtype=np.int64).reshape(-1)
        if arr.size:
            if np.any(arr[1:] <= arr[:-1]):
                raise ValidationError("face ids must be strictly increasing")
            if arr[0] < 0 or arr[-1] >= spec.face_count():
                raise ValidationError(f"face id out of range [0, {spec.face_count()})")
        arr.setflags(write=False)
        self.spec = spec
        self._ids = arr
        self._mask = None

    @classmethod
    def from_ids(cls, spec, ids):
        """Build from ids in any order; duplicates are rejected."""
        arr = np.asarray(ids, dtype=np.int64).reshape(-1)
        srt = np.sort(arr)
        if srt.size > 1 and np.any(srt[1:] == srt[:-1]):
            raise ValidationError("duplicate face id")
        return cls(spec, srt)

    @classmethod
    def full(cls, spec):
        return cls(spec, np.arange(spec.face_count(), dtype=np.int64))

    @property
    def ids(self):
        return self._ids

    @property
    def n(self):
        return self.spec.n

    @property
    def d(self):
        return self.spec.d

    def __len__(self):
        return int(self._ids.size)

    def __iter__(self):
        return (int(i) for i in self._ids)

    def __contains__(self, face_id):
        if self._mask is None and len(self) > _DENSE_FRACTION * self.spec.face_count():
            mask = np.zeros(self.spec.face_count(), dtype=bool)
            mask[self._ids] = True
            self._mask = mask
        if not 0 <= face_id < self.spec.face_count():
            return False
        if self._mask is not None:
            return bool(self._mask[face_id])
        pos = np.searchsorted(self._ids, face_id)
        return bool(pos < self._ids.size and self._ids[pos] == face_id)

    def __eq__(self, other):
        if not isinstance(other, DComplex):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self._ids, other._ids)

    def __hash__(self):
        return hash((self.spec, self._ids.tobytes()))

    def __repr__(self):
        return f"DComplex(n={self.n}, d={self.d}, faces={len(self)})"

    def tuples(self):
        return _faces.unrank_many(self.spec, self._ids)

    def add_face(self, face_id):
        if not isinstance(face_id, (int, np.integer)) or not 0 <= face_id < self.spec.face_count():
            raise ValidationError(f"face id {face_id} out of range [0, {self.spec.face_count()})")
        pos = int(np.searchsorted(self._ids, face_id))
        if pos < self._ids.size and self._ids[pos] == face_id:
            return self
        return DComplex(self.spec, np.insert(self._ids, pos, face_id))

    def union(self, other):
        if self.spec != other.spec:
            raise ValidationError("complexes have different (n, d)")
        return DComplex(self.spec, np.union1d(self._ids, other._ids))

    def issubset(self, other):
        return self.spec == other.spec and bool(np.isin(self._ids, other._ids).all())


def add_face(Y, face_id):
    return Y.add_face(face_id)


def write_complex(Y, one_based=False):
    """Serialize to ``lmck v1`` text; faces are written in colex order."""
    off = 1 if one_based else 0
    lines = [FORMAT_HEADER, f"n={Y.n} d={Y.d}"]
    if one_based:
        lines.append("# vertices are 1-based")
    for row in Y.tuples():
        lines.append(" ".join(str(int(v) + off) for v in row))
    return "\n".join(lines) + "\n"


def read_complex(text):
    """Parse ``lmck v1`` text.

    Faces may appear in any order.  A ``# vertices are 1-based`` comment
    before the first face switches vertex numbering.
    """
    header = None
    spec = None
    offset = 0
    ids = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.lower().replace(" ", "") == "#verticesare1-based" and not ids:
                offset = 1
            continue
        if header is None:
            if line != FORMAT_HEADER:
                raise ParseError(f"expected header {FORMAT_HEADER!r}, got {line!r}", lineno)
            header = line
            continue
        if spec is None:
            spec = _parse_dims(line, lineno)
            continue
        try:
            verts = tuple(int(tok) - offset for tok in line.split())
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", lineno) from None
        try:
            fid = _faces.rank(spec, verts)
        except ValidationError as exc:
            raise ParseError(str(exc), lineno) from None
        if fid in seen:
            raise ParseError(f"duplicate face (first seen on line {seen[fid]})", lineno)
        seen[fid] = lineno
        ids.append(fid)
    if header is None:
        raise ParseError("missing header")
    if spec is None:
        raise ParseError("missing 'n=<n> d=<d>' line")
    return DComplex.from_ids(spec, ids)


def _parse_dims(line, lineno):
    fields = {}
    for tok in line.split():
        key, sep, val = tok.partition("=")
        if not sep or key not in ("n", "d"):
            raise ParseError(f"malformed dimension line {line!r}", lineno)
        try:
            fields[key] = int(val)
        except ValueError:
            raise ParseError(f"malformed dimension line {line!r}", lineno) from None
    if set(fields) != {"n", "d"}:
        raise ParseError(f"malformed dimension line {line!r}", lineno)
    try:
        return ComplexSpec(fields["n"], fields["d"])
    except ValidationError as exc:
        raise ParseError(str(exc), lineno) from None
