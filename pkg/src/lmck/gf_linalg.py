"""Exact linear algebra over GF(q) for boundary vectors.

Three interchangeable backends sit behind ``EliminationBasis``:

* ``gf2``    q = 2, rows are Python ints used as bitsets;
* ``word``   odd q < 2**62, dense uint64 rows and compiled Montgomery kernels;
* ``bigint`` any prime, dense rows of Python ints (numpy object arrays).

All three keep the basis fully reduced: every basis row has a 1 at its pivot
and 0 at every other pivot, so the residual of a vector is canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from . import _kernels as K
from .errors import InvariantError, ValidationError
from .faces import cone_boundary, unrank_many
from .primes import is_probable_prime

WORD_LIMIT = 2**62


@dataclass(frozen=True)
class PrimeModulus:
    q: int
    certain: bool = True

    def __post_init__(self):
        if isinstance(self.q, PrimeModulus):
            object.__setattr__(self, "q", self.q.q)
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise ValidationError(f"modulus must be an integer, got {self.q!r}")
        q = int(self.q)
        ok, certain = is_probable_prime(q)
        if not ok:
            raise ValidationError(f"{q} is not prime")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "certain", certain)

    @property
    def regime(self):
        if self.q == 2:
            return "gf2"
        return "word" if self.q < WORD_LIMIT else "bigint"

    def __int__(self):
        return self.q

    def __str__(self):
        return str(self.q) if self.certain else f"{self.q} (probable prime)"


def as_modulus(q):
    return q if isinstance(q, PrimeModulus) else PrimeModulus(q)


@dataclass(frozen=True)
class SparseVec:
    """Sparse vector over GF(q): strictly increasing indices, values in [1, q-1]."""

    indices: tuple
    values: tuple
    q: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValidationError("indices and values differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValidationError("indices must be strictly increasing")
        if any(not 0 < v < self.q for v in self.values):
            raise ValidationError("values must lie in [1, q-1]")

    @classmethod
    def from_pairs(cls, pairs, q):
        q = int(q)
        acc = {}
        for i, v in pairs:
            acc[int(i)] = (acc.get(int(i), 0) + int(v)) % q
        items = sorted((i, v) for i, v in acc.items() if v)
        return cls(tuple(i for i, _ in items), tuple(v for _, v in items), q)

    @classmethod
    def from_dense(cls, arr, q):
        arr = [int(x) % int(q) for x in arr]
        idx = tuple(i for i, x in enumerate(arr) if x)
        return cls(idx, tuple(arr[i] for i in idx), int(q))

    def to_dense(self, nrows):
        out = [0] * nrows
        for i, v in zip(self.indices, self.values):
            out[i] = v
        return out

    def is_zero(self):
        return not self.indices

    def __len__(self):
        return len(self.indices)


def boundary_entries(spec, ids):
    """Cone-coordinate boundaries of faces as (rows, signs) arrays of shape (K, d+1)."""
    return cone_boundary(spec, np.asarray(ids, dtype=np.int64))


def boundary_vector(spec, face_id, q):
    rows, signs = boundary_entries(spec, [face_id])
    pairs = [(r, s) for r, s in zip(rows[0], signs[0]) if r >= 0]
    return SparseVec.from_pairs(pairs, int(q))


class EliminationBasis:
    """Fully reduced basis of a subspace of GF(q)^nrows, built by insertion."""

    def __init__(self, nrows, modulus):
        self.nrows = int(nrows)
        self.modulus = as_modulus(modulus)
        self.q = self.modulus.q

    @staticmethod
    def create(nrows, q, regime=None):
        """Pick a backend for q; ``regime`` forces one (used by differential tests)."""
        mod = as_modulus(q)
        regime = regime or mod.regime
        if regime == "gf2":
            if mod.q != 2:
                raise ValidationError("gf2 backend requires q = 2")
            return GF2Basis(nrows, mod)
        if regime == "word":
            if mod.q == 2 or mod.q >= WORD_LIMIT:
                raise ValidationError("word backend requires odd q < 2**62")
            return WordBasis(nrows, mod)
        if regime == "bigint":
            return BigIntBasis(nrows, mod)
        raise ValidationError(f"unknown regime {regime!r}")

    def _check(self, v):
        if v.q != self.q:
            raise InvariantError(f"modulus mismatch: vector over {v.q}, basis over {self.q}")
        if v.indices and v.indices[-1] >= self.nrows:
            raise InvariantError("vector index outside the row space")

    @property
    def rank(self):
        return len(self.pivot_rows())

    def reduce(self, v):
        raise NotImplementedError

    def insert(self, v):
        """Add v to the span.  Returns True iff v was independent."""
        raise NotImplementedError

    def contains(self, v):
        return self.reduce(v).is_zero()

    def insert_entries(self, rows, signs):
        """Insert one boundary column given as rows/signs (rows < 0 skipped)."""
        pairs = [(int(r), int(s)) for r, s in zip(rows, signs) if r >= 0]
        return self.insert(SparseVec.from_pairs(pairs, self.q))

    def residual_nonzero_many(self, rows, signs):
        out = np.empty(len(rows), dtype=bool)
        for i in range(len(rows)):
            pairs = [(int(r), int(s)) for r, s in zip(rows[i], signs[i]) if r >= 0]
            out[i] = not self.reduce(SparseVec.from_pairs(pairs, self.q)).is_zero()
        return out

    def pivot_rows(self):
        raise NotImplementedError

    def basis_vectors(self):
        """dict pivot row -> SparseVec."""
        raise NotImplementedError

    def pivot_column(self, s):
        """Dense vector c with c[p] = entry at column s of the basis row of pivot p."""
        raise NotImplementedError

    def basis_row(self, p):
        raise NotImplementedError

    def dense_row(self, p):
        """Basis row of pivot p as a dense array (uint8, uint64 or object)."""
        raise NotImplementedError

    def last_insertion(self):
        """(pivot s, rows, values) of the latest independent insertion.

        ``rows`` are the older pivots whose basis rows had the nonzero entries
        ``values`` at column s just before that insertion cleared them.
        """
        return self._last

    def check_invariants(self):
        vecs = self.basis_vectors()
        for p, vec in vecs.items():
            dense = dict(zip(vec.indices, vec.values))
            if dense.get(p) != 1:
                raise InvariantError(f"basis row {p} does not have 1 at its pivot")
            for other in vecs:
                if other != p and other in dense:
                    raise InvariantError(f"basis row {p} is nonzero at pivot {other}")


class GF2Basis(EliminationBasis):
    def __init__(self, nrows, modulus=2):
        super().__init__(nrows, modulus)
        self._rows = {}
        self._last = None

    @staticmethod
    def _bits(v):
        out = 0
        for i in v.indices:
            out |= 1 << i
        return out

    def _reduce_bits(self, x):
        support = x
        rows = self._rows
        while support:
            low = support & -support
            p = low.bit_length() - 1
            b = rows.get(p)
            if b is not None:
                x ^= b
            support ^= low
        return x

    def _insert_bits(self, x):
        x = self._reduce_bits(x)
        if not x:
            return False
        s = (x & -x).bit_length() - 1
        rows = self._rows
        hits = []
        for p, b in rows.items():
            if (b >> s) & 1:
                rows[p] = b ^ x
                hits.append(p)
        rows[s] = x
        self._last = (s, np.array(hits, dtype=np.int64), np.ones(len(hits), dtype=np.uint8))
        return True

    @staticmethod
    def _to_vec(x):
        idx = []
        while x:
            low = x & -x
            idx.append(low.bit_length() - 1)
            x ^= low
        return SparseVec(tuple(idx), (1,) * len(idx), 2)

    def reduce(self, v):
        self._check(v)
        return self._to_vec(self._reduce_bits(self._bits(v)))

    def insert(self, v):
        self._check(v)
        return self._insert_bits(self._bits(v))

    def insert_entries(self, rows, signs):
        x = 0
        for r in rows:
            if r >= 0:
                x |= 1 << int(r)
        return self._insert_bits(x)

    def residual_nonzero_many(self, rows, signs):
        out = np.empty(len(rows), dtype=bool)
        red = self._reduce_bits
        for i, rr in enumerate(rows.tolist()):
            x = 0
            for r in rr:
                if r >= 0:
                    x |= 1 << r
            out[i] = red(x) != 0
        return out

    def pivot_rows(self):
        return sorted(self._rows)

    @property
    def rank(self):
        return len(self._rows)

    def basis_vectors(self):
        return {p: self._to_vec(b) for p, b in sorted(self._rows.items())}

    def pivot_column(self, s):
        col = np.zeros(self.nrows, dtype=object)
        for p, b in self._rows.items():
            if (b >> s) & 1:
                col[p] = 1
        return col

    def basis_row(self, p):
        return self._to_vec(self._rows[p])

    def basis_row_bits(self, p):
        return self._rows[p]

    def dense_row(self, p):
        x = self._rows[p]
        nbytes = (self.nrows + 7) // 8
        raw = np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.nrows]


class _DenseBasis(EliminationBasis):
    """Shared bookkeeping for the dense-row backends."""

    dtype = None

    def __init__(self, nrows, modulus):
        super().__init__(nrows, modulus)
        self._cap = min(self.nrows, 64) or 1
        self._F = self._zeros((self._cap, self.nrows))
        self._pivslot = np.full(self.nrows, -1, dtype=np.int64)
        self._pivrow = []
        self._last = None

    def _zeros(self, shape):
        return np.zeros(shape, dtype=self.dtype)

    def _grow(self):
        if len(self._pivrow) < self._cap:
            return
        new_cap = min(self.nrows, 2 * self._cap)
        F = self._zeros((new_cap, self.nrows))
        F[: self._cap] = self._F
        self._F = F
        self._cap = new_cap

    @property
    def rank(self):
        return len(self._pivrow)

    def pivot_rows(self):
        return sorted(self._pivrow)

    def _dense(self, v):
        arr = self._zeros(self.nrows)
        if v.indices:
            arr[list(v.indices)] = list(v.values)
        return arr

    def basis_row(self, p):
        s = self._pivslot[p]
        if s < 0:
            raise KeyError(p)
        return SparseVec.from_dense(self._F[s], self.q)

    def basis_vectors(self):
        return {p: self.basis_row(p) for p in sorted(self._pivrow)}

    def pivot_column(self, s):
        col = np.zeros(self.nrows, dtype=object)
        k = self.rank
        if k:
            vals = self._F[:k, s]
            for slot in np.flatnonzero(vals != 0):
                col[self._pivrow[slot]] = int(vals[slot])
        return col

    def dense_row(self, p):
        s = self._pivslot[p]
        if s < 0:
            raise KeyError(p)
        return self._F[s]

    def _record(self, s):
        k = len(self._pivrow)
        col = self._F[:k, s]
        hit = np.flatnonzero(col != 0)
        self._last = (s, np.asarray(self._pivrow, dtype=np.int64)[hit], col[hit].copy())

    def free_rows(self):
        return np.flatnonzero(self._pivslot < 0)


class WordBasis(_DenseBasis):
    dtype = np.uint64

    def __init__(self, nrows, modulus):
        super().__init__(nrows, modulus)
        if self.q == 2 or self.q >= WORD_LIMIT:
            raise ValidationError("word backend requires odd q < 2**62")
        self._uq = np.uint64(self.q)
        self._ninv, self._r2 = K.montgomery_constants(self.q)

    def _reduce_arr(self, arr, support):
        K.reduce_dense(self._F, self._pivslot, arr, support, self._uq, self._ninv, self._r2)
        return arr

    def reduce(self, v):
        self._check(v)
        arr = self._reduce_arr(self._dense(v), np.asarray(v.indices, dtype=np.int64))
        return SparseVec.from_dense(arr, self.q)

    def _insert_arr(self, arr, support):
        self._reduce_arr(arr, support)
        if not arr.any():
            return False
        self._grow()
        k = len(self._pivrow)
        self._record(int(np.flatnonzero(arr)[0]))
        s = K.insert_residual(self._F, self._pivslot, k, arr, self._uq, self._ninv, self._r2)
        self._pivrow.append(int(s))
        return True

    def insert(self, v):
        self._check(v)
        return self._insert_arr(self._dense(v), np.asarray(v.indices, dtype=np.int64))

    def insert_entries(self, rows, signs):
        arr = np.zeros(self.nrows, dtype=np.uint64)
        sup = []
        for r, s in zip(rows, signs):
            if r >= 0:
                arr[r] = 1 if s > 0 else self.q - 1
                sup.append(r)
        return self._insert_arr(arr, np.asarray(sup, dtype=np.int64))

    def residual_nonzero_many(self, rows, signs):
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        signs = np.ascontiguousarray(signs, dtype=np.int64)
        out = np.empty(len(rows), dtype=np.bool_)
        free = self.free_rows().astype(np.int64)
        K.residual_nonzero_batch(self._F, self._pivslot, free, rows, signs, self._uq, out)
        return out


class BigIntBasis(_DenseBasis):
    dtype = object

    def _zeros(self, shape):
        arr = np.empty(shape, dtype=object)
        arr.fill(0)
        return arr

    def _reduce_arr(self, arr, support):
        q = self.q
        for p in support:
            s = self._pivslot[p]
            if s >= 0 and arr[p]:
                arr = (arr - arr[p] * self._F[s]) % q
        return arr

    def reduce(self, v):
        self._check(v)
        return SparseVec.from_dense(self._reduce_arr(self._dense(v), v.indices), self.q)

    def insert(self, v):
        self._check(v)
        arr = self._reduce_arr(self._dense(v), v.indices)
        nz = np.flatnonzero(arr != 0)
        if nz.size == 0:
            return False
        q = self.q
        s = int(nz[0])
        arr = arr * pow(int(arr[s]), -1, q) % q
        self._record(s)
        k = len(self._pivrow)
        if k:
            hit = np.flatnonzero(self._F[:k, s] != 0)
            if hit.size:
                coef = self._F[hit, s]
                block = self._F[np.ix_(hit, nz)]
                self._F[np.ix_(hit, nz)] = (block - np.outer(coef, arr[nz])) % q
        self._grow()
        self._F[k] = arr
        self._pivslot[s] = k
        self._pivrow.append(s)
        return True


def new_basis(nrows, q, regime=None):
    return EliminationBasis.create(nrows, q, regime)


def insertion_order(spec, ids):
    """Faces through vertex 0 first: their cone boundaries are unit vectors,
    so they become pivots with no fill-in.  Rank does not depend on order."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        return ids
    first = unrank_many(spec, ids)[:, 0]
    return np.concatenate([ids[first == 0], ids[first != 0]])


def build_basis(Y, q, regime=None, order=None):
    """Basis of the span of the boundaries of the faces of Y."""
    basis = new_basis(Y.spec.row_count(), q, regime)
    ids = insertion_order(Y.spec, Y.ids) if order is None else np.asarray(order, dtype=np.int64)
    if ids.size == 0:
        return basis
    rows, signs = boundary_entries(Y.spec, ids)
    full = basis.nrows
    for r, s in zip(rows, signs):
        basis.insert_entries(r, s)
        if basis.rank == full:
            break
    return basis


def boundary_rank(Y, q, regime=None):
    """Rank over GF(q) of the boundary map restricted to the faces of Y."""
    return build_basis(Y, q, regime).rank


class FieldOps:
    """Vectorized GF(q) arithmetic on numpy arrays, per backend.

    Arrays hold canonical representatives in [0, q); dtype is uint8 for q = 2,
    uint64 for word moduli and object otherwise.
    """

    def __init__(self, modulus):
        self.modulus = as_modulus(modulus)
        self.q = self.modulus.q
        self.regime = self.modulus.regime
        if self.regime == "gf2":
            self.dtype = np.uint8
        elif self.regime == "word":
            self.dtype = np.uint64
            self._uq = np.uint64(self.q)
            self._ninv, self._r2 = K.montgomery_constants(self.q)
        else:
            self.dtype = object

    def sketch_count(self):
        """Independent random functionals needed for a 2**-60 false-zero rate."""
        return max(1, ceil(60 / log2(self.q)))

    def array(self, values):
        if self.dtype is object:
            return np.array([int(v) % self.q for v in np.ravel(values)], dtype=object).reshape(np.shape(values))
        return (np.asarray(values, dtype=object) % self.q).astype(self.dtype)

    def zeros(self, shape):
        if self.dtype is object:
            out = np.empty(shape, dtype=object)
            out.fill(0)
            return out
        return np.zeros(shape, dtype=self.dtype)

    def random(self, rng, shape):
        if self.regime == "gf2":
            return rng.integers(0, 2, size=shape, dtype=np.uint8)
        if self.regime == "word":
            return rng.integers(0, self.q, size=shape, dtype=np.uint64)
        out = np.empty(shape, dtype=object)
        flat = out.reshape(-1)
        nbytes = (self.q.bit_length() + 7) // 8 + 8
        for i in range(flat.size):
            flat[i] = int.from_bytes(rng.bytes(nbytes), "little") % self.q
        return out

    def neg(self, a):
        if self.regime == "gf2":
            return a.copy()
        if self.regime == "word":
            return np.where(a == 0, a, self._uq - a)
        return (-a) % self.q

    def add(self, a, b):
        if self.regime == "gf2":
            return a ^ b
        if self.regime == "word":
            s = a + b  # a, b < 2**62, no wraparound
            return np.where(s >= self._uq, s - self._uq, s)
        return (a + b) % self.q

    def signed_gather_sum(self, table, rows, signs):
        """sum_t signs[:, t] * table[rows[:, t]] for each row; rows < 0 contribute 0."""
        acc = self.zeros(rows.shape[:1] + table.shape[1:])
        for t in range(rows.shape[1]):
            r = rows[:, t]
            present = r >= 0
            vals = table[np.where(present, r, 0)]
            if vals.ndim > 1:
                mask = present.reshape((-1,) + (1,) * (vals.ndim - 1))
            else:
                mask = present
            neg = (signs[:, t] < 0).reshape(mask.shape)
            vals = np.where(neg, self.neg(vals), vals)
            vals = np.where(mask, vals, self.zeros(()) if self.dtype is object else 0)
            if self.dtype is not object:
                vals = vals.astype(self.dtype)
            acc = self.add(acc, vals)
        return acc

    def scaled_sub(self, sig, coef, t):
        """sig - coef * t elementwise, for a scalar t."""
        if self.regime == "gf2":
            return sig ^ (coef & np.uint8(t))
        if self.regime == "word":
            out = np.ascontiguousarray(sig, dtype=np.uint64).copy()
            K.scaled_sub(out, np.ascontiguousarray(coef, dtype=np.uint64), np.uint64(t), self._uq, self._ninv, self._r2)
            return out
        return (sig - coef * int(t)) % self.q

    def dot(self, a, b):
        if self.regime == "gf2":
            return int(np.bitwise_xor.reduce(a & b)) if a.size else 0
        if self.regime == "word":
            return int(K.dotmod(np.ascontiguousarray(a, dtype=np.uint64), np.ascontiguousarray(b, dtype=np.uint64), self._uq, self._ninv, self._r2))
        return int(sum(int(x) * int(y) for x, y in zip(a, b)) % self.q)
