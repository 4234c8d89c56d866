"""Integer Smith normal form of boundary matrices and torsion bounds.

The torsion of C_{d-1}/B_{d-1} equals the torsion of Z_{d-1}/B_{d-1}: the
quotient C/Z embeds in C_{d-2}, which is free, so C/B -> C/Z splits off no
finite part.  Hence the elementary divisors of the boundary map alone give the
integer torsion of H_{d-1}.

Elimination works in cone coordinates (see ``faces``) and proceeds in two
stages.  Columns are first inserted one at a time into a fully reduced basis
whose pivots are all +-1, which keeps every operation unimodular.  Columns
that reduce to a vector without any +-1 entry are set aside; what is left of
them on the non-pivot coordinates is a small matrix that goes through a
textbook dense SNF with minimum-magnitude pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, isqrt, prod

import numpy as np

from .errors import ResourceBudgetError
from .gf_linalg import boundary_entries, insertion_order
from .primes import factor

DENSE_BUDGET = 10**8
_GUARD = 2**62


@dataclass(frozen=True)
class ElementaryDivisors:
    """Nonzero Smith invariants d_1 | d_2 | ... | d_r."""

    divisors: tuple = ()

    def __post_init__(self):
        divs = tuple(int(x) for x in self.divisors)
        object.__setattr__(self, "divisors", divs)

    @property
    def rank(self):
        return len(self.divisors)

    @property
    def torsion(self):
        return tuple(x for x in self.divisors if x > 1)

    @property
    def torsion_order(self):
        return prod(self.torsion)

    def is_chain(self):
        return all(x > 0 for x in self.divisors) and all(
            b % a == 0 for a, b in zip(self.divisors, self.divisors[1:])
        )

    def count_divisible(self, q):
        return sum(1 for x in self.divisors if x % q == 0)

    def __iter__(self):
        return iter(self.divisors)

    def __len__(self):
        return len(self.divisors)


@dataclass(frozen=True)
class TorsionPrimes:
    primes: tuple = ()
    complete: bool = True
    unfactored: tuple = field(default=())


def _ceil_sqrt_power(base, exponent):
    """ceil(sqrt(base ** exponent)) computed exactly."""
    x = base**exponent
    r = isqrt(x)
    return r if r * r == x else r + 1


def torsion_order_bound(spec, d=None):
    """ceil((d+1) ** (C(n,d) / 2)), the worst case over all complexes on n vertices.

    Takes a ComplexSpec, or plain integers ``(n, d)``.
    """
    if d is None:
        n, d = spec.n, spec.d
    else:
        n = spec
    return _ceil_sqrt_power(d + 1, comb(n, d))


def hadamard_column_bound(Y, rank=None, reduced=True):
    """Product of the column lengths of the boundary matrix, rounded up.

    Every column has d+1 entries equal to +-1, so a product over k columns is
    ceil((d+1) ** (k/2)).  Faces lying on d-cycles can be discarded without
    changing H_{d-1}, after which exactly r = rank columns remain and the
    determinant argument runs on an r x r minor; that reduced product is the
    default and never exceeds ``torsion_order_bound``.  ``reduced=False``
    gives the product over all m = |Y| columns.  ``rank`` (the rational rank)
    is computed by SNF when not supplied.
    """
    if not reduced:
        k = len(Y)
    elif rank is not None:
        k = int(rank)
    else:
        k = smith_normal_form(Y).rank
    return _ceil_sqrt_power(Y.d + 1, k)


def check_budget(Y):
    entries = Y.spec.facet_count() * len(Y)
    if entries > DENSE_BUDGET:
        raise ResourceBudgetError(
            f"boundary matrix has {entries} entries (> {DENSE_BUDGET}); use GF(q)-only mode"
        )


class _UnitPivotBasis:
    """Fully reduced integer basis with +-1 pivots (normalized to +1)."""

    def __init__(self, nrows):
        self.nrows = nrows
        self.F = np.zeros((min(nrows, 64) or 1, nrows), dtype=np.int64)
        self.pivslot = np.full(nrows, -1, dtype=np.int64)
        self.pivrow = []
        self.maxabs = 0

    def _promote(self):
        if self.F.dtype != object:
            self.F = self.F.astype(object)

    def _grow(self):
        k = len(self.pivrow)
        if k < self.F.shape[0]:
            return
        new = np.zeros((min(self.nrows, 2 * self.F.shape[0]), self.nrows), dtype=self.F.dtype)
        new[:k] = self.F[:k]
        self.F = new

    def reduce(self, arr):
        support = np.flatnonzero((arr != 0) & (self.pivslot >= 0))
        for p in support:
            c = arr[p]
            if c == 0:
                continue
            s = self.pivslot[p]
            if arr.dtype != object and abs(int(c)) * self.maxabs + int(np.abs(arr).max()) >= _GUARD:
                arr = arr.astype(object)
                self._promote()
            arr = arr - c * self.F[s]
        return arr

    def try_insert(self, arr):
        """Insert a reduced vector if it has a +-1 entry; returns False otherwise."""
        nz = np.flatnonzero(arr != 0)
        units = nz[np.abs(arr[nz]) == 1]
        if units.size == 0:
            return False
        s = int(units[0])
        if arr[s] < 0:
            arr = -arr
        k = len(self.pivrow)
        if k:
            hit = np.flatnonzero(self.F[:k, s] != 0)
            if hit.size:
                coef = self.F[hit, s]
                vals = arr[nz]
                if self.F.dtype != object:
                    bound = int(np.abs(coef).max()) * int(np.abs(vals).max()) + self.maxabs
                    if bound >= _GUARD or arr.dtype == object:
                        self._promote()
                if self.F.dtype == object:
                    vals = vals.astype(object)
                block = self.F[np.ix_(hit, nz)] - np.outer(coef, vals)
                self.F[np.ix_(hit, nz)] = block
                self.maxabs = max(self.maxabs, int(np.abs(block).max()))
        self._grow()
        if self.F.dtype != object and arr.dtype == object:
            self._promote()
        self.F[k] = arr
        self.pivslot[s] = k
        self.pivrow.append(s)
        self.maxabs = max(self.maxabs, int(np.abs(arr).max()))
        return True


def _eliminate(Y):
    """Stage one.  Returns (number of unit pivots, leftover matrix as row lists)."""
    spec = Y.spec
    nrows = spec.row_count()
    basis = _UnitPivotBasis(nrows)
    hard = []
    ids = insertion_order(spec, Y.ids)
    if ids.size:
        rows, signs = boundary_entries(spec, ids)
        for rr, ss in zip(rows, signs):
            if len(basis.pivrow) == nrows:
                break
            arr = np.zeros(nrows, dtype=np.int64)
            present = rr >= 0
            arr[rr[present]] = ss[present]
            arr = basis.reduce(arr)
            if not arr.any():
                continue
            if not basis.try_insert(arr):
                hard.append(arr)
    # later pivots may have exposed unit entries in set-aside columns
    changed = True
    while changed and hard:
        changed = False
        rest = []
        for arr in hard:
            arr = basis.reduce(arr)
            if not arr.any():
                continue
            if basis.try_insert(arr):
                changed = True
            else:
                rest.append(arr)
        hard = rest
    if len(basis.pivrow) == nrows:
        hard = []
    free = np.flatnonzero(basis.pivslot < 0)
    leftover = [[int(arr[j]) for arr in hard] for j in free]
    return len(basis.pivrow), leftover


def smith_divisors(matrix):
    """Nonzero Smith invariants of a dense integer matrix (list of rows).

    Minimum-magnitude pivoting with full row and column clearing; a
    divisibility sweep enforces d_i | d_{i+1}.
    """
    A = [list(map(int, row)) for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    divisors = []
    t = 0
    while t < m and t < n:
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
        while True:
            piv = A[t][t]
            done = True
            for i in range(t + 1, m):
                x = A[i][t]
                if x:
                    f = x // piv
                    if f:
                        ri, rt = A[i], A[t]
                        for j in range(t, n):
                            if rt[j]:
                                ri[j] -= f * rt[j]
                    if A[i][t]:
                        done = False
            rt = A[t]
            for j in range(t + 1, n):
                x = rt[j]
                if x:
                    f = x // piv
                    if f:
                        for i in range(t, m):
                            if A[i][t]:
                                A[i][j] -= f * A[i][t]
                    if rt[j]:
                        done = False
            if done:
                bad = None
                for i in range(t + 1, m):
                    if any(x % piv for x in A[i][t + 1:]):
                        bad = i
                        break
                if bad is None:
                    break
                rb, rt = A[bad], A[t]
                for j in range(t, n):
                    rt[j] += rb[j]
                continue
            # a smaller remainder exists: move it to the pivot position
            best = None
            for i in range(t, m):
                x = A[i][t]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, t)
            for j in range(t, n):
                x = A[t][j]
                if x and abs(x) < best[0]:
                    best = (abs(x), t, j)
            _, i, j = best
            A[t], A[i] = A[i], A[t]
            if j != t:
                for row in A:
                    row[t], row[j] = row[j], row[t]
        divisors.append(abs(A[t][t]))
        t += 1
    return divisors


def smith_normal_form(Y):
    """Elementary divisors of the boundary map of Y over Z."""
    check_budget(Y)
    units, leftover = _eliminate(Y)
    rest = smith_divisors(leftover) if leftover and leftover[0] else []
    return ElementaryDivisors(tuple([1] * units + rest))


def torsion_primes(divs):
    """Primes dividing the torsion order.  Only the largest divisor needs
    factoring, since every other divisor divides it."""
    if isinstance(divs, ElementaryDivisors):
        divs = divs.divisors
    divs = [int(x) for x in divs]
    top = max(divs) if divs else 1
    if top <= 1:
        return TorsionPrimes((), True, ())
    factors, leftovers = factor(top)
    return TorsionPrimes(tuple(sorted(factors)), not leftovers, tuple(leftovers))
