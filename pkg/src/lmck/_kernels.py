"""Compiled GF(q) kernels for odd word-size moduli q < 2**62.

Products are formed as 128-bit (hi, lo) pairs from 32-bit limbs and reduced
with Montgomery REDC, so no intermediate overflows.  All arithmetic is on
np.uint64; mixing in Python ints would silently promote to float64 under
numba, hence the explicit constants.
"""

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)
U32 = np.uint64(32)
LOW32 = np.uint64(0xFFFFFFFF)


def montgomery_constants(q):
    """(-q^-1 mod 2^64, 2^128 mod q) for odd q."""
    inv = q
    for _ in range(6):
        inv = inv * (2 - q * inv) % 2**64
    assert q * inv % 2**64 == 1
    return np.uint64((-inv) % 2**64), np.uint64(pow(2, 128, q))


@njit(cache=True, inline="always")
def _mul128(a, b):
    a_lo = a & LOW32
    a_hi = a >> U32
    b_lo = b & LOW32
    b_hi = b >> U32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> U32) + (p1 & LOW32) + (p2 & LOW32)
    lo = (p0 & LOW32) | ((mid & LOW32) << U32)
    hi = p3 + (p1 >> U32) + (p2 >> U32) + (mid >> U32)
    return hi, lo


@njit(cache=True, inline="always")
def montmul(a, b, q, ninv):
    """a * b * 2^-64 mod q for a, b < q."""
    hi, lo = _mul128(a, b)
    m = lo * ninv
    mh, ml = _mul128(m, q)
    carry = U1 if lo != U0 else U0
    t = hi + mh + carry
    if t >= q:
        t -= q
    return t


@njit(cache=True, inline="always")
def mulmod(a, b, q, ninv, r2):
    return montmul(montmul(a, b, q, ninv), r2, q, ninv)


@njit(cache=True, inline="always")
def submod(a, b, q):
    if a >= b:
        return a - b
    return a + (q - b)


@njit(cache=True)
def powmod(a, e, q, ninv, r2):
    result = U1
    base = a
    while e > U0:
        if e & U1:
            result = mulmod(result, base, q, ninv, r2)
        base = mulmod(base, base, q, ninv, r2)
        e >>= U1
    return result


@njit(cache=True)
def reduce_dense(F, pivslot, v, support, q, ninv, r2):
    """In place: v -= sum over pivot rows p in ``support`` of v[p] * F[slot(p)].

    With F fully reduced this clears v at every pivot row.
    """
    ncols = v.shape[0]
    for idx in range(support.shape[0]):
        p = support[idx]
        s = pivslot[p]
        if s < 0:
            continue
        c = v[p]
        if c == U0:
            continue
        row = F[s]
        for j in range(ncols):
            x = row[j]
            if x != U0:
                v[j] = submod(v[j], mulmod(c, x, q, ninv, r2), q)


@njit(cache=True)
def insert_residual(F, pivslot, k, v, q, ninv, r2):
    """Insert a nonzero residual v (zero at all pivot rows) as basis row k.

    The pivot is the smallest nonzero index.  v is scaled to 1 there and
    eliminated from the existing rows.  Returns the pivot row index.
    """
    ncols = v.shape[0]
    s = -1
    for j in range(ncols):
        if v[j] != U0:
            s = j
            break
    inv = powmod(v[s], q - np.uint64(2), q, ninv, r2)
    nnz = 0
    cols = np.empty(ncols, dtype=np.int64)
    for j in range(ncols):
        if v[j] != U0:
            v[j] = mulmod(v[j], inv, q, ninv, r2)
            cols[nnz] = j
            nnz += 1
    # Montgomery form of v so each update costs one REDC
    vm = np.empty(nnz, dtype=np.uint64)
    for t in range(nnz):
        vm[t] = montmul(v[cols[t]], r2, q, ninv)
    for i in range(k):
        row = F[i]
        c = row[s]
        if c == U0:
            continue
        for t in range(nnz):
            j = cols[t]
            row[j] = submod(row[j], montmul(c, vm[t], q, ninv), q)
    for j in range(ncols):
        F[k, j] = v[j]
    pivslot[s] = k
    return s


@njit(cache=True)
def residual_nonzero_batch(F, pivslot, free, rows, signs, q, out):
    """out[f] = residual of the f-th sparse vector is nonzero.

    rows/signs have shape (K, w); rows < 0 are absent entries, signs are +-1.
    Only the free (non-pivot) coordinates can be nonzero after reduction.
    """
    K, w = rows.shape
    for f in range(K):
        nz = False
        for jj in range(free.shape[0]):
            j = free[jj]
            acc = U0
            for t in range(w):
                r = rows[f, t]
                if r < 0:
                    continue
                s = pivslot[r]
                if s >= 0:
                    x = F[s, j]
                    # residual picks up -sign * F[s, j]
                    if signs[f, t] > 0:
                        acc = submod(acc, x, q)
                    else:
                        acc = acc + x
                        if acc >= q:
                            acc -= q
                elif r == j:
                    if signs[f, t] > 0:
                        acc = acc + U1
                        if acc >= q:
                            acc -= q
                    else:
                        acc = submod(acc, U1, q)
            if acc != U0:
                nz = True
                break
        out[f] = nz


@njit(cache=True)
def scaled_sub(sig, coef, t, q, ninv, r2):
    """sig[i] -= coef[i] * t (mod q), elementwise over 1-d arrays."""
    for i in range(sig.shape[0]):
        c = coef[i]
        if c != U0:
            sig[i] = submod(sig[i], mulmod(c, t, q, ninv, r2), q)


@njit(cache=True)
def dotmod(a, b, q, ninv, r2):
    acc = U0
    for i in range(a.shape[0]):
        if a[i] != U0 and b[i] != U0:
            acc = acc + mulmod(a[i], b[i], q, ninv, r2)
            if acc >= q:
                acc -= q
    return acc
