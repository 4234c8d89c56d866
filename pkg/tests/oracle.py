"""Slow reference implementations for differential tests.

Nothing here shares code with the package beyond ``faces.boundary`` and the
complex type: matrices are built over the full set of (d-1)-faces in lex
order, ranks come from Bareiss elimination or plain Gaussian elimination,
and Smith forms from an xgcd-based textbook algorithm.
"""

from functools import lru_cache
from itertools import combinations

from lmck.faces import boundary, unrank


def facet_index(n, k):
    """Lex index of all k-subsets of range(n)."""
    return {t: i for i, t in enumerate(combinations(range(n), k))}


def dense_boundary_matrix(Y, face_ids=None):
    """Full boundary matrix: rows are all (d-1)-faces, columns the given faces."""
    spec = Y.spec
    idx = facet_index(spec.n, spec.d)
    ids = list(Y) if face_ids is None else list(face_ids)
    M = [[0] * len(ids) for _ in range(len(idx))]
    for j, fid in enumerate(ids):
        for sign, facet in boundary(spec, unrank(spec, fid)):
            M[idx[facet]][j] += sign
    return M


def lower_boundary_matrix(n, d):
    """Boundary (d-1)-faces -> (d-2)-faces of the complete skeleton.
    For d = 1 this is the augmentation C_0 -> Z."""
    if d == 1:
        return [[1] * n]
    rows = facet_index(n, d - 1)
    cols = list(combinations(range(n), d))
    M = [[0] * len(cols) for _ in range(len(rows))]
    for j, face in enumerate(cols):
        for i in range(len(face)):
            M[rows[face[:i] + face[i + 1:]]][j] += (-1) ** i
    return M


def bareiss_rank(M):
    A = [list(map(int, r)) for r in M]
    if not A or not A[0]:
        return 0
    m, n = len(A), len(A[0])
    rank = 0
    prev = 1
    for col in range(n):
        piv = next((i for i in range(rank, m) if A[i][col]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][col]
        for i in range(rank + 1, m):
            a = A[i][col]
            A[i] = [(p * A[i][j] - a * A[rank][j]) // prev for j in range(n)]
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def rank_mod(M, q):
    A = [[x % q for x in r] for r in M]
    if not A or not A[0]:
        return 0
    m, n = len(A), len(A[0])
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if A[i][col]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][col], -1, q)
        A[rank] = [x * inv % q for x in A[rank]]
        for i in range(m):
            if i != rank and A[i][col]:
                f = A[i][col]
                A[i] = [(x - f * y) % q for x, y in zip(A[i], A[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        x0, x1 = x1, x0 - t * x1
        y0, y1 = y1, y0 - t * y1
    return a, x0, y0


def naive_snf(M):
    """Nonzero diagonal of the Smith form, as a sorted list, by the xgcd method."""
    A = [list(map(int, r)) for r in M]
    m = len(A)
    n = len(A[0]) if m else 0
    diag = []
    for t in range(min(m, n)):
        piv = next(((i, j) for j in range(t, n) for i in range(t, m) if A[i][j]), None)
        if piv is None:
            break
        i, j = piv
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            for i in range(t + 1, m):
                b = A[i][t]
                if b == 0:
                    continue
                a = A[t][t]
                if b % a == 0:
                    f = b // a
                    A[i] = [v - f * u for u, v in zip(A[t], A[i])]
                    continue
                g, x, y = _xgcd(a, b)
                ra, rb = A[t], A[i]
                A[t] = [x * u + y * v for u, v in zip(ra, rb)]
                A[i] = [(a // g) * v - (b // g) * u for u, v in zip(ra, rb)]
            for j in range(t + 1, n):
                b = A[t][j]
                if b == 0:
                    continue
                a = A[t][t]
                if b % a == 0:
                    f = b // a
                    for row in A:
                        row[j] -= f * row[t]
                    continue
                g, x, y = _xgcd(a, b)
                for row in A:
                    u, v = row[t], row[j]
                    row[t] = x * u + y * v
                    row[j] = (a // g) * v - (b // g) * u
            if all(A[i][t] == 0 for i in range(t + 1, m)):
                break
        diag.append(abs(A[t][t]))
    # divisibility normal form: invariant factors from the diagonal
    diag = [x for x in diag if x]
    changed = True
    while changed:
        changed = False
        for i in range(len(diag)):
            for j in range(i + 1, len(diag)):
                a, b = diag[i], diag[j]
                g, _, _ = _xgcd(a, b)
                if b % a:
                    diag[i], diag[j] = g, a * b // g
                    changed = True
    return sorted(diag)


def rank_mod_from_divisors(divs, q):
    return sum(1 for x in divs if x % q)


@lru_cache(maxsize=None)
def cycle_dim_mod(n, d, q):
    """dim ker d_{d-1} of the complete skeleton over Z/q, by elimination."""
    low = lower_boundary_matrix(n, d)
    return len(low[0]) - rank_mod(low, q)


def betti_mod(Y, q, extra_faces=()):
    """dim H_{d-1}(Y; Z/q) from scratch: dim ker d_{d-1} - rank d_d."""
    spec = Y.spec
    ker = cycle_dim_mod(spec.n, spec.d, q)
    ids = sorted(set(Y) | set(extra_faces))
    if not ids:
        return ker
    return ker - rank_mod(dense_boundary_matrix(Y, ids), q)


def brute_reducing_set(Y, q):
    base = betti_mod(Y, q)
    present = set(Y)
    return {
        f for f in range(Y.spec.face_count())
        if f not in present and betti_mod(Y, q, [f]) != base
    }
