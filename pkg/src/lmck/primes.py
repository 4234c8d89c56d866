"""Primality testing and factoring of torsion orders."""

from __future__ import annotations

from math import gcd, isqrt

import numpy as np

# Miller-Rabin with these bases is exact below 3.3e24
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
PROBABLE_PRIME_ROUNDS = 64

TRIAL_DIVISION_LIMIT = 10**6
RHO_ITERATION_BUDGET = 10**7

_small_primes = None


def small_primes(limit=TRIAL_DIVISION_LIMIT):
    global _small_primes
    if _small_primes is None or _small_primes[-1] < limit:
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for i in range(2, isqrt(limit) + 1):
            if sieve[i]:
                sieve[i * i::i] = False
        _small_primes = np.flatnonzero(sieve)
    return _small_primes[_small_primes <= limit]


def _mr_round(n, a, d, s):
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n):
    """Miller-Rabin; exact for n < 2**64, otherwise 64 rounds.

    Returns (is_prime, certain).
    """
    if n < 2:
        return False, True
    for p in _DETERMINISTIC_BASES:
        if n == p:
            return True, True
        if n % p == 0:
            return False, True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 2**64:
        return all(_mr_round(n, a, d, s) for a in _DETERMINISTIC_BASES[:12]), True
    # bases come from a generator keyed by n so the verdict is reproducible
    rng = np.random.Generator(np.random.Philox(key=n % 2**128))
    for _ in range(PROBABLE_PRIME_ROUNDS):
        a = 2 + int(rng.integers(0, 2**62)) % (n - 3)
        if not _mr_round(n, a, d, s):
            return False, True
    return True, False


def is_prime(n):
    return is_probable_prime(n)[0]


def random_prime(bits, rng):
    """Uniform-ish random prime with exactly ``bits`` bits."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    lo = 1 << (bits - 1)
    while True:
        cand = lo + int.from_bytes(rng.bytes((bits + 7) // 8), "little") % lo
        cand |= 1
        if cand >= 2 and is_prime(cand):
            return cand


def pollard_brent(n, c, budget):
    """One Brent-rho attempt with polynomial x^2 + c.

    Returns (factor or None, iterations used).
    """
    y, r, q, g = 2, 1, 1, 1
    m = 128
    used = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        used += r
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += m
        used += min(r, k)
        r *= 2
        if used > budget:
            return None, used
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
            if g > 1:
                break
    if g == n:
        return None, used
    return g, used


def factor(n, rho_budget=RHO_ITERATION_BUDGET):
    """Prime factorization of a positive integer.

    Returns (factors, leftovers): a dict prime -> exponent and a list of
    composite cofactors that resisted Pollard rho within ``rho_budget``
    iterations each.  Retries use c = 1, 2, 3, ... until the budget is spent.
    """
    factors = {}
    leftovers = []
    if n < 1:
        raise ValueError("n must be positive")
    for p in small_primes():
        p = int(p)
        if p * p > n:
            break
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        r = isqrt(m)
        if r * r == m:
            stack.extend((r, r))
            continue
        spent = 0
        found = None
        c = 1
        while spent < rho_budget:
            found, used = pollard_brent(m, c, rho_budget - spent)
            spent += used
            if found:
                break
            c += 1
        if found:
            stack.extend((found, m // found))
        else:
            leftovers.append(m)
    return factors, leftovers
