"""Certify H_{d-1}(Y; Z) = 0 from two independent half-density samples.

Y1 and Y2 are independent Y_d(n, p) complexes and Y is their union, so Y is
Y_d(n, 1 - (1-p)^2).  If Y1 has no rational homology, its integer homology is
a finite group whose order is divisible only by the primes Q(Y1).  For q not
in Q(Y1), H_{d-1}(Y1; Z/q) = 0 and this survives adding faces.  For q in
Q(Y1) it suffices that H_{d-1}(Y2; Z/q) = 0.  Then H_{d-1}(Y; Z/q) = 0 for
every prime q together with rational vanishing forces H_{d-1}(Y; Z) = 0.

The check is one-sided: "not-certified" says nothing about Y.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .homology import is_zero_integer, is_zero_mod_q
from .errors import ValidationError
from .sampler import Seed, sample_bernoulli
from .snf import check_budget, smith_normal_form, torsion_primes

CERTIFIED = "certified-zero"
NOT_CERTIFIED = "not-certified"
FALLBACK_ZERO = "fallback-SNF-zero"
FALLBACK_NONZERO = "fallback-SNF-nonzero"

CAVEAT = "not-certified is not evidence of nonzero homology"

LANE_Y1 = 1
LANE_Y2 = 2


@dataclass(frozen=True)
class Certificate:
    n: int
    d: int
    p: float
    seed_y1: dict
    seed_y2: dict
    faces_y1: int
    faces_y2: int
    faces_union: int
    betti_rational_y1: int
    torsion_primes_y1: tuple
    primes_complete: bool
    per_prime: dict = field(default_factory=dict)
    verdict: str = NOT_CERTIFIED

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    def says_zero(self):
        return self.verdict in (CERTIFIED, FALLBACK_ZERO)

    def consistent_with(self, union_is_zero):
        """False only when the verdict makes a claim that SNF on Y refutes.
        not-certified claims nothing, so it is consistent with either answer."""
        if self.verdict == NOT_CERTIFIED:
            return True
        return self.says_zero() == bool(union_is_zero)

    def as_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "p": self.p,
            "seed_y1": self.seed_y1,
            "seed_y2": self.seed_y2,
            "faces_y1": self.faces_y1,
            "faces_y2": self.faces_y2,
            "faces_union": self.faces_union,
            "betti_rational_y1": self.betti_rational_y1,
            "torsion_primes_y1": [str(q) for q in self.torsion_primes_y1],
            "primes_complete": self.primes_complete,
            "per_prime": {str(q): ok for q, ok in self.per_prime.items()},
            "verdict": self.verdict,
            "caveat": CAVEAT if self.verdict == NOT_CERTIFIED else "",
        }


def halves(spec, p, seed):
    """(Y1, Y2, Y) for a trial seed."""
    s1, s2 = seed.sub(LANE_Y1), seed.sub(LANE_Y2)
    Y1 = sample_bernoulli(spec, p, s1)
    Y2 = sample_bernoulli(spec, p, s2)
    return Y1, Y2, Y1.union(Y2)


def certify_zero(spec, p, seed):
    if not 0.0 <= p <= 0.5:
        raise ValidationError(f"half-sample density must lie in [0, 1/2], got {p}")
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    Y1, Y2, Y = halves(spec, p, seed)
    check_budget(Y1)
    divs = smith_normal_form(Y1)
    betti = spec.cycle_dim() - divs.rank
    base = dict(
        n=spec.n,
        d=spec.d,
        p=float(p),
        seed_y1=seed.sub(LANE_Y1).as_dict(),
        seed_y2=seed.sub(LANE_Y2).as_dict(),
        faces_y1=len(Y1),
        faces_y2=len(Y2),
        faces_union=len(Y),
        betti_rational_y1=betti,
    )
    tp = torsion_primes(divs)
    if betti > 0:
        return Certificate(**base, torsion_primes_y1=tp.primes, primes_complete=tp.complete)
    if not tp.complete:
        verdict = FALLBACK_ZERO if is_zero_integer(Y) else FALLBACK_NONZERO
        return Certificate(**base, torsion_primes_y1=tp.primes, primes_complete=False, verdict=verdict)
    per_prime = {q: is_zero_mod_q(Y2, q) for q in tp.primes}
    verdict = CERTIFIED if all(per_prime.values()) else NOT_CERTIFIED
    return Certificate(**base, torsion_primes_y1=tp.primes, primes_complete=True,
                       per_prime=per_prime, verdict=verdict)
