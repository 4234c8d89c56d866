"""Homology of a d-complex in degree d-1 over Q, Z/q and Z."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceBudgetError
from .gf_linalg import WORD_LIMIT, as_modulus, boundary_rank
from .primes import random_prime
from .snf import ElementaryDivisors, check_budget, smith_normal_form

# key for the fallback primes; fixed so summaries are reproducible
_CONSENSUS_KEY = 0x6C6D636B
CONSENSUS_PRIMES = 3


@dataclass(frozen=True)
class HomologySummary:
    betti_rational: int
    divisors: ElementaryDivisors | None
    betti_mod: dict = field(default_factory=dict)
    cycle_dim: int = 0
    # True when betti_rational came from ranks at random primes, not from SNF
    modular_consensus: bool = False
    consensus_agreed: bool = True

    def as_dict(self):
        return {
            "betti_rational": self.betti_rational,
            "divisors": None if self.divisors is None else list(self.divisors.divisors),
            "torsion": None if self.divisors is None else list(self.divisors.torsion),
            "betti_mod": {str(q): b for q, b in self.betti_mod.items()},
            "cycle_dim": self.cycle_dim,
            "modular_consensus": self.modular_consensus,
            "consensus_agreed": self.consensus_agreed,
        }


def cycle_dim(spec):
    """dim Z_{d-1} of the complete (d-1)-skeleton: C(n-1, d)."""
    return spec.cycle_dim()


def betti_mod(Y, q):
    return cycle_dim(Y.spec) - boundary_rank(Y, as_modulus(q))


def is_zero_mod_q(Y, q):
    return boundary_rank(Y, as_modulus(q)) == cycle_dim(Y.spec)


def is_zero_integer(Y):
    """H_{d-1}(Y; Z) = 0: full rational rank and every divisor equal to 1."""
    divs = smith_normal_form(Y)
    return divs.rank == cycle_dim(Y.spec) and not divs.torsion


def consensus_primes(count=CONSENSUS_PRIMES):
    rng = np.random.Generator(np.random.Philox(key=_CONSENSUS_KEY))
    out = []
    while len(out) < count:
        q = random_prime(62, rng)
        if q < WORD_LIMIT and q not in out:
            out.append(q)
    return out


def rational_rank(Y):
    """(rank over Q, divisors or None, agreed).

    Exact via SNF inside the dense budget.  Above it, the rank is taken at
    three random 62-bit primes; the rational rank is their maximum, and
    ``agreed`` reports whether all three coincided.
    """
    try:
        check_budget(Y)
    except ResourceBudgetError:
        ranks = [boundary_rank(Y, q) for q in consensus_primes()]
        return max(ranks), None, len(set(ranks)) == 1
    divs = smith_normal_form(Y)
    return divs.rank, divs, True


def summary(Y, primes=(), integer=True):
    """Homology summary.  With ``integer`` the Smith form is computed (and
    the budget enforced); otherwise the rational part uses modular consensus
    whenever SNF is over budget."""
    cdim = cycle_dim(Y.spec)
    mods = {int(as_modulus(q).q): betti_mod(Y, q) for q in primes}
    if integer:
        divs = smith_normal_form(Y)
        return HomologySummary(cdim - divs.rank, divs, mods, cdim)
    r, divs, agreed = rational_rank(Y)
    return HomologySummary(cdim - r, divs, mods, cdim, divs is None, agreed)
