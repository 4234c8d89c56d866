"""Seeded sampling of random d-complexes.

Every random draw comes from a Philox4x64-10 generator keyed by
``(master, stream)``.  Independent sub-streams of one trial (for example the
two halves of a certificate) differ only in the top counter word ("lane"),
so streams never overlap and results do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .complex import DComplex
from .errors import InvariantError, ValidationError

RNG_ALGORITHM = "philox4x64-10/numpy-keyed(master,stream);lane=counter[3]"

_MASK64 = 2**64 - 1
# full key-sort orderings are materialized up to this many faces
_ORDERING_BUDGET = 20_000_000


@dataclass(frozen=True)
class Seed:
    master: int
    stream: int = 0
    lane: int = 0

    def __post_init__(self):
        for name in ("master", "stream", "lane"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or not 0 <= val <= _MASK64:
                raise ValidationError(f"seed {name} must be an unsigned 64-bit integer, got {val!r}")

    def trial(self, index):
        """Seed for trial ``index`` of an experiment seeded with ``self.master``."""
        return Seed(self.master, index, 0)

    def sub(self, lane):
        return Seed(self.master, self.stream, lane)

    def generator(self):
        bitgen = np.random.Philox(key=[self.master, self.stream], counter=[0, 0, 0, self.lane])
        return np.random.Generator(bitgen)

    def as_dict(self):
        return {"master": self.master, "stream": self.stream, "lane": self.lane}


def _as_generator(seed):
    if isinstance(seed, Seed):
        return seed.generator()
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        return Seed(int(seed)).generator()
    raise ValidationError(f"cannot derive a generator from {seed!r}")


def sample_bernoulli(spec, p, seed):
    """Y_d(n, p): each face independently with probability p.

    Uses geometric skip lengths, so the work is proportional to the number of
    faces kept rather than to C(n, d+1).
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    total = spec.face_count()
    if p == 0.0:
        return DComplex(spec)
    if p == 1.0:
        return DComplex.full(spec)
    rng = _as_generator(seed)
    chunks = []
    pos = -1
    batch = int(total * p + 6 * sqrt(total * p * (1 - p))) + 16
    while pos < total:
        steps = rng.geometric(p, size=batch)
        cand = pos + np.cumsum(steps, dtype=np.int64)
        chunks.append(cand)
        pos = int(cand[-1])
        batch = max(16, batch // 4)
    ids = np.concatenate(chunks)
    ids = ids[ids < total]
    return DComplex(spec, ids)


def sample_ordering(spec, seed):
    """Uniform random permutation of all face ids (sort by i.i.d. 64-bit keys)."""
    total = spec.face_count()
    if total > _ORDERING_BUDGET:
        raise ValidationError(f"C(n,d+1)={total} exceeds the ordering budget {_ORDERING_BUDGET}")
    rng = _as_generator(seed)
    keys = rng.integers(0, _MASK64, size=total, dtype=np.uint64, endpoint=True)
    return np.argsort(keys, kind="stable").astype(np.int64)


def sample_uniform_m(spec, m, seed):
    """Y_d(n, m): a uniform m-subset of faces.

    Below the ordering budget this is exactly the length-m prefix of
    ``sample_ordering`` with the same seed; above it Floyd's algorithm is used.
    """
    total = spec.face_count()
    if not isinstance(m, (int, np.integer)) or not 0 <= m <= total:
        raise ValidationError(f"m must lie in [0, {total}], got {m}")
    if m == 0:
        return DComplex(spec)
    if m == total:
        return DComplex.full(spec)
    if total <= _ORDERING_BUDGET:
        return DComplex.from_ids(spec, sample_ordering(spec, seed)[:m])
    rng = _as_generator(seed)
    chosen = set()
    for j in range(total - m, total):
        t = int(rng.integers(0, j, endpoint=True))
        chosen.add(j if t in chosen else t)
    return DComplex.from_ids(spec, sorted(chosen))


def couple_blocks(spec, sizes, seed):
    """Consecutive blocks of one random ordering.

    Returns ``(blocks, Y)`` where block i holds ``sizes[i]`` faces and ``Y`` is
    the union of all blocks, i.e. the first ``sum(sizes)`` faces of the
    ordering.  Each block is marginally Y_d(n, m_i) and Y is Y_d(n, sum m_i).
    """
    sizes = [int(s) for s in sizes]
    if any(s < 0 for s in sizes):
        raise ValidationError("block sizes must be non-negative")
    total = sum(sizes)
    if total > spec.face_count():
        raise ValidationError(f"sum of block sizes {total} exceeds C(n,d+1)={spec.face_count()}")
    order = sample_ordering(spec, seed)
    blocks = []
    start = 0
    for s in sizes:
        blocks.append(DComplex.from_ids(spec, order[start:start + s]))
        start += s
    Y = DComplex.from_ids(spec, order[:total])
    for block in blocks:
        if not block.issubset(Y):
            raise InvariantError("block not contained in the coupled complex")
    return blocks, Y
