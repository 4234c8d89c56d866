"""q-reducing sets, the incremental face process and the m-tilde estimator.

A face f is q-reducing for Y when adding it drops dim H_{d-1}(Y; Z/q), which
happens exactly when its boundary is not already in the span of the
boundaries of Y.  With a fully reduced basis that is a zero test on the
residual of the boundary of f.

For m-tilde the whole curve m -> |reducing set of Y_m| along a random ordering
is computed at once.  Along the ordering every face f has an absorption time
tau(f), the first m at which its boundary enters the span, and

    |reducing set(Y_m)| = #{f : tau(f) > m}

because faces of Y_m are absorbed no later than their own position.  The span
only changes at the (at most C(n-1, d)) positions where the rank grows, so
tau is found by tracking, for every face, a few random linear functionals of
its residual.  When a new pivot s with basis row v arrives, each residual
changes by res_f[s] * v, so each functional moves by res_f[s] * (r . v).  A
functional that is nonzero proves the residual nonzero; all-zero faces are
confirmed by an exact residual test before tau is assigned.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import partial
from math import sqrt

import numpy as np

from .errors import InvariantError, ValidationError
from .gf_linalg import FieldOps, as_modulus, boundary_entries, build_basis, new_basis
from .parallel import map_trials
from .sampler import Seed, sample_ordering, sample_uniform_m

# faces whose residuals are tested per batch in reducing_set
_BATCH = 1 << 16
# lane of a trial seed that drives the random functionals
SKETCH_LANE = 7


def _as_seed(seed):
    return seed if isinstance(seed, Seed) else Seed(int(seed))


def reducing_mask(Y, q, basis=None):
    """Boolean mask over all face ids: True where the face is q-reducing for Y."""
    spec = Y.spec
    basis = build_basis(Y, as_modulus(q)) if basis is None else basis
    total = spec.face_count()
    out = np.zeros(total, dtype=bool)
    if basis.rank == basis.nrows:
        return out
    for start in range(0, total, _BATCH):
        ids = np.arange(start, min(total, start + _BATCH), dtype=np.int64)
        rows, signs = boundary_entries(spec, ids)
        out[start:start + ids.size] = basis.residual_nonzero_many(rows, signs)
    return out


def reducing_set(Y, q):
    """Sorted ids of the faces whose addition drops dim H_{d-1}(Y; Z/q)."""
    return np.flatnonzero(reducing_mask(Y, q))


@dataclass(frozen=True)
class ReducingSetEstimate:
    size: float
    stderr: float
    sampled: int
    hits: int
    exact: bool = False


def estimate_reducing_size(Y, q, k, seed):
    """|reducing set| from k faces drawn uniformly with replacement."""
    if k < 1:
        raise ValidationError("sample size must be positive")
    spec = Y.spec
    basis = build_basis(Y, as_modulus(q))
    rng = _as_seed(seed).generator()
    ids = rng.integers(0, spec.face_count(), size=int(k), dtype=np.int64)
    rows, signs = boundary_entries(spec, ids)
    hits = int(basis.residual_nonzero_many(rows, signs).sum())
    frac = hits / k
    total = spec.face_count()
    return ReducingSetEstimate(total * frac, total * sqrt(frac * (1 - frac) / k), int(k), hits)


@dataclass(frozen=True)
class ProcessTrace:
    ordering: np.ndarray
    indicators: np.ndarray
    dims: np.ndarray

    @property
    def drops(self):
        return int(self.indicators.sum())

    def check(self, full=False):
        if np.any(self.dims < 0):
            raise InvariantError("negative homology dimension in trace")
        if np.any(np.diff(self.dims) != -self.indicators.astype(np.int64)):
            raise InvariantError("dims do not follow the drop indicators")
        if full and self.dims[-1] != 0:
            raise InvariantError(f"full ordering ends at dimension {self.dims[-1]}, not 0")


def _check_ordering(spec, ordering):
    order = np.asarray(ordering, dtype=np.int64).reshape(-1)
    if order.size and (order.min() < 0 or order.max() >= spec.face_count()):
        raise ValidationError("ordering contains an out-of-range face id")
    if np.unique(order).size != order.size:
        raise ValidationError("ordering contains a duplicate face")
    return order


def run_process(spec, ordering, q, stop_at=None):
    """Add faces one at a time, recording Z_i = 1 when f_i was q-reducing."""
    order = _check_ordering(spec, ordering)
    if stop_at is not None:
        if not 0 <= stop_at <= order.size:
            raise ValidationError(f"stop_at must lie in [0, {order.size}]")
        order = order[:stop_at]
    basis = new_basis(spec.row_count(), as_modulus(q))
    z = np.zeros(order.size, dtype=np.uint8)
    if order.size:
        rows, signs = boundary_entries(spec, order)
        full = basis.nrows
        for i in range(order.size):
            if basis.rank == full:
                break
            z[i] = basis.insert_entries(rows[i], signs[i])
    dims = np.empty(order.size + 1, dtype=np.int64)
    dims[0] = spec.cycle_dim()
    dims[1:] = spec.cycle_dim() - np.cumsum(z, dtype=np.int64)
    trace = ProcessTrace(order, z, dims)
    trace.check(full=order.size == spec.face_count())
    return trace


@dataclass(frozen=True)
class Absorption:
    """Absorption times along one ordering; tau[f] in [1, len(ordering)]."""

    ordering: np.ndarray
    tau: np.ndarray
    events: np.ndarray  # positions m at which the rank grew

    def curve(self):
        """|reducing set(Y_m)| for m = 0..C(n,d+1)."""
        total = self.tau.size
        absorbed = np.cumsum(np.bincount(self.tau, minlength=total + 1))
        return total - absorbed


def absorption_times(spec, q, seed, ordering=None):
    """Exact absorption times of every face along a random ordering.

    The ordering is ``sample_ordering(spec, seed)`` unless given, so the
    prefix of length m is the complex ``sample_uniform_m(spec, m, seed)``.
    """
    mod = as_modulus(q)
    seed = _as_seed(seed)
    order = sample_ordering(spec, seed) if ordering is None else _check_ordering(spec, ordering)
    total = spec.face_count()
    if order.size != total:
        raise ValidationError("absorption times need a full ordering")
    nrows = spec.row_count()
    rows, signs = boundary_entries(spec, np.arange(total, dtype=np.int64))
    basis = new_basis(nrows, mod)
    rng = seed.sub(SKETCH_LANE).generator()
    gf2 = mod.regime == "gf2"
    ops = FieldOps(mod)
    present = rows >= 0
    safe_rows = np.where(present, rows, 0)

    if gf2:
        # 64 functionals over GF(2), one per bit of a word
        R = rng.integers(0, 2**64, size=nrows, dtype=np.uint64, endpoint=False)
        sig = np.bitwise_xor.reduce(np.where(present, R[safe_rows], np.uint64(0)), axis=1)
    else:
        S = ops.sketch_count()
        R = ops.random(rng, (S, nrows))
        sig = np.stack([ops.signed_gather_sum(R[j], rows, signs) for j in range(S)])

    tau = np.zeros(total, dtype=np.int64)
    live = np.arange(total, dtype=np.int64)
    events = []
    for i, f in enumerate(order):
        if tau[f]:
            continue
        if not basis.insert_entries(rows[f], signs[f]):
            raise InvariantError(f"face {f} was not absorbed but its boundary is dependent")
        m = i + 1
        events.append(m)
        if basis.rank == nrows:
            tau[tau == 0] = m
            break
        live = live[tau[live] == 0]
        s, prow, pval = basis.last_insertion()
        v = basis.dense_row(s)
        lr = rows[live]
        if gf2:
            g = np.zeros(nrows, dtype=np.uint8)
            g[s] = 1
            g[prow] = 1
            c = np.bitwise_xor.reduce(np.where(present[live], g[safe_rows[live]], 0), axis=1)
            t = np.bitwise_xor.reduce(R[v.astype(bool)]) if v.any() else np.uint64(0)
            sig[live] ^= np.where(c != 0, t, np.uint64(0))
            zero = live[sig[live] == 0]
        else:
            g = ops.zeros(nrows)
            g[s] = 1
            g[prow] = ops.neg(pval)
            c = ops.signed_gather_sum(g, lr, signs[live])
            for j in range(sig.shape[0]):
                sig[j, live] = ops.scaled_sub(sig[j, live], c, ops.dot(R[j], v))
            zero = live[np.all(sig[:, live] == 0, axis=0)]
        if zero.size:
            nonzero = basis.residual_nonzero_many(rows[zero], signs[zero])
            tau[zero[~nonzero]] = m
    if np.any(tau == 0):
        raise InvariantError("some faces were never absorbed along a full ordering")
    return Absorption(order, tau, np.asarray(events, dtype=np.int64))


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    stderr: float
    trials: int


def _mean_stderr(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / sqrt(values.size))


def _reducing_size_trial(spec, m, q, sample_faces, seed):
    Y = sample_uniform_m(spec, m, seed)
    if sample_faces:
        return estimate_reducing_size(Y, q, sample_faces, seed.sub(1)).size
    return int(reducing_mask(Y, q).sum())


def mean_reducing_size(spec, m, q, trials, seed, sample_faces=None, threads=1):
    """Monte Carlo mean of |reducing set(Y_d(n, m))|; trial i uses stream i."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    seed = _as_seed(seed)
    fn = partial(_reducing_size_trial, spec, int(m), as_modulus(q), sample_faces)
    sizes = map_trials(fn, [seed.trial(i) for i in range(trials)], threads)
    mean, se = _mean_stderr(sizes)
    return MeanEstimate(mean, se, trials)


@dataclass(frozen=True)
class MTildeEstimate:
    n: int
    d: int
    q: int
    estimate: int
    trials: int
    target: float
    face_count: int
    mean_at: float
    stderr_at: float
    mean_before: float
    stderr_before: float
    stderr: float
    # symmetry check: every face is reducing with probability <= 1/2 at m-tilde
    face_frequency: float
    face_frequency_stderr: float
    probe_face: int
    probe_frequency: float
    probe_frequency_stderr: float
    seed: dict = field(default_factory=dict)

    @property
    def mtilde_hat(self):
        return self.estimate

    def as_dict(self):
        out = asdict(self)
        out["mtilde_hat"] = self.estimate
        return out


def _absorption_trial(spec, q, seed):
    return absorption_times(spec, q, seed).tau


def crossing(mean, target):
    """Smallest m with mean[m] <= target, by a linear scan over every m."""
    hit = np.flatnonzero(mean <= target)
    if hit.size == 0:
        raise InvariantError("mean reducing-set size never reaches the target")
    return int(hit[0])


def estimate_mtilde(spec, q, trials, seed, threads=1, probe_face=0):
    """Estimate m-tilde: the least m with E|reducing set(Y_d(n,m))| <= C(n,d+1)/2.

    Trial i follows the ordering of stream i, and its curve gives
    |reducing set(sample_uniform_m(spec, m, stream i))| exactly for every m,
    so the scan runs at step 1 over the whole range and needs no
    monotonicity of the mean.
    """
    if trials < 30:
        raise ValidationError("estimate_mtilde needs at least 30 trials")
    mod = as_modulus(q)
    seed = _as_seed(seed)
    total = spec.face_count()
    fn = partial(_absorption_trial, spec, mod)
    taus = np.stack(map_trials(fn, [seed.trial(i) for i in range(trials)], threads))
    curves = np.empty((trials, total + 1), dtype=np.float64)
    for t in range(trials):
        curves[t] = total - np.cumsum(np.bincount(taus[t], minlength=total + 1))
    mean = curves.mean(axis=0)
    se = curves.std(axis=0, ddof=1) / sqrt(trials)
    target = total / 2
    m = crossing(mean, target)
    # delta method: noise in the mean divided by the local slope of the curve
    h = max(1, m // 20)
    lo, hi = max(0, m - h), min(total, m + h)
    slope = (mean[lo] - mean[hi]) / max(1, hi - lo)
    stderr_m = float(se[m] / slope) if slope > 0 else float("inf")
    probe = (taus[:, probe_face] > m).astype(np.float64)
    pf = float(probe.mean())
    return MTildeEstimate(
        n=spec.n,
        d=spec.d,
        q=mod.q,
        estimate=m,
        trials=trials,
        target=target,
        face_count=total,
        mean_at=float(mean[m]),
        stderr_at=float(se[m]),
        mean_before=float(mean[m - 1]) if m else float(total),
        stderr_before=float(se[m - 1]) if m else 0.0,
        stderr=stderr_m,
        face_frequency=float(mean[m] / total),
        face_frequency_stderr=float(se[m] / total),
        probe_face=int(probe_face),
        probe_frequency=pf,
        probe_frequency_stderr=sqrt(pf * (1 - pf) / trials),
        seed={"master": seed.master, "streams": [0, trials - 1]},
    )
