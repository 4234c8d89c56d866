"""Experiment drivers: threshold sweeps, torsion census, face-count check,
and the run-directory layout they write to."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import partial
from math import log, log2, sqrt
from pathlib import Path

import numpy as np
from scipy.stats import binom

from . import __version__
from .errors import InvariantError, ResourceBudgetError, ValidationError
from .gf_linalg import as_modulus
from .homology import is_zero_integer, is_zero_mod_q, rational_rank
from .parallel import map_trials
from .sampler import RNG_ALGORITHM, Seed, sample_bernoulli, sample_uniform_m
from .snf import check_budget, hadamard_column_bound, smith_normal_form, torsion_order_bound, torsion_primes

SCHEMA_VERSION = "lmck-results/1"
# face counts above this are drawn as one binomial instead of a full sample
FACE_SAMPLE_BUDGET = 20_000_000


def log_density(n, c):
    """p = c log n / n, clamped to [0, 1]."""
    return min(1.0, max(0.0, c * log(n) / n))


def wilson_interval(k, trials, z=1.959963984540054):
    if trials == 0:
        return 0.0, 1.0
    phat = k / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # rounding can push an endpoint past the point estimate at k = 0 or k = trials
    return max(0.0, min(phat, centre - half)), min(1.0, max(phat, centre + half))


@dataclass
class SweepRow:
    n: int
    d: int
    coefficient: str
    c: float
    p: float
    trials: int
    vanish_count: int
    vanish_fraction: float
    wilson_low: float
    wilson_high: float
    status: str = "ok"
    wall_time: float = field(default=0.0, compare=False)

    def record(self):
        out = asdict(self)
        out.pop("wall_time")
        return out


def _coefficient_label(coeff):
    if isinstance(coeff, str) and coeff.upper() in ("Q", "Z"):
        return coeff.upper()
    return str(as_modulus(int(coeff)).q)


def _vanishes(Y, label):
    """True/False, or None when the integer test is over budget."""
    if label == "Q":
        r, _, _ = rational_rank(Y)
        return r == Y.spec.cycle_dim()
    if label == "Z":
        try:
            check_budget(Y)
        except ResourceBudgetError:
            return None
        return is_zero_integer(Y)
    return is_zero_mod_q(Y, int(label))


def _sweep_trial(spec, p, labels, seed):
    Y = sample_bernoulli(spec, p, seed)
    return tuple(_vanishes(Y, lab) for lab in labels)


def threshold_sweep(spec, c_grid, coefficients, trials, seed, threads=1):
    """One row per (c, coefficient).  Trial i at grid point j samples from
    stream i, lane j; every coefficient is tested on the same complexes."""
    c_grid = [float(c) for c in c_grid]
    if not c_grid:
        raise ValidationError("c grid is empty")
    if any(b < a for a, b in zip(c_grid, c_grid[1:])):
        raise ValidationError("c grid must be ascending")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    labels = tuple(_coefficient_label(c) for c in coefficients)
    rows = []
    for j, c in enumerate(c_grid):
        p = log_density(spec.n, c)
        start = time.perf_counter()
        fn = partial(_sweep_trial, spec, p, labels)
        results = map_trials(fn, [Seed(seed.master, i, j) for i in range(trials)], threads)
        elapsed = time.perf_counter() - start
        for k, lab in enumerate(labels):
            verdicts = [r[k] for r in results]
            if any(v is None for v in verdicts):
                rows.append(SweepRow(spec.n, spec.d, lab, c, p, trials, 0, 0.0, 0.0, 1.0,
                                     "skipped: budget", elapsed))
                continue
            count = sum(verdicts)
            lo, hi = wilson_interval(count, trials)
            rows.append(SweepRow(spec.n, spec.d, lab, c, p, trials, count, count / trials,
                                 lo, hi, "ok", elapsed))
    return rows


def draw(spec, model, seed):
    """A complex from ("p", density) or ("m", face count)."""
    kind, value = model
    if kind == "m":
        return sample_uniform_m(spec, int(value), seed)
    return sample_bernoulli(spec, float(value), seed)


def _census_trial(spec, model, seed):
    Y = draw(spec, model, seed)
    check_budget(Y)
    divs = smith_normal_form(Y)
    order = divs.torsion_order
    bound = hadamard_column_bound(Y, rank=divs.rank)
    if order > bound:
        raise InvariantError(f"torsion order {order} exceeds the column-length bound")
    tp = torsion_primes(divs)
    return {
        "trial": seed.stream,
        "faces": len(Y),
        "betti_rational": spec.cycle_dim() - divs.rank,
        "torsion_order": str(order),
        "torsion_primes": ";".join(str(q) for q in tp.primes),
        "primes_complete": tp.complete,
        "log2_column_bound": round(divs.rank / 2 * log2(spec.d + 1), 6),
    }


def torsion_census(spec, model, trials, seed, threads=1):
    """Per-trial exact torsion, plus a summary against the worst-case bound.

    ``model`` is a density p, or a pair ("p", p) or ("m", m).
    """
    if not isinstance(model, tuple):
        model = ("p", float(model))
    kind, value = model
    if kind == "p" and not 0.0 <= value <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {value}")
    if kind == "m" and not 0 <= value <= spec.face_count():
        raise ValidationError(f"m must lie in [0, {spec.face_count()}], got {value}")
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    fn = partial(_census_trial, spec, model)
    rows = map_trials(fn, [seed.trial(i) for i in range(trials)], threads)
    bound = torsion_order_bound(spec)
    top = max((int(r["torsion_order"]) for r in rows), default=1)
    if top > bound:
        raise InvariantError("torsion order exceeds the worst-case bound")
    summary = {
        "trials": trials,
        "max_torsion_order": str(top),
        "torsion_order_bound": str(bound),
        "nontrivial_torsion_trials": sum(int(r["torsion_order"]) > 1 for r in rows),
        "max_torsion_primes": max((len(r["torsion_primes"].split(";")) if r["torsion_primes"] else 0
                                   for r in rows), default=0),
    }
    return rows, summary


def face_floor(spec):
    """(12d + 12) log n C(n, d), the face count the Chernoff step asks for."""
    return (12 * spec.d + 12) * log(spec.n) * spec.facet_count()


def _face_count_trial(spec, p, seed):
    total = spec.face_count()
    if total <= FACE_SAMPLE_BUDGET:
        return len(sample_bernoulli(spec, p, seed))
    return int(seed.generator().binomial(total, p))


def face_count_check(spec, trials, seed, p=None, threads=1):
    """Fraction of Y_d(n, p) samples with at least the Chernoff floor of faces.

    ``p`` defaults to 40 d log n / n and is clamped to [0, 1].
    """
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    requested = 40 * spec.d * log(spec.n) / spec.n if p is None else float(p)
    if requested < 0:
        raise ValidationError("p must be non-negative")
    pc = min(1.0, requested)
    fn = partial(_face_count_trial, spec, pc)
    counts = map_trials(fn, [seed.trial(i) for i in range(trials)], threads)
    floor = face_floor(spec)
    total = spec.face_count()
    need = int(np.ceil(floor))
    meets = sum(c >= floor for c in counts)
    return {
        "n": spec.n,
        "d": spec.d,
        "p_requested": requested,
        "p": pc,
        "clamped": requested > 1.0,
        "trials": trials,
        "face_floor": floor,
        "possible_faces": total,
        "expected_faces": pc * total,
        "mean_faces": float(np.mean(counts)) if counts else 0.0,
        "min_faces": int(min(counts)) if counts else 0,
        "meets_floor": int(meets),
        "fraction": meets / trials if trials else 0.0,
        "binomial_prediction": float(binom.sf(need - 1, total, pc)) if need <= total else 0.0,
        "claimed_failure_bound": 1 / (2 * spec.n ** (spec.d + 1)),
        "counts": [int(c) for c in counts],
    }


@dataclass
class RunManifest:
    command: str
    params: dict
    master_seed: int | None = None
    tool_version: str = __version__
    rng_algorithm: str = RNG_ALGORITHM
    schema: str = SCHEMA_VERSION
    timestamp: str = ""

    def reproducible(self):
        """Everything except the timestamp."""
        out = asdict(self)
        out.pop("timestamp")
        return out

    def as_dict(self):
        return asdict(self)

    @classmethod
    def load(cls, path):
        data = json.loads(Path(path).read_text())
        return cls(**data)


def render_csv(records, manifest):
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA_VERSION}\n")
    buf.write("# manifest: " + json.dumps(manifest.reproducible(), sort_keys=True) + "\n")
    if records:
        writer = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: _csv_value(v) for k, v in rec.items()})
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return v


def render_json(payload, manifest):
    doc = {"manifest": manifest.reproducible(), "results": payload}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_directory(root, tag, stamp=None):
    stamp = stamp or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    path = Path(root) / f"{stamp}-{tag}"
    path.mkdir(parents=True, exist_ok=False)
    return path, stamp


def write_run(root, tag, manifest, records, fmt="csv", payload=None, timing=None, extra=None):
    """Write manifest.json, results.{csv,json} and timing.json; returns the directory.

    ``records`` are flat dicts (CSV rows); ``payload`` overrides what goes in
    the JSON results.  Wall-clock times go to timing.json only, so results
    files are byte-identical across reruns.
    """
    path, stamp = run_directory(root, tag)
    manifest.timestamp = stamp
    (path / "manifest.json").write_text(json.dumps(manifest.as_dict(), indent=2, sort_keys=True) + "\n")
    if fmt == "json":
        body = render_json(records if payload is None else payload, manifest)
        (path / "results.json").write_text(body)
    else:
        (path / "results.csv").write_text(render_csv(records, manifest))
    for name, data in (extra or {}).items():
        (path / name).write_text(data)
    if timing is not None:
        (path / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    return path
