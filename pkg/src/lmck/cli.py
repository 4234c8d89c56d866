"""Command-line interface.

Global flags (--threads, --format, --out-dir) may appear before or after the
subcommand.  Experiment subcommands write ``<out-dir>/<timestamp>-<tag>/``
holding manifest.json, results.{csv,json} and timing.json; ``replay`` reruns
one from its manifest.  Exit codes: 0 ok, 2 bad input, 3 over budget,
4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from functools import partial
from math import log
from pathlib import Path

from . import __version__
from .certify import certify_zero, halves
from .complex import read_complex, write_complex
from .errors import LmckError, ValidationError
from .experiments import (
    RunManifest,
    draw,
    face_count_check,
    log_density,
    threshold_sweep,
    torsion_census,
    write_run,
)
from .faces import ComplexSpec, unrank
from .homology import is_zero_integer, summary
from .parallel import default_threads, map_trials
from .reducing import estimate_mtilde, estimate_reducing_size, reducing_mask, run_process
from .sampler import Seed, sample_bernoulli, sample_ordering, sample_uniform_m

GLOBAL_KEYS = ("threads", "format", "out_dir")


def _u64(text):
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return val


def _int_list(text):
    try:
        return [int(x, 0) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _global_flags(suppress):
    parser = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--threads", type=int, default=default, help="worker processes (default: all cores)")
    parser.add_argument("--format", choices=("csv", "json"), default=default)
    parser.add_argument("--out-dir", default=default, help="root for run directories (default: runs)")
    return parser


def _model_args(p, required=True):
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--p", type=float, help="Bernoulli density")
    group.add_argument("--m", type=int, help="exact face count (uniform model)")
    group.add_argument("--c", type=float, help="density c log n / n")


def build_parser():
    parser = argparse.ArgumentParser(prog="lmck", parents=[_global_flags(False)], description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"lmck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    def add(name, help_text):
        return sub.add_parser(name, parents=common, help=help_text)

    p = add("sample", "draw a random complex and write it in lmck format")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _model_args(p)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--one-based", action="store_true")

    p = add("homology", "homology summary of a complex file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--primes", type=_int_list, default=[])
    p.add_argument("--integer", action="store_true", help="compute the Smith form (torsion)")

    p = add("reducing-set", "q-reducing set of a complex file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--sample-faces", type=int, help="estimate from K uniformly sampled faces")
    p.add_argument("--seed", type=_u64, default=0, help="seed for --sample-faces")
    p.add_argument("--ids", action="store_true", help="list the face ids")

    p = add("process", "incremental face process along a random ordering")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--stop-at", type=int)

    p = add("mtilde", "Monte Carlo estimate of m-tilde")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--probe-face", type=int, default=0)

    p = add("certify-z", "two-sample certificate of vanishing integer homology")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=float, help="density of each half-sample")
    group.add_argument("--c", type=float, help="half-sample density c log n / n")
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--check", action="store_true", help="also run SNF on the union")

    p = add("sweep", "vanishing fraction across p = c log n / n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--c-min", type=float, required=True)
    p.add_argument("--c-max", type=float, required=True)
    p.add_argument("--c-step", type=float, required=True)
    p.add_argument("--coeff", default="2", help="comma list of primes, Q and Z")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)

    p = add("census", "exact torsion of random complexes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _model_args(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--save-complexes", action="store_true")

    p = add("face-count", "face counts against the (12d+12) log n C(n,d) floor")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--p", type=float, help="density (default 40 d log n / n)")
    group.add_argument("--c", type=float, help="density c log n / n")

    p = add("replay", "rerun an experiment from its manifest.json")
    p.add_argument("manifest")
    return parser


def _spec(args):
    return ComplexSpec(args.n, args.d)


def _draw(spec, args, seed):
    if args.m is not None:
        return sample_uniform_m(spec, args.m, seed)
    p = args.p if args.p is not None else log_density(spec.n, args.c)
    return sample_bernoulli(spec, p, seed)


def _emit(text):
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")


def _load(path):
    try:
        return read_complex(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def cmd_sample(args):
    spec = _spec(args)
    Y = _draw(spec, args, Seed(args.seed))
    text = write_complex(Y, one_based=args.one_based)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_homology(args):
    Y = _load(args.infile)
    out = summary(Y, args.primes, integer=args.integer).as_dict()
    out["faces"] = len(Y)
    if args.integer:
        out["is_zero_integer"] = out["betti_rational"] == 0 and not out["torsion"]
    _emit(json.dumps(out, sort_keys=True))
    return 0


def cmd_reducing_set(args):
    Y = _load(args.infile)
    if args.sample_faces:
        est = estimate_reducing_size(Y, args.q, args.sample_faces, Seed(args.seed))
        out = {"q": args.q, "size": est.size, "stderr": est.stderr, "sampled": est.sampled, "hits": est.hits}
    else:
        mask = reducing_mask(Y, args.q)
        out = {"q": args.q, "size": int(mask.sum()), "stderr": 0.0}
        if args.ids:
            out["ids"] = [int(i) for i in mask.nonzero()[0]]
    _emit(json.dumps(out, sort_keys=True))
    return 0


def _params(args):
    return {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS and k != "command"}


def _finish(args, tag, records, payload=None, extra=None, start=None, summary_text=None):
    manifest = RunManifest(command=args.command, params=_params(args), master_seed=getattr(args, "seed", None))
    timing = {"wall_time": time.perf_counter() - start, "threads": args.threads} if start is not None else None
    path = write_run(args.out_dir, tag, manifest, records, args.format, payload, timing, extra)
    if summary_text:
        _emit(summary_text)
    _emit(str(path))
    return 0


def cmd_process(args):
    start = time.perf_counter()
    spec = _spec(args)
    order = sample_ordering(spec, Seed(args.seed))
    trace = run_process(spec, order, args.q, args.stop_at)
    records = [{"step": 0, "face": "", "vertices": "", "z": "", "dim": int(trace.dims[0])}]
    for i, f in enumerate(trace.ordering):
        records.append({
            "step": i + 1,
            "face": int(f),
            "vertices": " ".join(map(str, unrank(spec, int(f)))),
            "z": int(trace.indicators[i]),
            "dim": int(trace.dims[i + 1]),
        })
    tag = f"process-n{spec.n}-d{spec.d}-q{args.q}"
    return _finish(args, tag, records, start=start,
                   summary_text=f"drops={trace.drops} final_dim={int(trace.dims[-1])}")


def cmd_mtilde(args):
    start = time.perf_counter()
    spec = _spec(args)
    est = estimate_mtilde(spec, args.q, args.trials, Seed(args.seed), args.threads, args.probe_face)
    rec = est.as_dict()
    rec["seed"] = args.seed
    tag = f"mtilde-n{spec.n}-d{spec.d}-q{args.q}"
    return _finish(args, tag, [rec], payload=rec, start=start,
                   summary_text=f"mtilde_hat={est.estimate} stderr={est.stderr:.3g}")


def _certify_trial(spec, p, check, seed):
    cert = certify_zero(spec, p, seed)
    out = cert.as_dict()
    out["trial"] = seed.stream
    if check:
        out["union_is_zero"] = is_zero_integer(halves(spec, p, seed)[2])
        out["agrees"] = cert.consistent_with(out["union_is_zero"])
    return out


def cmd_certify(args):
    start = time.perf_counter()
    spec = _spec(args)
    p = args.p if args.p is not None else log_density(spec.n, args.c)
    seed = Seed(args.seed)
    fn = partial(_certify_trial, spec, p, args.check)
    certs = map_trials(fn, [seed.trial(i) for i in range(args.trials)], args.threads)
    flat = []
    for c in certs:
        row = {k: v for k, v in c.items() if not isinstance(v, dict)}
        row["seed_master"] = args.seed
        row["per_prime"] = ";".join(f"{q}:{int(ok)}" for q, ok in c["per_prime"].items())
        flat.append(row)
    certified = sum(c["verdict"] == "certified-zero" for c in certs)
    text = f"certified {certified}/{args.trials}"
    if certified < args.trials:
        text += " (not-certified is not evidence of nonzero homology)"
    return _finish(args, f"certify-n{spec.n}-d{spec.d}", flat, payload=certs, start=start, summary_text=text)


def cmd_sweep(args):
    start = time.perf_counter()
    spec = _spec(args)
    if args.c_step <= 0:
        raise ValidationError("c-step must be positive")
    count = int(round((args.c_max - args.c_min) / args.c_step)) + 1
    if count < 1:
        raise ValidationError("empty c grid")
    grid = [round(args.c_min + i * args.c_step, 12) for i in range(count)]
    coeffs = [c.strip() for c in args.coeff.split(",") if c.strip()]
    for c in coeffs:
        if c.upper() not in ("Q", "Z") and not c.lstrip("-").isdigit():
            raise ValidationError(f"coefficient must be a prime, Q or Z, got {c!r}")
    coeffs = [c if c.upper() in ("Q", "Z") else int(c) for c in coeffs]
    rows = threshold_sweep(spec, grid, coeffs, args.trials, Seed(args.seed), args.threads)
    records = [r.record() for r in rows]
    timing_rows = [{"c": r.c, "coefficient": r.coefficient, "wall_time": r.wall_time} for r in rows]
    return _finish(args, f"sweep-n{spec.n}-d{spec.d}", records, start=start,
                   extra={"row_timing.json": json.dumps(timing_rows, indent=2) + "\n"})


def cmd_census(args):
    start = time.perf_counter()
    spec = _spec(args)
    model = ("m", args.m) if args.m is not None else ("p", args.p if args.p is not None else log_density(spec.n, args.c))
    seed = Seed(args.seed)
    rows, summ = torsion_census(spec, model, args.trials, seed, args.threads)
    extra = {"summary.json": json.dumps(summ, indent=2, sort_keys=True) + "\n"}
    if args.save_complexes:
        for i in range(args.trials):
            extra[f"complex-{i:05d}.lmck"] = write_complex(draw(spec, model, seed.trial(i)))
    return _finish(args, f"census-n{spec.n}-d{spec.d}", rows, payload={"rows": rows, "summary": summ},
                   extra=extra, start=start,
                   summary_text=f"max torsion order {summ['max_torsion_order']}")


def cmd_face_count(args):
    start = time.perf_counter()
    spec = _spec(args)
    p = args.p
    if args.c is not None:
        p = args.c * log(spec.n) / spec.n
    report = face_count_check(spec, args.trials, Seed(args.seed), p, args.threads)
    records = [{"trial": i, "faces": c, "meets_floor": int(c >= report["face_floor"])}
               for i, c in enumerate(report["counts"])]
    brief = {k: v for k, v in report.items() if k != "counts"}
    return _finish(args, f"facecount-n{spec.n}-d{spec.d}", records, payload=report,
                   extra={"report.json": json.dumps(brief, indent=2, sort_keys=True) + "\n"},
                   start=start, summary_text=json.dumps(brief, sort_keys=True))


def cmd_replay(args):
    manifest = RunManifest.load(args.manifest)
    if manifest.command not in HANDLERS or manifest.command == "replay":
        raise ValidationError(f"cannot replay command {manifest.command!r}")
    ns = argparse.Namespace(**manifest.params)
    ns.command = manifest.command
    for key in GLOBAL_KEYS:
        setattr(ns, key, getattr(args, key))
    return HANDLERS[manifest.command](ns)


HANDLERS = {
    "sample": cmd_sample,
    "homology": cmd_homology,
    "reducing-set": cmd_reducing_set,
    "process": cmd_process,
    "mtilde": cmd_mtilde,
    "certify-z": cmd_certify,
    "sweep": cmd_sweep,
    "census": cmd_census,
    "face-count": cmd_face_count,
    "replay": cmd_replay,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = default_threads()
    if args.threads < 1:
        print("lmck: --threads must be >= 1", file=sys.stderr)
        return 2
    args.format = args.format or "csv"
    args.out_dir = args.out_dir or "runs"
    try:
        return HANDLERS[args.command](args)
    except LmckError as exc:
        print(f"lmck: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
