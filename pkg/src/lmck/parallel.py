"""Deterministic trial-level parallelism.

Results come back in input order whatever the worker count, and every trial
carries its own seed, so output does not depend on scheduling.
"""

import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor


def default_threads():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def map_trials(fn, args, threads=1):
    args = list(args)
    threads = int(threads or 1)
    if threads <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    workers = min(threads, len(args))
    chunk = max(1, len(args) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, mp_context=mp.get_context("spawn")) as ex:
        return list(ex.map(fn, args, chunksize=chunk))
