from itertools import combinations
from math import comb

import numpy as np
import pytest

import oracle
from conftest import random_complex
from lmck.complex import DComplex
from lmck.errors import ValidationError
from lmck.faces import ComplexSpec
from lmck.gf_linalg import as_modulus, boundary_entries, new_basis
from lmck.homology import betti_mod, is_zero_mod_q
from lmck.reducing import (
    absorption_times,
    crossing,
    estimate_mtilde,
    estimate_reducing_size,
    mean_reducing_size,
    reducing_mask,
    reducing_set,
    run_process,
)
from lmck.sampler import Seed, sample_ordering, sample_uniform_m

QS = (2, 3, 1000003, 2**61 - 1)


def test_reducing_set_examples(rp2):
    spec = ComplexSpec(6, 2)
    assert reducing_set(DComplex(spec), 2).tolist() == list(range(spec.face_count()))
    assert reducing_set(DComplex.full(spec), 3).size == 0
    assert reducing_set(rp2, 3).size == 0
    assert reducing_set(rp2, 2).size > 0


@pytest.mark.parametrize("q", [2, 3, 5])
def test_reducing_set_against_brute_force(rng, q):
    for _ in range(15):
        Y = random_complex(rng, 5, 2, 4)
        assert set(reducing_set(Y, q).tolist()) == oracle.brute_reducing_set(Y, q)
    for _ in range(10):
        n = int(rng.integers(5, 8))
        Y = random_complex(rng, n, 2)
        assert set(reducing_set(Y, q).tolist()) == oracle.brute_reducing_set(Y, q)


def test_members_of_y_never_reducing(rng):
    for q in QS:
        Y = random_complex(rng, 7, 2, 15)
        assert not set(reducing_set(Y, q).tolist()) & set(Y)


def test_nested_pairs_are_monotone(rng):
    for _ in range(100):
        n = int(rng.integers(5, 9))
        spec = ComplexSpec(n, 2)
        perm = rng.permutation(spec.face_count())
        a = int(rng.integers(0, spec.face_count()))
        b = int(rng.integers(a, spec.face_count() + 1))
        Y, Y2 = DComplex.from_ids(spec, perm[:a]), DComplex.from_ids(spec, perm[:b])
        q = QS[_ % len(QS)]
        big, small = reducing_mask(Y, q), reducing_mask(Y2, q)
        assert not np.any(small & ~big)


def test_emptiness_iff_vanishing(rng):
    for i in range(60):
        n = int(rng.integers(6, 11))
        spec = ComplexSpec(n, 2)
        # face counts spread across the vanishing threshold
        m = int(rng.integers(spec.cycle_dim(), min(spec.face_count(), 4 * spec.facet_count()) + 1))
        Y = random_complex(rng, n, 2, m)
        q = QS[i % len(QS)]
        assert (reducing_set(Y, q).size == 0) == is_zero_mod_q(Y, q)


def test_membership_independent_of_build_order(rng):
    for q in QS:
        Y = random_complex(rng, 8, 2, 30)
        ids = list(Y)
        rng.shuffle(ids)
        basis = new_basis(Y.spec.row_count(), as_modulus(q))
        rows, signs = boundary_entries(Y.spec, np.asarray(ids, dtype=np.int64))
        for r, s in zip(rows, signs):
            basis.insert_entries(r, s)
        assert np.array_equal(reducing_mask(Y, q, basis), reducing_mask(Y, q))


def test_gf2_path_matches_generic(rng):
    # GF(2) uses a bit-packed basis; GF(3) and the word primes a dense one.
    # Both must agree with the per-face oracle on the same complexes.
    for _ in range(10):
        Y = random_complex(rng, 7, 2)
        for q in (2, 3):
            assert set(reducing_set(Y, q).tolist()) == oracle.brute_reducing_set(Y, q)


def test_process_example():
    spec = ComplexSpec(5, 2)
    trace = run_process(spec, sample_ordering(spec, Seed(3)), 3)
    assert trace.drops == 6 == comb(4, 2)
    assert trace.dims[0] == 6 and trace.dims[-1] == 0
    empty = run_process(spec, sample_ordering(spec, Seed(3)), 3, stop_at=0)
    assert empty.indicators.size == 0 and empty.dims.tolist() == [6]


@pytest.mark.parametrize("n,d", [(5, 2), (6, 2), (6, 3), (5, 1)])
def test_process_dims_match_oracle(n, d):
    spec = ComplexSpec(n, d)
    for s in range(3):
        order = sample_ordering(spec, Seed(s))
        for q in (2, 3):
            trace = run_process(spec, order, q)
            for i in range(0, order.size + 1, max(1, order.size // 8)):
                Y = DComplex.from_ids(spec, order[:i])
                assert trace.dims[i] == oracle.betti_mod(Y, q)
            assert trace.drops == spec.cycle_dim()


def test_process_rejects_bad_orderings():
    spec = ComplexSpec(5, 2)
    with pytest.raises(ValidationError):
        run_process(spec, [0, 1, 1], 2)
    with pytest.raises(ValidationError):
        run_process(spec, [0, 10], 2)
    with pytest.raises(ValidationError):
        run_process(spec, [0, 1], 2, stop_at=3)


def test_prefix_process():
    spec = ComplexSpec(6, 2)
    order = sample_ordering(spec, Seed(9))
    t = run_process(spec, order[:7], 5)
    assert t.dims[-1] == betti_mod(DComplex.from_ids(spec, order[:7]), 5)


@pytest.mark.parametrize("q", [2, 3, 1000003, 2**61 - 1])
@pytest.mark.parametrize("n,d", [(6, 2), (7, 2), (6, 3)])
def test_absorption_curve_matches_direct_sizes(n, d, q):
    spec = ComplexSpec(n, d)
    seed = Seed(11, 4)
    ab = absorption_times(spec, q, seed)
    curve = ab.curve()
    assert curve[0] == spec.face_count() and curve[-1] == 0
    for m in range(0, spec.face_count() + 1, max(1, spec.face_count() // 12)):
        Y = sample_uniform_m(spec, m, seed)
        assert curve[m] == reducing_mask(Y, q).sum()
    trace = run_process(spec, ab.ordering, q)
    assert np.flatnonzero(trace.indicators).tolist() == (ab.events - 1).tolist()


def test_mean_reducing_size_endpoints():
    spec = ComplexSpec(6, 2)
    a = mean_reducing_size(spec, 0, 2, 5, Seed(1))
    assert a.mean == spec.face_count() and a.stderr == 0
    b = mean_reducing_size(spec, spec.face_count(), 3, 3, Seed(1))
    assert b.mean == 0
    with pytest.raises(ValidationError):
        mean_reducing_size(spec, 3, 2, 0, Seed(1))


@pytest.mark.slow
def test_mean_reducing_size_exhaustive():
    spec = ComplexSpec(5, 2)
    sizes = [len(oracle.brute_reducing_set(DComplex.from_ids(spec, c), 2))
             for c in combinations(range(spec.face_count()), 3)]
    assert len(sizes) == 120
    exact = float(np.mean(sizes))
    est = mean_reducing_size(spec, 3, 2, 2000, Seed(2024))
    assert abs(est.mean - exact) <= 3 * est.stderr


def test_sampled_reducing_size(rng):
    Y = random_complex(rng, 9, 2, 25)
    exact = reducing_mask(Y, 2).sum()
    est = estimate_reducing_size(Y, 2, 4000, Seed(5))
    assert abs(est.size - exact) <= 4 * est.stderr + 1e-9
    with pytest.raises(ValidationError):
        estimate_reducing_size(Y, 2, 0, Seed(5))
    m = mean_reducing_size(Y.spec, 25, 2, 4, Seed(1), sample_faces=500)
    assert 0 <= m.mean <= Y.spec.face_count()


def test_crossing_linear_scan():
    assert crossing(np.array([10, 8, 4, 6, 3, 0]), 5) == 2
    with pytest.raises(Exception):
        crossing(np.array([10, 9]), 5)


def test_estimate_mtilde_small():
    spec = ComplexSpec(8, 2)
    a = estimate_mtilde(spec, 2, 30, Seed(77))
    b = estimate_mtilde(spec, 2, 30, Seed(77))
    assert a == b
    assert 0 < a.mtilde_hat <= spec.face_count()
    assert a.mean_at <= a.target < a.mean_before
    assert a.mtilde_hat <= 4 * spec.facet_count()
    assert a.probe_frequency <= 0.5 + 3 * a.probe_frequency_stderr + 1e-12
    with pytest.raises(ValidationError):
        estimate_mtilde(spec, 2, 29, Seed(77))
