import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmck.complex import DComplex, add_face, read_complex, write_complex
from lmck.errors import ParseError, ValidationError
from lmck.faces import ComplexSpec
from lmck.sampler import Seed, sample_uniform_m


def test_add_face_examples():
    spec = ComplexSpec(5, 2)
    empty = DComplex(spec)
    Y = add_face(empty, 0)
    assert list(Y) == [0]
    assert len(empty) == 0  # value semantics
    assert add_face(Y, 0) == Y
    full = empty
    for f in range(spec.face_count()):
        full = add_face(full, f)
    assert full == DComplex.full(spec)


def test_add_face_range():
    with pytest.raises(ValidationError):
        add_face(DComplex(ComplexSpec(5, 2)), 10)


@given(st.sets(st.integers(0, 34)), st.integers(0, 34))
def test_add_face_grows_by_at_most_one(ids, f):
    spec = ComplexSpec(7, 2)
    Y = DComplex.from_ids(spec, sorted(ids))
    Z = add_face(Y, f)
    assert len(Z) == len(Y) + (f not in ids)
    assert f in Z


def test_constructor_validation():
    spec = ComplexSpec(5, 2)
    with pytest.raises(ValidationError):
        DComplex(spec, [2, 1])
    with pytest.raises(ValidationError):
        DComplex.from_ids(spec, [1, 1])
    with pytest.raises(ValidationError):
        DComplex(spec, [0, 10])


def test_membership_dense_and_sparse():
    spec = ComplexSpec(20, 2)
    sparse = DComplex(spec, [3, 500])
    dense = DComplex(spec, np.arange(0, spec.face_count(), 2))
    assert 500 in sparse and 4 not in sparse and -1 not in sparse
    assert 4 in dense and 5 not in dense and spec.face_count() not in dense


def test_read_example():
    Y = read_complex("lmck v1\nn=4 d=2\n0 1 2\n0 1 3\n")
    assert Y.spec == ComplexSpec(4, 2)
    assert list(Y) == [0, 1]


def test_read_empty_and_comments():
    Y = read_complex("# a comment\nlmck v1\n\nn=6 d=2\n# nothing\n")
    assert len(Y) == 0 and Y.spec == ComplexSpec(6, 2)


def test_read_order_irrelevant():
    a = read_complex("lmck v1\nn=5 d=2\n1 3 4\n0 1 2\n")
    assert list(a) == [0, 8]
    assert write_complex(a).splitlines()[2:] == ["0 1 2", "1 3 4"]


@pytest.mark.parametrize("text,line", [
    ("lmck v2\nn=4 d=2\n", 1),
    ("lmck v1\nn=4\n", 2),
    ("lmck v1\nn=4 d=x\n", 2),
    ("lmck v1\nn=4 d=2\n0 1 2\n0 1 2\n", 4),
    ("lmck v1\nn=4 d=2\n0 2 1\n", 3),
    ("lmck v1\nn=4 d=2\n0 1 1\n", 3),
    ("lmck v1\nn=4 d=2\n0 1 9\n", 3),
    ("lmck v1\nn=4 d=2\n0 1\n", 3),
    ("lmck v1\nn=4 d=2\n0 a 2\n", 3),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        read_complex(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_missing_header():
    with pytest.raises(ParseError):
        read_complex("")


def test_round_trip_seeded():
    spec = ComplexSpec(20, 2)
    Y = sample_uniform_m(spec, 500, Seed(99))
    assert len(Y) == 500
    assert read_complex(write_complex(Y)) == Y
    assert read_complex(write_complex(Y, one_based=True)) == Y


@settings(max_examples=60)
@given(st.integers(3, 9), st.integers(1, 3), st.data())
def test_round_trip_property(n, d, data):
    if n < d + 2:
        return
    spec = ComplexSpec(n, d)
    ids = data.draw(st.sets(st.integers(0, spec.face_count() - 1)))
    Y = DComplex.from_ids(spec, sorted(ids))
    text = write_complex(Y)
    assert read_complex(text) == Y
    assert write_complex(read_complex(text)) == text


def test_union_and_subset():
    spec = ComplexSpec(6, 2)
    a, b = DComplex(spec, [0, 2]), DComplex(spec, [2, 5])
    u = a.union(b)
    assert list(u) == [0, 2, 5]
    assert a.issubset(u) and b.issubset(u) and not u.issubset(a)
    with pytest.raises(ValidationError):
        a.union(DComplex(ComplexSpec(7, 2)))
