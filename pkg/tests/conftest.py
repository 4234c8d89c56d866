import numpy as np
import pytest

from lmck.complex import DComplex
from lmck.faces import ComplexSpec, rank

# six-vertex triangulation of the real projective plane
RP2_TRIANGLES = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (1, 3, 4), (1, 3, 5), (2, 3, 5), (2, 4, 5),
]

ACCEPTANCE_LINES = []


def make_rp2():
    spec = ComplexSpec(6, 2)
    return DComplex.from_ids(spec, [rank(spec, t) for t in RP2_TRIANGLES])


def random_complex(rng, n, d, m=None):
    spec = ComplexSpec(n, d)
    total = spec.face_count()
    if m is None:
        m = int(rng.integers(0, total + 1))
    return DComplex.from_ids(spec, rng.permutation(total)[:m])


@pytest.fixture
def rp2():
    return make_rp2()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
