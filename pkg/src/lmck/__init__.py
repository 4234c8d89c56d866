"""Random d-complexes: exact homology over Q, Z/q and Z, q-reducing sets,
m-tilde estimation and a two-sample integer-homology certifier."""

__version__ = "0.1.0"

from .complex import DComplex, read_complex, write_complex  # noqa: E402
from .errors import InvariantError, LmckError, ParseError, ResourceBudgetError, ValidationError  # noqa: E402
from .faces import ComplexSpec, boundary, rank, unrank  # noqa: E402
from .gf_linalg import PrimeModulus, boundary_rank  # noqa: E402
from .sampler import Seed  # noqa: E402

__all__ = [
    "ComplexSpec",
    "DComplex",
    "InvariantError",
    "LmckError",
    "ParseError",
    "PrimeModulus",
    "ResourceBudgetError",
    "Seed",
    "ValidationError",
    "boundary",
    "boundary_rank",
    "rank",
    "read_complex",
    "unrank",
    "write_complex",
]
