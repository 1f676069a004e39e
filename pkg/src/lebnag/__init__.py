"""Two-family Frey-curve elimination for x^2 - q^(2k+1) = y^n with y even.

Exact arithmetic in Q(sqrt(q)) for q in {17, 41, 89, 97}, local reductions
of both Frey families, newform coefficient-data ingestion, and the
trace-set elimination sieve with its multi-family refinement.
"""

__version__ = "0.1.0"

from .frey import KNOWN_SOLUTIONS, Solution
from .newforms import NewformClass, NewformSpace, epsilon, fetch_space
from .quadfield import QuadInt, constants, fundamental_unit, primes_above
from .sieve import (
    B_fp,
    multi_frey,
    obstruction_scan,
    run_elimination,
    trace_set,
    verify_theorem1,
)

__all__ = [
    "__version__",
    "KNOWN_SOLUTIONS",
    "Solution",
    "NewformClass",
    "NewformSpace",
    "epsilon",
    "fetch_space",
    "QuadInt",
    "constants",
    "fundamental_unit",
    "primes_above",
    "B_fp",
    "multi_frey",
    "obstruction_scan",
    "run_elimination",
    "trace_set",
    "verify_theorem1",
]
