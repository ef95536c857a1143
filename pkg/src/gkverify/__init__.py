"""gkverify: executable linear algebra for generalized Kahler constructions.

Pointwise generalized complex structures from pure spinors, commuting-pair
and positivity checks, bihermitian data extraction, the SU(2)-invariant
radial families, flat-torus deformation examples, and a batch CLI.
"""

from gkverify.exterior import (
    ComplexForm,
    GeneralizedVector,
    clifford_act,
    exp_two_form,
    interior,
    pairing,
    wedge,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexForm",
    "GeneralizedVector",
    "clifford_act",
    "exp_two_form",
    "interior",
    "pairing",
    "wedge",
    "__version__",
]
