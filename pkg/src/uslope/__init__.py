"""Exact computations with the 2-adic ``U`` and ``W`` operators in level 2.

Scalars live in Q(sqrt2); q-expansions, operator matrices, characteristic
polynomials and valuation reports are all computed without rounding.
"""
from .valuation import INF, PreconditionError, Scalar, profile, val2
from .qseries import QSeries, expand_in_f, standard
from .opmatrices import MatEntry, OpMatrix, entry, op_matrix, direct_matrix
from .spectral import CharPoly, NewtonPolygon, charpoly, newton_slopes, slope_table
from .kernel import classify, kernel_witness, nondecay_report

__all__ = [
    "INF", "PreconditionError", "Scalar", "profile", "val2",
    "QSeries", "expand_in_f", "standard",
    "MatEntry", "OpMatrix", "entry", "op_matrix", "direct_matrix",
    "CharPoly", "NewtonPolygon", "charpoly", "newton_slopes", "slope_table",
    "classify", "kernel_witness", "nondecay_report",
]

__version__ = "0.1.0"
