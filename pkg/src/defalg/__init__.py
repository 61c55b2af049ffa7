"""defalg: exact deformation algebra over the rationals.

Graded linear algebra, nilpotent dg-algebras, DGLA Maurer-Cartan theory
with gauge action, L-infinity structures on symmetric coalgebras,
obstruction calculus, tangent brackets, and minimal / prorepresenting
models — all in exact rational arithmetic.
"""

from .graded import (GradedSpace, GradedMap, Complex, Contraction,
                     ShortExactSequence, koszul_sign, unshuffles, shift,
                     symmetric_power, cohomology, is_quasiiso, connecting_hom)

__version__ = "0.1.0"
