"""Finite-slope eigenvectors stay put when the radius grows.

At weight zero the slope-3 eigenvector of U is computed 2-adically from the
truncation.  Its coordinates, rescaled by a radius r, form a sequence whose
tail increases as long as 12r stays below the slope gap.  This is the
contrast with the kernel witness, whose rescaled coordinates stay bounded.
"""
from fractions import Fraction

from uslope.spectral import finite_slope_extension_demo

for s, label in ((0, "weight 0"), (-1, "weight 12")):
    rep = finite_slope_extension_demo(s, 12, Fraction(1, 12), Fraction(5, 12) if s == 0 else Fraction(1, 4))
    print(f"{label}: slope {rep.slope}, radii {rep.r_small} and {rep.r_big}")
    vals = ["." if v is None else str(v) for v in rep.coeff_valuations]
    print("  coordinate valuations:", " ".join(vals))
    big = ["." if v is None else str(v) for v in rep.big_sequence]
    print("  rescaled at the larger radius:", " ".join(big))
    if sum(v is not None for v in rep.coeff_valuations) > 3:
        print("  tail increasing:", rep.increasing_tail)
    else:
        # only two coordinates are nonzero here, so there is no tail to watch
        print("  finitely supported eigenvector")
