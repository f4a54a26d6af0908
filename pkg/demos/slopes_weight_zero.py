"""Slopes of the 2-adic U-operator near weight zero.

Run with ``python demos/slopes_weight_zero.py``.  We truncate the matrix of U
on the basis of powers of f, take the characteristic polynomial
det(1 - T U_N) exactly over Q(sqrt2), and read off slopes from its Newton
polygon.  Doubling N tells us which slopes have settled.
"""
from fractions import Fraction

from uslope import Scalar, charpoly, newton_slopes, slope_table

s = Scalar(0)

# The 2x2 truncation is small enough to check by hand.
cp = charpoly("U", s, 2)
print("det(1 - T U_2) =", cp.format_text())
print("slopes:", [str(x) for x in newton_slopes(cp).slopes()])

# Larger truncations: slopes below the bound must agree between N and 2N.
for N in (8, 16):
    tab = slope_table("U", s, N, Fraction(10))
    print(f"N={N:>2}  stable={tab.stable}  slopes below 10: {[str(x) for x in tab.slopes()]}")

# The same machinery works for an irrational weight parameter.
s_irr = Scalar.parse("1+sqrt2")
tab = slope_table("U", s_irr, 12, Fraction(6))
print("s = 1+sqrt2:", [str(x) for x in tab.slopes()], "stable" if tab.stable else "unstable")
