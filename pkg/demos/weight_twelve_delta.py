"""Weight 12 (s = -1): the Delta oldspace inside the U-spectrum.

Delta has T2-eigenvalue -24, so its two 2-stabilisations satisfy
1 + 24T + 2^11 T^2 = 0.  That quadratic should divide every truncated
characteristic polynomial at s = -1, contributing slopes 3 and 8.
"""
from fractions import Fraction

from uslope import charpoly, newton_slopes, standard
from uslope.qseries import U, V

prec = 30
delta = standard("delta", 2 * prec)

# T2 = U + 2^11 V on weight 12, level 1
ud, vd = U(delta).coeffs, V(delta).coeffs
t2 = [ud[n] + 2 ** 11 * vd[n] for n in range(prec)]
print("T2 Delta == -24 Delta to", prec, "terms:", t2 == [-24 * c for c in delta.coeffs[:prec]])


def remainder(num, den):
    """Remainder of num by den; both low-degree-first lists of rationals."""
    num = [Fraction(c) for c in num]
    while len(num) >= len(den):
        q = num[-1] / den[-1]
        shift = len(num) - len(den)
        for k, c in enumerate(den):
            num[shift + k] -= q * c
        num.pop()
    return num


quad = [1, 24, 2 ** 11]
for N in (3, 10, 20):
    cp = charpoly("U", -1, N)
    rem = remainder([c.a for c in cp.coeffs], quad)
    slopes = [str(x) for x in newton_slopes(cp).slopes()]
    print(f"N={N:>2}  divisible: {not any(rem)}  lowest slopes: {slopes[:5]}")

print("det(1 - T U_3) =", charpoly("U", -1, 3).format_text())
