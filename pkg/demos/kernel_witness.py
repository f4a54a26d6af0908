"""A kernel element of the level-2 Atkin-Lehner twist, and why it does not decay.

For each weight parameter s we

* classify s and print the critical radius r = (3 + nu(2s))/12,
* build b = (e_1 - W e_1)/2 on the basis of powers of f and confirm that it
  is killed exactly by 1 + W,
* print the coordinate valuations along i = 2^n + 1.  Once these are
  rescaled by the critical radius they stay bounded (sigma), while the
  slightly smaller radius makes them grow (sigma').
"""
import sys

from uslope import Scalar, classify, kernel_witness, nondecay_report

N = int(sys.argv[1]) if len(sys.argv) > 1 else 258

for text in ("0", "1/4*sqrt2", "1+sqrt2"):
    s = Scalar.parse(text)
    cl = classify(s)
    print(f"\ns = {text}: case {cl.case}, critical radius {cl.r_critical}")
    wit = kernel_witness(s, N, odd_prec=40)
    print(f"  residual of (1 + W) b vanishes through order {wit.residual_max_order}: {wit.residual_zero}")
    print(f"  untwisted q-expansion has odd support to q^40: {wit.odd_support}")
    print("      i   v(b_i)   sigma   sigma'")
    for row in wit.rows:
        print(f"  {row['i']:>5} {str(row['v_b']):>8} {str(row['sigma']):>7} "
              f"{str(row['sigma_prime']):>8}")

# The non-decay lemma behind this, checked row by row for one s.
rep = nondecay_report(Scalar.parse("1/4*sqrt2"), 6)
print("\nnon-decay rows at s = sqrt2/4 all satisfied:", rep.ok)
