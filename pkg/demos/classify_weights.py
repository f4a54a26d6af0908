"""Which case each weight parameter falls into, with its critical radius.

beta measures how close 2s comes to the 2-adic integers; nu(beta) turns
that into the radius at which the twisted operator stops being compact.
Units 2s are excluded and handled by shifting s.
"""
from uslope import Scalar, classify

samples = ["0", "1/3", "-1", "-1/3", "1/2", "3/2", "1/4*sqrt2", "3/4*sqrt2",
           "1/2*sqrt2", "1+sqrt2", "2+2*sqrt2", "-3/2+1/2*sqrt2"]

print(f"{'s':>16}  {'case':<20} {'r_crit':>7}  note")
for text in samples:
    cl = classify(Scalar.parse(text))
    r = "-" if cl.r_critical is None else str(cl.r_critical)
    note = f"shift to {cl.shifted_s} ({cl.shifted_case})" if cl.case == "ExcludedUnit" else ""
    print(f"{text:>16}  {cl.case:<20} {r:>7}  {note}")
