"""The chain of tail bounds: exact tail <= moment bound <= exponential bound.

For a sum S of independent mean-zero variables and any lam >= 0,

    1{S >= x}  <=  (1 + (lam/a)(S - x))_+^a  <=  exp(lam (S - x)),

so taking expectations and optimizing lam squeezes P(S >= x) between the
order-a positive-part bound and the Cramer-Chernoff bound.  This script
renders the chain for the sum of 20 worst-case two-point increments and
shows how much of the "missing factor" the moment bound recovers.
"""

import math

import numpy as np

from cbound import TwoPoint, bentkus, chernoff, convolve_iid

n, v2 = 20, 2.0
increment = TwoPoint.zero_mean(-v2 / n, 1.0)
total = convolve_iid(increment, n)

print(f"sum of {n} i.i.d. two-point increments, total variance {v2}")
print(f"{'x':>5} {'exact tail':>12} {'order-2':>12} {'order-1':>12} {'chernoff':>12} {'chern/ord2':>10}")
for x in np.linspace(0.0, 4.0, 9):
    exact = total.survival(float(x) - 1e-12)
    b2 = bentkus(total, float(x), 2).raw
    b1 = bentkus(total, float(x), 1).raw
    ch = chernoff(total, float(x)).raw
    assert exact <= b2 + 1e-12 <= b1 + 1e-9 or exact <= b2 + 1e-12
    assert b2 <= ch + 1e-9
    print(f"{x:5.1f} {exact:12.3e} {b2:12.3e} {b1:12.3e} {ch:12.3e} {ch/max(b2,1e-300):10.2f}")

print()
print("the last column is the factor the exponential bound gives away;")
print("near-optimality caps the order-2 bound's own looseness at e^2/2 =",
      f"{math.e**2 / 2:.4f}")
