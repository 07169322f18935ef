"""Fifth-order Gaussian bound, quantile functional, and deviation thresholds.

When increments carry random (predictable) bounds B_i, the right variance
proxy is s_i = (B_i + sigma_i^2 / B_i)/2, and on the event sum s_i^2 <= v2
the tail is bounded by the order-5 moment bound at N(0, v2).  That bound
is within 5!(e/5)^5 of the plain Gaussian tail, so inverting it gives
quantiles within a hair of Gaussian quantiles: Q_5(Z; delta/2) is capped
by both sqrt(2 log(2/delta)) and the (1 - delta/11.4) normal quantile.

Adding a polynomial-tail correction term produces a Fuk-Nagaev-style
deviation threshold for unbounded increments.
"""

import math

import numpy as np

from cbound import (
    AZUMA5_CAP,
    Gaussian,
    azuma_bentkus5,
    fuk_nagaev_threshold,
    q_alpha,
)

print(f"cap constant 5!(e/5)^5 = {AZUMA5_CAP:.6f}")
print(f"{'x':>5} {'order-5 bound':>14} {'exp cap':>12} {'tail cap':>12}")
for x in np.linspace(0.0, 5.0, 11):
    res = azuma_bentkus5(1.0, float(x))
    print(f"{x:5.1f} {res.raw:14.4e} {math.exp(-x*x/2):12.4e} "
          f"{AZUMA5_CAP * Gaussian(0,1).survival(float(x)):12.4e}")

print()
print("quantile functional vs its closed caps:")
print(f"{'delta':>8} {'Q5(Z; d/2)':>12} {'sqrt cap':>10} {'ppf cap':>10}")
for delta in (0.2, 0.1, 0.05, 0.01, 0.001):
    q = q_alpha(Gaussian(0, 1), delta / 2.0, 5)
    c1 = math.sqrt(2.0 * math.log(2.0 / delta))
    c2 = Gaussian(0, 1).quantile(1.0 - delta / 11.4)
    print(f"{delta:8.3f} {q:12.6f} {c1:10.6f} {c2:10.6f}")

print()
print("Fuk-Nagaev-style thresholds at delta = 0.1, v = 1 (power-law tails):")
print(f"{'q':>4} {'y':>6} {'gaussian x1':>12} {'heavy-tail x2':>14} {'total':>8}")
for q_exp in (2.0, 3.0, 4.0):
    for y in (5.0, 10.0, 20.0):
        x1, x2 = fuk_nagaev_threshold(1.0, 0.1, y, q_exp)
        print(f"{q_exp:4.0f} {y:6.1f} {x1:12.4f} {x2:14.4f} {x1 + x2:8.3f}")
print("the x2 term is the price of the heavy tail; it vanishes as y grows")
