"""Variance-gated martingale bounds and their exact worst cases.

A supermartingale with increments bounded by one is controlled, on the
event that its accumulated conditional variance stays below v2, by the
order-2 bound at a binomial-type reference law; letting the horizon grow
yields the horizon-free centered-Poisson form, which in turn is capped by
(e^2/2) times the least log-concave majorant of the Poisson tail.

The exact side: enumerating small adaptive strategies shows the bound is
honest, and an adversarial grid search recovers the extremal two-point
increment law.
"""

import numpy as np

from cbound import (
    TwoPoint,
    fan_chernoff,
    freedman_bentkus_binom,
    freedman_bentkus_poisson,
    poisson_majorant_bound,
)
from cbound.verify import (
    EventSpec,
    StrategyTree,
    adversarial_search,
    exact_union_prob,
    iid_two_point_family,
    matching_bound,
    mc_union_prob,
)

v2 = 1.0
print("bounds at v2 = 1 (rows: threshold x; binom uses n = 50)")
print(f"{'x':>5} {'binom(50)':>12} {'poisson':>12} {'exp (Fan)':>12} {'majorant cap':>13}")
for x in np.linspace(0.0, 4.0, 9):
    fb = freedman_bentkus_binom(50, v2, float(x)).raw
    fp = freedman_bentkus_poisson(v2, float(x)).raw
    fc = fan_chernoff(50, v2, float(x)).raw
    cap = poisson_majorant_bound(v2, float(x)).raw
    assert fb <= fp + 1e-9 <= cap + 1e-9 and fb <= fc + 1e-9
    print(f"{x:5.1f} {fb:12.4e} {fp:12.4e} {fc:12.4e} {cap:13.4e}")

print()
print("exact union probabilities for adaptive strategies (horizon 6):")
for name, fn in [
    ("front-loaded variance", lambda k, h: None if k >= 6 else
        __import__("cbound").Lattice([-(0.9 ** k), 0.9 ** k], [0.5, 0.5])),
    ("stop near boundary", lambda k, h: None if k >= 6 or sum(h) >= 1.0 else
        TwoPoint.zero_mean(-0.4, 1.0)),
]:
    strat = StrategyTree.adaptive(6, fn)
    ev = EventSpec("freedman", 1.5, 1.5)
    p = exact_union_prob(strat, ev)
    b = matching_bound(ev, 6).bound
    print(f"  {name:<24} exact {p:.6f} <= bound {b:.6f}")

print()
ev = EventSpec("freedman", 1.0, 1.0)
family = iid_two_point_family(4, grid=64, a_lo=-0.25, a_hi=-0.01)
best, best_prob = adversarial_search(family, ev, budget=64)
a_star = float(best.step_laws[0].atoms()[0][0])
print(f"adversarial search over i.i.d. two-point laws (n=4, x=1, v2=1):")
print(f"  worst increment lower atom a* = {a_star:.4f} (extremal value -v2/n = -0.25)")
print(f"  union probability {best_prob:.6f} vs bound {matching_bound(ev, 4).bound:.6f}")

rep = mc_union_prob(best, ev, 10**6, seed=1)
print(f"  10^6-trial check: estimate {rep.estimate:.6f}, CI-upper {rep.ci_upper:.6f}, "
      f"pass={rep.passed}")
