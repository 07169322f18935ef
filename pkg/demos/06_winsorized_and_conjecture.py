"""Unbounded increments: winsorization and a conjectured sharper gate.

Capping martingale increments at a level y restores boundedness at the
price of an exceedance probability: the tail is bounded by the order-2
moment bound at the scaled centered Poisson y*(Poi(v2/y) - v2/y) plus
P(max X_i > y).  A sharper variant would gate on the winsorized variance
  sum E[X_i^2 1{X_i <= y}] + sum X_i^2 1{X_i > y} <= v2
with no exceedance term at all; whether the order-2 bound survives that
gate is open.  The probe below searches small strategy families for a
counterexample ratio above one, escalating any float-level hit to
50-digit arithmetic (and finding none here).
"""

import numpy as np

from cbound import Lattice, winsorized_freedman
from cbound.verify import (
    EventSpec,
    StrategyTree,
    conjecture_probe,
    exact_exceed_prob,
    exact_report,
)

# a martingale with occasional spikes above y = 1
p_hi = 0.05
spike_law = Lattice([-2.0 * p_hi / (1.0 - p_hi), 2.0], [1.0 - p_hi, p_hi])
horizon = 6
strat = StrategyTree.iid(spike_law, horizon)
_, step_var = spike_law.mean_var()
v2 = horizon * step_var

print(f"spiky martingale: step law {dict(zip(spike_law.xs, np.round(spike_law.ps, 4)))}")
print(f"horizon {horizon}, accumulated variance {v2:.4f}")
p_exceed = exact_exceed_prob(strat, 1.0)
print(f"P(some increment exceeds y=1) = {p_exceed:.5f}")

for x in (1.5, 2.5, 3.5):
    ev = EventSpec("winsorized", x, v2, y=1.0)
    rep = exact_report(strat, ev, p_exceed=p_exceed)
    parts = winsorized_freedman(v2, x, 1.0, p_exceed)
    print(f"  x = {x:3.1f}: exact {rep.exact:.5f} <= bound {rep.bound:.5f} "
          f"(moment term {parts.extras['moment_term']:.5f} + exceedance {p_exceed:.5f})")

print()
print("probing the conjectured winsorized-variance gate (no exceedance term):")
families = {
    "two-point spikes": [
        StrategyTree.iid(Lattice([-2.0 * p / (1 - p), 2.0], [1 - p, p]), 4)
        for p in np.linspace(0.02, 0.3, 15)
    ],
    "three-point mixed": [
        StrategyTree.iid(Lattice([-0.5, 0.0, h], [h / (2 * (h + 0.5)), 0.5, 0.25 / (h + 0.5)]), 4)
        for h in np.linspace(1.2, 3.0, 10)
    ],
}
for name, family in families.items():
    rep = conjecture_probe(family, x=1.5, v2=1.5, y=1.0, budget=len(family))
    print(f"  {name:<18} max LHS/RHS = {rep.max_ratio:.6f} over {rep.n_evaluated} "
          f"strategies (flagged: {rep.flagged})")
print("ratios at or below one are consistent with the conjectured bound")
