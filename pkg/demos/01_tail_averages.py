"""Worst-case subpopulation effects as tail averages.

The worst-case treatment effect at level alpha is the average effect
over the worst-off alpha-fraction of the population: the conditional
value-at-risk (CVaR) of the individual-level effect.  This script shows
the empirical estimator on a small vector, its dual representation, and
the closed form when effects are normally distributed.
"""

import numpy as np

from wte import closed_form_normal_wte, cvar_dual_objective, empirical_cvar

values = np.array([1.0, 2.0, 3.0, 4.0])
for alpha in (1.0, 0.5, 0.25):
    res = empirical_cvar(values, alpha)
    print(f"alpha={alpha:4}: tail average = {res.value:.4f}  "
          f"(dual minimizer eta* = {res.eta_star})")

# the value is the minimum of a convex piecewise-linear dual objective
print("\ndual objective around eta* for alpha = 0.5:")
for eta in (2.0, 2.5, 3.0, 3.5, 4.0):
    print(f"  eta={eta}: {cvar_dual_objective(values, 0.5, eta):.4f}")

# closed form for a normal effect distribution: effects ~ N(-0.1, 1)
# have a slightly beneficial mean, but the worst-off tail is harmed
print("\neffects ~ N(-0.1, 1):")
for alpha in (1.0, 0.9, 0.5, 0.1):
    print(f"  alpha={alpha:4}: worst-case effect = "
          f"{closed_form_normal_wte(-0.1, 1.0, alpha):+.4f}")
