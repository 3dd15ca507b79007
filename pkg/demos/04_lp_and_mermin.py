"""
What can any instruction-set model reach?
=========================================

Outcome probabilities are linear in the weights of the 64 instruction sets,
so the reachable statistics form a polytope. The Mermin combination
E[xxx] - E[xyy] - E[yxy] - E[yyx] tops out at 2 on it, while the GHZ state
gives 4.
"""
import numpy as np

from ghz_lhv import canonical_model, fit_distribution, max_linear_functional, mermin_weights, monte_carlo_sample
from ghz_lhv.lp import lp_max_linear_functional
from ghz_lhv.polarization import MAIN_CONTEXTS
from ghz_lhv.qm import qm_outcome_distribution

best, witness = max_linear_functional(mermin_weights())
print(f"vertex scan: max Mermin = {best} (first attained by {witness})")
print(f"simplex LP:  max Mermin = {lp_max_linear_functional(mermin_weights()):.12f}")

###############################################################################
# Closest instruction-set model to the exact GHZ statistics.
for metric in ("L1", "Linf"):
    fit = fit_distribution([qm_outcome_distribution(c) for c in MAIN_CONTEXTS], metric)
    print(f"{metric}: optimum {fit.objective:.6f} with {len(fit.model.support)} sets")
    print("   ", fit.certificate)

###############################################################################
# Finite statistics: 1000 fourfold coincidences drawn from the table.
r = monte_carlo_sample(canonical_model(), "yyx", 1000, seed=7)
neg = sum(c for o, c in r.counts.items() if o.product == -1)
print(f"yyx, n=1000: {neg} of 1000 events on QM-allowed outcomes "
      f"(expected 750 +/- {np.sqrt(1000 * 0.75 * 0.25):.0f})")
