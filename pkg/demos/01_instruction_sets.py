"""
Instruction sets and the pinned 32-set table
============================================

Each photon leaves the source carrying two predetermined answers: X (linear,
H'/V') and Y (circular, R/L). An experiment such as ``yyx`` reads Y from
photons 1 and 2 and X from photon 3.
"""
from ghz_lhv import (
    all_instruction_sets,
    canonical_table,
    outcome_distribution,
    outcome_of,
    pair_marginal,
    parse_context,
    single_marginal,
)

sets = all_instruction_sets()
print(f"{len(sets)} instruction sets, first {sets[0]}, last {sets[-1]}")

###############################################################################
# The pinned table holds 32 of them, each with weight 1/32.
table = canonical_table()
model = table.distribution()
for s in table:
    print(" ", s)

###############################################################################
# Which members produce RRV' and RRH' in the yyx experiment?
yyx = parse_context("yyx")
for label in ("RRV'", "RRH'"):
    members = [s.text for s in table if outcome_of(s, yyx).label == label]
    print(f"{label}: {len(members)}/32 -> {members}")

d = outcome_distribution(model, yyx)
print("P(RRV') =", d["RRV'"], " P(RRH') =", d["RRH'"])

###############################################################################
# Lower-order statistics carry no information: every single-photon marginal
# is 1/2 and every two-photon marginal is 1/4.
print("photon 1, y:", {str(k): str(v) for k, v in single_marginal(model, 1, "y").items()})
print("photons 1,3, x/y:", {f"{a}{b}": str(v) for (a, b), v in pair_marginal(model, 1, 3, "x", "y").items()})

###############################################################################
# The four "mixed" experiments are completely random.
for name in ("xxy", "xyx", "yxx", "yyy"):
    print(name, sorted({str(p) for p in outcome_distribution(model, name).probs.values()}))
