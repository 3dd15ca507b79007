"""
Reconstructing the table from its constraints
=============================================

Only a handful of facts about the 32-set table are machine-readable: the two
yyx counts (6 sets give RRV', 2 give RRH'), the eight sets producing them,
and uniform marginals. Extending the 6/2 split symmetrically to yxy, xyy and
(with the sign flipped) xxx, plus 4 per outcome elsewhere, pins the table
down completely.
"""
from ghz_lhv import h1_constraints, search_tables, verify_table
from ghz_lhv.lhv import TableConstraints, caption_only_constraints, canonical_table

profile = h1_constraints()
res = search_tables(profile, limit=100)
print(f"6/2 profile: {len(res)} table(s), searched {res.nodes} nodes")
print("\n".join(verify_table(res[0], profile).lines()))
print("equals pinned table:", res[0] == canonical_table())

###############################################################################
# The count profile alone (no required members) already forces the same table.
counts_only = TableConstraints(frozenset(), profile.counts)
print("counts only:", len(search_tables(counts_only, limit=100)), "table(s)")

###############################################################################
# With just the two published counts the solution space is much larger.
loose = search_tables(caption_only_constraints(), limit=10**6)
print("caption counts only:", len(loose), "tables")

###############################################################################
# The surviving table has a closed form: keep the sets with
# -Y1Y2X3 - Y1X2Y3 - X1Y2Y3 + X1X2X3 = +2.
ok = all(
    (-s.ys[0] * s.ys[1] * s.xs[2] - s.ys[0] * s.xs[1] * s.ys[2]
     - s.xs[0] * s.ys[1] * s.ys[2] + s.xs[0] * s.xs[1] * s.xs[2]) == 2
    for s in res[0]
)
print("all members satisfy the closed form:", ok)
