"""
Carving the integer grid
========================

The points of Z^d are listed cube by cube. Each new point carves a
half-space out of the cell of an earlier point, and phi_n sends x to the
point whose cell contains it after n carvings.
"""

from lipfree import build_enumeration, retract, verify_axioms
from lipfree.grid import lipschitz_profile

enum = build_enumeration(2, 2)
for s in enum.steps[:9]:
    rule = "" if s.parent is None else f"parent {s.parent}, x{s.pred_coord} {s.pred_sign} {s.pred_threshold}"
    print(s.index, s.point, rule)

# where a far-away point lands as the table grows
x = (4, -3)
print([retract(enum, n, x) for n in (1, 2, 3, 9, 25)])

rep = verify_axioms(enum, 25, 5)
print(rep.summary())

for norm in ("sup", "l1", "l2"):
    prof = lipschitz_profile(enum, 25, 5, norm)
    print(norm, "largest Lipschitz constant:", max(v for _, v, _ in prof))
