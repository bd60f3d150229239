"""
Free-space norms as transport problems
======================================

A molecule on a pointed metric space is priced by the cheapest way to move
its positive mass onto its negative mass, with the basepoint acting as an
unlimited source and sink. The solver returns an optimal plan and a
1-Lipschitz function certifying it.
"""

import numpy as np

from lipfree import Molecule, canonicalize, free_norm, quotient_norm, space_from_matrix
from lipfree.metric import random_integer_metric

# three points: o is the basepoint, a and b sit on opposite sides of it
space = space_from_matrix(np.array([[0, 1, 1], [1, 0, 2], [1, 2, 0]]), labels=("o", "a", "b"))

mu = canonicalize(Molecule((("a", 2), ("b", -1))), space)
value, cert = free_norm(space, mu)
print("norm of 2 delta_a - delta_b:", value)
print("plan:", {(space.points[i], space.points[j]): m for (i, j), m in cert.plan.items()})
print("witness function:", dict(zip(space.points, cert.potentials.tolist())))

# every certificate can be re-checked independently
print(cert.check(space, mu).summary())

# in the quotient by {o, a}, only b has to travel, and it is one unit away
print("quotient norm of delta_b:", quotient_norm(space, [0, 1], Molecule(((2, 1),)))[0])

# a larger random shortest-path metric
rng = np.random.default_rng(0)
big = space_from_matrix(random_integer_metric(40, rng, high=20))
nu = Molecule(tuple((int(i), int(c) or 1) for i, c in zip(range(1, 16), rng.integers(-4, 5, 15))))
v, c = free_norm(big, nu)
print("40-point metric, 15-point molecule:", v, "duality gap:", c.gap)
