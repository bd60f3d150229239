"""
Projections on grid molecules
=============================

Pushing every point of a molecule through phi_n gives a linear projection
P_n. Under the sup norm on Z^2 it never increases the transport norm, and
it stops moving a molecule once the molecule's support has been listed.
"""

from lipfree import build_enumeration
from lipfree.basis import convergence_trace, projection_norm_sweep, sample_molecules
from lipfree.metric import Molecule, box_space

enum = build_enumeration(2, 2)
space = box_space(2, 2, "sup")

mu = Molecule((((2, 1), 3), ((-1, -2), -2), ((0, 2), 1)))
trace = convergence_trace(enum, space, mu)
for n, pn, size, err in trace.records[::4]:
    print(f"n={n:2d}  |P_n mu|={float(size):.3f}  |P_n mu - mu|={float(err):.3f}")
print("fixed from n =", trace.convergence_index)

mols = sample_molecules(2, 2, 200, seed=1)
rep = projection_norm_sweep(enum, space, 25, mols)
print("largest ratio over 200 molecules:", rep.extras["max_ratio"])
