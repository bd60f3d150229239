"""
Maps between nets
=================

The angle-doubling map on the closed quadrant, the peak and norm
retractions on sup-normed vectors, and the l1-sum estimate for
well-separated clusters, each checked on random samples.
"""

import numpy as np

from lipfree.netmaps import (cluster_instance, l1_sum_check, large_distance_lipschitz,
                             norm_retraction_r, peak_retraction_s, product_retraction_R,
                             quadrant_map, verify_quadrant_constants)

print(quadrant_map((1, 1)))  # (0, sqrt 2)
print(verify_quadrant_constants(20_000, seed=0).summary())

print(peak_retraction_s((5, 1, 0)), peak_retraction_s((2, 2, 0)))
print(norm_retraction_r((3.4, -2.2, 0.7)))
print(product_retraction_R((7, 1, 0), (5, 2.5)))

for m in ("s", "r", "R"):
    print(large_distance_lipschitz(m, 1.0, 2000, seed=0).summary())

rng = np.random.default_rng(0)
for K in (0.5, 1, 2, 4):
    rep = l1_sum_check(*cluster_instance(rng, K), K)
    print(f"K={K}: sum of norms {rep.extras['A']:.3f}, norm of sum {rep.extras['B']:.3f}")
