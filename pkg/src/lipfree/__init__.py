"""Lipschitz-free space norms on finite metric spaces and grid retractions."""

from .basis import commutation_sweep, convergence_trace, project, projection_norm_sweep
from .grid import (GridEnumeration, RetractionCache, build_enumeration, lipschitz_bound,
                   retract, retract_index, verify_axioms)
from .krnorm import FlowCertificate, brute_force_norm, free_norm, lip_norm, quotient_norm
from .metric import (Molecule, PointedMetricSpace, box_space, canonicalize, grid_space,
                     max_separated_subset, space_from_matrix, validate_metric)
from .netmaps import (l1_sum_check, large_distance_lipschitz, norm_retraction_r,
                      peak_retraction_s, product_retraction_R, quadrant_map,
                      quadrant_map_inv, verify_quadrant_constants)
from .report import VerificationReport, reports_to_csv

__all__ = [
    "FlowCertificate", "GridEnumeration", "Molecule", "PointedMetricSpace",
    "RetractionCache", "VerificationReport", "box_space", "brute_force_norm",
    "build_enumeration", "canonicalize", "commutation_sweep", "convergence_trace",
    "free_norm", "grid_space", "l1_sum_check", "large_distance_lipschitz",
    "lip_norm", "lipschitz_bound", "max_separated_subset", "norm_retraction_r",
    "peak_retraction_s", "product_retraction_R", "project", "projection_norm_sweep",
    "quadrant_map", "quadrant_map_inv", "quotient_norm", "reports_to_csv", "retract",
    "retract_index", "space_from_matrix", "validate_metric", "verify_axioms",
    "verify_quadrant_constants",
]
