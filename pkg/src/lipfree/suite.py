"""The acceptance suite: one runner per group of checks, all seeded.

Each runner returns a list of :class:`VerificationReport`. ``quick=True``
halves sample counts and exhaustive ranges for fast CI runs; the defaults
are the full acceptance sizes.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .basis import (commutation_sweep, convergence_trace, projection_norm_sweep,
                    sample_molecules)
from .grid import build_enumeration, lipschitz_profile, verify_axioms
from .krnorm import brute_force_norm, free_norm
from .metric import (Molecule, PointedMetricSpace, box_space, canonicalize,
                     metric_from_points, random_integer_metric, space_from_matrix)
from .netmaps import (cluster_instance, l1_sum_check, large_distance_lipschitz,
                      three_point_instance, verify_quadrant_constants)
from .report import VerificationReport

TOL = 1e-9
K_VALUES = (0.5, 1.0, 2.0, 4.0)


def half(n: int, quick: bool) -> int:
    return max(1, math.ceil(n / 2)) if quick else n


def random_space(rng: np.random.Generator, n: int) -> PointedMetricSpace:
    """Integer shortest-path metric, Euclidean cloud, or sup-norm cloud."""
    kind = int(rng.integers(3))
    if kind == 0:
        D = random_integer_metric(n, rng, high=int(rng.integers(2, 30)))
    else:
        X = rng.normal(size=(n, int(rng.integers(1, 4)))) * rng.uniform(0.5, 10)
        D = metric_from_points(X, "l2" if kind == 1 else "sup")
    return space_from_matrix(D)


def random_molecule(rng: np.random.Generator, space: PointedMetricSpace,
                    max_support: int = 12) -> Molecule:
    others = [i for i in range(len(space)) if i != space.basepoint]
    size = int(rng.integers(1, min(len(others), max_support) + 1))
    idx = sorted(rng.choice(others, size=size, replace=False).tolist())
    if rng.random() < 0.5:
        coefs = [int(c) or 1 for c in rng.integers(-5, 6, size=size)]
    else:
        coefs = rng.normal(size=size).tolist()
    return Molecule(tuple(zip(idx, coefs)))


# -- duality and oracle ---------------------------------------------------

def run_duality(seed: int = 42, quick: bool = False, spaces: int = 100,
                max_points: int = 60, oracle_metrics: int = 2) -> list[VerificationReport]:
    rng = np.random.default_rng(seed)
    rep = VerificationReport("duality certificates")
    worst_gap, gap_wit, cert_bad = 0.0, None, None
    for sid in range(half(spaces, quick)):
        space = random_space(rng, int(rng.integers(2, max_points + 1)))
        mol = random_molecule(rng, space)
        value, cert = free_norm(space, mol)
        if cert.gap > worst_gap:
            worst_gap, gap_wit = cert.gap, sid
        if cert_bad is None and not cert.check(space, mol, TOL).passed:
            cert_bad = sid
    rep.add("gap", worst_gap <= TOL, bound=TOL, observed=worst_gap, witness=gap_wit)
    rep.add("certificate_checks", cert_bad is None, witness=cert_bad)

    oracle = VerificationReport("duality oracle")
    count, mismatch = 0, None
    for mid in range(half(oracle_metrics, quick)):
        space = space_from_matrix(random_integer_metric(5, rng, high=6))
        others = [i for i in range(5) if i != space.basepoint]
        for coefs in itertools.product(range(-2, 3), repeat=4):
            mol = Molecule(tuple((i, c) for i, c in zip(others, coefs) if c))
            flow = free_norm(space, mol)[0] if mol.terms else 0
            brute = brute_force_norm(space, mol)
            count += 1
            if flow != brute and mismatch is None:
                mismatch = (mid, coefs, flow, brute)
    oracle.add("exact_agreement", mismatch is None, observed=count, witness=mismatch)
    oracle.add("instance_count", count >= 500, bound=500, observed=count)
    return [rep, oracle]


def run_dirac(seed: int = 42, quick: bool = False, spaces: int = 200,
              max_points: int = 10) -> list[VerificationReport]:
    rng = np.random.default_rng(seed + 1)
    rep = VerificationReport("duality dirac isometry")
    worst, wit, pairs = 0.0, None, 0
    for sid in range(half(spaces, quick)):
        space = random_space(rng, int(rng.integers(2, max_points + 1)))
        for x, y in itertools.combinations(range(len(space)), 2):
            mol = canonicalize(Molecule(((x, 1), (y, -1))), space)
            err = abs(float(free_norm(space, mol)[0]) - float(space.dist[x, y]))
            pairs += 1
            if err > worst:
                worst, wit = err, (sid, x, y)
    rep.add("dirac_isometry", worst <= TOL, bound=TOL, observed=worst, witness=wit)
    rep.add("pairs_tested", pairs > 0, observed=pairs)
    return [rep]


# -- grid retractions -----------------------------------------------------

def run_retractions(seed: int = 42, quick: bool = False, dim: int = 2, radius: int = 2,
                    box: int = 5) -> list[VerificationReport]:
    del seed  # exhaustive, nothing random
    box = half(box, quick)
    enum = build_enumeration(dim, radius)
    n_max = enum.prefix_for(radius)
    axioms = verify_axioms(enum, n_max, box)
    axioms.extras.pop("table", None)

    lip = VerificationReport(f"retractions lipschitz d={dim} n<={n_max} box={box}")
    sup = lipschitz_profile(enum, n_max, box, "sup")
    # phi_1 is constant, so its constant is 0; every later map is exactly 1
    bad = [(n, v) for n, v, _ in sup if v != (0.0 if n == 1 else 1.0)]
    lip.add("sup_exactly_one", not bad, bound=1.0, observed=max(v for _, v, _ in sup),
            witness=bad[0] if bad else None)
    l1 = lipschitz_profile(enum, n_max, box, "l1")
    top = max(l1, key=lambda t: t[1])
    lip.add("l1_at_most_three", top[1] <= 3.0, bound=3.0, observed=top[1], witness=top[2])
    lip.extras["sup"], lip.extras["l1"] = sup, l1
    return [axioms, lip]


# -- basis projections ----------------------------------------------------

def run_basis(seed: int = 42, quick: bool = False, dim: int = 2, radius: int = 2,
              samples: int = 1000, norm: str = "sup") -> list[VerificationReport]:
    enum = build_enumeration(dim, radius)
    n_max = enum.prefix_for(radius)
    space = box_space(radius, dim, norm)
    mols = sample_molecules(dim, radius, half(samples, quick), seed)
    sweep = projection_norm_sweep(enum, space, n_max, mols, bound=1.0 if norm == "sup" else None,
                                  tol=TOL)
    comm = commutation_sweep(enum, n_max, mols)
    conv = VerificationReport(f"basis convergence d={dim} n<={n_max}")
    bad = None
    for mid, mu in enumerate(mols):
        tr = convergence_trace(enum, None, mu, with_norms=False)
        if tr.convergence_index is None or tr.convergence_index != tr.support_position:
            bad = bad or (mid, tr.convergence_index, tr.support_position)
    conv.add("convergence_index", bad is None, observed=len(mols), witness=bad)
    return [sweep, comm, conv]


# -- maps -----------------------------------------------------------------

def run_maps(seed: int = 42, quick: bool = False, planar: int = 100_000,
             vectors: int = 10_000, threshold: float = 1.0) -> list[VerificationReport]:
    out = [verify_quadrant_constants(half(planar, quick), seed)]
    for map_id in ("s", "r", "R"):
        out.append(large_distance_lipschitz(map_id, threshold, half(vectors, quick), seed))
    return out


def run_l1sum(seed: int = 42, quick: bool = False, instances: int = 50) -> list[VerificationReport]:
    rng = np.random.default_rng(seed + 2)
    rep = VerificationReport("l1sum sandwich")
    total = half(instances, quick)
    upper_bad = lower_bad = None
    worst_ratio, stronger = math.inf, True
    for i in range(total):
        K = K_VALUES[i % len(K_VALUES)]
        if K <= 1 and i % 8 < 2:
            inst = three_point_instance(K)
        else:
            inst = cluster_instance(rng, K)
        r = l1_sum_check(*inst, K)
        if not r.checks[0].passed:
            upper_bad = upper_bad or (i, K)
        if not r.checks[1].passed:
            lower_bad = lower_bad or (i, K)
        if r.extras["A"] > 0:
            worst_ratio = min(worst_ratio, r.extras["ratio"])
        stronger &= r.extras["stronger_lower_holds"]
    rep.add("upper_triangle", upper_bad is None, witness=upper_bad)
    rep.add("lower_min_1_K_over_2", lower_bad is None, witness=lower_bad)
    rep.add("instances", True, observed=total)
    rep.add("min_ratio_observed", True, observed=worst_ratio, detail="reported only")
    rep.add("stronger_min_1_K_observed", True, observed=stronger, detail="reported only")
    return [rep]


# -- everything -----------------------------------------------------------

GROUPS = {
    "duality": (run_duality, run_dirac),
    "retractions": (run_retractions,),
    "basis": (run_basis,),
    "maps": (run_maps,),
    "l1sum": (run_l1sum,),
}


@dataclass
class SuiteRun:
    reports: list[VerificationReport]
    seconds: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def run_all(seed: int = 42, quick: bool = False, groups=None) -> SuiteRun:
    reports, seconds = [], {}
    for name in groups or GROUPS:
        for fn in GROUPS[name]:
            t0 = time.perf_counter()
            reports.extend(fn(seed=seed, quick=quick))
            seconds[fn.__name__] = time.perf_counter() - t0
    return SuiteRun(reports, seconds)
