"""Linear projections induced by the grid retractions, and their checks.

``P_n`` sends a molecule ``sum a_i delta_{x_i}`` on Z^d to
``sum a_i delta_{phi_n(x_i)}``. The sweeps below measure ``|P_n mu| / |mu|``
with the flow solver and test the projection identities exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import GridEnumeration, RetractionCache, retract_index
from .krnorm import free_norm
from .metric import Molecule, PointedMetricSpace, canonicalize, cube_points
from .report import VerificationReport

# basis-constant bound asserted for each grid norm
BASIS_BOUND = {"sup": 1.0, "l1": 3.0}


def _grid_key(k, dim: int) -> tuple[int, ...]:
    key = tuple(int(v) for v in k)
    if len(key) != dim:
        raise ValueError(f"molecule point {key} has dimension {len(key)}, expected {dim}")
    return key


def project(enum: GridEnumeration, n: int, molecule: Molecule,
            cache: RetractionCache | None = None) -> Molecule:
    """``P_n`` applied to a molecule keyed by grid coordinates."""
    origin = (0,) * enum.dim
    out = []
    for k, c in molecule.terms:
        x = _grid_key(k, enum.dim)
        h = cache.index(n, x) if cache is not None else retract_index(enum, n, x)
        out.append((enum.point(h), c))
    return Molecule(tuple(out)).merged(drop=origin)


def grid_norm(space: PointedMetricSpace, molecule: Molecule) -> float:
    return free_norm(space, canonicalize(molecule, space))[0]


def sample_molecules(dim: int, radius: int, count: int, seed: int,
                     max_support: int = 6, coef_range: int = 3) -> list[Molecule]:
    """Seeded molecules with support in ``[-radius, radius]^dim``."""
    rng = np.random.default_rng(seed)
    pts = cube_points(radius, dim)
    out = []
    for _ in range(count):
        size = int(rng.integers(1, max_support + 1))
        idx = rng.choice(len(pts), size=min(size, len(pts)), replace=False)
        coefs = rng.integers(-coef_range, coef_range + 1, size=len(idx))
        out.append(Molecule(tuple((pts[i], int(c)) for i, c in zip(sorted(idx), coefs))))
    return out


class _NormCache:
    def __init__(self, space: PointedMetricSpace):
        self.space = space
        self._memo: dict = {}

    def __call__(self, molecule: Molecule) -> float:
        key = molecule.merged().terms
        if key not in self._memo:
            self._memo[key] = grid_norm(self.space, molecule)
        return self._memo[key]


def projection_norm_sweep(enum: GridEnumeration, space: PointedMetricSpace, n_max: int,
                          molecules: Sequence[Molecule], bound: float | None = None,
                          tol: float = 1e-9) -> VerificationReport:
    """Largest ``|P_n mu| / |mu|`` over samples, for each ``n <= n_max``."""
    if bound is None:
        bound = BASIS_BOUND.get(space.norm, 3.0)
    rep = VerificationReport(f"basis projections d={enum.dim} norm={space.norm} n<={n_max}")
    cache = RetractionCache(enum, n_max, _radius_of(molecules, enum.dim))
    norm = _NormCache(space)
    best = np.zeros(n_max + 1)
    witness = [None] * (n_max + 1)
    skipped = []
    for mid, mu in enumerate(molecules):
        base = norm(mu)
        if base == 0:
            skipped.append(mid)
            continue
        for n in range(1, n_max + 1):
            ratio = float(norm(project(enum, n, mu, cache))) / float(base)
            if witness[n] is None or ratio > best[n]:
                best[n], witness[n] = ratio, mid
    per_n = [(n, float(best[n]), witness[n]) for n in range(1, n_max + 1)]
    for n, ratio, mid in per_n:
        rep.add(f"ratio_n{n:03d}", ratio <= bound + tol, bound=bound, observed=ratio, witness=mid)
    rep.extras["per_n"] = per_n
    rep.extras["skipped"] = skipped
    overall = max(per_n, key=lambda t: t[1]) if per_n else (0, 0.0, None)
    rep.extras["max_ratio"] = overall
    return rep


def commutation_sweep(enum: GridEnumeration, n_max: int,
                      molecules: Sequence[Molecule]) -> VerificationReport:
    """Exact ``P_n P_m = P_m = P_m P_n`` for ``m <= n <= n_max``."""
    rep = VerificationReport(f"basis commutation d={enum.dim} n<={n_max}")
    cache = RetractionCache(enum, n_max, _radius_of(molecules, enum.dim))
    bad = None
    count = 0
    for mid, mu in enumerate(molecules):
        proj = [None] + [project(enum, n, mu, cache) for n in range(1, n_max + 1)]
        for m in range(1, n_max + 1):
            for n in range(m, n_max + 1):
                count += 1
                if (project(enum, n, proj[m], cache) != proj[m]
                        or project(enum, m, proj[n], cache) != proj[m]):
                    bad = bad or (mid, m, n)
    rep.add("commutation", bad is None, observed=count, witness=bad)
    return rep


def _radius_of(molecules: Sequence[Molecule], dim: int) -> int:
    r = 1
    for mu in molecules:
        for k, _ in mu.terms:
            r = max(r, max(abs(int(v)) for v in k) if dim else 0)
    return r


@dataclass
class ProjectionTrace:
    molecule: Molecule
    records: list[tuple[int, Molecule, float, float]] = field(default_factory=list)
    convergence_index: int | None = None
    support_position: int = 1


def convergence_trace(enum: GridEnumeration, space: PointedMetricSpace | None,
                      molecule: Molecule, with_norms: bool = True) -> ProjectionTrace:
    """``(n, P_n mu, |P_n mu|, |P_n mu - mu|)`` for every step of the table.

    The convergence index is the first ``n`` with ``P_n mu = mu``; it is
    compared against the step at which the last support point appears.
    """
    origin = (0,) * enum.dim
    mu = molecule.merged(drop=origin)
    positions = []
    for k, _ in mu.terms:
        pos = enum.position(_grid_key(k, enum.dim))
        if pos is None:
            raise ValueError(f"support point {k} lies outside the enumerated region")
        positions.append(pos)
    trace = ProjectionTrace(mu, support_position=max(positions, default=1))
    norm = _NormCache(space) if with_norms else None
    for n in range(1, len(enum) + 1):
        pn = project(enum, n, mu)
        if with_norms:
            trace.records.append((n, pn, norm(pn), norm(pn - mu)))
        else:
            trace.records.append((n, pn, float("nan"), float("nan")))
        if trace.convergence_index is None and pn == mu:
            trace.convergence_index = n
    return trace
