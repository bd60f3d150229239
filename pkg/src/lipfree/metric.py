"""Finite pointed metric spaces, molecules and integer grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .report import VerificationReport

TOL = 1e-9

NORMS = ("sup", "l1", "l2")
_NORM_ALIASES = {"sup": "sup", "max": "sup", "linf": "sup", "c0": "sup",
                 "l1": "l1", "ell1": "l1", "l2": "l2", "ell2": "l2"}


def norm_tag(name: str) -> str:
    try:
        return _NORM_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown norm {name!r}; expected one of {NORMS}") from None


def vector_norm(v: np.ndarray, norm: str, axis: int = -1) -> np.ndarray:
    """Norm of integer or real vectors along ``axis``; integer-valued for sup/l1."""
    norm = norm_tag(norm)
    v = np.asarray(v)
    if norm == "sup":
        return np.abs(v).max(axis=axis) if v.shape[axis] else np.zeros(v.shape[:-1], v.dtype)
    if norm == "l1":
        return np.abs(v).sum(axis=axis)
    return np.sqrt((np.asarray(v, dtype=float) ** 2).sum(axis=axis))


@dataclass(frozen=True, eq=False)
class PointedMetricSpace:
    """A finite point set with a distance matrix and a basepoint index.

    ``coords``/``norm`` are set for integer-grid spaces so that grid
    retractions can act on the geometry. The distance matrix is stored
    read-only; integer dtype marks an exact metric.
    """

    points: tuple
    dist: np.ndarray
    basepoint: int = 0
    coords: np.ndarray | None = None
    norm: str | None = None
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        dist = np.array(self.dist)
        if dist.dtype.kind not in "iuf":
            dist = dist.astype(float)
        n = len(self.points)
        if dist.shape != (n, n):
            raise ValueError(f"distance matrix shape {dist.shape} does not match {n} points")
        if not 0 <= self.basepoint < max(n, 1):
            raise ValueError(f"basepoint index {self.basepoint} out of range")
        dist.setflags(write=False)
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "dist", dist)
        index = {}
        for i, p in enumerate(self.points):
            if p in index:
                raise ValueError(f"duplicate point {p!r}")
            index[p] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_integral(self) -> bool:
        return self.dist.dtype.kind in "iu"

    def index(self, key: Any) -> int:
        """Resolve a point index, label, or coordinate vector to an index."""
        if isinstance(key, (int, np.integer)) and not isinstance(key, bool):
            k = int(key)
            if not 0 <= k < len(self.points):
                raise IndexError(f"point index {k} out of range")
            return k
        if isinstance(key, (list, np.ndarray)):
            key = tuple(int(v) for v in key)
        try:
            return self._index[key]
        except (KeyError, TypeError):
            raise KeyError(f"point {key!r} not in space") from None

    def indices(self, keys: Iterable[Any]) -> list[int]:
        return [self.index(k) for k in keys]

    def subspace(self, idx: Sequence[int]) -> "PointedMetricSpace":
        """Restriction to ``idx``; the basepoint must be kept."""
        idx = list(dict.fromkeys(int(i) for i in idx))
        if self.basepoint not in idx:
            raise ValueError("subspace must contain the basepoint")
        sub = np.ix_(idx, idx)
        return PointedMetricSpace(
            points=tuple(self.points[i] for i in idx),
            dist=self.dist[sub],
            basepoint=idx.index(self.basepoint),
            coords=None if self.coords is None else self.coords[idx],
            norm=self.norm,
        )


def _sort_key(key):
    return (0, key) if isinstance(key, (int, tuple)) else (1, repr(key))


def _is_zero(c) -> bool:
    return c == 0


@dataclass(frozen=True)
class Molecule:
    """A finitely supported signed combination of Dirac masses.

    ``terms`` holds raw ``(point, coef)`` entries; duplicates are allowed
    until :func:`canonicalize` merges them. Points are indices, labels or
    integer coordinate tuples.
    """

    terms: tuple = ()

    @classmethod
    def from_dict(cls, terms: Mapping[Hashable, Any]) -> "Molecule":
        return cls(tuple((_key(k), v) for k, v in terms.items()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Hashable, Any]]) -> "Molecule":
        return cls(tuple((_key(k), v) for k, v in pairs))

    @classmethod
    def dirac(cls, point, coef=1) -> "Molecule":
        return cls(((_key(point), coef),))

    def as_dict(self) -> dict:
        out: dict = {}
        for k, c in self.terms:
            out[k] = out.get(k, 0) + c
        return out

    def merged(self, drop: Hashable | None = None) -> "Molecule":
        """Sum duplicates, drop zero coefficients and the ``drop`` point."""
        merged = {k: c for k, c in self.as_dict().items()
                  if not _is_zero(c) and k != drop}
        return Molecule(tuple(sorted(merged.items(), key=lambda kv: _sort_key(kv[0]))))

    @property
    def support(self) -> list:
        return [k for k, _ in self.terms]

    def __add__(self, other: "Molecule") -> "Molecule":
        return Molecule(self.terms + other.terms)

    def __sub__(self, other: "Molecule") -> "Molecule":
        return self + other.scale(-1)

    def __neg__(self) -> "Molecule":
        return self.scale(-1)

    def scale(self, a) -> "Molecule":
        return Molecule(tuple((k, a * c) for k, c in self.terms))

    def __len__(self) -> int:
        return len(self.terms)


def _key(k):
    if isinstance(k, np.integer):
        return int(k)
    if isinstance(k, (list, np.ndarray)):
        return tuple(int(v) for v in k)
    return k


def canonicalize(molecule: Molecule, space: PointedMetricSpace) -> Molecule:
    """Resolve points to indices, merge duplicates, drop zeros and the basepoint."""
    resolved = Molecule(tuple((space.index(k), c) for k, c in molecule.terms))
    return resolved.merged(drop=space.basepoint)


def is_canonical(molecule: Molecule, space: PointedMetricSpace) -> bool:
    keys = [k for k, _ in molecule.terms]
    return (all(isinstance(k, int) and 0 <= k < len(space) for k in keys)
            and len(set(keys)) == len(keys)
            and space.basepoint not in keys
            and not any(_is_zero(c) for _, c in molecule.terms))


def validate_metric(space: PointedMetricSpace, tol: float = TOL) -> VerificationReport:
    """Check the metric axioms, reporting a witness for each violated axiom."""
    d = np.asarray(space.dist)
    n = len(space.points)
    if d.shape != (n, n):
        raise ValueError(f"distance matrix shape {d.shape} does not match {n} points")
    exact = space.is_integral
    eps = 0 if exact else tol
    lab = space.points
    rep = VerificationReport("validate_metric")

    bad = np.flatnonzero(np.abs(np.diag(d)) > eps)
    rep.add("zero_diagonal", bad.size == 0,
            witness=None if bad.size == 0 else (lab[bad[0]],))

    asym = np.argwhere(np.abs(d - d.T) > eps)
    rep.add("symmetric", asym.size == 0,
            witness=None if asym.size == 0 else (lab[asym[0][0]], lab[asym[0][1]]))

    off = ~np.eye(n, dtype=bool)
    nonpos = np.argwhere(off & (d <= eps))
    rep.add("positive", nonpos.size == 0,
            witness=None if nonpos.size == 0 else (lab[nonpos[0][0]], lab[nonpos[0][1]]))

    worst, witness = 0.0, None
    for k in range(n):
        excess = d - (d[:, k, None] + d[None, k, :])
        i, j = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[i, j] > worst:
            worst, witness = excess[i, j], (lab[i], lab[k], lab[j])
    rep.add("triangle", worst <= eps, bound=eps, observed=float(worst), witness=witness)
    return rep


def grid_space(points: Iterable[Sequence[int]], norm: str = "sup",
               basepoint: Sequence[int] | None = None) -> PointedMetricSpace:
    """Integer grid points metrized by the sup, l1 or l2 norm."""
    norm = norm_tag(norm)
    pts = [tuple(int(v) for v in p) for p in points]
    if not pts:
        raise ValueError("grid space needs at least one point")
    dims = {len(p) for p in pts}
    if len(dims) != 1:
        raise ValueError("grid points must share one dimension")
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate grid points")
    base = tuple(int(v) for v in basepoint) if basepoint is not None else (0,) * len(pts[0])
    if base not in pts:
        raise ValueError(f"basepoint {base} not among the grid points")
    X = np.array(pts, dtype=np.int64)
    diff = X[:, None, :] - X[None, :, :]
    dist = vector_norm(diff, norm)
    return PointedMetricSpace(points=tuple(pts), dist=dist, basepoint=pts.index(base),
                              coords=X, norm=norm)


def cube_points(radius: int, dim: int) -> list[tuple[int, ...]]:
    """All points of [-radius, radius]^dim, origin first, then lexicographic."""
    axes = [np.arange(-radius, radius + 1)] * dim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, dim)
    pts = [tuple(int(v) for v in p) for p in grid]
    origin = (0,) * dim
    pts.remove(origin)
    return [origin] + pts


def box_space(radius: int, dim: int, norm: str = "sup") -> PointedMetricSpace:
    return grid_space(cube_points(radius, dim), norm)


def max_separated_subset(space: PointedMetricSpace, delta: float) -> frozenset[int]:
    """Greedy maximal delta-separated subset, basepoint first, then input order."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    d = space.dist
    eps = 0 if space.is_integral else TOL
    order = [space.basepoint] + [i for i in range(len(space)) if i != space.basepoint]
    chosen: list[int] = []
    for i in order:
        if all(d[i, j] >= delta - eps for j in chosen):
            chosen.append(i)
    return frozenset(chosen)


def is_separated(space: PointedMetricSpace, subset: Iterable[int], delta: float) -> bool:
    idx = sorted(subset)
    eps = 0 if space.is_integral else TOL
    sub = space.dist[np.ix_(idx, idx)]
    off = ~np.eye(len(idx), dtype=bool)
    return bool(np.all(sub[off] >= delta - eps))


def is_maximal_separated(space: PointedMetricSpace, subset: Iterable[int], delta: float) -> bool:
    """Every point outside ``subset`` lies within distance < delta of it."""
    idx = sorted(subset)
    eps = 0 if space.is_integral else TOL
    outside = [i for i in range(len(space)) if i not in set(idx)]
    if not outside:
        return True
    near = space.dist[np.ix_(outside, idx)].min(axis=1)
    return bool(np.all(near < delta + eps))


def metric_from_points(X: np.ndarray, norm: str = "l2") -> np.ndarray:
    X = np.asarray(X)
    return vector_norm(X[:, None, :] - X[None, :, :], norm)


def random_integer_metric(n: int, rng: np.random.Generator, high: int = 10) -> np.ndarray:
    """Shortest-path closure of a random integer-weighted complete graph."""
    w = rng.integers(1, high + 1, size=(n, n))
    w = np.triu(w, 1)
    d = (w + w.T).astype(np.int64)
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def space_from_matrix(dist, labels: Sequence | None = None, basepoint: int = 0) -> PointedMetricSpace:
    dist = np.asarray(dist)
    labels = tuple(range(len(dist))) if labels is None else tuple(labels)
    return PointedMetricSpace(points=labels, dist=dist, basepoint=basepoint)

