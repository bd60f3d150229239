"""Carving-table enumeration of Z^d and the retractions it induces.

Points ``mu_1 = 0, mu_2, mu_3, ...`` are added so that the prefixes fill
the cubes ``C_1^1, C_1^2, C_2^2, C_2^3, ...`` (radius, dimension) until the
requested dimension is reached, after which only the radius grows. Step
``n`` carves its cell out of the current cell of an earlier point (its
parent) with a half-space ``x_j >= t`` or ``x_j <= -t``. The retraction
``phi_n`` sends ``x`` to the point whose cell contains it after ``n``
steps, which is found by replaying the table.

Step numbers and coordinate numbers are 1-based throughout, matching the
CSV output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .metric import cube_points, vector_norm
from .report import VerificationReport

STEP_CAP = 10**6


@dataclass(frozen=True)
class CarvingStep:
    index: int
    point: tuple[int, ...]
    parent: int | None = None
    pred_coord: int | None = None
    pred_threshold: int | None = None
    pred_sign: str | None = None  # ">=" or "<="

    def holds(self, x: Sequence[int]) -> bool:
        if self.pred_coord is None:
            return True
        v = x[self.pred_coord - 1]
        if self.pred_sign == ">=":
            return v >= self.pred_threshold
        return v <= self.pred_threshold


@dataclass(frozen=True, eq=False)
class GridEnumeration:
    """An immutable carving table with cube-completion markers.

    ``markers`` holds ``(radius, dim, n)``: the first ``n`` points are
    exactly the cube ``[-radius, radius]^dim`` (padded with zeros).
    """

    dim: int
    steps: tuple[CarvingStep, ...]
    markers: tuple[tuple[int, int, int], ...]
    _arrays: dict = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.steps)
        pts = np.zeros((n + 1, self.dim), dtype=np.int64)
        parent = np.zeros(n + 1, dtype=np.int64)
        coord = np.zeros(n + 1, dtype=np.int64)
        thr = np.zeros(n + 1, dtype=np.int64)
        ge = np.zeros(n + 1, dtype=bool)
        for s in self.steps:
            pts[s.index] = s.point
            if s.parent is not None:
                parent[s.index] = s.parent
                coord[s.index] = s.pred_coord - 1
                thr[s.index] = s.pred_threshold
                ge[s.index] = s.pred_sign == ">="
        for a in (pts, parent, coord, thr, ge):
            a.setflags(write=False)
        arrays = dict(points=pts, parent=parent, coord=coord, thr=thr, ge=ge,
                      index={s.point: s.index for s in self.steps})
        object.__setattr__(self, "_arrays", arrays)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def points(self) -> np.ndarray:
        """Row ``k`` is ``mu_k``; row 0 is unused padding."""
        return self._arrays["points"]

    def point(self, n: int) -> tuple[int, ...]:
        return self.steps[n - 1].point

    def position(self, x: Sequence[int]) -> int | None:
        """Step number at which ``x`` is enumerated, or None."""
        return self._arrays["index"].get(tuple(int(v) for v in x))

    def prefix_for(self, radius: int) -> int:
        """Length of the shortest prefix covering ``C_radius^dim``."""
        for r, q, n in self.markers:
            if q == self.dim and r >= radius:
                return n
        raise ValueError(f"enumeration does not reach radius {radius}")


def _order_key(p: tuple[int, ...]):
    # x precedes y when at the first differing coordinate x is larger
    return tuple(-v for v in p)


def _cube(r: int, q: int, d: int) -> list[tuple[int, ...]]:
    pts = cube_points(r, q)
    return [p + (0,) * (d - q) for p in pts]


def build_enumeration(d: int, r_max: int, cap: int = STEP_CAP) -> GridEnumeration:
    """Carving table covering ``[-r_max, r_max]^d``.

    Dimension and radius alternate (``C_r^r -> C_r^{r+1} -> C_{r+1}^{r+1}``)
    while the dimension is below ``d``; afterwards only the radius grows.
    """
    if d < 1 or r_max < 1:
        raise ValueError("need d >= 1 and r_max >= 1")
    final_r = max(r_max, d - 1, 1)
    if (2 * final_r + 1) ** d > cap:
        raise ValueError(f"enumeration of size {(2 * final_r + 1) ** d} exceeds cap {cap}")

    e = lambda j: tuple(1 if i == j - 1 else 0 for i in range(d))  # noqa: E731
    add = lambda p, v, c=1: tuple(a + c * b for a, b in zip(p, v))  # noqa: E731

    steps: list[CarvingStep] = []
    where: dict[tuple[int, ...], int] = {}

    def push(point, parent=None, coord=None, thr=None, sign=None):
        n = len(steps) + 1
        steps.append(CarvingStep(n, point, parent, coord, thr, sign))
        where[point] = n

    origin = (0,) * d
    push(origin)
    push(e(1), 1, 1, 1, ">=")
    push(add(origin, e(1), -1), 1, 1, -1, "<=")
    r, q = 1, 1
    markers = [(1, 1, 3)]

    while not (q == d and r >= r_max):
        if q < d and q == r:
            # extend C_r^q to C_r^{q+1} along coordinate q+1
            w = sorted(_cube(r, q, d), key=_order_key)
            new = q + 1
            for j in range(1, r + 1):
                for p in w:
                    push(add(p, e(new), j), where[add(p, e(new), j - 1)], new, j, ">=")
            for j in range(1, r + 1):
                for p in w:
                    push(add(p, e(new), -j), where[add(p, e(new), -(j - 1))], new, -j, "<=")
            q = new
        else:
            # extend C_r^q to C_{r+1}^q, one face pair A_{j,+1}, A_{j,-1} at a time
            for j in range(1, q + 1):
                face = []
                for p in _cube(r + 1, q, d):
                    if p[j - 1] != r + 1:
                        continue
                    if all(abs(p[i]) <= r for i in range(j, q)):
                        face.append(p)
                face.sort(key=_order_key)
                for p in face:
                    push(p, where[add(p, e(j), -1)], j, r + 1, ">=")
                for p in face:
                    m = tuple(-v if i == j - 1 else v for i, v in enumerate(p))
                    push(m, where[add(m, e(j), 1)], j, -(r + 1), "<=")
            r += 1
        markers.append((r, q, len(steps)))
    return GridEnumeration(d, tuple(steps), tuple(markers))


def _check_n(enum: GridEnumeration, n: int) -> None:
    if not 1 <= n <= len(enum):
        raise IndexError(f"step {n} outside 1..{len(enum)}")


def retract_index(enum: GridEnumeration, n: int, x: Sequence[int]) -> int:
    """Step number ``h`` with ``phi_n(x) = mu_h``, by replaying the table."""
    _check_n(enum, n)
    if len(x) != enum.dim:
        raise ValueError(f"point has dimension {len(x)}, expected {enum.dim}")
    h = 1
    for step in enum.steps[1:n]:
        if step.parent == h and step.holds(x):
            h = step.index
    return h


def retract(enum: GridEnumeration, n: int, x: Sequence[int]) -> tuple[int, ...]:
    return enum.point(retract_index(enum, n, x))


def retraction_table(enum: GridEnumeration, n_max: int, X: np.ndarray) -> np.ndarray:
    """``T[n, i]`` = step number of ``phi_n(X[i])`` for ``n = 1..n_max``.

    Row 0 is unused so rows are indexed by step number.
    """
    _check_n(enum, n_max)
    X = np.asarray(X, dtype=np.int64).reshape(-1, enum.dim)
    a = enum._arrays
    T = np.zeros((n_max + 1, len(X)), dtype=np.int64)
    h = np.ones(len(X), dtype=np.int64)
    T[1] = h
    for k in range(2, n_max + 1):
        v = X[:, a["coord"][k]]
        pred = v >= a["thr"][k] if a["ge"][k] else v <= a["thr"][k]
        h = np.where((h == a["parent"][k]) & pred, k, h)
        T[k] = h
    return T


class RetractionCache:
    """Memoized images of a fixed point box, with replay for other points."""

    def __init__(self, enum: GridEnumeration, n_max: int | None = None, box_radius: int = 0):
        self.enum = enum
        self.n_max = len(enum) if n_max is None else n_max
        pts = cube_points(box_radius, enum.dim) if box_radius > 0 else [(0,) * enum.dim]
        self._col = {p: i for i, p in enumerate(pts)}
        self._table = retraction_table(enum, self.n_max, np.array(pts))

    def index(self, n: int, x: tuple[int, ...]) -> int:
        col = self._col.get(x)
        if col is not None and n <= self.n_max:
            return int(self._table[n, col])
        return retract_index(self.enum, n, x)

    def __call__(self, n: int, x: tuple[int, ...]) -> tuple[int, ...]:
        return self.enum.point(self.index(n, x))


def verify_axioms(enum: GridEnumeration, n_max: int | None = None,
                  box_radius: int = 5) -> VerificationReport:
    """Exhaustive check of the retraction conditions on a finite box.

    Covers the image condition, finite-scale coverage, commutation
    ``phi_m phi_n = phi_n phi_m = phi_n`` for ``n <= m``, and the nesting
    of cells ``F_n(mu_n)``. The Lipschitz condition is handled by
    :func:`lipschitz_bound`.
    """
    n_max = len(enum) if n_max is None else n_max
    _check_n(enum, n_max)
    rep = VerificationReport(f"retractions d={enum.dim} n<={n_max} box={box_radius}")
    mu = enum.points
    a = enum._arrays

    pts = set(s.point for s in enum.steps)
    rep.add("points_distinct", len(pts) == len(enum.steps))

    bad_marker = None
    for r, q, n in enum.markers:
        prefix = {s.point for s in enum.steps[:n]}
        if prefix != set(_cube(r, q, enum.dim)):
            bad_marker = (r, q, n)
            break
    rep.add("cube_markers", bad_marker is None, witness=bad_marker)

    # structural tree condition: each step carves its own cell out of its
    # parent's current cell with a half-space containing mu_k
    struct_bad = None
    T_mu = retraction_table(enum, n_max, mu[1:n_max + 1])  # T_mu[m, k-1] = phi_m(mu_k)
    for s in enum.steps[1:n_max]:
        k = s.index
        par = enum.point(s.parent)
        diff = [i for i in range(enum.dim) if par[i] != s.point[i]]
        ok = (s.parent < k and s.holds(s.point) and diff == [s.pred_coord - 1]
              and T_mu[k - 1, k - 1] == s.parent)
        if not ok:
            struct_bad = k
            break
    rep.add("carving_structure", struct_bad is None, witness=struct_bad)

    box = np.array(cube_points(box_radius, enum.dim))
    H = retraction_table(enum, n_max, box)
    in_box = {tuple(p): i for i, p in enumerate(box.tolist())}

    # (i) image of phi_n is M_n, phi_n fixes M_n
    img_bad = None
    for n in range(1, n_max + 1):
        image = set(np.unique(H[n]).tolist())
        if not image <= set(range(1, n + 1)):
            img_bad = (n, "outside M_n")
            break
        inside = {k for k in range(1, n + 1) if enum.point(k) in in_box}
        if not inside <= image:
            img_bad = (n, "missing", min(inside - image))
            break
        fixed = T_mu[n, :n]
        if not np.array_equal(fixed, np.arange(1, n + 1)):
            img_bad = (n, "not a retraction")
            break
    rep.add("image_is_prefix", img_bad is None, witness=img_bad)

    # (ii) at finite scale: the enumeration out to the box radius exhausts the box
    cover = build_enumeration(enum.dim, max(box_radius, 1))
    covered = {s.point for s in cover.steps}
    missing = [tuple(p) for p in box.tolist() if tuple(p) not in covered]
    rep.add("coverage", not missing, witness=missing[0] if missing else None)
    same_prefix = all(cover.steps[i].point == enum.steps[i].point
                      for i in range(min(len(cover), len(enum))))
    rep.add("coverage_extends_schedule", same_prefix)

    # (iv) commutation, with phi applied to enumerated points via T_mu
    comm_bad = None
    for n in range(1, n_max + 1):
        Hn = H[n]
        for m in range(n, n_max + 1):
            Hm = H[m]
            left = T_mu[m, Hn - 1]    # phi_m(phi_n(x))
            right = T_mu[n, Hm - 1]   # phi_n(phi_m(x))
            bad = np.flatnonzero((left != Hn) | (right != Hn))
            if bad.size:
                comm_bad = (n, m, tuple(box[bad[0]].tolist()))
                break
        if comm_bad:
            break
    rep.add("commutation", comm_bad is None, witness=comm_bad)

    # nesting of cells F_n(mu_n) restricted to the box
    B = np.stack([H[n] == n for n in range(1, n_max + 1)]).astype(np.int64)
    inter = B @ B.T
    size = B.sum(axis=1)
    nest_bad = None
    for n in range(n_max):
        for m in range(n):
            if inter[n, m] not in (0, size[n]):
                nest_bad = (n + 1, m + 1)
                break
        if nest_bad:
            break
    rep.add("nesting", nest_bad is None, witness=nest_bad)
    rep.extras["table"] = H
    return rep


def lipschitz_bound(enum: GridEnumeration, n: int, box_radius: int,
                    norm: str = "sup", table: np.ndarray | None = None):
    """Exact Lipschitz constant of ``phi_n`` on the box, with an attaining pair."""
    _check_n(enum, n)
    box = np.array(cube_points(box_radius, enum.dim), dtype=np.int64)
    if table is None:
        table = retraction_table(enum, n, box)
    Y = enum.points[table[n]]
    iu = np.triu_indices(len(box), 1)
    den = vector_norm(box[iu[0]] - box[iu[1]], norm)
    num = vector_norm(Y[iu[0]] - Y[iu[1]], norm)
    ratio = num / den
    k = int(np.argmax(ratio))
    pair = (tuple(box[iu[0][k]].tolist()), tuple(box[iu[1][k]].tolist()))
    return float(ratio[k]), pair


def lipschitz_profile(enum: GridEnumeration, n_max: int, box_radius: int,
                      norm: str = "sup") -> list[tuple[int, float, tuple]]:
    box = np.array(cube_points(box_radius, enum.dim), dtype=np.int64)
    table = retraction_table(enum, n_max, box)
    return [(n, *lipschitz_bound(enum, n, box_radius, norm, table))
            for n in range(1, n_max + 1)]
