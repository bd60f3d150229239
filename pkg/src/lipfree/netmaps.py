"""Maps used to compare nets: the angle-doubling quadrant map, the peak
retraction ``s``, the norm retraction ``r``, the product retraction ``R``,
and the l1-sum estimate for well-separated clusters.

Vectors use the sup norm unless stated otherwise.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .krnorm import quotient_norm
from .metric import TOL, Molecule, PointedMetricSpace, canonicalize
from .report import VerificationReport

INT_TOL = 1e-9

# asserted bounds
QUADRANT_FORWARD = 3.0
QUADRANT_INVERSE = 2.0
S_LARGE_SCALE = 6.0
R_LARGE_SCALE = 9.0
R_DISPLACEMENT = 4.0


# -- quadrant map ----------------------------------------------------------

def quadrant_map(z) -> np.ndarray:
    """Same modulus, doubled polar angle; input in the closed first quadrant."""
    z = np.asarray(z, dtype=float)
    x, y = z[..., 0], z[..., 1]
    if np.any((x < 0) | (y < 0)):
        raise ValueError("quadrant_map needs x >= 0 and y >= 0")
    rho = np.hypot(x, y)
    if np.any(rho == 0):
        raise ValueError("quadrant_map is undefined at 0")
    theta = 2 * np.arctan2(y, x)
    return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)


def quadrant_map_inv(w) -> np.ndarray:
    """Inverse of :func:`quadrant_map` on the closed upper half-plane."""
    w = np.asarray(w, dtype=float)
    x, y = w[..., 0], w[..., 1]
    if np.any(y < 0):
        raise ValueError("quadrant_map_inv needs y >= 0")
    rho = np.hypot(x, y)
    if np.any(rho == 0):
        raise ValueError("quadrant_map_inv is undefined at 0")
    theta = np.arctan2(y, x) / 2
    return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)


def _polar_samples(rng, count, max_angle):
    rho = 10 ** rng.uniform(-3, 3, size=count)
    ang = rng.uniform(0, max_angle, size=count)
    return np.stack([rho * np.cos(ang), rho * np.sin(ang)], axis=-1)


def verify_quadrant_constants(samples: int = 100_000, seed: int = 42) -> VerificationReport:
    rng = np.random.default_rng(seed)
    rep = VerificationReport("maps quadrant")

    z0 = _polar_samples(rng, samples, math.pi / 2)
    z1 = _polar_samples(rng, samples, math.pi / 2)
    den = np.linalg.norm(z0 - z1, axis=-1)
    keep = den > 0
    fwd = np.linalg.norm(quadrant_map(z0) - quadrant_map(z1), axis=-1)[keep] / den[keep]
    k = int(np.argmax(fwd))
    rep.add("forward_ratio", fwd[k] <= QUADRANT_FORWARD, bound=QUADRANT_FORWARD,
            observed=float(fwd[k]),
            witness=(tuple(z0[keep][k].round(12)), tuple(z1[keep][k].round(12))))

    w0 = _polar_samples(rng, samples, math.pi)
    w1 = _polar_samples(rng, samples, math.pi)
    den = np.linalg.norm(w0 - w1, axis=-1)
    keep = den > 0
    inv = np.linalg.norm(quadrant_map_inv(w0) - quadrant_map_inv(w1), axis=-1)[keep] / den[keep]
    k = int(np.argmax(inv))
    rep.add("inverse_ratio", inv[k] <= QUADRANT_INVERSE, bound=QUADRANT_INVERSE,
            observed=float(inv[k]),
            witness=(tuple(w0[keep][k].round(12)), tuple(w1[keep][k].round(12))))

    mod = np.abs(np.linalg.norm(quadrant_map(z0), axis=-1) / np.linalg.norm(z0, axis=-1) - 1)
    rep.add("modulus_preserved", mod.max() <= 1e-12, bound=1e-12, observed=float(mod.max()))
    rt = np.linalg.norm(quadrant_map_inv(quadrant_map(z0)) - z0, axis=-1) / np.linalg.norm(z0, axis=-1)
    rep.add("round_trip", rt.max() <= 1e-12, bound=1e-12, observed=float(rt.max()))
    return rep


# -- s, r, R --------------------------------------------------------------

def sup_norm(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.abs(v).max()) if v.size else 0.0


def _snap(t: float) -> float:
    """Round values within tolerance of an integer onto it."""
    k = round(t)
    return float(k) if abs(t - k) <= INT_TOL * max(1.0, abs(t)) else t


def peak_retraction_s(x) -> np.ndarray:
    """``d e_k`` when ``x_k`` is the unique strict, positive maximum, else 0.

    ``d = min_{i != k} floor(x_k - x_i)``, where the minimum also sees the
    implicit zero coordinates of a finitely supported sequence, so
    ``d <= floor(x_k)``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    if x.size == 0:
        return out
    k = int(np.argmax(x))
    others = np.delete(x, k)
    top = max(others.max(), 0.0) if others.size else 0.0
    if x[k] > top:
        out[k] = math.floor(_snap(x[k] - top))
    return out


def _r_grid(x: np.ndarray) -> np.ndarray:
    # nearest integer point in the norm bracket: truncate toward zero,
    # clipped at the integer part of the norm
    k = math.floor(_snap(sup_norm(x)))
    mag = np.minimum(np.floor(np.abs(x) + INT_TOL), k)
    return np.sign(x) * mag


def check_net(net: np.ndarray, separation: float = 1.0) -> None:
    """Raise unless ``net`` is ``separation``-separated in the sup norm."""
    net = np.asarray(net, dtype=float)
    if len(net) < 2:
        return
    d = np.abs(net[:, None, :] - net[None, :, :]).max(axis=-1)
    np.fill_diagonal(d, np.inf)
    if d.min() < separation - TOL:
        i, j = np.unravel_index(np.argmin(d), d.shape)
        raise ValueError(f"net is not {separation}-separated: {net[i]} vs {net[j]}")


def norm_retraction_r(x, net: np.ndarray | None = None) -> np.ndarray:
    """A net point ``p`` with ``[|x|] <= |p| <= |x|`` and ``|p - x| <= 4``.

    ``|p| = |x|`` whenever ``|x|`` is an integer, and net points are fixed.
    With ``net=None`` the net is the integer grid Z^d. For an explicit net
    the closest admissible net point is returned (ties by net order).
    """
    x = np.asarray(x, dtype=float)
    if net is None:
        p = _r_grid(x)
    else:
        net = np.asarray(net, dtype=float)
        if net.ndim != 2 or net.shape[1] != x.size:
            raise ValueError("net must be an array of points of the same dimension as x")
        nx = _snap(sup_norm(x))
        lo, hi = math.floor(nx), nx
        norms = np.abs(net).max(axis=1)
        disp = np.abs(net - x).max(axis=1)
        ok = (norms >= lo - INT_TOL) & (norms <= hi + INT_TOL) & (disp <= R_DISPLACEMENT + INT_TOL)
        if float(nx).is_integer():
            ok &= np.abs(norms - nx) <= INT_TOL
        if not ok.any():
            raise ValueError(f"no net point satisfies the retraction constraints for x={x}")
        cand = np.flatnonzero(ok)
        p = net[cand[np.argmin(disp[cand])]].copy()
    _check_r(x, p)
    return p


def _check_r(x: np.ndarray, p: np.ndarray) -> None:
    nx, npn = _snap(sup_norm(x)), sup_norm(p)
    ok = (math.floor(nx) - INT_TOL <= npn <= nx + INT_TOL
          and sup_norm(p - x) <= R_DISPLACEMENT + INT_TOL
          and (not float(nx).is_integer() or abs(npn - nx) <= INT_TOL))
    if not ok:
        raise ValueError(f"retraction constraints violated at x={x}, r(x)={p}")


def product_retraction_R(y, x, net: np.ndarray | None = None):
    """The three-case retraction of ``Y (+)_inf X`` onto the model set.

    Returns ``(first, second)`` with ``first`` a nonnegative integer
    multiple of a coordinate vector and ``second`` a net point of the same
    norm.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    sy = peak_retraction_s(y)
    ns, nx = sup_norm(sy), sup_norm(x)
    if nx > ns > 0:
        return sy, norm_retraction_r((ns / nx) * x, net)
    if ns >= nx > 0:
        rx = norm_retraction_r(x, net)
        return (sup_norm(rx) / ns) * sy, rx
    return np.zeros_like(y), np.zeros_like(x)


def in_model_set(first, second, net: np.ndarray | None = None) -> bool:
    """Membership in ``{k e_n (+) x : x in net, |x| = k}``."""
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    nz = np.flatnonzero(first)
    if len(nz) > 1:
        return False
    k = float(first[nz[0]]) if len(nz) else 0.0
    if k < 0 or abs(k - round(k)) > INT_TOL:
        return False
    if net is None:
        on_net = np.all(np.abs(second - np.round(second)) <= INT_TOL)
    else:
        on_net = bool(np.any(np.abs(np.asarray(net) - second).max(axis=1) <= INT_TOL))
    return bool(on_net) and abs(sup_norm(second) - k) <= INT_TOL


def _pair_samples(rng, count, threshold, max_dim=6, scale=50.0):
    for _ in range(count):
        dim = int(rng.integers(1, max_dim + 1))
        x = rng.uniform(-scale, scale, size=dim)
        if rng.random() < 0.5:
            x = np.round(x)
        direction = rng.uniform(-1, 1, size=dim)
        direction /= np.abs(direction).max()
        length = threshold * 10 ** rng.uniform(0, 2)
        yield x, x + length * direction


def large_distance_lipschitz(map_id: str, threshold: float = 1.0, samples: int = 10_000,
                             seed: int = 42) -> VerificationReport:
    """Displacement ratios of ``s``, ``r`` or ``R`` at distances >= threshold."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    rng = np.random.default_rng(seed)
    rep = VerificationReport(f"maps {map_id}")
    if map_id == "s":
        worst, wit = 0.0, None
        for x, y in _pair_samples(rng, samples, threshold):
            dist = sup_norm(x - y)
            ratio = sup_norm(peak_retraction_s(x) - peak_retraction_s(y)) / dist
            if ratio > worst:
                worst, wit = ratio, (tuple(x.round(9)), tuple(y.round(9)))
            out = peak_retraction_s(x)
            if np.count_nonzero(out) > 1 or out.min() < 0 or not np.all(out == np.floor(out)):
                rep.add("s_output_shape", False, witness=tuple(x))
        rep.add("s_ratio", worst <= S_LARGE_SCALE, bound=S_LARGE_SCALE, observed=worst, witness=wit)
    elif map_id == "r":
        worst, wit = 0.0, None
        disp = 0.0
        bracket_bad = None
        for x, y in _pair_samples(rng, samples, threshold):
            try:
                rx, ry = norm_retraction_r(x), norm_retraction_r(y)
            except ValueError:
                bracket_bad = bracket_bad or (tuple(x.round(9)), tuple(y.round(9)))
                continue
            disp = max(disp, sup_norm(rx - x), sup_norm(ry - y))
            ratio = sup_norm(rx - ry) / sup_norm(x - y)
            if ratio > worst:
                worst, wit = ratio, (tuple(x.round(9)), tuple(y.round(9)))
        rep.add("r_ratio", worst <= R_LARGE_SCALE, bound=R_LARGE_SCALE, observed=worst, witness=wit)
        rep.add("r_displacement", disp <= R_DISPLACEMENT, bound=R_DISPLACEMENT, observed=disp)
        rep.add("r_norm_bracket", bracket_bad is None, witness=bracket_bad,
                detail="checked on every call")
    elif map_id == "R":
        _check_product(rep, rng, threshold, samples)
    else:
        raise ValueError(f"unknown map {map_id!r}; expected s, r or R")
    return rep


def product_case(y, x) -> int:
    """1 or 2 for the first two cases of ``R``, 0 otherwise."""
    ns, nx = sup_norm(peak_retraction_s(y)), sup_norm(x)
    if nx > ns > 0:
        return 1
    if ns >= nx > 0:
        return 2
    return 0


def _product_point(rng, D, case):
    ydim = int(rng.integers(1, 5))
    xdim = int(rng.integers(1, 5))
    big = 20 * D * 10 ** rng.uniform(0, 1.5)
    y = rng.uniform(-D, D, size=ydim)
    k = int(rng.integers(ydim))
    y[k] = big + rng.uniform(0, 3 * D) + max(y.max(), 0.0)
    ns = sup_norm(peak_retraction_s(y))
    x = rng.uniform(-1, 1, size=xdim)
    x /= np.abs(x).max()
    if case == 1:
        x *= ns + rng.uniform(0.5, 3 * ns)
    else:
        x *= rng.uniform(20 * D, ns)
    return y, x


def _check_product(rep: VerificationReport, rng, D: float, samples: int) -> None:
    bounds = {1: max(9 * D, 8 + 15 * D), 2: 63 * D}
    region = {1: lambda y, x: sup_norm(x) > sup_norm(peak_retraction_s(y)) >= 20 * D,
              2: lambda y, x: sup_norm(peak_retraction_s(y)) >= sup_norm(x) >= 20 * D}
    worst_global, global_wit = 0.0, None
    membership_bad = None
    for case in (1, 2):
        worst, wit, tested = 0.0, None, 0
        for _ in range(samples // 2):
            y, x = _product_point(rng, D, case)
            y1 = y + rng.uniform(-D, D, size=y.size)
            x1 = x + rng.uniform(-D, D, size=x.size)
            if not (region[case](y, x) and region[case](y1, x1)):
                continue
            tested += 1
            a, b = product_retraction_R(y, x), product_retraction_R(y1, x1)
            for p in (a, b):
                if membership_bad is None and not in_model_set(*p):
                    membership_bad = (tuple(y.round(6)), tuple(x.round(6)))
            disp = max(sup_norm(a[0] - b[0]), sup_norm(a[1] - b[1]))
            if disp / D > worst:
                worst, wit = disp / D, (tuple(y.round(6)), tuple(x.round(6)))
            dist = max(sup_norm(y - y1), sup_norm(x - x1))
            if dist >= 1 and disp / dist > worst_global:
                worst_global, global_wit = disp / dist, wit
        rep.add(f"R_case{case}_displacement", worst * D <= bounds[case] + TOL,
                bound=bounds[case] / D, observed=worst, witness=wit,
                detail=f"{tested} pairs within distance D={D:g}")
    rep.add("R_in_model_set", membership_bad is None, witness=membership_bad)
    for _ in range(samples // 2):
        y, x = _product_point(rng, D, int(rng.integers(1, 3)))
        step = 10 ** rng.uniform(0, 2)
        y1 = y + step * rng.uniform(-1, 1, size=y.size)
        x1 = x + step * rng.uniform(-1, 1, size=x.size)
        dist = max(sup_norm(y - y1), sup_norm(x - x1))
        if dist < 1:
            continue
        a, b = product_retraction_R(y, x), product_retraction_R(y1, x1)
        disp = max(sup_norm(a[0] - b[0]), sup_norm(a[1] - b[1]))
        if disp / dist > worst_global:
            worst_global, global_wit = disp / dist, (tuple(y.round(6)), tuple(x.round(6)))
    rep.add("R_global_ratio_observed", True, observed=worst_global, witness=global_wit,
            detail="reported only")


# -- l1 sums --------------------------------------------------------------

def separation_hypothesis(space: PointedMetricSpace, subset: Iterable[int],
                          clusters: Sequence[Iterable[int]], K: float):
    """First ``(x, other, d_other, d_N)`` breaking ``d(x, other clusters) >= K d(x, N)``."""
    N = sorted(set(subset))
    clusters = [sorted(set(c)) for c in clusters]
    D = space.dist
    for a, cl in enumerate(clusters):
        others = [i for b, c in enumerate(clusters) if b != a for i in c]
        if not others:
            continue
        for x in cl:
            d_other = float(D[x, others].min())
            d_N = float(D[x, N].min())
            if d_other < K * d_N - TOL:
                return (x, others[int(np.argmin(D[x, others]))], d_other, d_N)
    return None


def l1_sum_check(space: PointedMetricSpace, subset: Iterable[int],
                 clusters: Sequence[Iterable[int]], molecules: Sequence[Molecule],
                 K: float, tol: float = TOL) -> VerificationReport:
    """Compare the quotient norm of a sum of cluster molecules with the sum of norms."""
    N = sorted({space.index(i) for i in subset})
    if space.basepoint not in N:
        raise ValueError("the subset must contain the basepoint")
    clusters = [sorted({space.index(i) for i in c}) for c in clusters]
    if len(clusters) != len(molecules):
        raise ValueError("need exactly one molecule per cluster")
    flat = [i for c in clusters for i in c]
    if len(set(flat)) != len(flat):
        raise ValueError("clusters overlap")
    if set(flat) & set(N):
        raise ValueError("clusters must be disjoint from the subset")
    bad = separation_hypothesis(space, N, clusters, K)
    if bad is not None:
        raise ValueError(f"separation hypothesis fails at point {bad[0]}: "
                         f"d(x, other clusters)={bad[2]:g} < K d(x, N)={K * bad[3]:g}")

    def local(idx, mu):
        pos = {g: i for i, g in enumerate(idx)}
        sub = space.subspace(idx)
        mol = Molecule(tuple((pos[i], c) for i, c in mu.terms)).merged(drop=sub.basepoint)
        return float(quotient_norm(sub, [pos[i] for i in N], mol)[0])

    total = Molecule()
    A = 0.0
    for cl, mu in zip(clusters, molecules):
        mu = canonicalize(mu, space)
        if any(i not in cl for i, _ in mu.terms):
            raise ValueError("each molecule must be supported in its own cluster")
        A += local(N + cl, mu)
        total = total + mu
    B = local(N + flat, total)

    lower = min(1.0, K / 2)
    rep = VerificationReport("l1sum")
    rep.add("upper", B <= A + tol, bound=A, observed=B)
    rep.add("lower", B >= lower * A - tol, bound=lower * A, observed=B)
    rep.extras.update(A=A, B=B, ratio=(B / A if A else 1.0),
                      stronger_lower_holds=B >= min(1.0, K) * A - tol)
    return rep


def cluster_instance(rng: np.random.Generator, K: float, n_clusters: int | None = None):
    """A Euclidean configuration meeting the separation hypothesis for ``K``.

    Anchors (the subset, containing the origin) sit on a spread-out grid;
    each cluster hugs its own anchor, so ``d(x, N)`` is small while other
    clusters are at least ``K`` times farther away. Cluster points lean
    toward neighbouring clusters to make cross-cluster transport compete.
    """
    from .metric import metric_from_points, space_from_matrix

    n_clusters = n_clusters or int(rng.integers(2, 5))
    rho = 1.0
    while True:
        spacing = (K + 2) * rho * rng.uniform(1.0, 1.1)
        anchors = [np.zeros(2)]
        while len(anchors) < n_clusters + int(rng.integers(0, 2)):
            cand = rng.integers(-2, 3, size=2) * spacing
            if all(np.linalg.norm(cand - a) >= spacing - 1e-12 for a in anchors):
                anchors.append(cand.astype(float))
        pts = list(anchors)
        clusters, molecules = [], []
        order = rng.permutation(len(anchors))[:n_clusters]
        for a in order:
            cl, coefs = [], []
            for _ in range(int(rng.integers(1, 4))):
                target = anchors[order[rng.integers(n_clusters)]]
                lean = target - anchors[a]
                if rng.random() < 0.9 and np.linalg.norm(lean) > 0:
                    u = lean / np.linalg.norm(lean)
                else:
                    ang = rng.uniform(0, 2 * math.pi)
                    u = np.array([math.cos(ang), math.sin(ang)])
                cl.append(len(pts))
                pts.append(anchors[a] + rho * rng.uniform(0.6, 1.0) * u)
                coefs.append(int(rng.integers(-3, 4)) or 1)
            clusters.append(cl)
            molecules.append(Molecule(tuple(zip(cl, coefs))))
        X = np.array(pts)
        if len({tuple(p) for p in X.round(12)}) < len(X):
            continue
        space = space_from_matrix(metric_from_points(X))
        N = list(range(len(anchors)))
        if separation_hypothesis(space, N, clusters, K) is None:
            return space, N, clusters, molecules


def three_point_instance(K: float, sign: int = -1):
    """``N = {0}``, clusters ``{a}``, ``{b}`` with ``d(a,0) = d(b,0) = 1``, ``d(a,b) = 2K``.

    A metric only for ``K <= 1``; with opposite signs the sandwich is tight
    at ``B = 2K``.
    """
    from .metric import space_from_matrix

    if not 0 < K <= 1:
        raise ValueError("three-point instance needs 0 < K <= 1")
    D = np.array([[0, 1, 1], [1, 0, 2 * K], [1, 2 * K, 0]], dtype=float)
    space = space_from_matrix(D, labels=("0", "a", "b"))
    return space, [0], [[1], [2]], [Molecule.dirac(1), Molecule.dirac(2, sign)]
