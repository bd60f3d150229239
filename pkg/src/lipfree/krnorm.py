"""Free-space (Kantorovich-Rubinstein) norms by min-cost flow.

The norm of a molecule is the cheapest way to move its positive part onto
its negative part, where the slack set (the basepoint, plus ``N`` for
quotient norms) may absorb or emit any amount at cost ``d(x, slack)``.
The solver runs successive shortest paths with node potentials on the
bipartite graph of the support plus a single slack hub, then recovers an
optimal 1-Lipschitz function from the residual graph and extends it to the
whole space with the McShane formula ``f(x) = min_y f(y) + d(x, y)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

import numpy as np

from .metric import TOL, Molecule, PointedMetricSpace, is_canonical
from .report import VerificationReport

DENOM_CAP = 10**6


@dataclass
class FlowCertificate:
    """Optimal transport plan plus the dual Lipschitz function.

    ``plan`` maps ordered index pairs ``(x, y)`` to the amount sent from
    ``x`` to ``y``; ``potentials[i]`` is the value of the optimal
    1-Lipschitz function at point ``i``.
    """

    plan: dict[tuple[int, int], Any]
    potentials: np.ndarray
    value: float
    dual_value: float
    slack: frozenset[int]
    exact: bool = False
    dropped: tuple[int, ...] = ()

    @property
    def gap(self) -> float:
        return abs(self.value - self.dual_value)

    def primal_cost(self, space: PointedMetricSpace) -> float:
        return float(sum(a * space.dist[x, y] for (x, y), a in self.plan.items()))

    def check(self, space: PointedMetricSpace, molecule: Molecule,
              tol: float = TOL) -> VerificationReport:
        """Re-verify every certificate invariant against the space."""
        rep = VerificationReport("certificate")
        coefs = molecule.as_dict()
        n = len(space)
        net = np.zeros(n)
        for (x, y), a in self.plan.items():
            net[x] += float(a)
            net[y] -= float(a)
        want = np.zeros(n)
        for i, c in coefs.items():
            want[i] = float(c)
        free = np.array([i not in self.slack for i in range(n)])
        err = np.abs(net - want)[free]
        rep.add("conservation", err.size == 0 or err.max() <= tol,
                bound=tol, observed=float(err.max()) if err.size else 0.0)
        neg = [a for a in self.plan.values() if a < 0]
        rep.add("plan_nonnegative", not neg)

        f = self.potentials
        excess = np.abs(f[:, None] - f[None, :]) - space.dist
        lip = float(excess.max()) if n else 0.0
        rep.add("potentials_1_lipschitz", lip <= tol, bound=tol, observed=lip)
        on_slack = max((abs(float(f[i])) for i in self.slack), default=0.0)
        rep.add("vanish_on_slack", on_slack <= tol, bound=tol, observed=on_slack)

        primal = self.primal_cost(space)
        dual = float(sum(float(c) * float(f[i]) for i, c in coefs.items()))
        scale = max(1.0, abs(primal))
        rep.add("primal_matches_value", abs(primal - self.value) <= tol * scale,
                bound=tol, observed=abs(primal - self.value))
        rep.add("strong_duality", abs(primal - dual) <= tol * scale,
                bound=tol, observed=abs(primal - dual))
        return rep


def _common_denominator(values: Iterable[Any], cap: int = DENOM_CAP) -> int | None:
    """Smallest L <= cap making every value an integer, else None."""
    L = 1
    for v in values:
        if isinstance(v, (int, np.integer)):
            continue
        if isinstance(v, Fraction):
            q = v
        else:
            fv = float(v)
            if not math.isfinite(fv):
                return None
            q = Fraction(fv).limit_denominator(cap)
            if abs(float(q) - fv) > 1e-12 * max(1.0, abs(fv)):
                return None
        L = L * q.denominator // math.gcd(L, q.denominator)
        if L > cap:
            return None
    return L


def _scaled_int(v, L: int) -> int:
    if isinstance(v, (int, np.integer)):
        return int(v) * L
    if isinstance(v, Fraction):
        q = v * L
    else:
        q = Fraction(float(v)).limit_denominator(DENOM_CAP) * L
    return int(q)


def _dijkstra(rc: np.ndarray, residual: np.ndarray, src: int, big, eps):
    V = len(rc)
    dist = np.full(V, big, dtype=rc.dtype)
    prev = np.full(V, -1, dtype=np.int64)
    done = np.zeros(V, dtype=bool)
    dist[src] = 0
    open_ = residual > eps
    for _ in range(V):
        cand = np.where(done, big, dist)
        u = int(np.argmin(cand))
        if cand[u] >= big:
            break
        done[u] = True
        row = dist[u] + rc[u]
        upd = open_[u] & ~done & (row < dist)
        dist[upd] = row[upd]
        prev[upd] = u
    return dist, prev


def _min_cost_flow(cost: np.ndarray, cap: np.ndarray, src: int, sink: int, demand, eps):
    """Successive shortest paths; ``cost`` is antisymmetric on residual pairs."""
    V = len(cost)
    integral = cost.dtype.kind == "i"
    big = np.iinfo(np.int64).max // 4 if integral else np.inf
    residual = cap.copy()
    pi = np.zeros(V, dtype=cost.dtype)
    sent = 0
    while demand - sent > eps:
        rc = cost + pi[:, None] - pi[None, :]
        if not integral:
            rc = np.maximum(rc, 0.0)
        dist, prev = _dijkstra(rc, residual, src, big, eps)
        if dist[sink] >= big:
            raise RuntimeError("min-cost flow infeasible: sink unreachable")
        reach = dist < big
        pi = pi + np.where(reach, dist, dist[sink])
        path = []
        v = sink
        while v != src:
            u = int(prev[v])
            path.append((u, v))
            v = u
        push = min(min(residual[u, v] for u, v in path), demand - sent)
        for u, v in path:
            residual[u, v] -= push
            residual[v, u] += push
        sent += push
    return cap - residual


def _lipschitz_potentials(D: np.ndarray, flows: np.ndarray, root: int, exact: bool) -> np.ndarray:
    """Shortest-path distances from ``root`` in the residual constraint graph.

    Edge ``u -> v`` with weight ``D[u, v]`` encodes ``f(v) <= f(u) + d``;
    a positive flow ``x -> y`` adds ``f(y) <= f(x) - d(x, y)``. Optimal
    flows leave no negative cycle, so Bellman-Ford converges.
    """
    W = D.copy()
    used = flows > 0
    W[used] = -D[used]
    K = len(W)
    dist = W[root].copy()
    dist[root] = 0
    for _ in range(K + 1):
        new = np.minimum(dist, (dist[:, None] + W).min(axis=0))
        new[root] = 0
        if exact:
            if np.array_equal(new, dist):
                break
        elif np.all(np.abs(new - dist) <= 1e-15 * (1 + np.abs(dist))):
            dist = new
            break
        dist = new
    return dist


def _solve(space: PointedMetricSpace, coefs: Mapping[int, Any], slack: frozenset[int],
           dropped: tuple[int, ...] = ()) -> tuple[float, FlowCertificate]:
    n = len(space)
    D = space.dist
    slack_idx = np.array(sorted(slack), dtype=np.int64)
    if not coefs:
        cert = FlowCertificate({}, np.zeros(n, dtype=D.dtype), 0, 0, slack,
                               space.is_integral, dropped)
        return 0, cert

    support = sorted(coefs)
    L = _common_denominator(coefs.values()) if space.is_integral else None
    exact = L is not None
    if exact:
        a = np.array([_scaled_int(coefs[i], L) for i in support], dtype=np.int64)
        dtype = np.int64
    else:
        a = np.array([float(coefs[i]) for i in support])
        dtype = float

    Dsup = np.asarray(D[np.ix_(support, support)], dtype=dtype)
    to_slack = np.asarray(D[np.ix_(support, slack_idx)], dtype=dtype)
    nearest = slack_idx[np.argmin(to_slack, axis=1)]
    dS = to_slack.min(axis=1)

    k = len(support)
    pos = a > 0
    P = a[pos].sum()
    Q = -a[~pos].sum()
    total = P + Q
    # node layout: 0 source, 1 sink, 2 slack hub, 3.. support points
    S, T, H = 0, 1, 2
    V = k + 3
    cost = np.zeros((V, V), dtype=dtype)
    cap = np.zeros((V, V), dtype=dtype)
    for ii in range(k):
        u = ii + 3
        if pos[ii]:
            cap[S, u] = a[ii]
            cap[u, H] = total
            cost[u, H], cost[H, u] = dS[ii], -dS[ii]
            for jj in np.flatnonzero(~pos):
                v = jj + 3
                cap[u, v] = total
                cost[u, v], cost[v, u] = Dsup[ii, jj], -Dsup[ii, jj]
        else:
            cap[u, T] = -a[ii]
            cap[H, u] = total
            cost[H, u], cost[u, H] = dS[ii], -dS[ii]
    cap[S, H] = Q
    cap[H, T] = P
    eps = 0 if exact else 1e-12 * max(1.0, float(total))
    flow = _min_cost_flow(cost, cap, S, T, total, eps)

    plan: dict[tuple[int, int], Any] = {}

    def put(x, y, amt):
        if exact:
            amt = Fraction(int(amt), L) if L != 1 else int(amt)
        else:
            amt = float(amt)
        plan[(x, y)] = plan.get((x, y), 0) + amt

    flows_local = np.zeros((k + 1, k + 1), dtype=dtype)
    for ii in range(k):
        u = ii + 3
        if pos[ii]:
            for jj in np.flatnonzero(~pos):
                amt = flow[u, jj + 3]
                if amt > eps:
                    put(support[ii], support[jj], amt)
                    flows_local[ii + 1, jj + 1] = amt
            amt = flow[u, H]
            if amt > eps:
                put(support[ii], int(nearest[ii]), amt)
                flows_local[ii + 1, 0] = amt
        else:
            amt = flow[H, u]
            if amt > eps:
                put(int(nearest[ii]), support[ii], amt)
                flows_local[0, ii + 1] = amt

    # local constraint graph: node 0 is the slack hub, node i+1 is support[i]
    Dloc = np.zeros((k + 1, k + 1), dtype=dtype)
    Dloc[1:, 1:] = Dsup
    Dloc[0, 1:] = dS
    Dloc[1:, 0] = dS
    f_loc = _lipschitz_potentials(Dloc, flows_local, 0, exact)

    dom = np.concatenate([np.array(support, dtype=np.int64), slack_idx])
    f_dom = np.concatenate([f_loc[1:], np.zeros(len(slack_idx), dtype=dtype)])
    full = np.asarray(D[:, dom], dtype=dtype)
    f = (full + f_dom[None, :]).min(axis=1)
    f[dom] = f_dom

    if exact:
        primal_int = int(sum(int(flow[u, v]) * int(cost[u, v])
                             for u in range(V) for v in range(V)
                             if flow[u, v] > 0 and cost[u, v] > 0))
        dual_int = int(sum(int(a[ii]) * int(f_loc[ii + 1]) for ii in range(k)))
        value = primal_int if L == 1 else primal_int / L
        dual = dual_int if L == 1 else dual_int / L
    else:
        value = float((flow * np.maximum(cost, 0)).sum())
        dual = float(np.dot(a, f_loc[1:]))
    cert = FlowCertificate(plan, f, value, dual, slack, exact, dropped)
    return value, cert


def _coef_map(molecule: Molecule) -> dict[int, Any]:
    return {k: c for k, c in molecule.terms}


def free_norm(space: PointedMetricSpace, molecule: Molecule) -> tuple[float, FlowCertificate]:
    """Norm of a canonical molecule in the free space over ``space``."""
    if not is_canonical(molecule, space):
        raise ValueError("molecule must be canonicalized against the space "
                         "(integer indices, merged, no basepoint, no zeros)")
    return _solve(space, _coef_map(molecule), frozenset([space.basepoint]))


def quotient_norm(space: PointedMetricSpace, subset: Iterable[int],
                  molecule: Molecule) -> tuple[float, FlowCertificate]:
    """Norm in the quotient by the free space over ``subset``.

    Every point of ``subset`` acts as free slack. Terms sitting on the
    subset vanish in the quotient; they are dropped and reported in
    ``cert.dropped`` with a warning.
    """
    N = frozenset(int(i) for i in subset)
    if space.basepoint not in N:
        raise ValueError("the subset must contain the basepoint")
    if not is_canonical(molecule, space):
        raise ValueError("molecule must be canonicalized against the space")
    coefs = _coef_map(molecule)
    dropped = tuple(sorted(i for i in coefs if i in N))
    if dropped:
        warnings.warn(f"dropping molecule terms on the subset: {dropped}", stacklevel=2)
        coefs = {i: c for i, c in coefs.items() if i not in N}
    return _solve(space, coefs, N, dropped)


def lip_norm(space: PointedMetricSpace, f: Mapping[Any, float] | np.ndarray) -> float:
    """Smallest Lipschitz constant of ``f`` on the space."""
    n = len(space)
    if isinstance(f, Mapping):
        vals = np.zeros(n)
        seen = set()
        for k, v in f.items():
            i = space.index(k)
            vals[i] = float(v)
            seen.add(i)
        missing = set(range(n)) - seen
        if missing:
            raise ValueError(f"f undefined at points {sorted(missing)}")
    else:
        vals = np.asarray(f, dtype=float)
        if vals.shape != (n,):
            raise ValueError("f must give one value per point")
    if abs(vals[space.basepoint]) > TOL:
        raise ValueError("f must vanish at the basepoint")
    if n < 2:
        return 0.0
    num = np.abs(vals[:, None] - vals[None, :])
    iu = np.triu_indices(n, 1)
    return float((num[iu] / space.dist[iu]).max())


# brute-force oracle limits
ORACLE_MAX_SUPPORT = 4
ORACLE_MAX_MASS = 8


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def brute_force_norm(space: PointedMetricSpace, molecule: Molecule,
                     subset: Iterable[int] | None = None):
    """Exact minimum over every integral transport plan.

    Each source splits its mass over sinks and slack points; sinks then
    draw their remaining demand from slack points. Plans routed through
    intermediate points are never cheaper under the triangle inequality,
    so this enumeration reaches the optimum.
    """
    slack = sorted({space.basepoint} | set(subset or ()))
    coefs = {space.index(k): c for k, c in molecule.merged().terms}
    coefs = {i: c for i, c in coefs.items() if i not in slack}
    for c in coefs.values():
        if not isinstance(c, (int, np.integer)) and not float(c).is_integer():
            raise ValueError("brute-force oracle needs integer coefficients")
    coefs = {i: int(c) for i, c in coefs.items()}
    mass = sum(abs(c) for c in coefs.values())
    if len(coefs) > ORACLE_MAX_SUPPORT or mass > ORACLE_MAX_MASS:
        raise ValueError(f"instance exceeds oracle bounds (support <= {ORACLE_MAX_SUPPORT}, "
                         f"mass <= {ORACLE_MAX_MASS})")
    d = space.dist
    sources = [(i, c) for i, c in coefs.items() if c > 0]
    sinks = [(i, -c) for i, c in coefs.items() if c < 0]
    targets = [i for i, _ in sinks] + slack
    best = None

    def fill_sinks(remaining, cost):
        nonlocal best
        total = cost
        for (y, _), need in zip(sinks, remaining):
            cheapest = None
            for split in _compositions(need, len(slack)):
                c = sum(m * d[z, y] for m, z in zip(split, slack))
                cheapest = c if cheapest is None or c < cheapest else cheapest
            total += cheapest
        if best is None or total < best:
            best = total

    def assign(si, remaining, cost):
        if si == len(sources):
            fill_sinks(remaining, cost)
            return
        x, m = sources[si]
        for split in _compositions(m, len(targets)):
            to_sinks = split[:len(sinks)]
            if any(s > r for s, r in zip(to_sinks, remaining)):
                continue
            c = sum(q * d[x, t] for q, t in zip(split, targets))
            assign(si + 1, [r - s for r, s in zip(remaining, to_sinks)], cost + c)

    assign(0, [m for _, m in sinks], 0)
    return best if best is not None else 0
