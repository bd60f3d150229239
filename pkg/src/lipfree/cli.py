"""Command line entry point: ``lipfree <command> ...``.

Exit status is 0 when every asserted check passes, 1 when a check fails
and 2 on bad input. ``LIPFREE_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import suite
from .basis import BASIS_BOUND, project, projection_norm_sweep, sample_molecules
from .grid import build_enumeration, lipschitz_profile, retract, verify_axioms
from .io import (InputError, certificate_to_json, load_clusters, load_molecule, load_space,
                 load_subset, write_json)
from .krnorm import brute_force_norm, free_norm, quotient_norm
from .metric import Molecule, box_space, canonicalize, norm_tag, random_integer_metric, \
    space_from_matrix
from .netmaps import l1_sum_check, large_distance_lipschitz, verify_quadrant_constants
from .report import VerificationReport, fmt, reports_to_csv

DEFAULT_SEED = 42
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _seed(args) -> int:
    env = os.environ.get("LIPFREE_SEED")
    if env is None:
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise InputError(f"LIPFREE_SEED must be an integer, got {env!r}") from None


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([[fmt(v) for v in row] for row in rows])
    return buf.getvalue()


def _point(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise InputError(f"point must be comma-separated integers, got {text!r}") from None


def _human(args):
    # keep stdout clean when the CSV itself goes there
    return sys.stderr if getattr(args, "csv", None) == "-" else sys.stdout


def _echo(args, **extra) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.update(extra)
    print("# config " + " ".join(f"{k}={v}" for k, v in sorted(cfg.items())), file=_human(args))


def _finish(reports: list[VerificationReport], args) -> int:
    out = _human(args)
    for rep in sorted(reports, key=lambda r: r.name):
        print(rep.summary(), file=out)
    ok = all(r.passed for r in reports)
    if getattr(args, "csv", None):
        _emit(reports_to_csv(reports), args.csv)
    print(f"verdict: {'PASS' if ok else 'FAIL'}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


# -- commands -------------------------------------------------------------

def cmd_norm(args) -> int:
    space = load_space(args.space)
    mol = canonicalize(load_molecule(args.molecule, space), space)
    if args.subset:
        N = load_subset(args.subset, space)
        if space.basepoint not in N:
            N = sorted(set(N) | {space.basepoint})
        value, cert = quotient_norm(space, N, mol)
    else:
        value, cert = free_norm(space, mol)
    print(fmt(float(value)))
    if args.cert:
        write_json(certificate_to_json(cert, space), args.cert)
    rep = cert.check(space, mol, args.tol)
    if not rep.passed:
        print(rep.summary(), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_enumerate(args) -> int:
    enum = build_enumeration(args.dim, args.radius)
    n = enum.prefix_for(args.radius)
    header = ["n"] + [f"x{i + 1}" for i in range(args.dim)] + \
        ["parent", "pred_coord", "pred_threshold", "pred_sign"]
    rows = [[s.index, *s.point, s.parent, s.pred_coord, s.pred_threshold, s.pred_sign]
            for s in enum.steps[:n]]
    _emit(_csv(rows, header), args.emit)
    return EXIT_OK


def _enum_for(dim: int, n: int, points) -> "object":
    radius = max([1] + [max(abs(v) for v in p) for p in points])
    enum = build_enumeration(dim, radius)
    while len(enum) < n:
        radius += 1
        enum = build_enumeration(dim, radius)
    return enum


def cmd_retract(args) -> int:
    x = _point(args.point)
    if args.dim is not None and len(x) != args.dim:
        raise InputError(f"point has {len(x)} coordinates, expected {args.dim}")
    enum = _enum_for(len(x), args.n, [x])
    print(",".join(str(v) for v in retract(enum, args.n, x)))
    return EXIT_OK


def cmd_project(args) -> int:
    mol = load_molecule(args.molecule)
    keys = [k for k, _ in mol.terms]
    if not keys or not all(isinstance(k, tuple) for k in keys):
        raise InputError("project needs a molecule on integer grid points")
    dim = len(keys[0])
    if any(len(k) != dim for k in keys):
        raise InputError("molecule points have mixed dimensions")
    enum = _enum_for(dim, args.n, keys)
    out = project(enum, args.n, mol)
    print(json.dumps({"terms": [{"point": list(k), "coef": c if isinstance(c, int) else float(c)}
                                for k, c in out.terms]}, sort_keys=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    rng = np.random.default_rng(_seed(args))
    rows = []
    for size in (3, 4, 5, 6):
        t_flow = t_brute = 0.0
        for _ in range(args.repeats):
            space = space_from_matrix(random_integer_metric(size, rng, high=9))
            others = [i for i in range(size) if i != space.basepoint][:4]
            coefs = [int(c) or 1 for c in rng.integers(-2, 3, size=len(others))]
            mol = Molecule(tuple(zip(others, coefs)))
            t0 = time.perf_counter()
            a = free_norm(space, mol)[0]
            t1 = time.perf_counter()
            b = brute_force_norm(space, mol)
            t2 = time.perf_counter()
            if a != b:
                print(f"mismatch: flow={a} brute={b}", file=sys.stderr)
                return EXIT_FAIL
            t_flow, t_brute = t_flow + t1 - t0, t_brute + t2 - t1
        rows.append([size, args.repeats, t_flow / args.repeats, t_brute / args.repeats])
    _emit(_csv(rows, ["points", "repeats", "flow_seconds", "brute_seconds"]), args.emit)
    return EXIT_OK


# -- verify ---------------------------------------------------------------

def verify_retractions(args) -> int:
    if args.quick:
        args.box = max(1, -(-args.box // 2))
    _echo(args)
    enum = build_enumeration(args.dim, args.radius)
    n_max = args.n_max or enum.prefix_for(args.radius)
    rep = verify_axioms(enum, n_max, args.box)
    rep.extras.pop("table", None)
    lip = VerificationReport(f"retractions lipschitz d={args.dim} norm={args.norm}")
    prof = lipschitz_profile(enum, n_max, args.box, args.norm)
    bound = {"sup": 1.0, "l1": 3.0}.get(args.norm)
    for n, v, pair in prof:
        lip.add(f"lipschitz_n{n:03d}", bound is None or v <= bound, bound=bound,
                observed=v, witness=pair)
    return _finish([rep, lip], args)


def verify_basis(args) -> int:
    seed = _seed(args)
    _echo(args, seed=seed)
    norm = norm_tag(args.norm)
    enum = build_enumeration(args.dim, args.radius)
    n_max = args.n_max or enum.prefix_for(args.radius)
    space = box_space(args.radius, args.dim, norm)
    mols = sample_molecules(args.dim, args.radius, suite.half(args.samples, args.quick), seed)
    rep = projection_norm_sweep(enum, space, n_max, mols, BASIS_BOUND.get(norm), args.tol)
    if args.emit:
        _emit(_csv(rep.extras["per_n"], ["n", "max_ratio", "witness_molecule"]), args.emit)
    return _finish([rep], args)


def verify_maps(args) -> int:
    seed = _seed(args)
    _echo(args, seed=seed)
    maps = ["quadrant", "s", "r", "R"] if args.map == "all" else [args.map]
    reports = []
    for m in maps:
        if m == "quadrant":
            reports.append(verify_quadrant_constants(
                suite.half(args.samples or 100_000, args.quick), seed))
        else:
            reports.append(large_distance_lipschitz(
                m, args.threshold, suite.half(args.samples or 10_000, args.quick), seed))
    return _finish(reports, args)


def verify_l1sum(args) -> int:
    if args.space:
        if not (args.subset and args.clusters and args.k is not None):
            raise InputError("--space needs --subset, --clusters and --k")
        space = load_space(args.space)
        N = load_subset(args.subset, space)
        clusters, mols = load_clusters(args.clusters, space)
        try:
            rep = l1_sum_check(space, N, clusters, mols, args.k)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return _finish([rep], args)
    seed = _seed(args)
    _echo(args, seed=seed)
    return _finish(suite.run_l1sum(seed, args.quick), args)


def verify_duality(args) -> int:
    seed = _seed(args)
    _echo(args, seed=seed)
    return _finish(suite.run_duality(seed, args.quick) + suite.run_dirac(seed, args.quick), args)


def verify_all(args) -> int:
    seed = _seed(args)
    _echo(args, seed=seed)
    reports = []
    for group in suite.GROUPS:
        run = suite.run_all(seed, args.quick, groups=[group])
        reports.extend(run.reports)
        for name, sec in run.seconds.items():
            print(f"# {name}: {sec:.2f}s", file=sys.stderr)
        if args.fail_fast and not run.passed:
            break
    return _finish(reports, args)


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipfree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--tol", type=float, default=1e-9)
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        return sp

    sp = common(sub.add_parser("norm", help="free or quotient norm of a molecule"), seed=False)
    sp.add_argument("--space", required=True)
    sp.add_argument("--molecule", required=True)
    sp.add_argument("--subset")
    sp.add_argument("--cert", help="write the flow certificate as JSON")
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("enumerate", help="carving table as CSV")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--radius", type=int, required=True)
    sp.add_argument("--emit", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("retract", help="apply phi_n to one grid point")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--point", required=True, help='e.g. "5,-3"')
    sp.set_defaults(func=cmd_retract)

    sp = sub.add_parser("project", help="apply P_n to a grid molecule")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--molecule", required=True)
    sp.set_defaults(func=cmd_project)

    sp = common(sub.add_parser("bench", help="flow solver vs brute force timings"))
    sp.add_argument("--repeats", type=int, default=5)
    sp.add_argument("--emit")
    sp.set_defaults(func=cmd_bench)

    vp = sub.add_parser("verify", help="run verification sweeps")
    vsub = vp.add_subparsers(dest="target", required=True)

    def vparser(name, func, help):
        sp = common(vsub.add_parser(name, help=help))
        sp.add_argument("--csv", help="write check rows as CSV ('-' for stdout)")
        sp.add_argument("--quick", action="store_true", help="halve sample sizes and ranges")
        sp.set_defaults(func=func)
        return sp

    sp = vparser("retractions", verify_retractions, "retraction axioms and Lipschitz constants")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--radius", type=int, default=2)
    sp.add_argument("--box", type=int, default=5)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--norm", default="sup", choices=["sup", "l1", "l2"])

    sp = vparser("basis", verify_basis, "projection norm ratios")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--radius", type=int, default=2)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--norm", default="sup", choices=["sup", "l1"])
    sp.add_argument("--emit", help="per-n CSV (n, max ratio, witness molecule id)")

    sp = vparser("maps", verify_maps, "quadrant, s, r and R map constants")
    sp.add_argument("--map", default="all", choices=["quadrant", "s", "r", "R", "all"])
    sp.add_argument("--samples", type=int)
    sp.add_argument("--threshold", type=float, default=1.0)

    sp = vparser("l1sum", verify_l1sum, "l1-sum sandwich on given or generated clusters")
    sp.add_argument("--space")
    sp.add_argument("--subset")
    sp.add_argument("--clusters")
    sp.add_argument("--k", type=float)

    vparser("duality", verify_duality, "primal-dual gap, oracle and Dirac isometry")

    sp = vparser("all", verify_all, "the whole acceptance suite")
    sp.add_argument("--fail-fast", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "box", 1) is not None and getattr(args, "box", 1) < 1:
        parser.error("--box must be >= 1")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, IndexError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
