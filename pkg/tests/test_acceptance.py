"""Each acceptance criterion at its stated size, tolerance and time budget.

Every test appends one ``criterion N: PASS|FAIL ...`` line, printed in the
terminal summary.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from lipfree import suite
from lipfree.cli import main
from lipfree.netmaps import large_distance_lipschitz, verify_quadrant_constants

SEED = 42


def record(number, title, reports, seconds, budget):
    ok = all(r.passed for r in reports) and (budget is None or seconds < budget)
    detail = "; ".join(f"{c.check}={c.observed if c.observed is not None else c.passed}"
                       for r in reports for c in r.checks if not c.check.startswith("ratio_n"))
    limit = f" (budget {budget:g}s)" if budget else ""
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} "
                            f"[{seconds:.2f}s{limit}] {detail}")
    for r in reports:
        assert r.passed, r.summary()
    if budget is not None:
        assert seconds < budget, f"took {seconds:.2f}s, budget {budget}s"


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_1_duality_and_oracle():
    reports, sec = timed(suite.run_duality, SEED, spaces=100, max_points=60, oracle_metrics=2)
    assert reports[0].checks[0].bound == 1e-9
    oracle = reports[1]
    assert {c.check: c for c in oracle.checks}["instance_count"].observed >= 500
    record(1, "primal-dual gap and brute-force oracle", reports, sec, 10)


def test_criterion_2_dirac_isometry():
    reports, sec = timed(suite.run_dirac, SEED, spaces=200)
    record(2, "Dirac map is isometric", reports, sec, 5)


def test_criterion_3_retraction_axioms():
    reports, sec = timed(suite.run_retractions, SEED, dim=2, radius=2, box=5)
    axioms = reports[0]
    assert {c.check for c in axioms.checks} >= {"image_is_prefix", "coverage", "commutation",
                                                 "nesting"}
    record(3, "retraction axioms d=2 through 25 points on box 5", [axioms], sec, 10)


def test_criterion_4_lipschitz_constants():
    reports, sec = timed(suite.run_retractions, SEED, dim=2, radius=2, box=5)
    lip = reports[1]
    sup = lip.extras["sup"]
    assert sup[0][1] == 0.0  # the constant map phi_1
    assert all(v == 1.0 for _, v, _ in sup[1:])
    assert max(v for _, v, _ in lip.extras["l1"]) <= 3.0
    record(4, "sup constant exactly 1, l1 constant <= 3", [lip], sec, 60)


def test_criterion_5_basis_projections():
    reports, sec = timed(suite.run_basis, SEED, samples=1000)
    sweep = reports[0]
    assert len(sweep.extras["per_n"]) == 25
    assert max(r for _, r, _ in sweep.extras["per_n"]) <= 1 + 1e-9
    record(5, "projection ratios, commutation, convergence on 1000 molecules", reports, sec, 120)


def test_criterion_6_quadrant_map():
    rep, sec = timed(verify_quadrant_constants, 100_000, SEED)
    checks = {c.check: c for c in rep.checks}
    assert checks["forward_ratio"].bound == 3 and checks["inverse_ratio"].bound == 2
    assert checks["modulus_preserved"].bound == 1e-12
    record(6, "quadrant map constants on 1e5 pairs", [rep], sec, 5)


def test_criterion_7_s_and_r():
    t0 = time.perf_counter()
    reports = [large_distance_lipschitz(m, 1.0, 10_000, SEED) for m in ("s", "r")]
    sec = time.perf_counter() - t0
    checks = {c.check: c for r in reports for c in r.checks}
    assert checks["s_ratio"].bound == 6 and checks["r_ratio"].bound == 9
    assert checks["r_displacement"].bound == 4
    record(7, "s ratio <= 6, r ratio <= 9, r displacement <= 4", reports, sec, 10)


def test_criterion_8_l1_sum():
    reports, sec = timed(suite.run_l1sum, SEED, instances=50)
    record(8, "l1-sum sandwich on 50 cluster instances", reports, sec, 10)


def test_criterion_9_determinism(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("LIPFREE_SEED", raising=False)
    t0 = time.perf_counter()
    codes, blobs = [], []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        codes.append(main(["verify", "all", "--seed", str(SEED), "--csv", str(out)]))
        blobs.append(out.read_bytes())
    sec = time.perf_counter() - t0
    capsys.readouterr()
    ok = codes == [0, 0] and blobs[0] == blobs[1] and len(blobs[0]) > 0
    ACCEPTANCE_LINES.append(f"criterion 9: {'PASS' if ok else 'FAIL'} verify all twice gives "
                            f"byte-identical CSV [{sec:.2f}s] bytes={len(blobs[0])} exit={codes}")
    assert codes == [0, 0]
    assert blobs[0] == blobs[1]
