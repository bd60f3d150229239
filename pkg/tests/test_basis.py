import pytest
from hypothesis import given, settings, strategies as st

from lipfree.basis import (commutation_sweep, convergence_trace, grid_norm, project,
                           projection_norm_sweep, sample_molecules)
from lipfree.grid import build_enumeration
from lipfree.metric import Molecule, box_space


@pytest.fixture(scope="module")
def sup_box():
    return box_space(2, 2, "sup")


def test_projection_is_linear_and_lands_in_prefix(enum2):
    mu = Molecule((((2, 1), 1), ((-1, 0), 2), ((2, -2), -1)))
    for n in range(1, 26):
        p = project(enum2, n, mu)
        assert all(enum2.position(k) <= n for k, _ in p.terms)
    nu = Molecule((((1, 1), 3),))
    assert project(enum2, 7, mu + nu) == (project(enum2, 7, mu) + project(enum2, 7, nu)).merged()


def test_first_projection_is_zero(enum2):
    assert project(enum2, 1, Molecule((((2, 2), 5),))).terms == ()


def test_fixed_once_support_is_enumerated(enum2):
    mu = Molecule((((1, 1), 1), ((-1, 1), -2)))
    for n in range(6, 26):
        assert project(enum2, n, mu) == mu.merged()


def test_dimension_mismatch(enum2):
    with pytest.raises(ValueError):
        project(enum2, 3, Molecule((((1,), 1),)))


def test_dirac_ratio(enum2, sup_box):
    mu = Molecule((((2, -1), 1),))
    for n in range(1, 26):
        p = project(enum2, n, mu)
        ratio = (grid_norm(sup_box, p) if p.terms else 0) / grid_norm(sup_box, mu)
        assert ratio <= 1


def test_sweep_small(enum2, sup_box):
    mols = sample_molecules(2, 2, 60, seed=5)
    rep = projection_norm_sweep(enum2, sup_box, 25, mols)
    assert rep.passed
    per_n = rep.extras["per_n"]
    assert per_n[0][1] == 0.0
    assert per_n[-1][1] == 1.0


def test_zero_norm_samples_are_skipped(enum2, sup_box):
    mols = [Molecule((((1, 0), 1), ((1, 0), -1))), Molecule((((1, 0), 1),))]
    rep = projection_norm_sweep(enum2, sup_box, 25, mols)
    assert rep.extras["skipped"] == [0]


def test_l1_grid_sweep(enum2):
    space = box_space(2, 2, "l1")
    rep = projection_norm_sweep(enum2, space, 25, sample_molecules(2, 2, 40, seed=1))
    assert rep.passed
    assert rep.extras["max_ratio"][1] <= 3


def test_commutation(enum2):
    assert commutation_sweep(enum2, 25, sample_molecules(2, 2, 30, seed=2)).passed


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_commutation_specific_pair(enum2, seed):
    mu = sample_molecules(2, 3, 1, seed)[0]
    p3, p7 = project(enum2, 3, mu), project(enum2, 7, mu)
    assert project(enum2, 7, p3) == p3 == project(enum2, 3, p7)


class TestConvergence:
    def test_origin_only(self, enum2):
        tr = convergence_trace(enum2, None, Molecule((((0, 0), 1),)), with_norms=False)
        assert tr.convergence_index == 1

    def test_first_step(self, enum2):
        tr = convergence_trace(enum2, None, Molecule((((1, 0), 1),)), with_norms=False)
        assert tr.convergence_index == 2

    def test_opposite_corners(self, enum2, sup_box):
        mu = Molecule((((1, 1), 1), ((-1, -1), 1)))
        tr = convergence_trace(enum2, sup_box, mu)
        assert tr.convergence_index == enum2.position((-1, -1)) == 9
        assert tr.records[-1][3] == 0
        n, pn, norm_pn, err = tr.records[tr.convergence_index - 1]
        assert pn == mu.merged() and err == 0 and norm_pn == 2

    def test_outside_region(self):
        e = build_enumeration(2, 1)
        with pytest.raises(ValueError):
            convergence_trace(e, None, Molecule((((5, 0), 1),)))
