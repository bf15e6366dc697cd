import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dps_qft import fock

GRID = fock.ModeSet.product_grid((3, 1, 1))


def one_mode(w=1.0):
    return fock.ModeSet([[0.1, 0.2, 0.3]], [w])


def dense(m):
    return m.toarray() if hasattr(m, "toarray") else np.asarray(m)


def test_modeset_validation():
    with pytest.raises(ValueError):
        fock.ModeSet([[0, 0, 0]], [0.0])
    with pytest.raises(ValueError):
        fock.ModeSet([[0, 0, 0], [0, 0, 0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        fock.ModeSet([[0, 0]], [1.0])


@pytest.mark.parametrize("shape", [1, 2, 5, (3, 4, 2)])
def test_modeset_grid_reproduces_gaussian_integral(shape):
    ms = fock.ModeSet.product_grid(shape)
    assert ms.gaussian_integral() == pytest.approx(math.pi ** 1.5, rel=1e-13)
    assert ms.is_symmetric()
    assert np.all(ms.weights > 0)


def test_modeset_symmetry_detection():
    assert not fock.ModeSet([[0.5, 0, 0], [0.2, 0, 0]], [1, 1]).is_symmetric()
    assert fock.ModeSet([[0.5, 0, 0], [-0.5, 0, 0]], [1, 1]).is_symmetric()


def test_single_mode_truncated_commutator():
    rep = fock.build_boson_rep(one_mode(), 3, charged=False)
    c = dense(fock.comm(rep.ann(0), rep.cre(0)))
    expected = np.eye(4)
    expected[3, 3] = -3
    assert np.allclose(c, expected, atol=1e-15)
    # hand-built ladder
    a = np.diag(np.sqrt([1.0, 2.0, 3.0]), 1)
    assert np.allclose(dense(rep.ann(0)), a)


def test_exact_gauge_is_similar_to_unitary_gauge():
    cutoff = 5
    ex = fock.build_boson_rep(one_mode(), cutoff, charged=False, exact=True)
    fl = fock.build_boson_rep(one_mode(), cutoff, charged=False)
    s = np.diag([math.sqrt(math.factorial(n)) for n in range(cutoff + 1)])
    si = np.linalg.inv(s)
    assert np.allclose(s @ dense(ex.ann(0)) @ si, dense(fl.ann(0)), atol=1e-12)
    assert np.allclose(s @ dense(ex.cre(0)) @ si, dense(fl.cre(0)), atol=1e-12)
    assert dense(ex.ann(0)).dtype == np.int64


def test_weighted_ladders():
    w = 0.37
    rep = fock.build_boson_rep(one_mode(w), 2, charged=False)
    c = dense(fock.comm(rep.ann(0), rep.cre(0)))
    assert c[0, 0] == pytest.approx(1 / w) and c[1, 1] == pytest.approx(1 / w)


@pytest.mark.parametrize("build", [
    lambda: fock.build_boson_rep(GRID, 2, charged=False, exact=True),
    lambda: fock.build_boson_rep(fock.ModeSet.product_grid((2, 1, 1)), 3, charged=True, exact=True),
    lambda: fock.build_photon_rep(GRID.subset([0]), 2, exact=True),
    lambda: fock.build_photon_rep(GRID.subset([0]), 3, exact=True),
    lambda: fock.build_fermion_rep(GRID, spins=2, exact=True),
])
def test_exact_suites_have_zero_defect(build):
    rep = build()
    recs = fock.ladder_commutator_suite(rep) + fock.statistics_suite(rep)
    assert recs
    assert all(r.passed and r.max_defect == 0.0 for r in recs), [r.as_dict() for r in recs if not r.passed]


def test_fermion_defect_is_zero_everywhere():
    rep = fock.build_fermion_rep(GRID, spins=2, exact=True)
    recs = fock.ladder_commutator_suite(rep)
    assert max(r.full_defect for r in recs) == 0.0


def test_boson_defect_lives_in_the_top_block():
    rep = fock.build_boson_rep(GRID.subset([0, 1]), 2, charged=False, exact=True)
    rec = next(r for r in fock.ladder_commutator_suite(rep) if r.identity.startswith("[a('a', 0), a('a', 0)^dag]"))
    assert rec.max_defect == 0.0
    assert rec.full_defect == 3.0  # the (2, 2) entry is 1 - 3 - 1 away from the identity
    assert rec.as_dict()["pass"] is True


def test_float_suites_pass_at_1e12():
    for rep in (fock.build_boson_rep(GRID, 2, charged=False), fock.build_fermion_rep(GRID, spins=1),
                fock.build_photon_rep(GRID.subset([1]), 2)):
        recs = fock.ladder_commutator_suite(rep) + fock.statistics_suite(rep)
        assert all(r.passed for r in recs)
        assert max(r.max_defect for r in recs) < 1e-12


def test_defect_location_is_reported():
    rep = fock.build_boson_rep(one_mode(), 3, charged=False, exact=True)
    d, loc, full = fock._defect(rep, fock.comm(rep.ann(0), rep.cre(0)) - rep.identity(), None)
    assert d == 4 and full == 4 and loc == ([3], [3])


def test_charged_cross_commutators():
    rep = fock.build_boson_rep(GRID.subset([0, 1]), 2, charged=True, exact=True)
    a0, b1 = rep.index("a", 0), rep.index("b", 1)
    assert fock.comm(rep.ann(a0), rep.cre(b1)).count_nonzero() == 0
    assert fock.comm(rep.ann(a0), rep.ann(b1)).count_nonzero() == 0


def test_fermion_register_order_and_algebra():
    rep = fock.build_fermion_rep(GRID.subset([0, 1]), spins=2)
    labels = [r.label for r in rep.registers]
    assert labels[:4] == [("alpha", 0, 0), ("alpha", 0, 1), ("alpha", 1, 0), ("alpha", 1, 1)]
    assert labels[4][0] == "beta"
    a, b = rep.index("alpha", 1, 0), rep.index("beta", 0, 1)
    assert abs(rep.ann(a) @ rep.ann(a)).max() == 0
    assert abs(fock.comm(rep.ann(a), rep.cre(b), anti=True)).max() == 0
    w = rep.registers[a].weight
    assert np.allclose(dense(fock.comm(rep.ann(a), rep.cre(a), anti=True)), np.eye(rep.dim) / w)


def test_photon_metric_signs():
    rep = fock.build_photon_rep(GRID.subset([0]), 2)
    w = rep.registers[0].weight
    mask = rep.sub_cutoff_mask()
    sub = lambda m: dense(m)[np.ix_(mask, mask)]
    i1, i4 = rep.index("a", 0, 0), rep.index("a", 3, 0)
    n = mask.sum()
    assert np.allclose(sub(fock.comm(rep.ann(i1), rep.cre(i1))), np.eye(n) / w)
    assert np.allclose(sub(fock.comm(rep.ann(i4), rep.cre(i4))), -np.eye(n) / w)
    assert abs(fock.comm(rep.ann(i1), rep.cre(i4))).max() == 0
    vac = fock.vacuum(rep)
    assert rep.inner(vac, vac) == 1


def test_photon_creator_is_metric_adjoint():
    rep = fock.build_photon_rep(GRID.subset([0]), 2)
    for r in range(4):
        assert abs(rep.eta_adjoint(rep.ann(r)) - rep.cre(r)).max() < 1e-15


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_metric_form_properties(seed):
    rep = fock.build_photon_rep(GRID.subset([2]), 1)
    rng = np.random.default_rng(seed)
    chi, psi = (rng.normal(size=(2, rep.dim)) + 1j * rng.normal(size=(2, rep.dim)))
    assert abs(rep.inner(chi, psi) - np.conj(rep.inner(psi, chi))) < 1e-12
    op = fock.comm(rep.ann(1), rep.cre(3)) + rep.cre(0) @ rep.ann(3)
    assert abs(rep.eta_adjoint(rep.eta_adjoint(op)) - op).max() < 1e-15
    # eta-adjoint is the adjoint of the metric form
    assert abs(rep.inner(chi, op @ psi) - rep.inner(rep.eta_adjoint(op) @ chi, psi)) < 1e-10


def test_number_operator_spectra():
    boson = fock.build_boson_rep(one_mode(0.4), 3, charged=False)
    assert sorted(np.round(np.linalg.eigvals(dense(fock.number_operator(boson, 0))).real, 12)) == [0, 1, 2, 3]
    ferm = fock.build_fermion_rep(one_mode(0.4), spins=1)
    assert set(np.round(np.linalg.eigvals(dense(fock.number_operator(ferm, 0))).real, 12)) == {0, 1}
    photon = fock.build_photon_rep(one_mode(0.4), 2)
    levels = np.round(np.diag(dense(fock.number_operator(photon, photon.index("a", 3, 0)))).real, 12)
    assert set(levels) == {0, -1, -2}


def test_number_operators_commute_and_kill_vacuum():
    rep = fock.build_boson_rep(GRID.subset([0, 1]), 2, charged=True)
    vac = fock.vacuum(rep)
    ns = [fock.number_operator(rep, r) for r in range(len(rep.registers))]
    for i in range(len(ns)):
        assert np.max(np.abs(ns[i] @ vac)) == 0
        assert np.max(np.abs(rep.ann(i) @ vac)) == 0
        for j in range(len(ns)):
            assert abs(fock.comm(ns[i], ns[j])).max() < 1e-14


def test_delta_consistency():
    for rep in (fock.build_boson_rep(GRID, 2, charged=False), fock.build_fermion_rep(GRID, spins=1)):
        assert fock.delta_consistency(rep) < 1e-12
    with pytest.raises(ValueError):
        fock.delta_consistency(fock.build_boson_rep(GRID, 2, charged=False, exact=True))


def test_budgets():
    with pytest.raises(MemoryError):
        fock.build_boson_rep(fock.ModeSet.product_grid((3, 3, 1)), 2)
    with pytest.raises(MemoryError):
        fock.build_fermion_rep(fock.ModeSet.product_grid((2, 2, 1)), spins=2)
    with pytest.raises(ValueError):
        fock.build_boson_rep(GRID, 0)
    with pytest.raises(ValueError):
        fock.build_fermion_rep(GRID, spins=3)
    rep = fock.build_boson_rep(fock.ModeSet.product_grid((3, 3, 1)), 1, charged=False, budget=1 << 9)
    assert rep.dim == 512 and rep.dims == [2] * 9


# form algebra: symbolic manipulation checked against explicit matrices

def random_form(rng, n):
    q = fock.QuadraticForm(*(rng.normal(size=(4, n, n)) + 1j * rng.normal(size=(4, n, n))), const=0.3 - 0.2j)
    return q


@pytest.mark.parametrize("kind", ["boson", "photon", "fermion"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_normal_ordering_matches_matrices(kind, seed):
    rng = np.random.default_rng(seed)
    if kind == "boson":
        rep = fock.build_boson_rep(GRID.subset([0, 1]), 3, charged=False)
    elif kind == "photon":
        rep = fock.build_photon_rep(GRID.subset([0]), 2)
    else:
        rep = fock.build_fermion_rep(GRID.subset([0, 1]), spins=1)
    alg = fock.LadderAlgebra.of(rep)
    q = random_form(rng, len(rep.registers))
    a, b = dense(q.to_matrix(rep)), dense(q.normal_ordered(alg).to_matrix(rep))
    # truncation reaches down two levels for the c c and c^dag c^dag blocks
    occ = rep.occupations()
    mask = np.all(occ < rep.cutoff - 1, axis=1) if kind != "fermion" else np.ones(rep.dim, bool)
    assert np.max(np.abs((a - b)[np.ix_(mask, mask)])) < 1e-12
    no = q.normal_ordered(alg)
    assert np.all(no.B == 0)


@pytest.mark.parametrize("kind", ["boson", "photon", "fermion"])
def test_linear_form_bracket_matches_matrices(kind):
    rng = np.random.default_rng(7)
    if kind == "boson":
        rep = fock.build_boson_rep(GRID.subset([0, 1]), 3, charged=False)
    elif kind == "photon":
        rep = fock.build_photon_rep(GRID.subset([0]), 2)
    else:
        rep = fock.build_fermion_rep(GRID.subset([0, 1]), spins=2)
    alg = fock.LadderAlgebra.of(rep)
    R = len(rep.registers)
    l1 = fock.LinearForm(rng.normal(size=R) + 1j * rng.normal(size=R), rng.normal(size=R) + 0j)
    l2 = fock.LinearForm(rng.normal(size=R) + 0j, rng.normal(size=R) - 1j * rng.normal(size=R))
    anti = kind == "fermion"
    m = dense(fock.comm(l1.to_matrix(rep), l2.to_matrix(rep), anti))
    mask = rep.sub_cutoff_mask()
    c = l1.bracket(l2, alg)
    assert np.max(np.abs(m[np.ix_(mask, mask)] - c * np.eye(mask.sum()))) < 1e-12


def test_sum_product_preserves_order():
    rng = np.random.default_rng(9)
    rep = fock.build_fermion_rep(GRID.subset([0, 1]), spins=1)
    R = len(rep.registers)
    shape = (R, 3, 2)
    l1 = fock.LinearForm(rng.normal(size=shape) + 0j, rng.normal(size=shape) + 1j)
    l2 = fock.LinearForm(rng.normal(size=shape) - 1j, rng.normal(size=shape) + 0j)
    explicit = sum(dense(l1[i, j].to_matrix(rep) @ l2[i, j].to_matrix(rep)) for i in range(3) for j in range(2))
    assert np.max(np.abs(dense(fock.sum_product(l1, l2).to_matrix(rep)) - explicit)) < 1e-12
    with pytest.raises(ValueError):
        l1.to_matrix(rep)


def test_linear_form_adjoint_is_matrix_adjoint():
    rep = fock.build_boson_rep(GRID.subset([0]), 2, charged=True)
    l = fock.LinearForm(np.array([1 + 2j, 0.5]), np.array([0.3j, -1.0]))
    assert np.allclose(dense(l.adjoint().to_matrix(rep)), dense(l.to_matrix(rep)).conj().T)


def test_mixed_statistics_rejected():
    rep = fock.build_boson_rep(GRID, 1, charged=False)
    rep.registers = rep.registers[:1] + [fock.Register(("x",), "fermion", 1, 1.0)]
    with pytest.raises(ValueError):
        fock.LadderAlgebra.of(rep)


def test_relative_form_error():
    alg = fock.LadderAlgebra("boson", np.ones(2))
    y = fock.QuadraticForm.number_like(np.diag([1.0, 2.0]), const=3.0)
    x = fock.QuadraticForm.number_like(np.diag([1.0, 2.1]), const=3.3)
    err = fock.relative_form_error(x, y, alg)
    assert err["blocks"] == pytest.approx(0.1 / math.sqrt(5))
    assert err["zero_point"] == pytest.approx(0.1)
    # a floor scale dominates a vanishing reference
    z = fock.QuadraticForm.zeros(2)
    assert fock.relative_form_error(x.scale(1e-3), z, alg, scale=10.0)["blocks"] == pytest.approx(
        1e-3 * math.sqrt(5.41) / 10)
