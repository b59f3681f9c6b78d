from itertools import combinations

import numpy as np
import pytest

from mrsm import model, mr
from mrsm.combi import binom, counts
from mrsm.ff import ff_make
from mrsm.linalg import det
from mrsm.model import (Assignment, MinorTable, V_vector, emit_block, eval_ks, eval_minors, eval_row,
                        eval_smC, eval_smcT, plucker_from_C, plucker_key, row_terms)


@pytest.fixture(scope="module")
def gf16():
    return ff_make(4)


def test_d0_rows_are_ks_entries(gf16):
    rng = np.random.default_rng(0)
    inst = mr.MRInstance(gf16, 2, gf16.random(rng, (3, 5, 6)))
    rows = emit_block(inst, 0)
    assert len(rows) == 5 * (6 - 2)
    asg = Assignment(gf16.random(rng, 3), gf16.random(rng, (2, 4)))
    mt = MinorTable(gf16, asg.C)
    ks = eval_ks(inst, asg)
    for row in rows:
        assert eval_row(gf16, row, asg.x, mt) == int(ks[row.ell, row.J[0]])


def test_total_rows_table1(gf16):
    m, n, K, r = 10, 10, 10, 2
    total = sum(m * len(model.block_keys(n, r, d)) for d in range(r + 1))
    assert total == 1200


def test_planted_rows_vanish_tiny():
    F = ff_make(3)
    inst, wit = mr.gen_planted(F, 3, 3, 2, 1, 0)
    mt = MinorTable(F, wit.C)
    for d in (0, 1):
        for row in emit_block(inst, d):
            assert eval_row(F, row, wit.x, mt) == 0


@pytest.mark.parametrize("seed", range(3))
def test_planted_residuals_zero(gf16, seed):
    inst, wit = mr.gen_planted(gf16, 5, 6, 4, 2, seed)
    asg = Assignment(wit.x, wit.C).with_plucker(gf16)
    assert not eval_ks(inst, asg).any()
    assert not eval_minors(inst, asg).any()
    for ell in range(inst.m):
        for Tp in combinations(range(inst.n), 3):
            assert eval_smC(inst, asg, ell, Tp) == 0
            assert eval_smcT(inst, asg, ell, Tp) == 0


def test_non_solution_is_detected():
    F = ff_make(3)
    hits = 0
    for seed in range(40):
        inst, wit = mr.gen_planted(F, 4, 4, 3, 1, seed)
        rng = np.random.default_rng(seed)
        x = F.random(rng, 3)
        if np.array_equal(x, wit.x) or not x.any():
            continue
        asg = Assignment(x, F.random(rng, (1, 3)))
        hits += bool(eval_minors(inst, asg).any())
    assert hits >= 30


def test_r1_smC_expansion(gf16):
    rng = np.random.default_rng(4)
    inst = mr.MRInstance(gf16, 1, gf16.random(rng, (3, 4, 5)))
    asg = Assignment(gf16.random(rng, 3), gf16.random(rng, (1, 4))).with_plucker(gf16)
    Mx = mr.eval_array(gf16, inst.mats, asg.x)
    for ell in range(4):
        for j in range(5):
            for k in range(j + 1, 5):
                want = gf16.mul(int(Mx[ell, j]), asg.cT[(k,)]) ^ gf16.mul(int(Mx[ell, k]), asg.cT[(j,)])
                assert eval_smC(inst, asg, ell, (j, k)) == want


def test_identity_minors_suite(gf16):
    rng = np.random.default_rng(1)
    inst = mr.MRInstance(gf16, 2, gf16.random(rng, (5, 6, 6)))
    res = model.check_identity_minors(inst, 100, 3)
    assert res.ok and res.trials == 100


def test_identity_suites_other(gf16):
    rng = np.random.default_rng(2)
    inst = mr.MRInstance(gf16, 3, gf16.random(rng, (6, 8, 8)))
    for fn in (model.check_identity_smC, model.check_ks_in_sm, model.check_plucker):
        assert fn(inst, 20, 5).ok


def test_identity_checks_need_large_field():
    F = ff_make(2)
    rng = np.random.default_rng(0)
    inst = mr.MRInstance(F, 1, F.random(rng, (2, 3, 3)))
    with pytest.raises(ValueError):
        model.check_identity_minors(inst, 1, 0)


def test_laplace_full_cofactor(gf16):
    # r = m - 1: V_J is the full cofactor vector
    rng = np.random.default_rng(6)
    for _ in range(20):
        assert model.check_laplace(gf16, rng, 4, 3)
        assert model.check_vecrow(gf16, rng, 2, 3, 4, 2)


def test_vvector_zero_row(gf16):
    rng = np.random.default_rng(8)
    A = gf16.random(rng, (5, 2))
    A[1] = 0
    J = (0, 1, 3)
    V = V_vector(gf16, A, J)
    assert np.flatnonzero(V).tolist() in ([], [1])
    a = gf16.random(rng, 5)
    assert gf16.dot(V, a) == det(gf16, np.concatenate([a[:, None], A], axis=1)[list(J)])


def test_last_block_uses_maximal_minors():
    n, r = 7, 3
    T = tuple(range(r))
    for J in [(0, 1, 2, 3)]:
        terms = row_terms(n, r, J, T)
        assert all(col < n - r for col, _, _ in terms)
        assert all(len(Jp) == r and Tp == T for _, Tp, Jp in terms)


def test_plucker_coordinates(gf16):
    rng = np.random.default_rng(3)
    C = gf16.random(rng, (2, 3))
    cT = plucker_from_C(gf16, C)
    assert len(cT) == binom(5, 2)
    assert cT[(3, 4)] == 1  # the identity block
    mt = MinorTable(gf16, C)
    for T in [(0,), (1,)]:
        for J in [(0,), (2,)]:
            assert cT[plucker_key(5, 2, T, J)] == mt(T, J)


def test_emit_block_counts_match():
    F = ff_make(3)
    rng = np.random.default_rng(0)
    inst = mr.MRInstance(F, 2, F.random(rng, (3, 4, 6)))
    c = counts(4, 6, 3, 2)
    for d in range(3):
        rows = emit_block(inst, d)
        assert len(rows) == c.rows[d]
        degrees = {len(Tp) for row in rows for (_, Tp, _), _ in row.coeffs}
        assert degrees <= {d, d + 1}
