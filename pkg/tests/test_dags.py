import numpy as np
import pytest

from mrsm import dags
from mrsm.combi import binom
from mrsm.ff import ff_make
from mrsm.linalg import echelon, matmul
from mrsm.mr import eval_array


@pytest.fixture(scope="module")
def keys():
    return {lvl: dags.keygen(p, 0) for lvl, p in dags.LEVELS.items()}


@pytest.fixture(scope="module")
def compressed(keys):
    return {lvl: dags.compress_key(kp, dags.LEVELS[lvl].a0) for lvl, kp in keys.items()}


def test_group_vector_small():
    ext = ff_make(4)
    b1, b2, b3 = 3, 5, 9
    assert dags.group_vector(ext, [b1, b2]).tolist() == [0, b1, b2, b1 ^ b2]
    want = [0, b1, b2, b1 ^ b2, b3, b1 ^ b3, b2 ^ b3, b1 ^ b2 ^ b3]
    assert dags.group_vector(ext, [b1, b2, b3]).tolist() == want
    assert dags.dyadic_pattern(3, 2).tolist() == [0, 0, 1, 1, 0, 0, 1, 1]


def test_params_validation():
    with pytest.raises(ValueError):
        dags.DagsParams(3, 10, 4, gamma=7).validate()
    with pytest.raises(ValueError):
        dags.DagsParams(5, 52, 26, gamma=4, c=4, a0=22).validate()
    p = dags.LEVELS[5]
    assert (p.n, p.k, p.block) == (33 * 64, 11 * 64, 64)


def test_dags5_small_gamma_dimensions():
    kp = dags.keygen(dags.DagsParams(6, 33, 11, gamma=2), 0)
    assert kp.H_pub.shape == (88, 132)
    assert kp.G_pub.shape == (44, 132)
    ck = dags.compress_key(kp, 0)
    assert ck.k0 == 11 and ck.schur.m_eff == 22


def test_public_code_contains_support_structure(keys):
    kp = keys[1]
    base = kp.tower.base
    assert not matmul(base, kp.H_pub, kp.G_pub.T).any()
    blk = kp.params.block
    assert np.array_equal(kp.x_support.reshape(-1, blk) ^ kp.tau[:, None],
                          np.tile(kp.g, (kp.params.n0, 1)))


def test_repetition_code():
    base = ff_make(3)
    H = np.zeros((3, 4), dtype=base.dtype)
    for j in range(1, 4):
        H[j - 1, 0] = H[j - 1, j] = 1
    G_inv, G_tilde = dags.invariant_code(base, H, 2, 1)
    assert G_tilde.tolist() == [[1]]
    assert G_inv.tolist() == [[1, 1, 1, 1]]


@pytest.mark.parametrize("lvl", [1, 3, 5])
def test_invariant_code_dimension(keys, lvl):
    kp = keys[lvl]
    base = kp.tower.base
    G_inv, G_tilde = dags.invariant_code(base, kp.H_pub, kp.params.gamma, kp.params.k0)
    assert G_inv.shape[0] == kp.params.k0
    assert np.array_equal(G_inv, np.repeat(G_tilde, kp.params.block, axis=1))
    assert not matmul(base, kp.H_pub, G_inv.T).any()


@pytest.mark.parametrize("lvl,k0,m_eff", [(1, 8, 26), (3, 9, 22), (5, 5, 22)])
def test_shortened_sizes(compressed, lvl, k0, m_eff):
    ck = compressed[lvl]
    assert ck.k0 == k0 and ck.schur.m_eff == m_eff
    assert ck.n0 == dags.LEVELS[lvl].n0 - dags.LEVELS[lvl].a0
    base = ck.tower.base
    assert not matmul(base, ck.schur.Hs, ck.G_tilde.T).any()
    assert np.array_equal(ck.G_tilde[:, :k0], np.eye(k0, dtype=base.dtype))


def test_shorten_zero_is_identity(keys):
    ck = dags.compress_key(keys[5], 0)
    again = dags.shorten(ck, 0)
    assert np.array_equal(again.G_tilde, ck.G_tilde)
    assert np.array_equal(again.block_order, ck.block_order)


def test_tau_matrix_shapes(compressed):
    ck = compressed[5]
    k0, n0 = ck.k0, ck.n0
    G = ck.G_tilde[:, k0:]
    for j in range(n0):
        T = dags.tau_matrix(ck, j)
        assert T.shape == (n0 - k0, k0)
        if j < k0:
            assert set(np.flatnonzero(T.any(axis=0))) <= {j}
            assert np.array_equal(T[:, j], G[j])
        else:
            assert set(np.flatnonzero(T.any(axis=1))) <= {j - k0}
            assert np.array_equal(T[j - k0], G[:, j - k0])


@pytest.mark.parametrize("lvl", [1, 3, 5])
def test_minrank_variable_counts(compressed, lvl):
    ck, p = compressed[lvl], dags.LEVELS[lvl]
    assert dags.build_minrank(ck, p.c, "fix_tau").inst.K == ck.n0 - 1 + p.gamma
    assert dags.build_minrank(ck, p.c, "fix_tau_b1").inst.K == ck.n0 - 2 + p.gamma
    assert dags.build_minrank(ck, p.c, "none").inst.K == ck.n0 + p.gamma
    with pytest.raises(ValueError):
        dags.build_minrank(ck, p.c, "bogus")


@pytest.mark.parametrize("lvl", [1, 3, 5])
def test_admissible_solutions_have_rank_c(compressed, lvl):
    ck, p = compressed[lvl], dags.LEVELS[lvl]
    dm = dags.build_minrank(ck, p.c, "fix_tau")
    ext = dm.inst.ctx
    assert set(dm.admissible) == {"x", "xq", "trace"}
    # x and its conjugate have rank c/2 over F_{q^2}; the trace has rank c
    rk = {name: echelon(ext, eval_array(ext, dm.inst.mats, x)).rank for name, x in dm.admissible.items()}
    assert rk == {"x": p.c // 2, "xq": p.c // 2, "trace": p.c}
    # the trace is the only F_q-rational one
    emb = ck.tower.emb
    assert np.all(emb.in_base(dm.admissible["trace"]))
    assert not np.all(emb.in_base(dm.admissible["x"]))


@pytest.mark.parametrize("lvl", [1, 3, 5])
def test_checkpoints(compressed, lvl):
    cps = dags.appendix_checkpoints(compressed[lvl], dags.LEVELS[lvl].c)
    assert [c.name for c in cps] == ["schur_transpose", "kronecker_diagonal", "minrank_form"]
    assert all(c.ok for c in cps)


def test_predicted_rank_examples():
    assert dags.predicted_block_rank(26, 8, 4, 0) == 104
    # d = c: C(c-1, d) = 0, so only the second term is left, and it vanishes too
    for k0, c in [(8, 4), (9, 4), (5, 2)]:
        assert dags.predicted_block_rank(22, k0, c, c) == binom(k0 - c, c + 1) * binom(c, c + 1) * c == 0
    assert dags.predicted_block_rank(22, 5, 2, 1) == min(22 * 3 * 2, 3 * (22 + 1))


@pytest.mark.parametrize("lvl,rows", [(1, 1456), (3, 2772), (5, 220)])
def test_macaulay_rows(lvl, rows):
    p = dags.LEVELS[lvl]
    k0 = p.k0 - p.a0
    assert (p.n0 - p.k0) * binom(k0, p.c + 1) == rows


# measured on seed 0 and frozen ------------------------------------------------

TABLE3 = {1: (1456, 2520, 1322), 3: (2772, 4284, 2540), 5: (220, 310, 194)}
FIX_TAU = {1: (1456, 2590, 1338), 3: (2772, 4410, 2588), 5: (220, 320, 194)}
BLOCK_RANKS = {1: [104, 624, 624, 104, 0], 3: [110, 880, 1320, 440, 22], 5: [66, 132, 22]}


@pytest.mark.parametrize("lvl", [1, 3, 5])
def test_attack_fix_tau_b1_reproduces_table(keys, lvl):
    rep = dags.attack(dags.LEVELS[lvl], 0, "fix_tau_b1", keypair=keys[lvl])
    assert (rep.matrix_rows, rep.matrix_cols, rep.rank) == TABLE3[lvl]
    assert rep.matched == ["trace"] and len(rep.candidates) == 1
    assert [b["measured"] for b in rep.block_ranks] == BLOCK_RANKS[lvl]


@pytest.mark.parametrize("lvl", [1, 3, 5])
def test_attack_fix_tau_three_solutions(keys, lvl):
    rep = dags.attack(dags.LEVELS[lvl], 0, "fix_tau", keypair=keys[lvl], measure_blocks=False)
    assert (rep.matrix_rows, rep.matrix_cols, rep.rank) == FIX_TAU[lvl]
    assert rep.matched == ["trace", "x", "xq"]
    assert rep.matched_planted and rep.col_shift == 0
    doc = rep.as_dict()
    assert doc["params"]["n0"] == dags.LEVELS[lvl].n0


def test_attack_none_normalization(keys):
    rep = dags.attack(dags.LEVELS[5], 0, "none", keypair=keys[5], measure_blocks=False)
    assert rep.matrix_cols == 330 and "trace" in rep.matched


def test_attack_rotates_columns_on_degenerate_chart():
    # seed 3 at DAGS_5: the last c columns of the planted matrix are dependent
    p = dags.LEVELS[5]
    kp = dags.keygen(p, 3)
    ck = dags.compress_key(kp, p.a0)
    dm = dags.build_minrank(ck, p.c, "fix_tau")
    assert dags.planted_U(dm) is None
    rep = dags.attack(p, 3, "fix_tau", keypair=kp, measure_blocks=False)
    assert rep.col_shift > 0 and rep.matched == ["trace", "x", "xq"]
    assert all(c.ok for c in dags.appendix_checkpoints(ck, p.c))


def test_recovered_tau_is_planted_trace(keys):
    p = dags.LEVELS[1]
    kp = keys[1]
    rep = dags.attack(p, 0, "fix_tau", keypair=kp, measure_blocks=False)
    ck = dags.compress_key(kp, p.a0)
    ext, emb = ck.tower.ext, ck.tower.emb
    tau = ck.tau ^ ck.tau[-1]
    want = emb.trace_ext(ext.vmul(tau, ext.inv(int(ck.b[0]))))
    got = np.array(rep.recovered_tau, dtype=ext.dtype)
    # equal up to a nonzero scalar
    nz = np.flatnonzero(want)[0]
    scale = ext.div(int(got[nz]), int(want[nz]))
    assert np.array_equal(got, ext.vmul(want, scale))


def test_keypair_roundtrip(keys):
    kp = keys[3]
    back = dags.keypair_from_dict(dags.keypair_to_dict(kp))
    assert np.array_equal(back.H_pub, kp.H_pub)
    assert np.array_equal(back.tau, kp.tau) and np.array_equal(back.b, kp.b)
    assert back.params == kp.params


def test_keygen_deterministic():
    p = dags.LEVELS[1]
    a, b = dags.keygen(p, 11), dags.keygen(p, 11)
    assert np.array_equal(a.H_pub, b.H_pub)
