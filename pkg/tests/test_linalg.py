import numpy as np
import pytest

from mrsm import oracle
from mrsm.ff import ff_make
from mrsm.linalg import (Inconsistent, MatGF, det, echelon, matmul, projective_normalize, rank, rref,
                         rref_array, right_kernel, solve_linear)


def test_rref_identity():
    F = ff_make(4)
    R, piv, rk = rref(MatGF.identity(F, 3))
    assert rk == 3 and piv == [0, 1, 2]
    assert R == MatGF.identity(F, 3)


def test_gf2_duplicate_rows():
    F = ff_make(1)
    assert rank(MatGF(F, [[1, 1], [1, 1]])) == 1


def test_gf2_kernel_of_ones():
    F = ff_make(1)
    K = right_kernel(MatGF(F, [[1, 1]]))
    assert K.data.tolist() == [[1, 1]]


def test_full_column_rank_has_empty_kernel():
    F = ff_make(5)
    assert right_kernel(MatGF.identity(F, 4)).nrows == 0


def test_rank_matches_independent_elimination():
    F = ff_make(5)
    rng = np.random.default_rng(2024)
    for t in range(50):
        A = F.random(rng, (40, 60))
        if t % 5 == 0:  # force rank deficiency now and then
            A[20:] = matmul(F, F.random(rng, (20, 20)), A[:20])
        assert echelon(F, A).rank == oracle.gf_rank(A.tolist(), F.modulus)
        assert len(rref_array(F, A)[1]) == echelon(F, A).rank


def test_kernel_residual_gf64():
    F = ff_make(6)
    rng = np.random.default_rng(7)
    for _ in range(10):
        A = F.random(rng, (30, 40))
        A[25:] = matmul(F, F.random(rng, (5, 25)), A[:25])
        ech = echelon(F, A)
        Kb = ech.kernel_basis()
        assert Kb.shape[0] == 40 - ech.rank
        assert not matmul(F, A, Kb.T).any()
        assert echelon(F, Kb).rank == Kb.shape[0]


def test_echelon_and_rref_agree_on_kernel():
    F = ff_make(8)
    rng = np.random.default_rng(3)
    A = F.random(rng, (12, 20))
    A[8:] = matmul(F, F.random(rng, (4, 8)), A[:8])
    K1 = echelon(F, A).kernel_basis()
    K2 = right_kernel(MatGF(F, A)).data
    assert np.array_equal(K1, K2)


def test_solve_identity():
    F = ff_make(4)
    rng = np.random.default_rng(0)
    B = F.random(rng, (5, 3))
    sol = solve_linear(MatGF.identity(F, 5), MatGF(F, B))
    assert np.array_equal(sol.X.data, B)
    assert sol.kernel.nrows == 0


def test_solve_inconsistent():
    F = ff_make(1)
    with pytest.raises(Inconsistent):
        solve_linear(MatGF(F, [[1], [1]]), MatGF(F, [[1], [0]]))


def test_solve_random_consistent():
    F = ff_make(6)
    rng = np.random.default_rng(11)
    for _ in range(100):
        r, c, k = rng.integers(1, 9, 3)
        A = F.random(rng, (r, c))
        X0 = F.random(rng, (c, k))
        B = matmul(F, A, X0)
        sol = solve_linear(MatGF(F, A), MatGF(F, B))
        assert np.array_equal(matmul(F, A, sol.X.data), B)
        if sol.kernel.nrows:
            assert not matmul(F, A, sol.kernel.data.T).any()


def test_det_against_rank():
    F = ff_make(5)
    rng = np.random.default_rng(5)
    for _ in range(30):
        A = F.random(rng, (5, 5))
        if rng.random() < 0.3:
            A[4] = A[0] ^ F.vmul(A[1], 3)
        assert (det(F, A) != 0) == (echelon(F, A).rank == 5)


def test_det_multiplicative():
    F = ff_make(4)
    rng = np.random.default_rng(9)
    A, B = F.random(rng, (2, 4, 4))
    assert det(F, matmul(F, A, B)) == F.mul(det(F, A), det(F, B))


def test_complete_fills_pivots():
    F = ff_make(5)
    rng = np.random.default_rng(1)
    A = F.random(rng, (6, 10))
    ech = echelon(F, A)
    X = ech.random_kernel_vectors(4, rng)
    assert not matmul(F, A, X.T).any()


def test_projective_normalize():
    F = ff_make(3)
    v = projective_normalize(F, [0, 5, 3])
    assert v.tolist()[0] == 0 and int(v[1]) == 1
    assert projective_normalize(F, [0, 0]).tolist() == [0, 0]


def test_matgf_sparse_roundtrip():
    F = ff_make(4)
    rng = np.random.default_rng(4)
    A = F.random(rng, (3, 7))
    A[A < 8] = 0
    M = MatGF(F, A)
    assert MatGF.from_sparse(F, 3, 7, M.to_sparse()) == M
    assert (M + M).is_zero()
    assert M.T.T == M


def test_matmul_shape_mismatch():
    F = ff_make(2)
    with pytest.raises(ValueError):
        matmul(F, np.zeros((2, 3)), np.zeros((2, 3)))


def test_echelon_inplace_mutates():
    F = ff_make(3)
    A = np.array([[1, 1], [1, 1]], dtype=F.dtype)
    ech = echelon(F, A, inplace=True)
    assert ech.rank == 1 and ech.data is A
