import pytest

from mrsm import combi, model
from mrsm.combi import (SubsetIndex, b2_counts, binom, colex_index, colex_subsets, corollary5_holds,
                        counts, degree_fall_count, rows_E, solvable_b1, subset_rank, subset_unrank,
                        vandermonde_ok, vars_V)


def test_table1_small():
    c = counts(10, 10, 10, 2)
    assert (c.total_eqs, c.total_vars) == (1200, 450)


def test_table1_bold_row():
    c = counts(10, 10, 10, 5)
    assert (c.total_eqs, c.total_vars) == (2100, 2520)
    assert c.ratio == pytest.approx(5 / 6)
    assert int(c.ratio * 10) / 10 == 0.8  # printed value is truncated to one decimal


def test_table2_partial_range():
    c = counts(12, 12, 12, 4)
    assert c.range_size(3, 4) == (4032, 3528)
    assert vars_V(12, 12, 12, 4, 3) + vars_V(12, 12, 12, 4, 4) == 3528


@pytest.mark.parametrize("shape,expected", [
    ((10, 5, 10, 2), True), ((10, 10, 10, 5), False), ((1, 7, 1, 3), True), ((1, 9, 1, 2), True)])
def test_solvable_b1(shape, expected):
    assert solvable_b1(*shape) is expected


def test_corollary5_examples():
    assert corollary5_holds(12, 12, 12, 4, 3)
    assert rows_E(12, 12, 12, 4, 3) + rows_E(12, 12, 12, 4, 4) == 4032
    assert vars_V(12, 12, 12, 4, 4) == 840
    for r in range(1, 6):
        assert corollary5_holds(3, 10, 50, r, r)
    lhs = 10 * binom(5, 3) * binom(5, 2)
    rhs = 10 * binom(5, 3) * binom(5, 3)
    assert lhs == rhs == 1000
    assert corollary5_holds(10, 10, 10, 5, 2)


def test_corollary5_range():
    with pytest.raises(ValueError):
        corollary5_holds(10, 10, 10, 5, 6)


def test_degree_fall_count_nonnegative():
    assert degree_fall_count(12, 12, 12, 4, 4) == rows_E(12, 12, 12, 4, 4)
    assert degree_fall_count(2, 10, 50, 4, 0) == 0


def test_b2_counts_examples():
    c = b2_counts(10, 10, 10, 5)
    assert (c["eqs"], c["monomials"], c["raw_rows"]) == (14400, 13860, 21000)
    c = b2_counts(12, 8, 12, 4)
    assert (c["eqs"], c["monomials"]) == (5880, 5460)
    m, n, r = 3, 6, 2
    assert b2_counts(m, n, 1, r)["eqs"] == m * binom(n, r + 1) - binom(n, r + 2) * binom(m + 1, 2)
    assert b2_counts(7, 6, 10, 2)["eqs"] == 980 and b2_counts(7, 6, 10, 2)["monomials"] == 825


def test_binom_edges():
    assert binom(5, -1) == 0 and binom(3, 4) == 0 and binom(0, 0) == 1
    assert binom(200, 100) > 2 ** 64  # exact big integers


def test_colex_order():
    assert colex_subsets(4, 2) == ((0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3))
    assert colex_index(4, 2)[(1, 3)] == 4


def test_rank_unrank_exhaustive():
    # colex rank does not depend on n, so all subsets of range(20) cover every n <= 20
    for k in range(21):
        for i, s in enumerate(colex_subsets(20, k)):
            assert subset_rank(s) == i
            assert subset_unrank(i, k) == s


def test_subset_index():
    idx = SubsetIndex.of(6, (4, 1, 2))
    assert idx.subset() == (1, 2, 4)
    with pytest.raises(ValueError):
        SubsetIndex.of(4, (1, 5))
    with pytest.raises(ValueError):
        SubsetIndex(4, 2, 6)


def test_invalid_shape():
    with pytest.raises(ValueError):
        counts(10, 4, 10, 4)


@pytest.mark.parametrize("n,r", [(n, r) for n in range(2, 14) for r in range(1, n)])
def test_vandermonde(n, r):
    assert vandermonde_ok(n, r)


def _table_shapes():
    shapes = list(combi.TABLE1_ROWS)
    shapes += [(12, kappa + r, 12, r) for r, kappa, _ in combi.TABLE2_ROWS]
    return sorted(set(shapes))


@pytest.mark.parametrize("shape", _table_shapes())
def test_counts_match_emitted_blocks(shape):
    m, n, K, r = shape
    c = counts(m, n, K, r)
    for d in range(r + 1):
        assert m * len(model.block_keys(n, r, d)) == c.rows[d]
        assert model.count_block_monomials(n, r, K, d) == c.vars[d]


def test_reference_tables():
    t1 = {(r["m"], r["n"], r["K"], r["r"]): (r["rows"], r["cols"]) for r in combi.table_rows(1)}
    assert t1 == combi.REFERENCE_TABLE1
    assert len(combi.table_rows(1)) == 7
    for row in combi.table_rows(2):
        key = (row["r"], row["n"] - row["r"], row["d_lo"], row["d_hi"])
        assert combi.REFERENCE_TABLE2[key] == (row["rows"], row["cols"])
    with pytest.raises(ValueError):
        combi.table_rows(3)


def test_table1_ratio_column():
    ratios = {(r["n"], r["r"]): r["ratio"] for r in combi.table_rows(1)}
    assert ratios[(10, 2)] == pytest.approx(2.6667)
    assert ratios[(5, 2)] == 1.0 and ratios[(10, 5)] == pytest.approx(0.8333)
    # the published column truncates to the digits shown
    printed = {(10, 2): ("2.6", 1), (5, 2): ("1", 0), (10, 3): ("1.75", 2), (7, 3): ("1", 0),
               (10, 4): ("1.2", 1), (9, 4): ("1", 0), (10, 5): ("0.8", 1)}
    for key, (text, digits) in printed.items():
        scale = 10 ** digits
        assert int(ratios[key] * scale + 1e-9) / scale == float(text)
