"""Subset indexing and the closed-form block counts of the Support-Minors system.

All counts are exact Python integers.  Subsets are 0-based sorted tuples and
are ranked in colexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb


def binom(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def subset_rank(subset) -> int:
    """Colex rank of a sorted subset of {0..n-1}."""
    return sum(binom(s, j + 1) for j, s in enumerate(subset))


def subset_unrank(rank: int, k: int) -> tuple[int, ...]:
    out = []
    for j in range(k, 0, -1):
        s = j - 1
        while binom(s + 1, j) <= rank:
            s += 1
        out.append(s)
        rank -= binom(s, j)
    return tuple(reversed(out))


@lru_cache(maxsize=None)
def colex_subsets(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All k-subsets of range(n) in colex order (index == colex rank)."""
    return tuple(sorted(combinations(range(n), k), key=lambda s: s[::-1]))


@lru_cache(maxsize=None)
def colex_index(n: int, k: int) -> dict:
    return {s: i for i, s in enumerate(colex_subsets(n, k))}


@dataclass(frozen=True)
class SubsetIndex:
    n: int
    k: int
    rank: int

    def __post_init__(self):
        if not 0 <= self.rank < binom(self.n, self.k):
            raise ValueError("rank out of range")

    @classmethod
    def of(cls, n: int, subset) -> "SubsetIndex":
        subset = tuple(sorted(subset))
        if subset and (subset[0] < 0 or subset[-1] >= n):
            raise ValueError("subset not contained in the universe")
        return cls(n, len(subset), subset_rank(subset))

    def subset(self) -> tuple[int, ...]:
        return subset_unrank(self.rank, self.k)


def _check_shape(m: int, n: int, K: int, r: int) -> None:
    if m < 1 or K < 1 or not 0 < r < n:
        raise ValueError(f"invalid shape m={m} n={n} K={K} r={r}")


def rows_E(m: int, n: int, K: int, r: int, d: int) -> int:
    """Equations in block E(d): m * C(n-r, d+1) * C(r, d)."""
    return m * binom(n - r, d + 1) * binom(r, d)


def vars_V(m: int, n: int, K: int, r: int, d: int) -> int:
    """Monomials x_i |C|_{T,J} with #T = #J = d."""
    if d > r:
        return 0
    return K * binom(n - r, d) * binom(r, d)


@dataclass(frozen=True)
class BlockCounts:
    m: int
    n: int
    K: int
    r: int
    rows: tuple[int, ...]
    vars: tuple[int, ...]

    @property
    def total_eqs(self) -> int:
        return sum(self.rows)

    @property
    def total_vars(self) -> int:
        return sum(self.vars)

    @property
    def ratio(self) -> float:
        return self.m * (self.n - self.r) / (self.K * (self.r + 1))

    def range_size(self, d_lo: int, d_hi: int) -> tuple[int, int]:
        """(rows, cols) of the Macaulay matrix on blocks E(d_lo..d_hi)."""
        rows = sum(self.rows[d] for d in range(d_lo, d_hi + 1))
        cols = sum(self.vars[d] for d in range(d_lo, min(d_hi + 1, self.r) + 1))
        return rows, cols


def counts(m: int, n: int, K: int, r: int) -> BlockCounts:
    _check_shape(m, n, K, r)
    return BlockCounts(
        m, n, K, r,
        tuple(rows_E(m, n, K, r, d) for d in range(r + 1)),
        tuple(vars_V(m, n, K, r, d) for d in range(r + 1)),
    )


def solvable_b1(m: int, n: int, K: int, r: int) -> bool:
    _check_shape(m, n, K, r)
    return m * (n - r) >= K * (r + 1)


def corollary5_holds(m: int, n: int, K: int, r: int, d: int) -> bool:
    """More equations in E(d) than monomials of V(d+1)."""
    if not 0 <= d <= r:
        raise ValueError("d out of range")
    return m * binom(n - r, d + 1) * binom(r, d) >= K * binom(n - r, d + 1) * binom(r, d + 1)


def degree_fall_count(m: int, n: int, K: int, r: int, d: int) -> int:
    """Predicted falls from E(d) alone, assuming generic full rank."""
    return max(0, rows_E(m, n, K, r, d) - vars_V(m, n, K, r, d + 1))


def b2_counts(m: int, n: int, K: int, r: int) -> dict:
    _check_shape(m, n, K, r)
    eqs = m * binom(n, r + 1) * K - binom(n, r + 2) * binom(m + 1, 2)
    return {"eqs": eqs, "monomials": binom(n, r) * binom(K + 1, 2),
            "raw_rows": m * binom(n, r + 1) * K}


def vandermonde_ok(n: int, r: int) -> bool:
    return sum(binom(n - r, d) * binom(r, d) for d in range(r + 1)) == binom(n, r)


# Tables reproduced by the `tables` subcommand --------------------------

TABLE1_ROWS = [
    # m, n, K, r
    (10, 10, 10, 2), (10, 5, 10, 2),
    (10, 10, 10, 3), (10, 7, 10, 3),
    (10, 10, 10, 4), (10, 9, 10, 4),
    (10, 10, 10, 5),
]

# r, kappa, (d_lo, d_hi) for 12x12 matrices and K = 12
TABLE2_ROWS = [
    (4, 8, (0, 4)), (4, 8, (3, 4)),
    (4, 7, (0, 4)),
    (4, 6, (0, 4)), (4, 6, (2, 4)),
    (4, 5, (0, 4)),
    (5, 7, (0, 5)), (5, 7, (2, 4)),
    (5, 6, (0, 5)),
]

# published (n_eq, n_vars) and matrix sizes, used by `check counts`
REFERENCE_TABLE1 = {
    (10, 10, 10, 2): (1200, 450), (10, 5, 10, 2): (100, 100),
    (10, 10, 10, 3): (2100, 1200), (10, 7, 10, 3): (350, 350),
    (10, 10, 10, 4): (2520, 2100), (10, 9, 10, 4): (1260, 1260),
    (10, 10, 10, 5): (2100, 2520),
}

# (r, kappa, d_lo, d_hi) -> (rows, cols)
REFERENCE_TABLE2 = {
    (4, 8, 0, 4): (9504, 5940), (4, 8, 3, 4): (4032, 3528),
    (4, 7, 0, 4): (5544, 3960),
    (4, 6, 0, 4): (3024, 2520), (4, 6, 2, 4): (2232, 2220),
    (4, 5, 0, 4): (1512, 1512),
    (5, 7, 0, 5): (11088, 9504), (5, 7, 2, 4): (9660, 9072),
    (5, 6, 0, 5): (5544, 5544),
}

CSV_COLUMNS = ("m", "n", "K", "r", "d_lo", "d_hi", "b", "rows", "cols", "ratio")


def table_rows(which: int) -> list[dict]:
    """Rows of Table 1 or 2 computed from the closed forms."""
    out = []
    if which == 1:
        for m, n, K, r in TABLE1_ROWS:
            c = counts(m, n, K, r)
            out.append(dict(m=m, n=n, K=K, r=r, d_lo=0, d_hi=r, b=1,
                            rows=c.total_eqs, cols=c.total_vars,
                            ratio=round(c.ratio, 4)))
    elif which == 2:
        for r, kappa, (lo, hi) in TABLE2_ROWS:
            m, n, K = 12, kappa + r, 12
            c = counts(m, n, K, r)
            rows, cols = c.range_size(lo, hi)
            out.append(dict(m=m, n=n, K=K, r=r, d_lo=lo, d_hi=hi, b=1,
                            rows=rows, cols=cols, ratio=round(c.ratio, 4)))
    else:
        raise ValueError("only tables 1 and 2 are closed-form")
    return out
