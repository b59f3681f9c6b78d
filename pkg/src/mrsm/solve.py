"""Macaulay assembly, strategy planning, elimination and solution extraction."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import combi
from .combi import binom, colex_index, colex_subsets
from .ff import FieldCtx
from .linalg import Echelon, echelon, projective_normalize, rref_array
from .model import block_keys, row_terms
from .mr import MRInstance, eval_array, ks_kernel, puncture

MAX_CANDIDATES = 8


class NoStrategy(RuntimeError):
    pass


class NoSolutionExtracted(RuntimeError):
    pass


class AmbiguousSolution(RuntimeError):
    def __init__(self, candidates):
        super().__init__(f"{len(candidates)} certified candidates")
        self.candidates = candidates


@dataclass(frozen=True)
class Strategy:
    d_lo: int
    d_hi: int
    width: int
    b: int
    predicted_rows: int
    predicted_cols: int
    raw_rows: int

    @property
    def cost(self) -> int:
        return self.raw_rows * self.predicted_cols ** 2

    def as_dict(self) -> dict:
        return {"d_lo": self.d_lo, "d_hi": self.d_hi, "width": self.width, "b": self.b,
                "predicted_rows": self.predicted_rows, "predicted_cols": self.predicted_cols,
                "raw_rows": self.raw_rows}


def make_strategy(m: int, n: int, K: int, r: int, d_lo: int = 0, d_hi: int | None = None,
                  width: int | None = None, b: int = 1) -> Strategy:
    d_hi = r if d_hi is None else d_hi
    width = n if width is None else width
    if not 0 <= d_lo <= d_hi <= r:
        raise ValueError(f"invalid block range {d_lo}..{d_hi} for r={r}")
    if not r + 1 <= width <= n:
        raise ValueError(f"puncture width must be in {r + 1}..{n}")
    if b == 1:
        c = combi.counts(m, width, K, r)
        rows, cols = c.range_size(d_lo, d_hi)
        return Strategy(d_lo, d_hi, width, 1, rows, cols, rows)
    if b == 2:
        if (d_lo, d_hi) != (0, r):
            raise ValueError("b=2 is only assembled over the full block range")
        c2 = combi.b2_counts(m, width, K, r)
        return Strategy(0, r, width, 2, c2["eqs"], c2["monomials"], c2["raw_rows"])
    raise ValueError("b must be 1 or 2")


def candidates(m: int, n: int, K: int, r: int) -> list[Strategy]:
    """All b=1 strategies predicted to leave a one-dimensional kernel, cheapest first.

    If none exists, the single b=2 strategy over all blocks at full width is
    returned when it is predicted to be solvable.
    """
    out = []
    for width in range(r + 1, n + 1):
        for d_lo in range(r + 1):
            for d_hi in range(d_lo, r + 1):
                s = make_strategy(m, n, K, r, d_lo, d_hi, width, 1)
                if s.raw_rows > 0 and s.predicted_cols > 1 \
                        and s.predicted_rows >= s.predicted_cols - 1:
                    out.append(s)
    if not out:
        s = make_strategy(m, n, K, r, 0, r, n, 2)
        if s.predicted_rows >= s.predicted_cols - 1:
            out.append(s)
    out.sort(key=lambda s: (s.cost, s.width, s.d_lo, s.d_hi))
    return out


def plan(inst_or_shape) -> Strategy:
    shape = inst_or_shape.shape if isinstance(inst_or_shape, MRInstance) else inst_or_shape
    cands = candidates(*shape)
    if not cands:
        raise NoStrategy(f"no b<=2 strategy predicted to solve shape {shape}")
    return cands[0]


# column layout -------------------------------------------------------------

class ColumnMap:
    """Canonical monomial order: degree descending, colex T, colex J, then i (or pair)."""

    def __init__(self, n: int, r: int, K: int, degrees, b: int = 1):
        self.n, self.r, self.K, self.b = n, r, K, b
        self.degrees = sorted(set(degrees), reverse=True)
        self.width = K if b == 1 else K * (K + 1) // 2
        self.offset = {}
        pos = 0
        for d in self.degrees:
            self.offset[d] = pos
            pos += binom(n - r, d) * binom(r, d) * self.width
        self.ncols = pos
        self.level = np.empty(pos, dtype=np.int64)
        for d in self.degrees:
            self.level[self.offset[d]: self.offset[d] + self.block_size(d)] = d

    def block_size(self, d: int) -> int:
        return binom(self.n - self.r, d) * binom(self.r, d) * self.width

    def group(self, T, J) -> int:
        """First column of the group of monomials sharing |C|_{T,J}."""
        d = len(T)
        nJ = binom(self.n - self.r, d)
        idx = colex_index(self.r, d)[tuple(T)] * nJ + colex_index(self.n - self.r, d)[tuple(J)]
        return self.offset[d] + idx * self.width

    def groups(self):
        """(d, T, J, first column) for every group in column order."""
        for d in self.degrees:
            for T in colex_subsets(self.r, d):
                for J in colex_subsets(self.n - self.r, d):
                    yield d, T, J, self.group(T, J)


def pair_index(i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


@dataclass
class MacaulaySystem:
    ctx: FieldCtx
    shape: tuple[int, int, int, int]
    strategy: Strategy
    colmap: ColumnMap
    matrix: np.ndarray
    row_block: np.ndarray  # E(d) block of each row
    echelon: Echelon | None = field(default=None, repr=False)

    @property
    def nrows(self) -> int:
        return self.matrix.shape[0]

    @property
    def ncols(self) -> int:
        return self.matrix.shape[1]

    def eliminate(self) -> Echelon:
        if self.echelon is None:
            self.echelon = echelon(self.ctx, self.matrix, inplace=True)
        return self.echelon

    @property
    def rank(self) -> int:
        return self.eliminate().rank

    @property
    def kernel_dim(self) -> int:
        return self.ncols - self.rank


def assemble(inst: MRInstance, strategy: Strategy) -> MacaulaySystem:
    """Build the Macaulay matrix of E(d_lo..d_hi) (times each x_j when b=2)."""
    if strategy.width != inst.n:
        inst = puncture(inst, width=strategy.width)
    ctx, (m, n, K, r) = inst.ctx, inst.shape
    lo, hi, b = strategy.d_lo, strategy.d_hi, strategy.b
    if hi < lo:
        raise ValueError("empty strategy")
    degrees = range(lo, min(hi + 1, r) + 1)
    cmap = ColumnMap(n, r, K, degrees, b)
    nrows = sum(combi.rows_E(m, n, K, r, d) for d in range(lo, hi + 1)) * (K if b == 2 else 1)
    A = np.zeros((nrows, cmap.ncols), dtype=ctx.dtype)
    row_block = np.empty(nrows, dtype=np.int64)
    # coefficient blocks: coef[t] is m x K with entry (ell, i) = M_i[ell, t]
    coef = np.ascontiguousarray(inst.mats.transpose(2, 1, 0))
    pairs = np.array([[pair_index(i, j) for j in range(K)] for i in range(K)], dtype=np.int64)
    ells = np.arange(m)
    R0 = 0
    for d in range(hi, lo - 1, -1):
        for J, T in block_keys(n, r, d):
            terms = [(col, cmap.group(Tp, Jp)) for col, Tp, Jp in row_terms(n, r, J, T)]
            if b == 1:
                for col, g in terms:
                    A[R0:R0 + m, g:g + K] = coef[col]
                row_block[R0:R0 + m] = d
                R0 += m
            else:
                for j in range(K):
                    rows = R0 + ells * K + j
                    for col, g in terms:
                        A[rows[:, None], g + pairs[:, j][None, :]] = coef[col]
                row_block[R0:R0 + m * K] = d
                R0 += m * K
    assert R0 == nrows
    return MacaulaySystem(ctx, inst.shape, strategy, cmap, A, row_block)


def monomial_vector(inst: MRInstance, cmap: ColumnMap, x, C) -> np.ndarray:
    """Values of every column monomial at (x, C); used to check assembled rows."""
    from .model import MinorTable

    ctx, K = inst.ctx, inst.K
    mt = MinorTable(ctx, C)
    out = np.zeros(cmap.ncols, dtype=ctx.dtype)
    x = np.asarray(x)
    if cmap.b == 1:
        xs = x
    else:
        xs = np.zeros(cmap.width, dtype=ctx.dtype)
        for i in range(K):
            for j in range(i, K):
                xs[pair_index(i, j)] = ctx.mul(int(x[i]), int(x[j]))
    for d, T, J, g in cmap.groups():
        out[g:g + cmap.width] = ctx.vmul(xs, mt(T, J))
    return out


# degree falls -------------------------------------------------------------

@dataclass
class DegreeFalls:
    per_block: dict
    pivots_per_level: dict
    linear_in_x: np.ndarray


def degree_falls(sys: MacaulaySystem) -> DegreeFalls:
    """Count independent rows whose leading monomial dropped to V(d) or below.

    A row of E(d) naturally starts in V(d+1); after elimination it counts as a
    fall if its pivot lies at level <= d.  Pivot rows at level 0 are linear
    forms in x (b=1) and are returned as a matrix with K columns.
    """
    ech = sys.eliminate()
    cmap = sys.colmap
    piv = ech.pivots
    lev = cmap.level[piv]
    origin = sys.row_block[ech.pivrow[piv]]
    per_block = {d: int(np.count_nonzero((origin == d) & (lev <= d)))
                 for d in range(sys.strategy.d_lo, sys.strategy.d_hi + 1)}
    per_level = {d: int(np.count_nonzero(lev == d)) for d in cmap.degrees}
    if 0 in cmap.degrees and cmap.b == 1:
        g = cmap.offset[0]
        rows = ech.pivrow[piv[lev == 0]]
        lin = ech.data[rows, g:g + cmap.width].copy()
    else:
        lin = np.zeros((0, cmap.width), dtype=sys.ctx.dtype)
    return DegreeFalls(per_block, per_level, lin)


# extraction ---------------------------------------------------------------

@dataclass
class Solution:
    x: np.ndarray
    C: np.ndarray | None
    certificate: int  # rank of M_x

    def as_dict(self) -> dict:
        return {"x": self.x.astype(int).tolist(),
                "C": None if self.C is None else self.C.astype(int).tolist(),
                "rank_certificate": self.certificate}


def x_from_vector(ctx: FieldCtx, cmap: ColumnMap, v: np.ndarray) -> np.ndarray | None:
    """Read x from the first group of monomials x_i * |C|_{T,J} that is not zero."""
    w = cmap.width
    nz = np.flatnonzero(v)
    if not len(nz):
        return None
    K = cmap.K
    if cmap.b == 1:
        g = nz[0] - (nz[0] - cmap.offset[cmap.level[nz[0]]]) % w
        return projective_normalize(ctx, v[g:g + w])
    # b = 2: group holds x_i x_j c; pick a nonzero diagonal x_j0^2 c
    for start in np.unique(nz - (nz - np.array([cmap.offset[l] for l in cmap.level[nz]])) % w):
        grp = v[start:start + w]
        diag = [grp[pair_index(j, j)] for j in range(K)]
        j0 = next((j for j in range(K) if diag[j]), None)
        if j0 is not None:
            col = np.array([grp[pair_index(i, j0)] for i in range(K)], dtype=ctx.dtype)
            return projective_normalize(ctx, col)
    return None


def certify(inst: MRInstance, x) -> Solution:
    ctx = inst.ctx
    Mx = eval_array(ctx, inst.mats, x)
    rk = echelon(ctx, Mx).rank
    C = ks_kernel(ctx, Mx, inst.r) if rk <= inst.r else None
    return Solution(np.asarray(x, dtype=ctx.dtype), C, rk)


def _linear_solution(ctx: FieldCtx, lin: np.ndarray, K: int) -> np.ndarray | None:
    if lin.shape[0] == 0:
        return None
    R, piv = rref_array(ctx, lin)
    if len(piv) != K - 1:
        return None
    free = [c for c in range(K) if c not in set(piv.tolist())][0]
    x = np.zeros(K, dtype=ctx.dtype)
    x[free] = 1
    for row, p in enumerate(piv):
        x[p] = R[row, free]
    return projective_normalize(ctx, x)


def _kernel_points(ctx: FieldCtx, basis: np.ndarray, limit: int):
    """Yield projective points of the span of ``basis`` (all, if few enough)."""
    k = basis.shape[0]
    total = sum(ctx.q ** j for j in range(k))  # number of normalised coefficient vectors
    if total <= limit:
        for lead in range(k):
            for tail in product(range(ctx.q), repeat=k - lead - 1):
                coeffs = np.zeros(k, dtype=np.int64)
                coeffs[lead] = 1
                coeffs[lead + 1:] = tail
                v = np.zeros(basis.shape[1], dtype=ctx.dtype)
                for c, row in zip(coeffs, basis):
                    if c:
                        v ^= ctx.vmul(row, int(c))
                yield v
    else:
        for row in basis[:MAX_CANDIDATES]:
            yield row


def extract(sys: MacaulaySystem, inst: MRInstance, exhaustive_limit: int = 0,
            rng: np.random.Generator | None = None) -> Solution:
    """Recover x (and C) from the eliminated system.

    With a one-dimensional kernel the answer is read from the kernel vector.
    Larger kernels yield candidates from the basis (or from every projective
    point when there are at most ``exhaustive_limit``); certified distinct
    candidates other than a single one raise AmbiguousSolution.
    """
    ctx, K = inst.ctx, inst.K
    if sys.strategy.width != inst.n:
        inst = puncture(inst, width=sys.strategy.width)
    if K == 1:
        sol = certify(inst, np.ones(1, dtype=ctx.dtype))
        if sol.certificate > inst.r:
            raise NoSolutionExtracted("the single matrix has rank above r")
        return sol
    ech = sys.eliminate()
    x = _linear_solution(ctx, degree_falls(sys).linear_in_x, K) if sys.colmap.b == 1 else None
    if x is not None:
        sol = certify(inst, x)
        if sol.certificate <= inst.r:
            return sol
    sols = candidate_solutions(sys, inst, exhaustive_limit, rng)
    if not sols:
        raise NoSolutionExtracted(f"kernel of dimension {sys.kernel_dim} gave no certified x")
    if len(sols) > 1:
        raise AmbiguousSolution(sols)
    return sols[0]


def candidate_solutions(sys: MacaulaySystem, inst: MRInstance, exhaustive_limit: int = 0,
                        rng=None) -> list[Solution]:
    ctx = inst.ctx
    ech = sys.eliminate()
    kdim = sys.kernel_dim
    if kdim == 0:
        return []
    basis = ech.kernel_basis()
    seen, out = set(), []
    for v in _kernel_points(ctx, basis, exhaustive_limit):
        x = x_from_vector(ctx, sys.colmap, v)
        if x is None:
            continue
        key = x.tobytes()
        if key in seen:
            continue
        seen.add(key)
        sol = certify(inst, x)
        if sol.certificate <= inst.r:
            out.append(sol)
    out.sort(key=lambda s: s.x.tolist())
    return out


# driver -------------------------------------------------------------------

@dataclass
class SolveReport:
    strategy: Strategy
    matrix_rows: int
    matrix_cols: int
    rank: int
    kernel_dim: int
    solution: Solution | None
    falls: DegreeFalls
    wall_time_ms: float
    attempts: list = field(default_factory=list)
    candidates: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"strategy": self.strategy.as_dict(), "matrix_rows": self.matrix_rows,
               "matrix_cols": self.matrix_cols, "rank": self.rank,
               "kernel_dim": self.kernel_dim,
               "x": None if self.solution is None else self.solution.x.astype(int).tolist(),
               "rank_certificate": None if self.solution is None else self.solution.certificate,
               "linear_forms_in_x": int(self.falls.linear_in_x.shape[0]),
               "degree_falls": {str(k): v for k, v in self.falls.per_block.items()},
               "wall_time_ms": round(self.wall_time_ms, 1)}
        if self.candidates:
            out["candidates"] = [s.as_dict() for s in self.candidates]
        if self.attempts:
            out["attempts"] = self.attempts
        return out


def run_strategy(inst: MRInstance, strategy: Strategy, exhaustive_limit: int = 0) -> SolveReport:
    t0 = time.perf_counter()
    sys = assemble(inst, strategy)
    sys.eliminate()
    falls = degree_falls(sys)
    sol, cands = None, []
    try:
        sol = extract(sys, inst, exhaustive_limit)
    except AmbiguousSolution as exc:
        cands = exc.candidates
    except NoSolutionExtracted:
        pass
    ms = (time.perf_counter() - t0) * 1000
    return SolveReport(strategy, sys.nrows, sys.ncols, sys.rank, sys.kernel_dim, sol, falls, ms,
                       candidates=cands)


def solve(inst: MRInstance, strategy: Strategy | None = None, max_attempts: int = 4,
          exhaustive_limit: int = 0) -> SolveReport:
    """Solve with the given strategy, or walk the planner's list until one succeeds."""
    if strategy is not None:
        return run_strategy(inst, strategy, exhaustive_limit)
    cands = candidates(*inst.shape)
    if not cands:
        raise NoStrategy(f"no b<=2 strategy predicted to solve shape {inst.shape}")
    attempts = []
    rep = None
    for s in cands[:max_attempts]:
        rep = run_strategy(inst, s, exhaustive_limit)
        if rep.solution is not None:
            rep.attempts = attempts
            return rep
        attempts.append({"strategy": s.as_dict(), "rank": rep.rank, "kernel_dim": rep.kernel_dim})
    rep.attempts = attempts[:-1]
    return rep


def solution_set(inst: MRInstance, exhaustive_limit: int = 1 << 14) -> list[tuple[int, ...]]:
    """Every certified projective x reachable from the full b=1 Macaulay kernel.

    Meant for tiny instances: all kernel points are enumerated when there are
    at most ``exhaustive_limit`` of them.
    """
    m, n, K, r = inst.shape
    sys = assemble(inst, make_strategy(m, n, K, r, 0, r, n, 1))
    sys.eliminate()
    sols = candidate_solutions(sys, inst, exhaustive_limit)
    return sorted(tuple(int(v) for v in s.x) for s in sols)
