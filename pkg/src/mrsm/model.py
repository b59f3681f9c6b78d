"""The four MinRank modelings and the explicit Support-Minors row expansion.

Conventions (all indices 0-based):

* ``C`` is r x (n-r) and solutions satisfy ``M_x (I_{n-r}; C) = 0``, so every
  row of ``M_x`` lies in the row space of ``(C I_r)``.
* ``|C|_{T,J}`` is the minor on row set T (subset of range(r)) and column set J
  (subset of range(n-r)); the empty minor is 1.
* The Pluecker coordinate ``c_U`` for an r-subset U of range(n) is the maximal
  minor of ``(C I_r)`` on columns U.  In characteristic 2 no signs appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .combi import binom, colex_index, colex_subsets
from .ff import FieldCtx
from .linalg import det, matmul
from .mr import MRInstance, eval_array


# minors ------------------------------------------------------------------

class MinorTable:
    """All minors |A|_{T,J} with #T = #J, memoised via Laplace expansion on the first row."""

    def __init__(self, ctx: FieldCtx, A: np.ndarray):
        self.ctx = ctx
        self.A = np.asarray(A)
        self._memo: dict = {((), ()): 1}

    def __call__(self, T, J) -> int:
        T, J = tuple(T), tuple(J)
        if len(T) != len(J):
            raise ValueError("minor needs #T == #J")
        key = (T, J)
        val = self._memo.get(key)
        if val is not None:
            return val
        t0, rest = T[0], T[1:]
        acc = 0
        for k, j in enumerate(J):
            a = int(self.A[t0, j])
            if a:
                acc ^= self.ctx.mul(a, self(rest, J[:k] + J[k + 1:]))
        self._memo[key] = acc
        return acc


def plucker_from_C(ctx: FieldCtx, C: np.ndarray) -> dict:
    """c_U = |(C I_r)|_{*,U} for every r-subset U of range(n)."""
    r, nr = C.shape
    n = nr + r
    mt = MinorTable(ctx, C)
    out = {}
    for U in combinations(range(n), r):
        J = tuple(u for u in U if u < nr)
        S = {u - nr for u in U if u >= nr}
        T = tuple(t for t in range(r) if t not in S)
        out[U] = mt(T, J)
    return out


def plucker_key(n: int, r: int, T, J) -> tuple[int, ...]:
    """The r-subset U of range(n) whose coordinate equals |C|_{T,J}."""
    nr = n - r
    comp = [nr + s for s in range(r) if s not in set(T)]
    return tuple(sorted(list(J) + comp))


def V_vector(ctx: FieldCtx, A: np.ndarray, J) -> np.ndarray:
    """V_J(A) for a q x r matrix A and an (r+1)-subset J of its rows."""
    A = np.asarray(A)
    q, r = A.shape
    J = tuple(sorted(J))
    if len(J) != r + 1:
        raise ValueError("J must have r+1 elements")
    out = np.zeros(q, dtype=ctx.dtype)
    for j in J:
        rows = [t for t in J if t != j]
        out[j] = det(ctx, A[rows, :])
    return out


def minor(ctx: FieldCtx, A: np.ndarray, rows, cols) -> int:
    return det(ctx, np.asarray(A)[np.ix_(list(rows), list(cols))])


# assignments and evaluators ----------------------------------------------

@dataclass
class Assignment:
    x: np.ndarray
    C: np.ndarray
    cT: dict | None = field(default=None)

    def with_plucker(self, ctx: FieldCtx) -> "Assignment":
        return Assignment(self.x, self.C, plucker_from_C(ctx, self.C))


def _check(inst: MRInstance, asg: Assignment) -> None:
    if np.shape(asg.x) != (inst.K,):
        raise ValueError("x has the wrong length")
    if np.shape(asg.C) != (inst.r, inst.n - inst.r):
        raise ValueError("C must be r x (n-r)")


def eval_ks(inst: MRInstance, asg: Assignment) -> np.ndarray:
    """M_x (I; C) = M_x^(1) + M_x^(2) C, an m x (n-r) matrix."""
    _check(inst, asg)
    ctx, n, r = inst.ctx, inst.n, inst.r
    Mx = eval_array(ctx, inst.mats, asg.x)
    return Mx[:, : n - r] ^ matmul(ctx, Mx[:, n - r:], asg.C)


def eval_minors(inst: MRInstance, asg: Assignment) -> np.ndarray:
    """All (r+1)-minors of M_x; shape (C(m,r+1), C(n,r+1)) in colex order."""
    _check(inst, asg)
    ctx, r = inst.ctx, inst.r
    Mx = eval_array(ctx, inst.mats, asg.x)
    rs = colex_subsets(inst.m, r + 1)
    cs = colex_subsets(inst.n, r + 1)
    out = np.zeros((len(rs), len(cs)), dtype=ctx.dtype)
    for a, R in enumerate(rs):
        for b, S in enumerate(cs):
            out[a, b] = minor(ctx, Mx, R, S)
    return out


def sm_matrix(inst: MRInstance, asg: Assignment, ell: int) -> np.ndarray:
    """The (r+1) x n matrix (r_ell ; C I_r)."""
    ctx, r = inst.ctx, inst.r
    Mx = eval_array(ctx, inst.mats, asg.x)
    low = np.concatenate([asg.C, np.eye(r, dtype=ctx.dtype)], axis=1)
    return np.vstack([Mx[ell][None, :], low])


def eval_smC(inst: MRInstance, asg: Assignment, ell: int, Tp) -> int:
    """SM-C residual: the minor of (r_ell; C I_r) on the (r+1) columns Tp."""
    _check(inst, asg)
    Tp = sorted(Tp)
    if len(Tp) != inst.r + 1:
        raise ValueError("Tp must have r+1 elements")
    return det(inst.ctx, sm_matrix(inst, asg, ell)[:, Tp])


def eval_smcT(inst: MRInstance, asg: Assignment, ell: int, Tp) -> int:
    """Pluecker form: sum over t in Tp of (M_x)_{ell,t} c_{Tp - t}."""
    _check(inst, asg)
    if asg.cT is None:
        asg = asg.with_plucker(inst.ctx)
    ctx = inst.ctx
    row = eval_array(ctx, inst.mats, asg.x)[ell]
    Tp = tuple(sorted(Tp))
    acc = 0
    for t in Tp:
        acc ^= ctx.mul(int(row[t]), asg.cT[tuple(u for u in Tp if u != t)])
    return acc


# explicit Support-Minors rows --------------------------------------------

@dataclass(frozen=True)
class SMRow:
    """Row E_{J,T,ell}; coeffs are ((i, T', J'), value) with value != 0."""

    d: int
    J: tuple[int, ...]
    T: tuple[int, ...]
    ell: int
    coeffs: tuple


def row_terms(n: int, r: int, J, T):
    """Monomials of E_{J,T,.}: list of (column of M_i, T', J')."""
    nr = n - r
    Tset = set(T)
    out = []
    for j in J:
        out.append((j, tuple(T), tuple(t for t in J if t != j)))
    for s in range(r):
        if s not in Tset:
            out.append((nr + s, tuple(sorted(Tset | {s})), tuple(J)))
    return out


def block_keys(n: int, r: int, d: int):
    """(J, T) pairs of E(d) in canonical order: colex J, then colex T."""
    return [(J, T) for J in colex_subsets(n - r, d + 1) for T in colex_subsets(r, d)]


def emit_block(inst: MRInstance, d: int) -> list[SMRow]:
    m, n, K, r = inst.shape
    if not 0 <= d <= r:
        raise ValueError("d out of range")
    rows = []
    for J, T in block_keys(n, r, d):
        terms = row_terms(n, r, J, T)
        for ell in range(m):
            coeffs = []
            for col, Tp, Jp in terms:
                for i in range(K):
                    v = int(inst.mats[i, ell, col])
                    if v:
                        coeffs.append(((i, Tp, Jp), v))
            rows.append(SMRow(d, J, T, ell, tuple(coeffs)))
    return rows


def eval_row(ctx: FieldCtx, row: SMRow, x, minors: MinorTable) -> int:
    acc = 0
    for (i, Tp, Jp), v in row.coeffs:
        acc ^= ctx.mul(v, ctx.mul(int(x[i]), minors(Tp, Jp)))
    return acc


def smC_columns(n: int, r: int, J, T) -> tuple[int, ...]:
    """T' = J together with the last-r columns not indexed by T."""
    nr = n - r
    return tuple(sorted(list(J) + [nr + s for s in range(r) if s not in set(T)]))


# identity checks ---------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    trials: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _random_assignment(inst: MRInstance, rng) -> Assignment:
    ctx = inst.ctx
    return Assignment(ctx.random(rng, inst.K), ctx.random(rng, (inst.r, inst.n - inst.r)))


def _require_field(inst: MRInstance) -> None:
    if inst.ctx.e < 3:
        raise ValueError("identity checks need a field with e >= 3")


def check_laplace(ctx: FieldCtx, rng, q: int, r: int) -> bool:
    """V_J(A) a^T equals the minor of (a^T A) on rows J."""
    A = ctx.random(rng, (q, r))
    a = ctx.random(rng, q)
    J = tuple(sorted(rng.choice(q, r + 1, replace=False)))
    lhs = ctx.dot(V_vector(ctx, A, J), a)
    rhs = det(ctx, np.concatenate([a[:, None], A], axis=1)[list(J), :])
    return lhs == rhs


def kron(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    out = ctx.vmul(A[:, None, :, None], B[None, :, None, :])
    return out.reshape(A.shape[0] * B.shape[0], A.shape[1] * B.shape[1])


def check_vecrow(ctx: FieldCtx, rng, a: int, b: int, c: int, d: int) -> bool:
    """vec_row(A X Y) = (A kron Y^T) vec_row(X), and the vec_col analogue."""
    A = ctx.random(rng, (a, b))
    X = ctx.random(rng, (b, c))
    Y = ctx.random(rng, (c, d))
    AXY = matmul(ctx, matmul(ctx, A, X), Y)
    ok_row = np.array_equal(AXY.ravel(), matmul(ctx, kron(ctx, A, Y.T), X.ravel()[:, None]).ravel())
    ok_col = np.array_equal(AXY.T.ravel(), matmul(ctx, kron(ctx, Y.T, A), X.T.ravel()[:, None]).ravel())
    return ok_row and ok_col


def check_identity_minors(inst: MRInstance, trials: int, seed: int) -> CheckResult:
    """V_J(M_x^(2)) applied to column i of the KS residual equals |M_x|_{J, {i} + last r}."""
    _require_field(inst)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ctx, (m, n, K, r) = inst.ctx, inst.shape
    rng = np.random.default_rng(seed)
    res = CheckResult("minors", trials)
    for t in range(trials):
        asg = _random_assignment(inst, rng)
        Mx = eval_array(ctx, inst.mats, asg.x)
        ks = eval_ks(inst, asg)
        J = tuple(sorted(rng.choice(m, r + 1, replace=False)))
        i = int(rng.integers(n - r))
        V = V_vector(ctx, Mx[:, n - r:], J)
        lhs = ctx.dot(V, ks[:, i])
        rhs = minor(ctx, Mx, J, [i] + list(range(n - r, n)))
        ok = lhs == rhs
        ok &= check_laplace(ctx, rng, int(rng.integers(r + 1, r + 4)), r)
        ok &= check_vecrow(ctx, rng, *(int(v) for v in rng.integers(1, 5, 4)))
        if not ok:
            res.failures.append({"trial": t, "x": asg.x.tolist(), "C": asg.C.tolist(),
                                 "J": list(J), "i": i})
    return res


def check_identity_smC(inst: MRInstance, trials: int, seed: int) -> CheckResult:
    """E_{J,T,ell} via its coefficient expansion equals the direct SM minor.

    Also checks the KS-combination form e_ell (M_x (I;C)) V_J(C_{T,*})^T and, for
    d = 0, that the row is the KS residual entry itself.
    """
    _require_field(inst)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ctx, (m, n, K, r) = inst.ctx, inst.shape
    nr = n - r
    rng = np.random.default_rng(seed)
    res = CheckResult("smC", trials)
    for t in range(trials):
        asg = _random_assignment(inst, rng)
        mt = MinorTable(ctx, asg.C)
        ks = eval_ks(inst, asg)
        d = int(rng.integers(0, min(r, nr - 1) + 1))
        J = tuple(sorted(int(v) for v in rng.choice(nr, d + 1, replace=False)))
        T = tuple(sorted(int(v) for v in rng.choice(r, d, replace=False)))
        ell = int(rng.integers(m))
        row = _single_row(inst, d, J, T, ell)
        expanded = eval_row(ctx, row, asg.x, mt)
        direct = eval_smC(inst, asg, ell, smC_columns(n, r, J, T))
        # V_J(C_{T,*}) is built from the transpose: (n-r) x d, rows J
        V = V_vector(ctx, asg.C[list(T), :].T, J) if d else _v0(ctx, nr, J)
        combo = ctx.dot(ks[ell], V)
        ok = expanded == direct == combo
        if d == 0:
            ok &= expanded == int(ks[ell, J[0]])
        if not ok:
            res.failures.append({"trial": t, "x": asg.x.tolist(), "C": asg.C.tolist(),
                                 "J": list(J), "T": list(T), "ell": ell})
    return res


def _v0(ctx: FieldCtx, q: int, J) -> np.ndarray:
    out = np.zeros(q, dtype=ctx.dtype)
    out[J[0]] = 1
    return out


def _single_row(inst: MRInstance, d: int, J, T, ell: int) -> SMRow:
    coeffs = []
    for col, Tp, Jp in row_terms(inst.n, inst.r, J, T):
        for i in range(inst.K):
            v = int(inst.mats[i, ell, col])
            if v:
                coeffs.append(((i, Tp, Jp), v))
    return SMRow(d, tuple(J), tuple(T), ell, tuple(coeffs))


def check_ks_in_sm(inst: MRInstance, trials: int, seed: int) -> CheckResult:
    """Every KS residual entry equals the corresponding d = 0 SM row."""
    ctx, (m, n, K, r) = inst.ctx, inst.shape
    rng = np.random.default_rng(seed)
    res = CheckResult("ks_in_sm", trials)
    rows = emit_block(inst, 0)
    for t in range(trials):
        asg = _random_assignment(inst, rng)
        mt = MinorTable(ctx, asg.C)
        ks = eval_ks(inst, asg)
        bad = [(row.J, row.ell) for row in rows
               if eval_row(ctx, row, asg.x, mt) != int(ks[row.ell, row.J[0]])]
        if bad:
            res.failures.append({"trial": t, "rows": bad[:5]})
    return res


def check_plucker(inst: MRInstance, trials: int, seed: int) -> CheckResult:
    """eval_smcT with c_T derived from C equals eval_smC for every (ell, T')."""
    ctx, (m, n, K, r) = inst.ctx, inst.shape
    rng = np.random.default_rng(seed)
    res = CheckResult("plucker", trials)
    for t in range(trials):
        asg = _random_assignment(inst, rng).with_plucker(ctx)
        ell = int(rng.integers(m))
        Tp = tuple(sorted(int(v) for v in rng.choice(n, r + 1, replace=False)))
        if eval_smcT(inst, asg, ell, Tp) != eval_smC(inst, asg, ell, Tp):
            res.failures.append({"trial": t, "ell": ell, "Tp": list(Tp)})
    return res


def monomial_value(x, mt: MinorTable, i: int, T, J) -> int:
    return mt.ctx.mul(int(x[i]), mt(T, J))


def count_block_monomials(n: int, r: int, K: int, d: int) -> int:
    return K * binom(n - r, d) * binom(r, d)


def monomial_position(n: int, r: int, K: int, i: int, T, J) -> int:
    """Index of x_i |C|_{T,J} inside its block V(#T)."""
    d = len(T)
    return (colex_index(r, d)[tuple(T)] * binom(n - r, d) + colex_index(n - r, d)[tuple(J)]) * K + i
