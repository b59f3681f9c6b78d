"""Exact linear algebra over GF(2^e).

Two elimination kernels are provided:

* ``_rref_kernel`` is textbook Gauss-Jordan with the first nonzero entry of
  each column (scanning rows top to bottom) as pivot.  It produces the reduced
  row echelon form and is used for small and medium matrices.
* ``_echelon_kernel`` is a forward elimination tuned for the sparse,
  staircase-shaped Macaulay matrices.  Pivot columns are visited left to
  right, but among the rows whose leading entry sits in the current column
  the sparsest one is taken as pivot, and updates only touch the pivot row's
  support.  Rows are never moved.  The pivot columns (hence the rank and the
  kernel) do not depend on the row choice, so results agree with the
  Gauss-Jordan path exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .ff import FieldCtx


class Inconsistent(ValueError):
    """The linear system A X = B has no solution."""


@numba.njit(cache=True)
def _rref_kernel(A, exp, log, order, ncols_pivot):
    nr, nc = A.shape
    piv = np.empty(min(nr, nc), np.int64)
    sup = np.empty(nc, np.int64)
    lsup = np.empty(nc, np.int64)
    r = 0
    for c in range(ncols_pivot):
        if r == nr:
            break
        p = -1
        for i in range(r, nr):
            if A[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(c, nc):
                t = A[p, k]
                A[p, k] = A[r, k]
                A[r, k] = t
        linv = (order - log[A[r, c]]) % order
        ns = 0
        for k in range(c, nc):
            v = A[r, k]
            if v != 0:
                lv = log[v] + linv
                if lv >= order:
                    lv -= order
                A[r, k] = exp[lv]
                sup[ns] = k
                lsup[ns] = lv
                ns += 1
        for i in range(nr):
            if i == r:
                continue
            f = A[i, c]
            if f == 0:
                continue
            lf = log[f]
            for s in range(ns):
                k = sup[s]
                A[i, k] ^= exp[lf + lsup[s]]
        piv[r] = c
        r += 1
    return piv[:r].copy()


@numba.njit(cache=True)
def _echelon_kernel(A, exp, log, order):
    nr, nc = A.shape
    head = np.full(nc, -1, np.int64)
    nxt = np.full(nr, -1, np.int64)
    nnz = np.zeros(nr, np.int64)
    for i in range(nr - 1, -1, -1):
        cnt = 0
        ld = nc
        for k in range(nc):
            if A[i, k] != 0:
                cnt += 1
                if ld == nc:
                    ld = k
        nnz[i] = cnt
        if ld < nc:
            nxt[i] = head[ld]
            head[ld] = i
    pivrow = np.full(nc, -1, np.int64)
    sup = np.empty(nc, np.int64)
    lsup = np.empty(nc, np.int64)
    cand = np.empty(nr, np.int64)
    for c in range(nc):
        nb = 0
        i = head[c]
        while i >= 0:
            cand[nb] = i
            nb += 1
            i = nxt[i]
        if nb == 0:
            continue
        p = cand[0]
        for t in range(1, nb):
            i = cand[t]
            if nnz[i] < nnz[p] or (nnz[i] == nnz[p] and i < p):
                p = i
        pivrow[c] = p
        linv = (order - log[A[p, c]]) % order
        ns = 0
        for k in range(c, nc):
            v = A[p, k]
            if v != 0:
                lv = log[v] + linv
                if lv >= order:
                    lv -= order
                A[p, k] = exp[lv]
                sup[ns] = k
                lsup[ns] = lv
                ns += 1
        for t in range(nb):
            i = cand[t]
            if i == p:
                continue
            lf = log[A[i, c]]
            delta = 0
            for s in range(ns):
                k = sup[s]
                old = A[i, k]
                new = old ^ exp[lf + lsup[s]]
                A[i, k] = new
                if old == 0:
                    delta += 1
                elif new == 0:
                    delta -= 1
            nnz[i] += delta
            k = c + 1
            while k < nc and A[i, k] == 0:
                k += 1
            if k < nc:
                nxt[i] = head[k]
                head[k] = i
    return pivrow


@numba.njit(cache=True)
def _pivot_rows_csr(A, pivrow):
    nc = A.shape[1]
    total = 0
    for c in range(nc):
        p = pivrow[c]
        if p >= 0:
            for k in range(c + 1, nc):
                if A[p, k] != 0:
                    total += 1
    indptr = np.zeros(nc + 1, np.int64)
    idx = np.empty(total, np.int64)
    val = np.empty(total, A.dtype)
    pos = 0
    for c in range(nc):
        p = pivrow[c]
        if p >= 0:
            for k in range(c + 1, nc):
                if A[p, k] != 0:
                    idx[pos] = k
                    val[pos] = A[p, k]
                    pos += 1
        indptr[c + 1] = pos
    return indptr, idx, val


@numba.njit(cache=True)
def _back_substitute(indptr, idx, val, pivrow, X, exp, log):
    # X: (nvec, nc) with free coordinates preset; pivot coordinates filled in
    nvec, nc = X.shape
    for c in range(nc - 1, -1, -1):
        if pivrow[c] < 0:
            continue
        for v in range(nvec):
            acc = 0
            for s in range(indptr[c], indptr[c + 1]):
                x = X[v, idx[s]]
                if x != 0:
                    acc ^= exp[log[val[s]] + log[x]]
            X[v, c] = acc
    return X


@numba.njit(cache=True)
def _matmul_kernel(A, B, exp, log, out):
    n, m = A.shape
    p = B.shape[1]
    for i in range(n):
        for k in range(m):
            a = A[i, k]
            if a == 0:
                continue
            la = log[a]
            for j in range(p):
                b = B[k, j]
                if b != 0:
                    out[i, j] ^= exp[la + log[b]]
    return out


class MatGF:
    """A dense matrix over GF(2^e)."""

    __slots__ = ("ctx", "data")

    def __init__(self, ctx: FieldCtx, data):
        self.ctx = ctx
        arr = np.asarray(data)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError("matrix data must be two-dimensional")
        self.data = ctx.asarray(arr)

    @classmethod
    def zeros(cls, ctx: FieldCtx, nrows: int, ncols: int) -> "MatGF":
        return cls(ctx, np.zeros((nrows, ncols), dtype=ctx.dtype))

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> "MatGF":
        return cls(ctx, np.eye(n, dtype=ctx.dtype))

    @classmethod
    def from_sparse(cls, ctx: FieldCtx, nrows: int, ncols: int, rows) -> "MatGF":
        """Build from per-row lists of (column, value) pairs."""
        out = np.zeros((nrows, ncols), dtype=ctx.dtype)
        for i, row in enumerate(rows):
            for col, v in row:
                out[i, col] ^= v
        return cls(ctx, out)

    def to_sparse(self) -> list[list[tuple[int, int]]]:
        return [[(int(c), int(row[c])) for c in np.flatnonzero(row)] for row in self.data]

    @property
    def nrows(self) -> int:
        return self.data.shape[0]

    @property
    def ncols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def T(self) -> "MatGF":
        return MatGF(self.ctx, self.data.T.copy())

    def copy(self) -> "MatGF":
        return MatGF(self.ctx, self.data.copy())

    def __eq__(self, other):
        return (isinstance(other, MatGF) and other.ctx == self.ctx
                and other.shape == self.shape and np.array_equal(other.data, self.data))

    def __add__(self, other: "MatGF") -> "MatGF":
        return MatGF(self.ctx, self.data ^ other.data)

    __sub__ = __add__

    def __matmul__(self, other: "MatGF") -> "MatGF":
        return MatGF(self.ctx, matmul(self.ctx, self.data, other.data))

    def scale(self, a: int) -> "MatGF":
        return MatGF(self.ctx, self.ctx.vmul(self.data, a))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __repr__(self):
        return f"MatGF(GF(2^{self.ctx.e}), {self.nrows}x{self.ncols})"


def _tables(ctx: FieldCtx):
    return ctx.exp, ctx.log, ctx.order


def matmul(ctx: FieldCtx, A, B) -> np.ndarray:
    A = np.ascontiguousarray(A, dtype=ctx.dtype)
    B = np.ascontiguousarray(B, dtype=ctx.dtype)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    out = np.zeros((A.shape[0], B.shape[1]), dtype=ctx.dtype)
    return _matmul_kernel(A, B, ctx.exp, ctx.log, out)


def matvec(ctx: FieldCtx, A, v) -> np.ndarray:
    return matmul(ctx, A, np.asarray(v).reshape(-1, 1)).ravel()


def _as_array(M) -> tuple[FieldCtx | None, np.ndarray]:
    if isinstance(M, MatGF):
        return M.ctx, M.data
    return None, np.asarray(M)


def rref_array(ctx: FieldCtx, A, ncols_pivot: int | None = None):
    """Reduced row echelon form of a copy of A; returns (R, pivots)."""
    R = np.array(A, dtype=ctx.dtype, copy=True, order="C")
    if R.ndim != 2:
        raise ValueError("expected a matrix")
    if R.shape[0] == 0 or R.shape[1] == 0:
        return R, np.zeros(0, np.int64)
    ncp = R.shape[1] if ncols_pivot is None else ncols_pivot
    piv = _rref_kernel(R, *_tables(ctx), ncp)
    return R, piv


def rref(M: MatGF):
    """Return (R, pivot columns, rank) with R the reduced row echelon form."""
    R, piv = rref_array(M.ctx, M.data)
    return MatGF(M.ctx, R), [int(c) for c in piv], len(piv)


@dataclass
class Echelon:
    """Result of the sparse-aware forward elimination.

    ``pivrow[c]`` is the (original) row index holding the pivot of column c,
    or -1 for a free column.  ``data`` is the eliminated matrix, pivot rows
    normalised to a leading 1; non-pivot rows are zero.
    """

    ctx: FieldCtx
    data: np.ndarray
    pivrow: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.pivrow >= 0))

    @property
    def pivots(self) -> np.ndarray:
        return np.flatnonzero(self.pivrow >= 0)

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(self.pivrow < 0)

    def _csr(self):
        if not hasattr(self, "_csr_cache"):
            self._csr_cache = _pivot_rows_csr(self.data, self.pivrow)
        return self._csr_cache

    def complete(self, X: np.ndarray) -> np.ndarray:
        """Fill pivot coordinates of X (nvec x ncols) so each row is in the kernel."""
        X = np.ascontiguousarray(X, dtype=self.ctx.dtype)
        indptr, idx, val = self._csr()
        return _back_substitute(indptr, idx, val, self.pivrow, X, self.ctx.exp, self.ctx.log)

    def kernel_basis(self, reduce: bool = True) -> np.ndarray:
        free = self.free
        X = np.zeros((len(free), self.data.shape[1]), dtype=self.ctx.dtype)
        X[np.arange(len(free)), free] = 1
        X = self.complete(X)
        if reduce and len(free):
            X, _ = rref_array(self.ctx, X)
        return X

    def random_kernel_vectors(self, count: int, rng: np.random.Generator) -> np.ndarray:
        free = self.free
        X = np.zeros((count, self.data.shape[1]), dtype=self.ctx.dtype)
        X[:, free] = self.ctx.random(rng, (count, len(free)))
        return self.complete(X)


def echelon(ctx: FieldCtx, A, inplace: bool = False) -> Echelon:
    data = A if inplace else np.array(A, dtype=ctx.dtype, copy=True, order="C")
    if data.shape[0] == 0 or data.shape[1] == 0:
        return Echelon(ctx, data, np.full(data.shape[1], -1, np.int64))
    pivrow = _echelon_kernel(data, *_tables(ctx))
    return Echelon(ctx, data, pivrow)


def rank(M) -> int:
    ctx, A = _as_array(M)
    if ctx is None:
        raise TypeError("rank() needs a MatGF")
    return echelon(ctx, A).rank


def right_kernel(M: MatGF) -> MatGF:
    """Basis of {v : M v^T = 0}, rows in reduced row echelon form."""
    ech = echelon(M.ctx, M.data)
    return MatGF(M.ctx, ech.kernel_basis())


@dataclass
class LinearSolution:
    X: MatGF
    kernel: MatGF


def solve_linear(A: MatGF, B: MatGF) -> LinearSolution:
    """One solution X of A X = B (free variables set to 0) plus ker(A)."""
    if A.nrows != B.nrows:
        raise ValueError("A and B must have the same number of rows")
    ctx = A.ctx
    n = A.ncols
    aug = np.concatenate([A.data, B.data], axis=1)
    R, piv = rref_array(ctx, aug, ncols_pivot=n)
    rk = len(piv)
    if R[rk:, n:].any():
        raise Inconsistent("A X = B has no solution")
    X = np.zeros((n, B.ncols), dtype=ctx.dtype)
    X[piv, :] = R[:rk, n:]
    free = np.setdiff1d(np.arange(n), piv)
    ker = np.zeros((len(free), n), dtype=ctx.dtype)
    ker[np.arange(len(free)), free] = 1
    # pivot variables: x_p = sum over free f of R[row(p), f] * x_f (char 2)
    for row, p in enumerate(piv):
        ker[:, p] = R[row, free]
    if len(free):
        ker, _ = rref_array(ctx, ker)
    return LinearSolution(MatGF(ctx, X), MatGF(ctx, ker))


def det(ctx: FieldCtx, A) -> int:
    """Determinant of a square matrix (char 2: row swaps do not change sign)."""
    A = np.asarray(A)
    n = A.shape[0]
    if n == 0:
        return 1
    R = np.array(A, dtype=ctx.dtype, copy=True)
    out = 1
    for c in range(n):
        nz = np.flatnonzero(R[c:, c])
        if not len(nz):
            return 0
        p = c + nz[0]
        if p != c:
            R[[c, p]] = R[[p, c]]
        pv = int(R[c, c])
        out = ctx.mul(out, pv)
        inv = ctx.inv(pv)
        R[c] = ctx.vmul(R[c], inv)
        below = np.flatnonzero(R[c + 1:, c]) + c + 1
        if len(below):
            R[below] ^= ctx.vmul(R[below, c][:, None], R[c][None, :])
    return out


def projective_normalize(ctx: FieldCtx, v) -> np.ndarray:
    """Scale v so its first nonzero coordinate is 1."""
    v = np.asarray(v, dtype=ctx.dtype)
    nz = np.flatnonzero(v)
    if not len(nz):
        return v.copy()
    return ctx.vmul(v, ctx.inv(int(v[nz[0]])))
