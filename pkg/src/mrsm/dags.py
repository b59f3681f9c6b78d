"""Synthetic quasi-dyadic alternant keys and their reduction to a structured MinRank instance.

Fields: the public code lives over the base field F_q (q = 2^e); the support
and multiplier live over F_{q^2}.  Base-field data is stored embedded into
F_{q^2} whenever it enters a MinRank matrix, so elimination runs over F_{q^2}.

Index conventions (0-based): position ``p = blk * 2^gamma + j`` of a length-n
vector lies in dyadic block ``blk`` at offset ``j``; bit ``i`` of ``j`` says
whether ``b_{i+1}`` is added, i.e. ``g_j = sum_i bit_i(j) b_{i+1}``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .combi import binom
from .ff import FieldCtx, SubfieldEmbedding, ff_make
from .linalg import MatGF, echelon, matmul, projective_normalize, rref_array, solve_linear
from .mr import MRInstance, eval_array, ks_kernel

NORMALIZATIONS = ("none", "fix_tau", "fix_tau_b1")


class DimensionMismatch(RuntimeError):
    pass


class RankDefect(RuntimeError):
    pass


class AttackFailed(RuntimeError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class DagsParams:
    e: int
    n0: int
    k0: int
    gamma: int
    c: int = 0
    a0: int = 0

    @property
    def block(self) -> int:
        return 1 << self.gamma

    @property
    def n(self) -> int:
        return self.n0 * self.block

    @property
    def k(self) -> int:
        return self.k0 * self.block

    @property
    def t(self) -> int:
        return (self.n - self.k) // 2

    def validate(self) -> None:
        if self.e < 1 or 2 * self.e > 16:
            raise ValueError("need 1 <= e <= 8 so that F_{q^2} fits the field tables")
        if self.gamma < 1 or not 0 < self.k0 < self.n0:
            raise ValueError("need gamma >= 1 and 0 < k0 < n0")
        if (self.n - self.k) % 2:
            raise ValueError("n - k must be even")
        if self.gamma > 2 * self.e:
            raise ValueError("b_1..b_gamma cannot be F_2-independent in F_{q^2}")
        if self.n0 > (1 << (2 * self.e - self.gamma)):
            raise ValueError("not enough disjoint cosets tau + G for n0 blocks")
        if self.c and self.k0 - self.a0 - self.c < 1:
            raise ValueError("need k0 - a0 - c >= 1")

    def as_dict(self) -> dict:
        return {"e": self.e, "n0": self.n0, "k0": self.k0, "gamma": self.gamma,
                "c": self.c, "a0": self.a0}


LEVELS = {
    1: DagsParams(e=5, n0=52, k0=26, gamma=4, c=4, a0=18),
    3: DagsParams(e=6, n0=38, k0=16, gamma=5, c=4, a0=7),
    5: DagsParams(e=6, n0=33, k0=11, gamma=6, c=2, a0=6),
}


def dyadic_pattern(gamma: int, i: int) -> np.ndarray:
    """e_i = 1_{2^(gamma-i)} (x) (0,1) (x) 1_{2^(i-1)} for 1 <= i <= gamma."""
    if not 1 <= i <= gamma:
        raise ValueError("i out of range")
    return np.kron(np.kron(np.ones(1 << (gamma - i), dtype=np.int64), np.array([0, 1])),
                   np.ones(1 << (i - 1), dtype=np.int64))


def group_vector(ext: FieldCtx, b) -> np.ndarray:
    """g = sum_i b_i e_i, the 2^gamma elements of the group spanned by b."""
    gamma = len(b)
    g = np.zeros(1 << gamma, dtype=np.int64)
    for i, bi in enumerate(b, start=1):
        g ^= dyadic_pattern(gamma, i) * int(bi)
    return g.astype(ext.dtype)


# field helpers -------------------------------------------------------------

class Tower:
    """F_q inside F_{q^2} with the F_q-basis {1, beta} of F_{q^2}, beta = generator."""

    def __init__(self, e: int):
        self.base = ff_make(e)
        self.ext = ff_make(2 * e)
        self.emb = SubfieldEmbedding(self.base, self.ext)
        self.beta = 2
        self._inv_tr_beta = self.ext.inv(self.emb.trace_ext(self.beta))

    def split(self, z):
        """Coordinates (a, b) in F_q with z = a + b*beta (arrays of base elements)."""
        ext = self.ext
        z = np.asarray(z).astype(ext.dtype)
        b = ext.vmul(self.emb.trace_ext(z), self._inv_tr_beta)
        a = z ^ ext.vmul(b, self.beta)
        return self.emb.restrict(a), self.emb.restrict(b)

    def embed(self, a):
        return self.emb.embed(a)

    def frob(self, z):
        return self.emb.frobenius(z)


def kernel(ctx: FieldCtx, A: np.ndarray) -> np.ndarray:
    return echelon(ctx, A).kernel_basis()


def row_basis(ctx: FieldCtx, A: np.ndarray) -> np.ndarray:
    R, piv = rref_array(ctx, A)
    return R[: len(piv)]


# key generation ------------------------------------------------------------

@dataclass
class DagsKeypair:
    params: DagsParams
    tower: Tower = field(repr=False)
    b: np.ndarray  # gamma elements of F_{q^2}
    tau: np.ndarray  # n0 elements of F_{q^2}
    y_blocks: np.ndarray  # n0 nonzero elements of F_{q^2}
    x_support: np.ndarray
    y_mult: np.ndarray
    H_pub: np.ndarray  # (n-k) x n over F_q, reduced row echelon form
    seed: int = 0
    attempts: int = 1

    @property
    def g(self) -> np.ndarray:
        return group_vector(self.tower.ext, self.b)

    @property
    def G_pub(self) -> np.ndarray:
        """Generator matrix of the public code (k x n over F_q)."""
        return kernel(self.tower.base, self.H_pub)


def _independent_b(ext: FieldCtx, gamma: int, rng) -> np.ndarray:
    while True:
        b = rng.integers(1, ext.q, size=gamma)
        span = {0}
        ok = True
        for v in b:
            v = int(v)
            if v in span:
                ok = False
                break
            span |= {s ^ v for s in span}
        if ok:
            return b.astype(ext.dtype)


def _disjoint_taus(ext: FieldCtx, g: np.ndarray, n0: int, rng) -> np.ndarray:
    used = np.zeros(ext.q, dtype=bool)
    out = []
    for z in rng.permutation(ext.q):
        if used[z ^ g.astype(np.int64)].any():
            continue
        used[z ^ g.astype(np.int64)] = True
        out.append(z)
        if len(out) == n0:
            return np.array(out).astype(ext.dtype)
    raise ValueError("not enough disjoint cosets")


def alternant_parity(tower: Tower, x: np.ndarray, y: np.ndarray, t: int) -> np.ndarray:
    """Rows y_j x_j^u (u < t) over F_{q^2}, expanded to 2t rows over F_q."""
    ext = tower.ext
    rows = np.empty((t, len(x)), dtype=ext.dtype)
    cur = y.astype(ext.dtype)
    for u in range(t):
        rows[u] = cur
        cur = ext.vmul(cur, x)
    a, b = tower.split(rows)
    return np.concatenate([a, b], axis=0)


def keygen(params: DagsParams, seed: int, max_attempts: int = 50) -> DagsKeypair:
    params.validate()
    tower = Tower(params.e)
    ext, base = tower.ext, tower.base
    blk = params.block
    ss = np.random.SeedSequence(seed)
    for attempt in range(1, max_attempts + 1):
        rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0] if attempt > 1 else ss))
        b = _independent_b(ext, params.gamma, rng)
        g = group_vector(ext, b)
        tau = _disjoint_taus(ext, g, params.n0, rng)
        yb = ext.random(rng, params.n0, nonzero=True)
        x = (np.repeat(tau, blk) ^ np.tile(g, params.n0)).astype(ext.dtype)
        y = np.repeat(yb, blk).astype(ext.dtype)
        H = alternant_parity(tower, x, y, params.t)
        H_pub = row_basis(base, H)
        if params.n - H_pub.shape[0] != params.k:
            ss = ss.spawn(1)[0]
            continue
        return DagsKeypair(params, tower, b, tau, yb, x, y, H_pub, seed, attempt)
    raise DimensionMismatch(f"no key of dimension k={params.k} after {max_attempts} draws")


# invariant code and compressed system --------------------------------------

def invariant_code(base: FieldCtx, H_pub: np.ndarray, gamma: int, k0: int | None = None):
    """Invariant subcode: kernel of H_pub stacked with block-constancy conditions.

    Returns (G_inv, G_tilde) with G_inv = G_tilde (x) 1_{2^gamma}.
    """
    n = H_pub.shape[1]
    blk = 1 << gamma
    if n % blk:
        raise ValueError("length not divisible by the block size")
    n0 = n // blk
    cond = np.zeros((n0 * (blk - 1), n), dtype=base.dtype)
    row = 0
    for bi in range(n0):
        for j in range(1, blk):
            cond[row, bi * blk] = 1
            cond[row, bi * blk + j] = 1
            row += 1
    G_inv = kernel(base, np.concatenate([H_pub, cond], axis=0))
    if k0 is not None and G_inv.shape[0] != k0:
        raise DimensionMismatch(f"invariant code has dimension {G_inv.shape[0]}, expected {k0}")
    G_tilde = G_inv[:, ::blk].copy()
    return G_inv, G_tilde


def compress(H_pub: np.ndarray, gamma: int):
    """H_tilde = H_pub (I (x) 1^T) and H_tilde_i = H_pub (I (x) e_i^T) for i = 1..gamma."""
    blk = 1 << gamma
    n = H_pub.shape[1]
    n0 = n // blk
    Hr = H_pub.reshape(H_pub.shape[0], n0, blk)
    Ht = np.bitwise_xor.reduce(Hr, axis=2)
    His = []
    for i in range(1, gamma + 1):
        mask = dyadic_pattern(gamma, i).astype(bool)
        His.append(np.bitwise_xor.reduce(Hr[:, :, mask], axis=2))
    return Ht, His


def systematic(base: FieldCtx, G_tilde: np.ndarray):
    """Row-reduce G_tilde to (I G) after a block-column permutation (identity if possible)."""
    R, piv = rref_array(base, G_tilde)
    k0, n0 = G_tilde.shape
    if len(piv) != k0:
        raise DimensionMismatch("invariant generator is rank deficient")
    perm = np.concatenate([piv, np.setdiff1d(np.arange(n0), piv)])
    Gs = R[:k0][:, perm]
    return Gs, perm


@dataclass
class SchurSystem:
    """Row-normalised compressed parity data.

    ``Hs`` is (n0-k0) x n0 equal to (G^T I) for the systematic G_tilde = (I G);
    ``His`` are the matching transforms of H_tilde_i; ``dropped_zero`` records
    whether the rows removed by the selection vanish on the invariant code.
    """

    Hs: np.ndarray
    His: list
    transform: np.ndarray
    m_eff: int
    dropped_zero: bool


def schur_system(base: FieldCtx, G_tilde: np.ndarray, H_pub: np.ndarray, gamma: int) -> SchurSystem:
    k0, n0 = G_tilde.shape
    Ht, His = compress(H_pub, gamma)
    nrows = Ht.shape[0]
    # record the row transform: rref of (Ht | I)
    aug = np.concatenate([Ht, np.eye(nrows, dtype=base.dtype)], axis=1)
    R_aug, piv = rref_array(base, aug, ncols_pivot=n0)
    m_eff = len(piv)
    if m_eff != n0 - k0:
        raise RankDefect(f"compressed parity has rank {m_eff}, expected {n0 - k0}")
    T = R_aug[:, n0:]
    RH = R_aug[:, :n0]
    # bring the kept rows to (G^T I): columns k0.. must carry an identity
    top = RH[:m_eff]
    S = top[:, k0:]
    sol = solve_linear(MatGF(base, S), MatGF(base, np.eye(m_eff, dtype=base.dtype)))
    Sinv = sol.X.data
    Hs = matmul(base, Sinv, top)
    T_keep = matmul(base, Sinv, T[:m_eff])
    His_s = [matmul(base, T_keep, Hi) for Hi in His]
    GtT = G_tilde.T.copy()
    dropped = True
    for Hi in His:
        rest = matmul(base, T[m_eff:], Hi)
        if rest.size and matmul(base, rest, GtT).any():
            dropped = False
    return SchurSystem(Hs, His_s, T_keep, m_eff, dropped)


# reduction to MinRank --------------------------------------------------------

@dataclass
class CompressedKey:
    """Public data after block permutation and shortening.

    ``H_pub`` has the dropped blocks removed; ``G_tilde`` = (I G) is the
    compressed invariant generator; ``tau`` and ``b`` are the planted secrets
    restricted to the kept blocks (kept for validation only).
    """

    params: DagsParams
    tower: Tower = field(repr=False)
    H_pub: np.ndarray
    G_tilde: np.ndarray
    schur: SchurSystem
    tau: np.ndarray
    b: np.ndarray
    block_order: np.ndarray  # original block index of each kept block

    @property
    def n0(self) -> int:
        return self.G_tilde.shape[1]

    @property
    def k0(self) -> int:
        return self.G_tilde.shape[0]


def _permute_blocks(H: np.ndarray, order: np.ndarray, blk: int) -> np.ndarray:
    cols = (np.asarray(order)[:, None] * blk + np.arange(blk)[None, :]).ravel()
    return H[:, cols]


def compress_key(kp: DagsKeypair, a0: int = 0) -> CompressedKey:
    """Invariant code, systematic block order, shortening on the first a0 blocks."""
    P, tw = kp.params, kp.tower
    base, blk = tw.base, P.block
    _, Gt = invariant_code(base, kp.H_pub, P.gamma, P.k0)
    _, order = systematic(base, Gt)
    H = _permute_blocks(kp.H_pub, order, blk)
    return shorten(CompressedKey(P, tw, H, systematic(base, Gt[:, order])[0],
                                 None, kp.tau[order], kp.b.copy(), order), a0)


def shorten(ck: CompressedKey, a0: int) -> CompressedKey:
    """Shorten on the first a0 blocks (information blocks of the systematic form)."""
    P, tw = ck.params, ck.tower
    base, blk = tw.base, P.block
    if not 0 <= a0 < ck.k0 - max(P.c, 0):
        raise ValueError("need 0 <= a0 < k0 - c")
    H = ck.H_pub[:, a0 * blk:]
    _, Gt = invariant_code(base, H, P.gamma, ck.k0 - a0)
    Gs, order = systematic(base, Gt)
    H = _permute_blocks(H, order, blk)
    schur = schur_system(base, Gs, H, P.gamma)
    kept = ck.block_order[a0:][order]
    return CompressedKey(P, tw, H, Gs, schur, ck.tau[a0:][order], ck.b, kept)


@dataclass
class DagsMRInstance:
    inst: MRInstance
    tags: list  # ("tau", j) or ("b", i) per matrix, 0-based
    normalization: str
    key: CompressedKey = field(repr=False)
    admissible: dict = field(default_factory=dict)  # name -> projective vector


def tau_matrix(ck: CompressedKey, j: int) -> np.ndarray:
    """H_tilde_{*,j} G_tilde_{*,j}^T over F_q."""
    base = ck.tower.base
    return base.vmul(ck.schur.Hs[:, j][:, None], ck.G_tilde[:, j][None, :])


def b_matrix(ck: CompressedKey, i: int) -> np.ndarray:
    base = ck.tower.base
    return matmul(base, ck.schur.His[i], ck.G_tilde.T)


def planted_full(ck: CompressedKey) -> np.ndarray:
    """(tau, b) over F_{q^2} in the variable order of normalization 'none'."""
    return np.concatenate([ck.tau, ck.b]).astype(ck.tower.ext.dtype)


def build_minrank(ck: CompressedKey, c: int, normalization: str = "fix_tau",
                  col_shift: int = 0) -> DagsMRInstance:
    """MinRank instance in the support variables.

    ``col_shift`` rotates the k0 columns; the attack uses it when the trailing
    c columns of the planted matrix happen to be dependent.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    tw = ck.tower
    ext = tw.ext
    n0, gamma = ck.n0, ck.params.gamma
    tags = [("tau", j) for j in range(n0)] + [("b", i) for i in range(gamma)]
    if normalization in ("fix_tau", "fix_tau_b1"):
        tags.remove(("tau", n0 - 1))
    if normalization == "fix_tau_b1":
        tags.remove(("b", 0))
    mats = np.stack([tw.embed(tau_matrix(ck, v) if kind == "tau" else b_matrix(ck, v))
                     for kind, v in tags]).astype(ext.dtype)
    if col_shift:
        mats = np.ascontiguousarray(np.roll(mats, -col_shift, axis=2))
    inst = MRInstance(ext, c, mats)
    out = DagsMRInstance(inst, tags, normalization, ck)
    out.admissible = admissible_solutions(ck, tags, normalization)
    return out


def _select(full: np.ndarray, tags, n0: int) -> np.ndarray:
    idx = [j if kind == "tau" else n0 + j for kind, j in tags]
    return full[idx]


def admissible_solutions(ck: CompressedKey, tags, normalization: str) -> dict:
    """Planted solutions in the instance's variables, projectively normalised.

    'x' is the planted (tau, b) shifted so that tau_{n0} = 0, 'xq'
    its Frobenius conjugate, and 'trace' is Tr(x / b_1) (which has b_1 = 0).
    """
    tw = ck.tower
    ext = tw.ext
    full = planted_full(ck)
    n0 = ck.n0
    # affine representative with tau_{n0} = 0 (x -> x + const preserves the code)
    full = full.copy()
    full[:n0] ^= ext.dtype(int(full[n0 - 1]))
    xs = ext.vmul(full, ext.inv(int(full[n0])))  # b_1 = 1
    tr = tw.emb.trace_ext(xs)
    out = {}
    if normalization != "fix_tau_b1":
        out["x"] = projective_normalize(ext, _select(full, tags, n0))
        out["xq"] = projective_normalize(ext, _select(tw.frob(full), tags, n0))
    out["trace"] = projective_normalize(ext, _select(tr, tags, n0))
    return out


# appendix checkpoints --------------------------------------------------------

def full_support(ck: CompressedKey) -> np.ndarray:
    """x = tau (x) 1 + sum_i b_i (1 (x) e_i) on the kept blocks, over F_{q^2}."""
    ext, gamma = ck.tower.ext, ck.params.gamma
    return (np.repeat(ck.tau, 1 << gamma) ^ np.tile(group_vector(ext, ck.b), ck.n0)).astype(ext.dtype)


def planted_U(dm: DagsMRInstance) -> np.ndarray | None:
    """U^T = C of the trace solution, from the kernel of its evaluated matrix."""
    tr = dm.admissible["trace"]
    return ks_kernel(dm.inst.ctx, eval_array(dm.inst.ctx, dm.inst.mats, tr), dm.inst.r)


def _lift(ck: CompressedKey, A: np.ndarray) -> np.ndarray:
    return ck.tower.embed(A).astype(ck.tower.ext.dtype)


@dataclass
class Checkpoint:
    name: str
    lhs_equals_rhs: bool
    residual_zero: bool

    @property
    def ok(self) -> bool:
        return self.lhs_equals_rhs and self.residual_zero


def appendix_checkpoints(ck: CompressedKey, c: int) -> list[Checkpoint]:
    """Evaluate both sides of each rewriting step at the planted key.

    1. Schur generator times x^T against (I U) G~ ((I (x) 1) * x) H_pub^T.
    2. (I (x) 1) * x against Diag(tau)(I (x) 1) + sum_i b_i (I (x) e_i).
    3. The compressed form (H~ Diag(tau) G~^T + sum b_i H~_i G~^T)(I; U^T) against
       the transpose of step 1, and the normalised MinRank form at the planted point.
    """
    tw, P = ck.tower, ck.params
    ext = tw.ext
    blk, n0, k0 = P.block, ck.n0, ck.k0
    dm = build_minrank(ck, c, "none")
    C = planted_U(dm)
    if C is not None:
        IU = np.concatenate([np.eye(k0 - c, dtype=ext.dtype), C.T], axis=1)  # (I U)
    else:
        # trailing columns dependent: any basis of the kernel plays the role of (I U)
        tr = eval_array(ext, dm.inst.mats, dm.admissible["trace"])
        IU = kernel(ext, tr)
        if IU.shape[0] != k0 - c:
            raise RankDefect("planted matrix does not have rank c")
    x = full_support(ck)
    Gt = _lift(ck, ck.G_tilde)
    Hp = _lift(ck, ck.H_pub)
    ones = np.ones((1, blk), dtype=ext.dtype)
    I1 = np.kron(np.eye(n0, dtype=ext.dtype), ones)  # I (x) 1, n0 x n
    Ginv = matmul(ext, Gt, I1)
    A = matmul(ext, IU, Ginv)
    # step 1: Schur generator row by row
    schur = np.empty((A.shape[0] * Hp.shape[0], A.shape[1]), dtype=ext.dtype)
    for a in range(A.shape[0]):
        schur[a * Hp.shape[0]:(a + 1) * Hp.shape[0]] = ext.vmul(A[a][None, :], Hp)
    lhs1 = matmul(ext, schur, x[:, None]).reshape(A.shape[0], Hp.shape[0])
    Ix = ext.vmul(I1, x[None, :])
    rhs1 = matmul(ext, matmul(ext, matmul(ext, IU, Gt), Ix), Hp.T)
    out = [Checkpoint("schur_transpose", bool(np.array_equal(lhs1, rhs1)), not lhs1.any())]
    # step 2: Kronecker-diagonal expansion
    rhs2 = matmul(ext, np.diag(ck.tau).astype(ext.dtype), I1)
    for i in range(1, P.gamma + 1):
        rhs2 ^= ext.vmul(np.kron(np.eye(n0, dtype=np.int64), dyadic_pattern(P.gamma, i)).astype(ext.dtype),
                         int(ck.b[i - 1]))
    out.append(Checkpoint("kronecker_diagonal", bool(np.array_equal(Ix, rhs2)),
                          not matmul(ext, matmul(ext, matmul(ext, IU, Gt), rhs2), Hp.T).any()))
    # step 3: compressed form, then the normalised MinRank form
    Ht, His = compress(ck.H_pub, P.gamma)
    Ht, His = _lift(ck, Ht), [_lift(ck, h) for h in His]
    form = matmul(ext, matmul(ext, Ht, np.diag(ck.tau).astype(ext.dtype)), Gt.T)
    for i, Hi in enumerate(His):
        form ^= ext.vmul(matmul(ext, Hi, Gt.T), int(ck.b[i]))
    V = np.ascontiguousarray(IU.T)
    lhs3 = matmul(ext, form, V)
    Mx = eval_array(ext, dm.inst.mats, planted_full(ck))
    out.append(Checkpoint("minrank_form", bool(np.array_equal(lhs3, rhs1.T)),
                          not lhs3.any() and not matmul(ext, Mx, V).any()))
    return out


# rank profile ----------------------------------------------------------------

def predicted_block_rank(m_eff: int, k0: int, c: int, d: int) -> int:
    rows = m_eff * binom(k0 - c, d + 1) * binom(c, d)
    return min(rows, binom(k0 - c, d + 1) * (m_eff * binom(c - 1, d) + binom(c, d + 1) * d))


def check_dags_rank(dm: DagsMRInstance, d: int) -> tuple[int, int]:
    """(measured rank of the single block E(d), predicted rank)."""
    from .solve import assemble, make_strategy

    m, n, K, r = dm.inst.shape
    if not 0 <= d <= r:
        raise ValueError("need 0 <= d <= c")
    s = make_strategy(m, n, K, r, d, d, n, 1)
    measured = assemble(dm.inst, s).rank if s.raw_rows else 0
    return measured, predicted_block_rank(m, n, r, d)


# attack ----------------------------------------------------------------------

def _left_kernel(ctx: FieldCtx, N: np.ndarray) -> np.ndarray:
    return kernel(ctx, np.ascontiguousarray(N.T))


def rank_one_elements(ctx: FieldCtx, P: np.ndarray, ratios, limit: int = 4):
    """Yield w = u (x) p in the span of the slices P[k] (D x rows x cols).

    Row ratios are searched in ``ratios``, one row at a time; each choice cuts
    the coefficient space by a linear condition, so the search is depth-first
    over at most rows * |ratios| small eliminations per branch.
    """
    D, nrows, _ = P.shape
    ratios = [int(z) for z in ratios]
    found = 0

    def combo(B, row):
        return matmul(ctx, B, P[:, row, :])

    def dfs(B, ref, row):
        nonlocal found
        if found >= limit or B.shape[0] == 0:
            return
        if row == nrows:
            if ref is None:
                return
            refv = combo(B, ref)
            k = int(np.flatnonzero(refv.any(axis=1))[0])
            w = np.zeros(P.shape[1:], dtype=ctx.dtype)
            for j in range(D):
                if B[k, j]:
                    w ^= ctx.vmul(P[j], int(B[k, j]))
            found += 1
            yield w
            return
        if ref is None:
            if combo(B, row).any():
                yield from dfs(B, row, row + 1)
            mu = _left_kernel(ctx, combo(B, row))
            if mu.shape[0]:
                yield from dfs(matmul(ctx, mu, B), None, row + 1)
            return
        base_ref = combo(B, ref)
        cur = combo(B, row)
        for beta in ratios:
            mu = _left_kernel(ctx, cur ^ ctx.vmul(base_ref, beta))
            if not mu.shape[0]:
                continue
            B2 = matmul(ctx, mu, B)
            if combo(B2, ref).any():
                yield from dfs(B2, ref, row + 1)
            if found >= limit:
                return

    yield from dfs(np.eye(D, dtype=ctx.dtype), None, 0)


def _C_from_plucker(cmap, p: np.ndarray, r: int, n: int, ctx: FieldCtx) -> np.ndarray | None:
    groups = list(cmap.groups())
    g0 = next(i for i, (d, *_rest) in enumerate(groups) if d == 0)
    if not p[g0]:
        return None
    p = ctx.vmul(p, ctx.inv(int(p[g0])))
    C = np.zeros((r, n - r), dtype=ctx.dtype)
    for i, (d, T, J, _) in enumerate(groups):
        if d == 1:
            C[T[0], J[0]] = p[i]
    return C


def x_space(inst: MRInstance, C: np.ndarray) -> np.ndarray:
    """Basis of {x : M_x (I; C) = 0}."""
    ctx = inst.ctx
    n, r = inst.n, inst.r
    V = np.concatenate([np.eye(n - r, dtype=ctx.dtype), C], axis=0)
    L = np.stack([matmul(ctx, inst.mats[i], V).ravel() for i in range(inst.K)], axis=1)
    return kernel(ctx, L)


def _pencil_points(ctx: FieldCtx, X: np.ndarray):
    if X.shape[0] == 1:
        yield X[0]
        return
    if X.shape[0] == 2:
        yield X[1]
        for t in range(ctx.q):
            yield X[0] ^ ctx.vmul(X[1], t)
        return
    for row in X:  # larger spaces: basis vectors only
        yield row


@dataclass
class AttackReport:
    params: DagsParams
    seed: int
    normalization: str
    matrix_rows: int
    matrix_cols: int
    rank: int
    kernel_dim: int
    block_ranks: list
    candidates: list
    matched_planted: bool
    matched: list
    wall_time_ms: float
    keygen_ms: float
    kept_blocks: list
    recovered_tau: list | None = None
    col_shift: int = 0

    def as_dict(self) -> dict:
        return {"params": self.params.as_dict(), "seed": self.seed,
                "normalization": self.normalization,
                "matrix_rows": self.matrix_rows, "matrix_cols": self.matrix_cols,
                "rank": self.rank, "kernel_dim": self.kernel_dim,
                "block_ranks": self.block_ranks, "candidates": self.candidates,
                "matched_planted": self.matched_planted, "matched": self.matched,
                "wall_time_ms": round(self.wall_time_ms, 1),
                "keygen_ms": round(self.keygen_ms, 1),
                "kept_blocks": self.kept_blocks, "recovered_tau": self.recovered_tau,
                "col_shift": self.col_shift}


def _classify(dm: DagsMRInstance, x: np.ndarray) -> list[str]:
    return [name for name, v in dm.admissible.items() if np.array_equal(x, v)]


def extract_support(dm: DagsMRInstance, system, max_candidates: int = 8) -> list[dict]:
    """Candidates from the kernel of the eliminated Macaulay matrix.

    The kernel is projected onto the monomials b_i * |C|_{T,J}; the planted
    point shows up there as a rank-one tensor b (x) p whose ratios lie in F_q.
    p gives C (its degree-one minors), and x follows from the linear system
    M_x (I; C) = 0.
    """
    inst, ck = dm.inst, dm.key
    ctx = inst.ctx
    m, n, K, r = inst.shape
    cmap = system.colmap
    KB = system.echelon.kernel_basis()
    if KB.shape[0] == 0:
        return []
    G = KB.shape[1] // K
    bidx = [i for i, (kind, _) in enumerate(dm.tags) if kind == "b"] or list(range(K))
    W = KB.reshape(KB.shape[0], G, K)[:, :, bidx].transpose(0, 2, 1).reshape(KB.shape[0], -1)
    R, piv = rref_array(ctx, W)
    P = np.ascontiguousarray(R[: len(piv)].reshape(len(piv), len(bidx), G))
    tau_last = ("tau", ck.n0 - 1) in dm.tags
    out, seen = [], set()
    for w in rank_one_elements(ctx, P, ck.tower.emb.image):
        p = w[np.flatnonzero(w.any(axis=1))[0]]
        C = _C_from_plucker(cmap, p, r, n, ctx)
        if C is None:
            continue
        X = x_space(inst, C)
        if tau_last and X.shape[0]:
            # quotient out the constant shift of the support
            col = dm.tags.index(("tau", ck.n0 - 1))
            X = _restrict_zero(ctx, X, col)
        pts = []
        for x in _pencil_points(ctx, X):
            if not x.any():
                continue
            x = projective_normalize(ctx, x)
            key = x.tobytes()
            if key in seen:
                continue
            cert = echelon(ctx, eval_array(ctx, inst.mats, x)).rank
            if cert > r:
                continue
            seen.add(key)
            pts.append((x, cert))
        if len(pts) > max_candidates:
            # a pencil of solutions sharing C: keep the points of lowest rank and
            # the F_q-rational point with b_1 = 0 (the trace)
            low = min(cp for _, cp in pts)
            emb = ck.tower.emb
            b1 = dm.tags.index(("b", 0)) if ("b", 0) in dm.tags else None
            pts = [(x, cp) for x, cp in pts if cp == low or
                   (b1 is not None and not x[b1] and bool(np.all(emb.in_base(x))))]
        for x, cert in pts[:max_candidates]:
            out.append({"x": x, "certificate": int(cert), "kinds": _classify(dm, x)})
        if out:
            break
    return out


def _restrict_zero(ctx: FieldCtx, X: np.ndarray, col: int) -> np.ndarray:
    """Sub-basis of span(X) with coordinate ``col`` equal to zero."""
    mu = _left_kernel(ctx, X[:, [col]])
    return matmul(ctx, mu, X) if mu.shape[0] else mu


def attack(params: DagsParams, seed: int = 0, normalization: str = "fix_tau",
           keypair: DagsKeypair | None = None, measure_blocks: bool = True,
           max_shifts: int = 4) -> AttackReport:
    from .solve import assemble, make_strategy

    if params.c < 1:
        raise ValueError("the attack needs the codimension c >= 1")
    t0 = time.perf_counter()
    kp = keypair if keypair is not None else keygen(params, seed)
    ck = compress_key(kp, params.a0)
    t1 = time.perf_counter()
    # the chart (I; C) needs the last c columns of M_x independent; if nothing
    # certifies, rotate the columns and try again
    for attempt in range(max_shifts):
        shift = attempt * params.c % ck.k0
        dm = build_minrank(ck, params.c, normalization, shift)
        m, n, K, r = dm.inst.shape
        system = assemble(dm.inst, make_strategy(m, n, K, r, 0, r, n, 1))
        system.eliminate()
        cands = extract_support(dm, system)
        if cands:
            break
    t2 = time.perf_counter()
    blocks = []
    if measure_blocks:
        for d in range(r + 1):
            meas, pred = check_dags_rank(dm, d)
            blocks.append({"d": d, "rows": m * binom(n - r, d + 1) * binom(r, d),
                           "measured": meas, "predicted": pred})
    matched = sorted({k for cnd in cands for k in cnd["kinds"]})
    rec = None
    for cnd in cands:
        if "trace" in cnd["kinds"] or "x" in cnd["kinds"]:
            rec = [int(cnd["x"][dm.tags.index(("tau", j))]) if ("tau", j) in dm.tags else 0
                   for j in range(ck.n0)]
            break
    rep = AttackReport(params, seed, normalization, system.nrows, system.ncols, system.rank,
                       system.kernel_dim, blocks,
                       [{"x": c["x"].astype(int).tolist(), "certificate": c["certificate"],
                         "kinds": c["kinds"]} for c in cands],
                       bool(matched), matched, (t2 - t1) * 1e3, (t1 - t0) * 1e3,
                       ck.block_order.astype(int).tolist(), rec, shift)
    return rep


# keypair files ----------------------------------------------------------------

KEY_FORMAT_VERSION = 1


def _hex_rows(A: np.ndarray) -> list[str]:
    return [bytes(row.astype(np.uint8)).hex() for row in A]


def _from_hex_rows(rows, dtype) -> np.ndarray:
    return np.array([np.frombuffer(bytes.fromhex(r), dtype=np.uint8) for r in rows]).astype(dtype)


def keypair_to_dict(kp: DagsKeypair) -> dict:
    """Public matrix plus the planted secrets (kept so the attack can be validated)."""
    tw = kp.tower
    return {"format_version": KEY_FORMAT_VERSION, "kind": "dags-keypair",
            "params": kp.params.as_dict(), "seed": kp.seed, "attempts": kp.attempts,
            "base_modulus_hex": hex(tw.base.modulus), "ext_modulus_hex": hex(tw.ext.modulus),
            "planted": {"b": kp.b.astype(int).tolist(), "tau": kp.tau.astype(int).tolist(),
                        "y_blocks": kp.y_blocks.astype(int).tolist()},
            "H_pub_hex": _hex_rows(kp.H_pub)}


def keypair_from_dict(doc: dict) -> DagsKeypair:
    if doc.get("format_version") != KEY_FORMAT_VERSION or doc.get("kind") != "dags-keypair":
        raise ValueError("not a keypair file of a supported version")
    params = DagsParams(**doc["params"])
    params.validate()
    tw = Tower(params.e)
    if int(doc["base_modulus_hex"], 16) != tw.base.modulus or int(doc["ext_modulus_hex"], 16) != tw.ext.modulus:
        raise ValueError("field moduli in the file do not match the field tables")
    ext, blk = tw.ext, params.block
    pl = doc["planted"]
    b = np.array(pl["b"]).astype(ext.dtype)
    tau = np.array(pl["tau"]).astype(ext.dtype)
    yb = np.array(pl["y_blocks"]).astype(ext.dtype)
    x = (np.repeat(tau, blk) ^ np.tile(group_vector(ext, b), params.n0)).astype(ext.dtype)
    H = _from_hex_rows(doc["H_pub_hex"], tw.base.dtype)
    return DagsKeypair(params, tw, b, tau, yb, x, np.repeat(yb, blk).astype(ext.dtype), H,
                       int(doc["seed"]), int(doc["attempts"]))
