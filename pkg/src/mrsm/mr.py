"""MinRank instances: generation, evaluation, puncturing and file I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ff import FieldCtx, ff_make, field_header
from .linalg import Inconsistent, MatGF, echelon, matmul, projective_normalize, solve_linear

FORMAT_VERSION = 1


@dataclass
class PlantedWitness:
    x: np.ndarray
    C: np.ndarray | None = None


@dataclass
class MRInstance:
    """K matrices of size m x n over GF(2^e); find x != 0 with rank(sum x_i M_i) <= r."""

    ctx: FieldCtx
    r: int
    mats: np.ndarray  # shape (K, m, n)
    witness: PlantedWitness | None = field(default=None, repr=False)

    def __post_init__(self):
        self.mats = self.ctx.asarray(self.mats)
        if self.mats.ndim != 3:
            raise ValueError("mats must have shape (K, m, n)")
        K, m, n = self.mats.shape
        if K < 1:
            raise ValueError("need at least one matrix")
        if not 1 <= self.r < min(m, n):
            raise ValueError(f"target rank r={self.r} must satisfy 1 <= r < min(m, n)")

    @property
    def K(self) -> int:
        return self.mats.shape[0]

    @property
    def m(self) -> int:
        return self.mats.shape[1]

    @property
    def n(self) -> int:
        return self.mats.shape[2]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.m, self.n, self.K, self.r

    def eval(self, x) -> MatGF:
        return MatGF(self.ctx, eval_array(self.ctx, self.mats, x))


def eval_array(ctx: FieldCtx, mats: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (mats.shape[0],):
        raise ValueError(f"x must have length {mats.shape[0]}")
    flat = mats.reshape(mats.shape[0], -1)
    return matmul(ctx, x.reshape(1, -1), flat).reshape(mats.shape[1:])


def eval(inst: MRInstance, x) -> MatGF:  # noqa: A001 - mirrors the operation name
    return inst.eval(x)


def ks_kernel(ctx: FieldCtx, Mx: np.ndarray, r: int) -> np.ndarray | None:
    """C with Mx (I; C) = 0, i.e. Mx2 C = Mx1; None if the last r columns are dependent."""
    n = Mx.shape[1]
    M1, M2 = Mx[:, : n - r], Mx[:, n - r:]
    if echelon(ctx, M2).rank < r:
        return None
    try:
        sol = solve_linear(MatGF(ctx, M2), MatGF(ctx, M1))
    except Inconsistent:
        return None
    return sol.X.data


def gen_planted(ctx: FieldCtx, m: int, n: int, K: int, r: int, seed: int):
    """Planted instance whose witness x has x_K = 1 before normalisation."""
    if K < 2:
        raise ValueError("gen_planted needs K >= 2")
    if not 1 <= r < min(m, n):
        raise ValueError("need 1 <= r < min(m, n)")
    ss = np.random.SeedSequence(seed)
    while True:
        rng = np.random.Generator(np.random.PCG64(ss))
        mats = ctx.random(rng, (K, m, n))
        x = ctx.random(rng, K)
        x[K - 1] = 1
        A = ctx.random(rng, (m, r))
        B = ctx.random(rng, (r, n))
        R = matmul(ctx, A, B)
        if echelon(ctx, R[:, n - r:]).rank == r:
            break
        ss = ss.spawn(1)[0]
    mats[K - 1] = 0
    mats[K - 1] = R ^ eval_array(ctx, mats, x)
    C = ks_kernel(ctx, R, r)
    wit = PlantedWitness(projective_normalize(ctx, x), C)
    return MRInstance(ctx, r, mats, wit), wit


def puncture(inst: MRInstance, keep_cols=None, width: int | None = None) -> MRInstance:
    """Keep a subset of columns.  By default the last ``width`` columns are kept."""
    n, r = inst.n, inst.r
    if keep_cols is None:
        if width is None:
            raise ValueError("give keep_cols or width")
        keep_cols = range(n - width, n)
    keep = sorted(set(int(c) for c in keep_cols))
    if len(keep) <= r:
        raise ValueError("must keep more than r columns")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError("column index out of range")
    if not set(range(n - r, n)) <= set(keep):
        raise ValueError("the last r columns must be kept")
    wit = None
    if inst.witness is not None:
        x = inst.witness.x
        wit = PlantedWitness(x, ks_kernel(inst.ctx, eval_array(inst.ctx, inst.mats[:, :, keep], x), r))
    return MRInstance(inst.ctx, r, inst.mats[:, :, keep].copy(), wit)


def transpose(inst: MRInstance) -> MRInstance:
    mats = np.ascontiguousarray(inst.mats.transpose(0, 2, 1))
    wit = None
    if inst.witness is not None:
        x = inst.witness.x
        wit = PlantedWitness(x, ks_kernel(inst.ctx, eval_array(inst.ctx, mats, x), inst.r))
    return MRInstance(inst.ctx, inst.r, mats, wit)


# file I/O ----------------------------------------------------------------

def to_dict(inst: MRInstance) -> dict:
    out = {"format_version": FORMAT_VERSION, **field_header(inst.ctx),
           "m": inst.m, "n": inst.n, "K": inst.K, "r": inst.r,
           "matrices": inst.mats.astype(int).tolist()}
    if inst.witness is not None:
        w = {"x": inst.witness.x.astype(int).tolist()}
        if inst.witness.C is not None:
            w["C"] = inst.witness.C.astype(int).tolist()
        out["witness"] = w
    return out


def from_dict(doc: dict) -> MRInstance:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    ctx = ff_make(int(doc["e"]))
    if int(doc["modulus_hex"], 16) != ctx.modulus:
        raise ValueError("modulus in file does not match the field table")
    mats = np.array(doc["matrices"], dtype=np.int64).reshape(doc["K"], doc["m"], doc["n"])
    wit = None
    if "witness" in doc:
        w = doc["witness"]
        C = np.array(w["C"], dtype=np.int64).astype(ctx.dtype) if "C" in w else None
        wit = PlantedWitness(ctx.asarray(np.array(w["x"], dtype=np.int64)), C)
    return MRInstance(ctx, int(doc["r"]), mats, wit)


def save(inst: MRInstance, path) -> None:
    Path(path).write_text(json.dumps(to_dict(inst), separators=(",", ":")) + "\n")


def load(path) -> MRInstance:
    return from_dict(json.loads(Path(path).read_text()))
