"""Exhaustive MinRank search for tiny instances.

Deliberately self-contained: field arithmetic is carry-less multiplication
reduced by the modulus, and rank is plain Gaussian elimination on Python
ints.  Nothing here goes through the table-driven code in ``ff``/``linalg``,
so it can serve as an independent reference for the solver.
"""

from __future__ import annotations

from itertools import product


def gf_mul(a: int, b: int, modulus: int) -> int:
    deg = modulus.bit_length() - 1
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= modulus
    return out


def gf_inv(a: int, modulus: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    q = 1 << (modulus.bit_length() - 1)
    # a^(q-2) by square-and-multiply
    out, base, k = 1, a, q - 2
    while k:
        if k & 1:
            out = gf_mul(out, base, modulus)
        base = gf_mul(base, base, modulus)
        k >>= 1
    return out


def gf_rank(rows: list[list[int]], modulus: int) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = gf_inv(rows[rank][col], modulus)
        rows[rank] = [gf_mul(v, inv, modulus) for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [u ^ gf_mul(f, v, modulus) for u, v in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def projective_points(q: int, K: int):
    """Each point of P^{K-1}(GF(q)) once, first nonzero coordinate equal to 1."""
    for lead in range(K):
        for tail in product(range(q), repeat=K - lead - 1):
            yield (0,) * lead + (1,) + tail


def combine(mats, x, modulus: int) -> list[list[int]]:
    K, m, n = len(mats), len(mats[0]), len(mats[0][0])
    out = [[0] * n for _ in range(m)]
    for k in range(K):
        if not x[k]:
            continue
        for i in range(m):
            row, src = out[i], mats[k][i]
            for j in range(n):
                if src[j]:
                    row[j] ^= gf_mul(x[k], src[j], modulus)
    return out


def brute_force(mats, r: int, modulus: int) -> list[tuple[int, ...]]:
    """All projective x with rank(sum x_i M_i) <= r, sorted."""
    mats = [[[int(v) for v in row] for row in M] for M in mats]
    q = 1 << (modulus.bit_length() - 1)
    return sorted(x for x in projective_points(q, len(mats))
                  if gf_rank(combine(mats, x, modulus), modulus) <= r)
