import numpy as np
import pytest

from mrsm.ff import SubfieldEmbedding, ff_make, ff_mul, ff_inv, ff_pow, field_header, is_primitive, modulus_for


@pytest.mark.parametrize("e", range(1, 17))
def test_moduli_are_primitive_or_prime_field(e):
    poly = modulus_for(e)
    assert poly.bit_length() - 1 == e
    if e > 1:
        assert is_primitive(poly, e)


def test_fixed_moduli():
    expected = {2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1000011,
                7: 0b10000011, 8: 0b100011101, 10: 0b10000001001, 12: 0b1000001010011}
    for e, poly in expected.items():
        assert modulus_for(e) == poly


def test_gf8_tables(gf8):
    assert int(gf8.exp[1]) == 2
    assert int(gf8.exp[3]) == 3
    assert ff_mul(gf8, 2, 2) == 4
    assert ff_mul(gf8, 4, 2) == 3


def test_gf32_size():
    assert ff_make(5).q == 32


def test_gf2_is_and_xor():
    F = ff_make(1)
    for a in (0, 1):
        for b in (0, 1):
            assert F.mul(a, b) == (a & b)
            assert F.add(a, b) == (a ^ b)
    assert F.inv(1) == 1


@pytest.mark.parametrize("e", [2, 5, 8, 11, 16])
def test_inverse_random(e):
    F = ff_make(e)
    rng = np.random.default_rng(e)
    for a in F.random(rng, 1000, nonzero=True):
        assert F.mul(int(a), ff_inv(F, int(a))) == 1


@pytest.mark.parametrize("e", range(1, 6))
def test_field_axioms_exhaustive(e):
    F = ff_make(e)
    q = F.q
    el = np.arange(q)
    A, B = np.meshgrid(el, el, indexing="ij")
    prod = F.vmul(A, B)
    assert np.array_equal(prod, prod.T)
    for c in range(q):
        # distributivity a(b + c) = ab + ac, associativity (ab)c = a(bc)
        assert np.array_equal(F.vmul(A, B ^ c), prod ^ F.vmul(A, np.full_like(B, c)))
        assert np.array_equal(F.vmul(prod, c), F.vmul(A, F.vmul(B, c)))


@pytest.mark.parametrize("e", [7, 8])
def test_field_axioms_table_scale(e):
    F = ff_make(e)
    el = np.arange(F.q)
    A, B = np.meshgrid(el, el, indexing="ij")
    prod = F.vmul(A, B)
    assert np.array_equal(prod, prod.T)
    rng = np.random.default_rng(0)
    for c in rng.integers(0, F.q, 8):
        assert np.array_equal(F.vmul(A, B ^ c), prod ^ F.vmul(A, np.full_like(B, c)))
        assert np.array_equal(F.vmul(prod, c), F.vmul(A, F.vmul(B, c)))


@pytest.mark.parametrize("e", range(9, 17))
def test_field_axioms_random(e):
    F = ff_make(e)
    rng = np.random.default_rng(e)
    a, b, c = F.random(rng, (3, 2000))
    assert np.array_equal(F.vmul(F.vmul(a, b), c), F.vmul(a, F.vmul(b, c)))
    assert np.array_equal(F.vmul(a, b ^ c), F.vmul(a, b) ^ F.vmul(a, c))


def test_pow_matches_repeated_mul(gf256):
    for a in (0, 1, 2, 77, 255):
        acc = 1
        for k in range(10):
            assert ff_pow(gf256, a, k) == acc
            acc = gf256.mul(acc, a)
    assert gf256.pow(5, 255) == 1


def test_field_header():
    assert field_header(ff_make(8)) == {"e": 8, "modulus_hex": "0x11d"}


@pytest.mark.parametrize("e", range(1, 7))
def test_trace_of_embedded_is_zero(e):
    emb = SubfieldEmbedding(ff_make(e))
    for a in range(1 << e):
        assert emb.trace_ext(emb.embed(a)) == 0
        assert emb.trace(emb.embed(a)) == 0


@pytest.mark.parametrize("e", range(1, 7))
def test_embedding_is_homomorphism(e):
    base = ff_make(e)
    emb = SubfieldEmbedding(base)
    assert emb.embed(0) == 0 and emb.embed(1) == 1
    for a in range(base.q):
        for b in range(base.q):
            assert emb.embed(base.mul(a, b)) == emb.ext.mul(emb.embed(a), emb.embed(b))
            assert emb.embed(a ^ b) == emb.embed(a) ^ emb.embed(b)


def test_trace_lands_in_subfield_e2():
    emb = SubfieldEmbedding(ff_make(2))
    for z in range(16):
        t = emb.trace_ext(z)
        assert emb.frobenius(t) == t
        assert emb.in_base(t)


@pytest.mark.parametrize("e", range(1, 7))
def test_embedding_image_is_fixed_field(e):
    emb = SubfieldEmbedding(ff_make(e))
    z = np.arange(emb.ext.q)
    fixed = set(np.flatnonzero(emb.frobenius(z) == z).tolist())
    assert fixed == set(int(v) for v in emb.image)
    assert len(fixed) == 1 << e


def test_restrict_rejects_non_subfield():
    emb = SubfieldEmbedding(ff_make(3))
    outside = next(z for z in range(64) if not emb.in_base(z))
    with pytest.raises(ValueError):
        emb.restrict(outside)
