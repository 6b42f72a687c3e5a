import pytest
from hypothesis import given, strategies as st

from concatgmd.finite_field import DEFAULT_PRIMITIVE_POLYS, FieldError, GF2m, build_tables, get_field


def clmul_mod(a, b, poly, w):
    """Schoolbook polynomial product over GF(2) reduced mod ``poly``."""
    prod = 0
    for i in range(w):
        if b >> i & 1:
            prod ^= a << i
    for deg in range(2 * w - 2, w - 1, -1):
        if prod >> deg & 1:
            prod ^= poly << (deg - w)
    return prod


@pytest.mark.parametrize(
    "w, poly, antilog",
    [(3, 0b1011, [1, 2, 4, 3, 6, 7, 5]), (1, 0b11, [1]), (2, 0b111, [1, 2, 3])],
)
def test_tables_small_fields(w, poly, antilog):
    log, exp = build_tables(w, poly)
    assert exp == antilog
    # oracle: repeated multiplication by x
    x, seq = 1, []
    for _ in range((1 << w) - 1):
        seq.append(x)
        x = clmul_mod(x, 2 % (1 << w) if w > 1 else 1, poly, w)
    assert seq == antilog
    assert all(log[v] == i for i, v in enumerate(exp))


def test_gf8_tables_are_inverse_permutations():
    log, exp = build_tables(3, 0b1011)
    assert sorted(exp) == list(range(1, 8))
    assert [exp[log[v]] for v in range(1, 8)] == list(range(1, 8))


@pytest.mark.parametrize("w", sorted(DEFAULT_PRIMITIVE_POLYS))
def test_default_polynomials_are_primitive(w):
    gf = GF2m(w)
    g = gf.generator
    assert gf.pow(g, gf.q - 1) == 1
    if w <= 12:
        seen = {gf.pow(g, k) for k in range(1, gf.q - 1)}
        assert 1 not in seen and len(seen) == gf.q - 2


@pytest.mark.parametrize("w, poly", [(3, 0b1001), (4, 0b11111), (4, 0b10101), (3, 0b111)])
def test_rejects_bad_polynomials(w, poly):
    with pytest.raises(FieldError):
        GF2m(w, poly)


def test_gf8_mul_example():
    gf = get_field(3)
    assert gf.mul(2, 4) == 3
    assert gf.inv(1) == 1
    with pytest.raises(FieldError):
        gf.inv(0)
    with pytest.raises(FieldError):
        gf.check(8)


@pytest.mark.parametrize("w", [2, 3, 4, 5, 8])
def test_mul_matches_schoolbook_exhaustively(w):
    gf = get_field(w)
    step = 1 if w <= 5 else 7
    for a in range(0, gf.q, step):
        for b in range(gf.q):
            assert gf.mul(a, b) == clmul_mod(a, b, gf.primitive_poly, w)


elements8 = st.integers(0, 255)


@given(elements8, elements8, elements8)
def test_field_axioms_gf256(a, b, c):
    gf = get_field(8)
    assert gf.add(a, a) == 0
    assert gf.mul(a, b) == gf.mul(b, a)
    assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))
    assert gf.mul(a, b ^ c) == gf.mul(a, b) ^ gf.mul(a, c)
    if a:
        assert gf.mul(a, gf.inv(a)) == 1
        assert gf.div(gf.mul(a, b), a) == b


@given(st.integers(0, 65535), st.integers(0, 65535))
def test_inverse_gf65536(a, b):
    gf = get_field(16)
    if a:
        assert gf.mul(a, gf.inv(a)) == 1
    assert gf.mul(a, b) == clmul_mod(a, b, gf.primitive_poly, 16)


@given(st.integers(1, 15), st.integers(-40, 40))
def test_pow_matches_repeated_multiplication(a, n):
    gf = get_field(4)
    ref = 1
    base = a if n >= 0 else gf.inv(a)
    for _ in range(abs(n)):
        ref = gf.mul(ref, base)
    assert gf.pow(a, n) == ref
