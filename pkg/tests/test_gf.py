import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncswitch import gf


def slow_mul(a, b):
    """Shift-and-reduce reference, independent of the tables."""
    out = 0
    for bit in range(8):
        if (b >> bit) & 1:
            out ^= a << bit
    for bit in range(15, 7, -1):
        if out & (1 << bit):
            out ^= 0x11B << (bit - 8)
    return out


def test_mul_table_matches_reference_everywhere():
    ref = np.array([[slow_mul(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8)
    assert np.array_equal(gf.MUL, ref)


def test_examples():
    assert gf.gf_add(0x57, 0x57) == 0
    assert gf.gf_add(0xAB, 0x00) == 0xAB
    assert gf.gf_add(0x57, 0x83) == 0xD4
    assert gf.gf_sub(0x57, 0x83) == 0xD4
    assert gf.gf_mul(0x01, 0x9C) == 0x9C
    assert gf.gf_mul(0x00, 0x9C) == 0
    assert gf.gf_mul(0x02, 0x80) == 0x1B
    assert gf.gf_inv(0x01) == 0x01
    assert gf.gf_inv(0x02) == 0x8D


def test_inverse_by_exhaustive_search():
    for a in range(1, 256):
        (b,) = [b for b in range(1, 256) if slow_mul(a, b) == 1]
        assert gf.gf_inv(a) == b
    with pytest.raises(ZeroDivisionError):
        gf.gf_inv(0)
    with pytest.raises(ZeroDivisionError):
        gf.gf_div(5, 0)


def test_field_axioms_random_triples():
    rng = np.random.default_rng(2024)
    for a, b, c in rng.integers(0, 256, size=(10_000, 3)).tolist():
        add, mul = gf.gf_add, gf.gf_mul
        assert add(a, b) == add(b, a)
        assert mul(a, b) == mul(b, a)
        assert add(add(a, b), c) == add(a, add(b, c))
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
        assert add(a, 0) == a and mul(a, 1) == a
        assert add(add(a, b), b) == a
        if a:
            assert mul(a, gf.gf_inv(a)) == 1
            assert gf.gf_div(mul(a, b), a) == b


def test_combine_examples():
    a, b = b"\x10\x20\x30", b"\x01\x02\x03"
    assert gf.combine([1, 1], [a, b]) == bytes(x ^ y for x, y in zip(a, b))
    assert gf.combine([1, 0], [a, b]) == a
    rng = np.random.default_rng(5)
    s1, s2 = rng.bytes(8), rng.bytes(8)
    expect = bytes(slow_mul(3, x) ^ slow_mul(5, y) for x, y in zip(s1, s2))
    assert gf.combine([3, 5], [s1, s2]) == expect


def test_combine_shape_errors():
    with pytest.raises(gf.ShapeError):
        gf.combine([1], [b"a", b"b"])
    with pytest.raises(gf.ShapeError):
        gf.combine([1, 1], [b"a", b"bc"])


@given(st.integers(1, 8).flatmap(lambda k: st.tuples(
    st.just(k), st.integers(0, k - 1), st.lists(st.binary(min_size=6, max_size=6), min_size=k, max_size=k))))
def test_combine_with_basis_is_projection(args):
    k, i, syms = args
    assert gf.combine(gf.basis(i, k), syms) == syms[i]


def test_rank_examples():
    assert gf.rank([[1, 0], [0, 1]]) == 2
    assert gf.rank([[1, 1], [1, 1]]) == 1
    assert gf.rank([[1, 0], [1, 1], [0, 1]]) == 2
    assert gf.rank([]) == 0
    with pytest.raises(gf.ShapeError):
        gf.rank([[1], [1, 0]])


@settings(max_examples=200)
@given(st.lists(st.lists(st.integers(0, 255), min_size=4, max_size=4), min_size=1, max_size=6), st.randoms())
def test_rank_bounded_and_permutation_invariant(rows, rnd):
    r = gf.rank(rows)
    assert r <= min(len(rows), 4)
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert gf.rank(shuffled) == r


def test_solve_examples():
    a, b = b"hello", b"world"
    assert gf.solve([(b"\x01\x00", a), (b"\x00\x01", b)], 2) == [a, b]
    ab = bytes(x ^ y for x, y in zip(a, b))
    assert gf.solve([(b"\x01\x00", a), (b"\x01\x01", ab)], 2) == [a, b]
    assert gf.solve([(b"\x01\x01", ab), (b"\x00\x01", b)], 2) == [a, b]


def test_solve_errors():
    with pytest.raises(gf.InsufficientRank) as exc:
        gf.solve([(b"\x01\x01", b"ab"), (b"\x02\x02", b"cd")], 2)
    assert exc.value.rank == 1
    with pytest.raises(gf.InsufficientRank):
        gf.solve([], 2)
    with pytest.raises(gf.DecodeIntegrityError):
        gf.solve([(b"\x01\x00", b"a"), (b"\x00\x01", b"b"), (b"\x01\x00", b"z")], 2)
    with pytest.raises(gf.ShapeError):
        gf.solve([(b"\x01", b"a")], 2)


def random_invertible(rng, k):
    while True:
        m = rng.integers(0, 256, size=(k, k), dtype=np.uint8)
        if gf.rank(m.tolist()) == k:
            return m


@pytest.mark.parametrize("k", [1, 2, 3, 4, 8, 16])
def test_encode_solve_round_trip(k):
    rng = np.random.default_rng(k)
    for _ in range(10):
        m = random_invertible(rng, k)
        originals = [rng.bytes(12) for _ in range(k)]
        coded = gf.encode(m.tolist(), originals)
        order = rng.permutation(k)
        assert gf.solve([(bytes(m[i]), coded[i]) for i in order], k) == originals


def test_pad_and_basis_helpers():
    assert gf.pad_symbols([b"ab", b"c"]) == [b"ab", b"c\x00"]
    assert gf.basis(1, 3) == b"\x00\x01\x00"
    assert gf.is_basis(b"\x00\x01\x00") == 1
    assert gf.is_basis(b"\x01\x01") is None
    assert gf.is_basis(b"\x00\x02") is None
    assert gf.is_basis(b"\x00\x00") is None
