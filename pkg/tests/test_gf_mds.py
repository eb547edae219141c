from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagt.gf_mds import (
    IRREDUCIBLE_POLYS,
    MdsGenerator,
    bits_to_int,
    clmul_mod,
    expand_keys,
    field_degree,
    field_new,
    mds_generator,
    pack_symbols,
    split_chunks,
    unpack_symbols,
)


def _poly_mod(a, b):
    # remainder of a by b as GF(2)[x] polynomials packed into ints
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _is_irreducible(poly):
    m = poly.bit_length() - 1
    for d in range(1, m // 2 + 1):
        for low in range(1 << d):
            if _poly_mod(poly, (1 << d) | low) == 0:
                return False
    return True


def test_gf2_identities():
    gf = field_new(1)
    assert gf.mul(1, 1) == 1
    assert gf.add(1, 1) == 0
    assert gf.mul(1, 0) == 0


def test_gf4_alpha_squared():
    gf = field_new(2)
    alpha = 0b10
    assert gf.mul(alpha, alpha) == 0b11  # alpha + 1 under x^2 + x + 1


def test_gf4_axioms_exhaustive():
    gf = field_new(2)
    els = range(4)
    for a, b, c in product(els, repeat=3):
        assert gf.mul(a, gf.mul(b, c)) == gf.mul(gf.mul(a, b), c)
        assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))
        assert gf.mul(a, b) == gf.mul(b, a)
    for a in range(1, 4):
        assert gf.mul(a, gf.inv(a)) == 1


def test_gf256_inverse_loop():
    gf = field_new(8)
    for x in range(1, 256):
        assert gf.mul(x, gf.inv(x)) == 1


@pytest.mark.parametrize("m", range(1, 9))
def test_table_mul_matches_bit_serial(m):
    gf = field_new(m)
    q = 1 << m
    a, b = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    ref = np.array([[clmul_mod(int(x), int(y), IRREDUCIBLE_POLYS[m], m) for y in range(q)] for x in range(q)])
    assert np.array_equal(gf.mul(a, b), ref)


@pytest.mark.parametrize("m", range(1, 9))
def test_field_axioms_exhaustive(m):
    gf = field_new(m)
    q = 1 << m
    x = np.arange(q)
    a, b = np.meshgrid(x, x, indexing="ij")
    assert np.array_equal(gf.mul(a, b), gf.mul(b, a))
    assert np.all(gf.mul(x, 1) == x)
    assert np.all(gf.mul(x, 0) == 0)
    nz = x[1:]
    assert np.all(gf.mul(nz, gf.inv(nz)) == 1)
    # associativity and distributivity on a sampled third operand
    for c in np.random.default_rng(m).integers(0, q, 8):
        assert np.array_equal(gf.mul(gf.mul(a, b), c), gf.mul(a, gf.mul(b, c)))
        assert np.array_equal(gf.mul(a, b ^ c), gf.mul(a, b) ^ gf.mul(a, c))


@pytest.mark.parametrize("m", sorted(IRREDUCIBLE_POLYS))
def test_published_polys_are_irreducible(m):
    poly = IRREDUCIBLE_POLYS[m]
    assert poly.bit_length() - 1 == m
    assert _is_irreducible(poly)


@pytest.mark.parametrize("m", [0, 17])
def test_unsupported_degree(m):
    with pytest.raises(ValueError):
        field_new(m)


def test_field_degree():
    assert field_degree(1) == 1
    assert field_degree(2) == 1
    assert field_degree(3) == 2
    assert field_degree(4) == 2
    assert field_degree(5) == 3
    assert field_degree(12) == 4


def _det2(a, b, c, d, m):
    # det [[a, b], [c, d]] in GF(2^m), written with the bit-serial multiply
    poly = IRREDUCIBLE_POLYS[m]
    return clmul_mod(a, d, poly, m) ^ clmul_mod(b, c, poly, m)


def test_k2_n3_pairwise_determinants():
    G = mds_generator(2, 3)
    assert G.m == 2
    assert set(G.points) == {1, 2, 3}  # 1, alpha, alpha + 1
    A = G.matrix
    for i, j in combinations(range(3), 2):
        assert _det2(int(A[0, i]), int(A[0, j]), int(A[1, i]), int(A[1, j]), 2) != 0


def test_k3_n7_all_submatrices_invertible_bruteforce():
    # a square matrix over GF(8) is singular iff some nonzero x has x A = 0
    G = mds_generator(3, 7)
    poly, m = IRREDUCIBLE_POLYS[G.m], G.m
    A = [[int(v) for v in row] for row in G.matrix]
    subsets = list(combinations(range(7), 3))
    assert len(subsets) == 35
    for cols in subsets:
        for x in product(range(8), repeat=3):
            if not any(x):
                continue
            out = [0, 0, 0]
            for c_i, c in enumerate(cols):
                for r in range(3):
                    out[c_i] ^= clmul_mod(x[r], A[r][c], poly, m)
            assert any(out), (cols, x)


def test_mds_exhaustive_up_to_12():
    for N in range(1, 13):
        for K in range(1, N + 1):
            assert mds_generator(K, N).is_mds(), (K, N)


def test_mds_full_field_uses_zero_point():
    G = mds_generator(2, 4)
    assert sorted(G.points) == [0, 1, 2, 3]
    assert G.is_mds()


def test_k_greater_than_n():
    with pytest.raises(ValueError):
        mds_generator(4, 3)


def test_duplicate_column_detected():
    G = mds_generator(2, 5)
    mat = G.matrix.copy()
    mat[:, 3] = mat[:, 2]
    bad = MdsGenerator(mat, G.m)
    assert not bad.is_mds()
    assert (2, 3) in bad.singular_subsets()


def test_text_round_trip():
    G = mds_generator(3, 6)
    text = G.to_text()
    assert text.splitlines()[0] == "3 6 3"
    H = MdsGenerator.from_text(text)
    assert np.array_equal(H.matrix, G.matrix) and H.m == G.m


def test_from_text_rejects_short_rows():
    with pytest.raises(ValueError):
        MdsGenerator.from_text("2 3 2\n1 1 1\n1 2\n")


def test_identity_generator_passes_inputs_through():
    G = MdsGenerator(np.eye(3, dtype=np.int64), 2)
    rng = np.random.default_rng(1)
    src = rng.integers(0, 2, (20, 3, 4)).astype(np.uint8)
    assert np.array_equal(expand_keys(src, G), src)


def test_k_equals_n_is_bijection():
    G = mds_generator(3, 3)
    src = np.array(list(product((0, 1), repeat=6)), dtype=np.uint8).reshape(-1, 3, 2)
    out = expand_keys(src, G).reshape(len(src), -1)
    assert len({tuple(r) for r in out}) == len(src)


def test_k1_outputs_are_scalings():
    G = mds_generator(1, 3)
    src = np.array(list(product((0, 1), repeat=2)), dtype=np.uint8).reshape(4, 1, 2)
    out = expand_keys(src, G)  # (4, 3, 2)
    for n in range(3):
        vals = bits_to_int(out[:, n])
        assert sorted(vals.tolist()) == [0, 1, 2, 3]


def test_k2_n3_sk2_pairs_are_bijective():
    G = mds_generator(2, 3)
    src = np.array(list(product((0, 1), repeat=4)), dtype=np.uint8).reshape(16, 2, 2)
    out = expand_keys(src, G)
    for a, b in combinations(range(3), 2):
        images = {(tuple(o[a]), tuple(o[b])) for o in out}
        assert len(images) == 16


def test_chunk_count_mismatch():
    G = mds_generator(2, 4)
    with pytest.raises(ValueError):
        expand_keys(np.zeros((3, 2), np.uint8), G)


def test_split_chunks_needs_enough_bits():
    with pytest.raises(ValueError):
        split_chunks(np.zeros(3, np.uint8), 2, 2)
    assert split_chunks(np.arange(5) % 2, 2, 2).tolist() == [[0, 1], [0, 1]]


def test_pack_pads_the_tail():
    assert pack_symbols([1, 0, 1], 2).tolist() == [2, 2]
    assert unpack_symbols(np.array([2, 2]), 2).tolist() == [1, 0, 1, 0]
    assert bits_to_int([1, 0, 1]) == 5


@pytest.mark.parametrize("K,N", [(2, 3), (2, 4), (2, 5), (3, 5), (3, 6), (2, 6)])
@pytest.mark.parametrize("S_K", [1, 2, 3, 4])
def test_any_k_full_shares_uniform(K, N, S_K):
    if K * S_K > 12:
        pytest.skip("enumeration too large")
    G = mds_generator(K, N)
    n = 1 << (K * S_K)
    src = np.array(list(product((0, 1), repeat=K * S_K)), dtype=np.uint8).reshape(n, K, S_K)
    shares = expand_keys(src, G, truncate=False)
    for cols in combinations(range(N), K):
        images = {shares[i, list(cols)].tobytes() for i in range(n)}
        assert len(images) == n
        # any K-1 of them: every value hit equally often
        for sub in combinations(cols, K - 1):
            if not sub:
                continue
            _, counts = np.unique(shares[:, list(sub)].reshape(n, -1), axis=0, return_counts=True)
            assert len(set(counts.tolist())) == 1


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_truncated_keys_uniform_when_m_divides_sk(N):
    K = 2
    G = mds_generator(K, N)
    S_K = G.m * 2 if G.m * 2 <= 6 else G.m
    n = 1 << (K * S_K)
    src = np.array(list(product((0, 1), repeat=K * S_K)), dtype=np.uint8).reshape(n, K, S_K)
    f = bits_to_int(expand_keys(src, G))
    for a, b in combinations(range(N), 2):
        assert len(set(zip(f[:, a].tolist(), f[:, b].tolist()))) == n


@settings(max_examples=60, deadline=None)
@given(
    K=st.integers(1, 4),
    extra=st.integers(0, 6),
    S_K=st.integers(1, 9),
    seed=st.integers(0, 2**32 - 1),
)
def test_expansion_is_linear(K, extra, S_K, seed):
    G = mds_generator(K, K + extra)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, (K, S_K)).astype(np.uint8)
    b = rng.integers(0, 2, (K, S_K)).astype(np.uint8)
    assert np.array_equal(expand_keys(a ^ b, G), expand_keys(a, G) ^ expand_keys(b, G))
    assert not expand_keys(np.zeros_like(a), G).any()


@settings(max_examples=40, deadline=None)
@given(K=st.integers(1, 3), extra=st.integers(0, 5), S_K=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_batched_matches_single(K, extra, S_K, seed):
    G = mds_generator(K, K + extra)
    src = np.random.default_rng(seed).integers(0, 2, (5, K, S_K)).astype(np.uint8)
    batched = expand_keys(src, G)
    for i in range(5):
        assert np.array_equal(batched[i], expand_keys(src[i], G))
