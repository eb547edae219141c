from itertools import combinations
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sagt.subsets import DefectiveIndex, colex_rank, colex_subsets, colex_unrank


def test_colex_order_small():
    assert colex_subsets(range(4), 2) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]


@pytest.mark.parametrize("N,K", [(5, 1), (6, 2), (7, 3), (8, 8)])
def test_rank_is_a_bijection(N, K):
    subsets = colex_subsets(range(N), K)
    assert [colex_rank(s) for s in subsets] == list(range(comb(N, K)))
    assert [colex_unrank(w, K) for w in range(comb(N, K))] == subsets


def test_index_validation():
    with pytest.raises(ValueError):
        DefectiveIndex.from_index(10, 5, 2)
    with pytest.raises(ValueError):
        DefectiveIndex.from_subset((1, 1), 5)
    with pytest.raises(ValueError):
        DefectiveIndex.from_subset((0, 5), 5)


@given(st.data())
def test_round_trip(data):
    N = data.draw(st.integers(1, 40))
    K = data.draw(st.integers(1, min(N, 5)))
    w = data.draw(st.integers(0, comb(N, K) - 1))
    d = DefectiveIndex.from_index(w, N, K)
    assert len(set(d.subset)) == K and d.K == K
    assert max(d.subset) < N
    assert DefectiveIndex.from_subset(d.subset, N) == d


def test_unrank_matches_sorted_combinations():
    ref = sorted(combinations(range(9), 3), key=lambda s: s[::-1])
    assert [colex_unrank(i, 3) for i in range(len(ref))] == ref
