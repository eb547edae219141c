"""Colexicographic ranking of K-subsets of {0, ..., N-1}."""

from dataclasses import dataclass
from itertools import combinations
from math import comb


def colex_rank(subset):
    return sum(comb(c, i + 1) for i, c in enumerate(sorted(subset)))


def colex_unrank(w, K):
    out = []
    for i in range(K, 0, -1):
        c = i - 1
        while comb(c + 1, i) <= w:
            c += 1
        out.append(c)
        w -= comb(c, i)
    return tuple(sorted(out))


def colex_subsets(items, K):
    """K-subsets of sorted ``items`` in colex order."""
    items = sorted(items)
    return sorted(combinations(items, K), key=lambda s: s[::-1])


@dataclass(frozen=True)
class DefectiveIndex:
    w: int
    subset: tuple
    N: int

    @classmethod
    def from_index(cls, w, N, K):
        if not 0 <= w < comb(N, K):
            raise ValueError(f"index {w} outside [0, C({N},{K}))")
        return cls(int(w), colex_unrank(w, K), N)

    @classmethod
    def from_subset(cls, subset, N):
        s = tuple(sorted(int(v) for v in subset))
        if len(set(s)) != len(s) or (s and (s[0] < 0 or s[-1] >= N)):
            raise ValueError(f"invalid defective set {subset} for N={N}")
        return cls(colex_rank(s), s, N)

    @property
    def K(self):
        return len(self.subset)
