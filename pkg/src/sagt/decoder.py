"""Consistency decoding at the lab.

The pooling channel is noiseless, so the likelihood of an outcome vector given
a candidate set of codewords is 1 when their OR reproduces it and 0 otherwise.
Maximum-likelihood decoding therefore reduces to finding every defective set
that, for some choice of sub-bins, explains the outcomes exactly. The lab knows
every item's key, so f is fixed and only the sub-bin index m is searched.
"""

from dataclasses import dataclass
from itertools import combinations, product
from math import comb

import numpy as np

from .subsets import DefectiveIndex, colex_subsets

UNIQUE = "unique"
AMBIGUOUS = "ambiguous"
INCONSISTENT = "inconsistent"

DEFAULT_SEARCH_BUDGET = 10**10
ORACLE_BUDGET = 10**6


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class DecodeResult:
    status: str
    w_hat: DefectiveIndex = None
    candidates: int = 0
    m_hat: tuple = None

    @property
    def ok(self):
        return self.status == UNIQUE


def _as_int(bits):
    return int.from_bytes(np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes(), "little")


def _selected_rows(cb, f_indices):
    f = np.asarray(f_indices, dtype=np.int64)
    if f.shape != (cb.N,):
        raise ValueError(f"need {cb.N} f-indices, got shape {f.shape}")
    if f.size and (f.min() < 0 or f.max() >= cb.F):
        raise IndexError("f-index out of range")
    return cb.bins[np.arange(cb.N), :, f, :]  # (N, M, T)


def _y_array(y, T):
    arr = np.asarray(getattr(y, "y", y), dtype=np.uint8)
    if arr.shape != (T,):
        raise ValueError(f"outcome vector must have length {T}")
    return arr


def decode(cb, f_indices, y, K=None, budget=DEFAULT_SEARCH_BUDGET):
    """Exact consistency decoding with zero-position pruning.

    A row with a 1 where y is 0 can never take part in a consistent
    candidate, so each item is reduced to the sub-bins whose row fits inside
    y before any subset is enumerated. Subsets are visited in colex order and
    sub-bin vectors in odometer order; the search stops at the second
    distinct consistent subset.
    """
    K = cb.params.K if K is None else K
    nominal = comb(cb.N, K) * cb.M**K
    if nominal > budget:
        raise SearchBudgetExceeded(f"C({cb.N},{K}) * {cb.M}^{K} = {nominal} exceeds budget {budget}")
    rows = _selected_rows(cb, f_indices)
    target = _as_int(_y_array(y, cb.T))
    packed = [[_as_int(r) for r in item] for item in rows]

    viable = {}
    for j, item in enumerate(packed):
        fits = [(m, r) for m, r in enumerate(item) if r & ~target == 0]
        if fits:
            viable[j] = fits

    found = []
    count = 0
    for subset in colex_subsets(viable, K):
        hit = None
        for choice in product(*(viable[j] for j in subset)):
            acc = 0
            for _, r in choice:
                acc |= r
            if acc == target:
                count += 1
                if hit is None:
                    hit = tuple(m for m, _ in choice)
        if hit is not None:
            found.append((subset, hit))
            if len(found) > 1:
                break
    return _classify(found, count, cb.N)


def _classify(found, count, N):
    if not found:
        return DecodeResult(INCONSISTENT, None, count)
    if len(found) > 1:
        return DecodeResult(AMBIGUOUS, None, count)
    subset, ms = found[0]
    return DecodeResult(UNIQUE, DefectiveIndex.from_subset(subset, N), count, ms)


def decode_oracle(cb, f_indices, y, K=None, budget=ORACLE_BUDGET):
    """Unpruned brute force over every subset and every sub-bin vector.

    Written independently of :func:`decode`: boolean arrays instead of
    packed integers, lexicographic subset order, full enumeration with no
    early exit.
    """
    K = cb.params.K if K is None else K
    size = comb(cb.N, K) * cb.M**K
    if size > budget:
        raise SearchBudgetExceeded(f"oracle search space {size} exceeds {budget}")
    f = list(f_indices)
    yy = np.asarray(getattr(y, "y", y), dtype=bool)
    consistent = set()
    count = 0
    for subset in combinations(range(cb.N), K):
        for ms in product(range(cb.M), repeat=K):
            out = np.zeros(cb.T, dtype=bool)
            for j, m in zip(subset, ms):
                out = out | cb.bins[j, m, f[j]]
            if np.array_equal(out, yy):
                consistent.add(subset)
                count += 1
    if not consistent:
        return DecodeResult(INCONSISTENT, None, count)
    if len(consistent) > 1:
        return DecodeResult(AMBIGUOUS, None, count)
    (subset,) = consistent
    return DecodeResult(UNIQUE, DefectiveIndex.from_subset(subset, cb.N), count)
