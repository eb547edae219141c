"""Boolean OR pooling to the lab and i.i.d. erasures to the eavesdropper."""

from dataclasses import dataclass

import numpy as np

from . import _rng

ERASED = 2


@dataclass(frozen=True)
class PoolOutcomes:
    y: np.ndarray

    @property
    def T(self):
        return self.y.shape[0]

    def __str__(self):
        return "".join(str(int(v)) for v in self.y)


@dataclass(frozen=True)
class EveView:
    """Eavesdropper observation; z holds 0, 1 or ERASED per test."""

    z: np.ndarray
    mask: np.ndarray

    def __str__(self):
        return "".join("e" if v == ERASED else str(int(v)) for v in self.z)

    @classmethod
    def from_string(cls, s):
        z = np.array([ERASED if c == "e" else int(c) for c in s], dtype=np.uint8)
        return cls(z, (z != ERASED).astype(np.uint8))


def pool(rows):
    rows = np.asarray(rows, dtype=bool)
    if rows.ndim != 2:
        raise ValueError("rows must be a (K, T) array of equal-length codewords")
    return PoolOutcomes(np.any(rows, axis=0).astype(np.uint8))


def erasure_mask(T, delta, seed):
    """Observed = 1 independently with probability delta."""
    return _rng.bernoulli(delta, seed, np.arange(T, dtype=np.uint64)).astype(np.uint8)


def eavesdrop(y, delta, seed):
    if not 0 <= delta < 1:
        raise ValueError(f"need 0 <= delta < 1, got {delta}")
    yy = y.y if isinstance(y, PoolOutcomes) else np.asarray(y, dtype=np.uint8)
    mask = erasure_mask(yy.shape[0], delta, seed)
    z = np.where(mask == 1, yy, ERASED).astype(np.uint8)
    return EveView(z, mask)
