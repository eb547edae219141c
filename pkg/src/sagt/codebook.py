"""Per-item codeword bins.

Each item owns a bin of M sub-bins, each holding F codewords of length T.
The mixer picks the sub-bin with private randomness and the codeword inside
it with the shared key. Entries are i.i.d. Bernoulli(ln 2 / K).
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _rng

DEFAULT_EPS_SEC = 0.05
DEFAULT_BIT_BUDGET = 2**31

# Guards floor() against representation error, e.g. 40 * 0.2 / 2.
_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class CodebookParams:
    N: int
    K: int
    T: int
    delta: float
    Rf: float = 0.0
    eps_sec: float = DEFAULT_EPS_SEC
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.K <= self.N:
            raise ValueError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")
        if self.T < 1:
            raise ValueError(f"need T >= 1, got {self.T}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"need 0 <= delta < 1, got {self.delta}")
        if not 0 <= self.Rf <= 1:
            raise ValueError(f"need 0 <= Rf <= 1, got {self.Rf}")
        if self.eps_sec < 0:
            raise ValueError("eps_sec must be non-negative")

    @property
    def p(self):
        return math.log(2) / self.K

    def replace(self, **changes):
        kw = dict(self.__dict__)
        kw.update(changes)
        return CodebookParams(**kw)


def _floor(x):
    return math.floor(x + _FLOOR_SLACK)


def derive_MF(params):
    """Return (M, F, S_K): sub-bin count, codewords per sub-bin, key bits per chunk.

    log2 F = T*Rf/K and log2 M = T*(delta - Rf - eps_sec)/K, both floored and
    clamped at zero.
    """
    S_K = max(0, _floor(params.T * params.Rf / params.K))
    m_exp = max(0, _floor(params.T * (params.delta - params.Rf - params.eps_sec) / params.K))
    return 2**m_exp, 2**S_K, S_K


def codeword_bits(seed, p, items, flat, t):
    """The Bernoulli(p) bit at (item, flat codeword index, test position).

    ``flat`` = m*F + f, so codebooks that differ only in how a bin is split
    between sub-bins and keys share their rows, and a longer T extends a
    shorter one.
    """
    return _rng.bernoulli(p, seed, items, flat, t)


@dataclass(frozen=True)
class Codebook:
    params: CodebookParams
    bins: np.ndarray  # (N, M, F, T) bool

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=bool)
        if b.ndim != 4:
            raise ValueError("bins must have shape (N, M, F, T)")
        b.setflags(write=False)
        object.__setattr__(self, "bins", b)

    @property
    def N(self):
        return self.bins.shape[0]

    @property
    def M(self):
        return self.bins.shape[1]

    @property
    def F(self):
        return self.bins.shape[2]

    @property
    def T(self):
        return self.bins.shape[3]

    @property
    def p(self):
        return self.params.p

    @classmethod
    def from_rows(cls, rows, K=1):
        """Hand-built codebook from an (N, M, F, T) or (N, T) 0/1 array."""
        rows = np.asarray(rows, dtype=bool)
        if rows.ndim == 2:
            rows = rows[:, None, None, :]
        N, _, _, T = rows.shape
        return cls(CodebookParams(N=N, K=K, T=T, delta=0.0), rows)

    def dump(self, path):
        """Binary dump: N, M, F, T as uint32 LE, then row-major packed bits."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4I", self.N, self.M, self.F, self.T))
            fh.write(np.packbits(self.bins.ravel()).tobytes())

    @classmethod
    def load(cls, path, params=None):
        with open(path, "rb") as fh:
            N, M, F, T = struct.unpack("<4I", fh.read(16))
            raw = np.frombuffer(fh.read(), dtype=np.uint8)
        bits = np.unpackbits(raw)[: N * M * F * T].reshape(N, M, F, T)
        if params is None:
            return cls.from_rows(bits)
        return cls(params, bits)


def generate(params, M=None, F=None, budget=DEFAULT_BIT_BUDGET):
    """Draw the codebook for ``params``; M and F default to derive_MF."""
    dM, dF, _ = derive_MF(params)
    M = dM if M is None else M
    F = dF if F is None else F
    total = params.N * M * F * params.T
    if total > budget:
        raise MemoryError(
            f"codebook of {total} bits exceeds budget of {budget} bits "
            f"(N={params.N}, M={M}, F={F}, T={params.T})"
        )
    j = np.arange(params.N, dtype=np.uint64)[:, None, None, None]
    flat = (np.arange(M, dtype=np.uint64)[:, None] * np.uint64(F) + np.arange(F, dtype=np.uint64))[None, :, :, None]
    t = np.arange(params.T, dtype=np.uint64)[None, None, None, :]
    bins = codeword_bits(params.seed, params.p, j, flat, t)
    _check_density(bins, params.p)
    return Codebook(params, bins)


def _check_density(bins, p):
    n = bins.size
    sigma = math.sqrt(p * (1 - p) / n) if 0 < p < 1 else 0.0
    dev = abs(bins.mean() - p)
    if dev > 5 * sigma + 1e-12 and n > 0:
        raise RuntimeError(f"codebook density {bins.mean():.4f} is {dev / sigma:.1f} sigma from p={p:.4f}")


def row(cb, j, m, f):
    if not (0 <= j < cb.N and 0 <= m < cb.M and 0 <= f < cb.F):
        raise IndexError(f"row index (j={j}, m={m}, f={f}) outside (N={cb.N}, M={cb.M}, F={cb.F})")
    return cb.bins[j, m, f]
