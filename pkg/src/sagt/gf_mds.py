"""GF(2^m) arithmetic and MDS key expansion.

The lab sends K uniform key chunks over the private link; the mixer needs a
key for every one of the N items such that whichever K items turn out to be
defective, their keys are jointly uniform. Multiplying the chunks by the
generator of an [N, K] MDS code does exactly that: any K columns of the
generator form an invertible matrix, so any K outputs are a bijective image
of the K inputs.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

# Primitive polynomials, one per degree, bit i = coefficient of x^i.
# x is a generator of the multiplicative group for every entry, which lets the
# field use exp/log tables.
IRREDUCIBLE_POLYS = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}


def clmul_mod(a, b, poly, m):
    """Carry-less multiply of two field elements, reduced by ``poly``.

    Slow bit-serial reference; the table path in :class:`GF2m` is checked
    against it.
    """
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return r


class GF2m:
    """The field GF(2^m) with elementwise, broadcasting operations."""

    def __init__(self, m):
        if m not in IRREDUCIBLE_POLYS:
            raise ValueError(f"unsupported field degree m={m}; need 1 <= m <= 16")
        self.m = m
        self.poly = IRREDUCIBLE_POLYS[m]
        self.order = 1 << m
        n = self.order - 1
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.full(self.order, -1, dtype=np.int64)
        x = 1
        for i in range(n):
            if log[x] != -1:
                raise ValueError(f"polynomial {self.poly:#x} is not primitive")
            exp[i] = x
            log[x] = i
            x = clmul_mod(x, 2, self.poly, m) if m > 1 else 1
        exp[n:] = exp[:n]
        self._exp = exp
        self._log = log
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()

    def __repr__(self):
        return f"GF2m(m={self.m}, poly={self.poly:#x})"

    def _check(self, a):
        a = np.asarray(a, dtype=np.int64)
        if a.size and (a.min() < 0 or a.max() >= self.order):
            raise ValueError(f"element out of range for GF(2^{self.m})")
        return a

    def add(self, a, b):
        return np.bitwise_xor(self._check(a), self._check(b))

    sub = add

    def mul(self, a, b):
        a = self._check(a)
        b = self._check(b)
        zero = (a == 0) | (b == 0)
        la = self._log[np.where(a == 0, 1, a)]
        lb = self._log[np.where(b == 0, 1, b)]
        return np.where(zero, 0, self._exp[la + lb])

    def inv(self, a):
        a = self._check(a)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        n = self.order - 1
        return self._exp[(n - self._log[a]) % n]

    def pow(self, a, e):
        a = self._check(a)
        if e == 0:
            return np.ones_like(a)
        n = self.order - 1
        out = self._exp[(self._log[np.where(a == 0, 1, a)] * e) % n]
        return np.where(a == 0, 0, out)

    def matmul(self, A, B):
        prod = self.mul(np.asarray(A)[:, :, None], np.asarray(B)[None, :, :])
        return np.bitwise_xor.reduce(prod, axis=1)

    def rank(self, A):
        """Rank by Gauss-Jordan elimination (scalar path, small matrices)."""
        A = [[int(v) for v in row] for row in self._check(A)]
        exp, log = self._exp_list, self._log_list
        n = self.order - 1

        def smul(a, b):
            return 0 if a == 0 or b == 0 else exp[log[a] + log[b]]

        rows = len(A)
        cols = len(A[0]) if rows else 0
        r = 0
        for c in range(cols):
            pivot = next((i for i in range(r, rows) if A[i][c]), None)
            if pivot is None:
                continue
            A[r], A[pivot] = A[pivot], A[r]
            inv = exp[(n - log[A[r][c]]) % n]
            A[r] = [smul(v, inv) for v in A[r]]
            for i in range(rows):
                f = A[i][c]
                if i != r and f:
                    A[i] = [a ^ smul(b, f) for a, b in zip(A[i], A[r])]
            r += 1
            if r == rows:
                break
        return r


@lru_cache(maxsize=None)
def field_new(m):
    return GF2m(m)


def field_degree(N):
    """Smallest m with 2^m >= max(N, 2)."""
    m = 1
    while (1 << m) < max(N, 2):
        m += 1
    return m


@dataclass(frozen=True)
class MdsGenerator:
    """A K x N generator matrix over GF(2^m)."""

    matrix: np.ndarray
    m: int
    points: tuple = field(default=())

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.int64)
        if mat.ndim != 2:
            raise ValueError("generator must be a 2-D matrix")
        if mat.size and (mat.min() < 0 or mat.max() >= (1 << self.m)):
            raise ValueError("generator entry out of field range")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def K(self):
        return self.matrix.shape[0]

    @property
    def N(self):
        return self.matrix.shape[1]

    @property
    def field(self):
        return field_new(self.m)

    def is_mds(self):
        """Exhaustively check that every K-column submatrix is invertible."""
        return not self.singular_subsets(limit=1)

    def singular_subsets(self, limit=None):
        gf = self.field
        bad = []
        for cols in combinations(range(self.N), self.K):
            if gf.rank(self.matrix[:, cols]) < self.K:
                bad.append(cols)
                if limit and len(bad) >= limit:
                    break
        return bad

    def to_text(self):
        lines = [f"{self.K} {self.N} {self.m}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.matrix]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        K, N, m = (int(v) for v in lines[0].split())
        rows = [[int(v) for v in ln.split()] for ln in lines[1 : 1 + K]]
        if len(rows) != K or any(len(r) != N for r in rows):
            raise ValueError(f"expected {K} rows of {N} entries")
        return cls(np.array(rows, dtype=np.int64).reshape(K, N), m)


def evaluation_points(N, m):
    """Distinct field elements 1, 2, ..., with 0 appended only when needed."""
    q = 1 << m
    if N > q:
        raise ValueError(f"GF(2^{m}) has only {q} elements, need {N} points")
    if N <= q - 1:
        return list(range(1, N + 1))
    return list(range(1, q)) + [0]


def mds_generator(K, N, m=None):
    """Vandermonde generator: entry (r, n) is point_n ** r."""
    if K < 1 or K > N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    if m is None:
        m = field_degree(N)
    gf = field_new(m)
    pts = evaluation_points(N, m)
    mat = np.array([gf.pow(np.array(pts), r) for r in range(K)], dtype=np.int64)
    return MdsGenerator(mat, m, tuple(pts))


def pack_symbols(bits, m):
    """Big-endian pack of a bit axis into m-bit symbols, zero-padding the tail.

    ``bits`` has shape (..., S); the result has shape (..., ceil(S/m)).
    """
    bits = np.asarray(bits, dtype=np.int64)
    S = bits.shape[-1]
    L = -(-S // m)
    pad = L * m - S
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.int64)], axis=-1)
    bits = bits.reshape(bits.shape[:-1] + (L, m))
    weights = 1 << np.arange(m - 1, -1, -1)
    return bits @ weights


def unpack_symbols(symbols, m):
    symbols = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1)
    bits = (symbols[..., None] >> shifts) & 1
    return bits.reshape(symbols.shape[:-1] + (-1,)).astype(np.uint8)


def expand_keys(source, G, truncate=True):
    """Expand K key chunks of S_K bits into N chunks.

    ``source`` has shape (..., K, S_K). Each chunk is packed into
    ceil(S_K/m) symbols (zero-padded tail), multiplied by ``G`` symbol-wise,
    and unpacked. With ``truncate`` the outputs are cut back to S_K bits;
    otherwise the full padded shares are returned, shape (..., N, L*m).

    Only the full shares are guaranteed to be a bijective image of the
    source on every K-subset. Truncation preserves this whenever m divides
    S_K (always for K = 1).
    """
    source = np.asarray(source)
    if source.ndim < 2:
        raise ValueError("source must have shape (..., K, S_K)")
    if source.shape[-2] != G.K:
        raise ValueError(f"expected {G.K} key chunks, got {source.shape[-2]}")
    S_K = source.shape[-1]
    if S_K == 0:
        return np.zeros(source.shape[:-2] + (G.N, 0), dtype=np.uint8)
    if source.size and (source.min() < 0 or source.max() > 1):
        raise ValueError("key chunks must be bit arrays")
    gf = G.field
    sym = pack_symbols(source, G.m)  # (..., K, L)
    # out[..., n, l] = sum_k G[k, n] * sym[..., k, l]
    out = _apply(gf, G, sym)
    bits = unpack_symbols(out, G.m)
    return bits[..., :S_K] if truncate else bits


def _apply(gf, G, sym):
    GT = np.swapaxes(G.matrix, 0, 1)  # (N, K)
    prod = gf.mul(GT[:, :, None], sym[..., None, :, :])  # (..., N, K, L)
    return np.bitwise_xor.reduce(prod, axis=-2)


def split_chunks(bits, K, S_K):
    """First K*S_K bits split in order into K chunks."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] < K * S_K:
        raise ValueError(f"need {K * S_K} feedback bits, got {bits.shape[-1]}")
    return bits[..., : K * S_K].reshape(bits.shape[:-1] + (K, S_K))


def bits_to_int(bits):
    """Big-endian integer value of the last axis."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] == 0:
        return np.zeros(bits.shape[:-1], dtype=np.int64)
    return bits @ (1 << np.arange(bits.shape[-1] - 1, -1, -1))
