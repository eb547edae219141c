"""Test-count bounds for non-adaptive, secure non-adaptive and secure adaptive GT.

All logarithms are base 2. Functions named ``*_value`` return the real-valued
bound; the public wrappers round up at the reporting boundary only, so that
orderings between bounds can be checked before rounding.
"""

import csv
import io
import math
from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

EXACT_BINOM_MAX_N = 60
MI_MAX_K = 20


def log2_binom(n, k):
    """log2 C(n, k); -inf when the coefficient is zero."""
    if k < 0 or k > n:
        return -math.inf
    if n <= EXACT_BINOM_MAX_N:
        return math.log2(math.comb(n, k))
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)


def entropy_bits(probs):
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def h_b(p):
    return entropy_bits([p, 1 - p])


def mi_boolean(K, i, p):
    """I(X_S1; X_S2, Y) in bits for one Boolean OR test.

    The K defective inputs are i.i.d. Bernoulli(p), S1 holds the first i of
    them and Y is the OR of all K. Computed from the joint law of
    (X_S1, X_S2, Y) by enumerating all 2^K input patterns.
    """
    if K > MI_MAX_K:
        raise ValueError(f"K={K} exceeds enumeration guard of {MI_MAX_K}")
    if not 1 <= i <= K:
        raise ValueError(f"need 1 <= i <= K, got i={i}, K={K}")
    if p <= 0 or p >= 1:
        return 0.0
    x = np.array(list(product((0, 1), repeat=K)), dtype=np.int64)
    ones = x.sum(axis=1)
    px = p**ones * (1 - p) ** (K - ones)
    a = x[:, :i] @ (1 << np.arange(i))
    b = x[:, i:] @ (1 << np.arange(K - i))
    y = (ones > 0).astype(np.int64)
    # joint over (a, b, y) is the same as over (a, b) since y is a function of both
    p_a = np.bincount(a, px, minlength=1 << i)
    p_by = np.bincount(b * 2 + y, px, minlength=2 << (K - i))
    p_ab = np.bincount(a * (1 << (K - i)) + b, px)
    return entropy_bits(p_a) + entropy_bits(p_by) - entropy_bits(p_ab)


def _ceil(x):
    # drop float noise first so that e.g. log2(4) / 0.5 rounds to exactly 4
    return math.ceil(round(x, 9))


def secure_adaptive_factor(delta, Rf):
    return 1.0 / min(1.0, 1.0 - delta + Rf)


def _check_delta(delta):
    if not 0 <= delta < 1:
        raise ValueError(f"need 0 <= delta < 1, got {delta}")


def _max_term(N, K, term):
    """(value, i*) of max over i = 1..K of term(i), skipping empty binomials."""
    best, arg = -math.inf, None
    for i in range(1, K + 1):
        v = term(i)
        if v > best:
            best, arg = v, i
    if best == -math.inf:
        return 0.0, None
    return best, arg


def sngt_inner(N, K):
    """max_i (K/i) log2 C(N-K, i) and its maximiser."""
    return _max_term(N, K, lambda i: K / i * log2_binom(N - K, i))


def sufficient_sagt_value(N, K, delta, Rf, eps):
    _check_delta(delta)
    inner, i_star = sngt_inner(N, K)
    return (1 + eps) * secure_adaptive_factor(delta, Rf) * inner, i_star


def sufficient_sagt(N, K, delta, Rf, eps):
    """Tests sufficient for reliable, weakly secure SAGT; returns (T, i*)."""
    v, i_star = sufficient_sagt_value(N, K, delta, Rf, eps)
    return _ceil(v), i_star


def corollary_value(N, K, delta, Rf, eps):
    if K >= N:
        raise ValueError("corollary bound needs K < N")
    _check_delta(delta)
    return (1 + eps) * secure_adaptive_factor(delta, Rf) * K * math.log2((N - K) * math.e)


def corollary_bound(N, K, delta, Rf, eps):
    return _ceil(corollary_value(N, K, delta, Rf, eps))


def converse_sagt_value(N, K, delta, Rf):
    _check_delta(delta)
    return log2_binom(N, K) * secure_adaptive_factor(delta, Rf)


def converse_sagt(N, K, delta, Rf):
    return _ceil(converse_sagt_value(N, K, delta, Rf))


def sngt_values(N, K, delta, eps):
    _check_delta(delta)
    inner, _ = sngt_inner(N, K)
    factor = 1.0 / (1.0 - delta)
    return (1 + eps) * factor * inner, factor * log2_binom(N, K)


def sngt_bounds(N, K, delta, eps):
    """(upper, lower) tests for secure non-adaptive GT, rounded up."""
    up, lo = sngt_values(N, K, delta, eps)
    return _ceil(up), _ceil(lo)


def ngt_values(N, K, eps):
    p = math.log(2) / K
    mi = {i: mi_boolean(K, i, p) for i in range(1, K + 1)}

    def ratio(logc, i):
        return 0.0 if logc == -math.inf else logc / mi[i]

    up, _ = _max_term(N, K, lambda i: (1 + eps) * ratio(log2_binom(N - K, i), i))
    lo, _ = _max_term(N, K, lambda i: ratio(log2_binom(N - K + i, i), i))
    return up, lo


def ngt_bounds(N, K, eps):
    """(upper, lower, degenerate) for plain non-adaptive GT at p = ln2/K.

    ``degenerate`` flags an upper bound of zero, which happens when N - K = 1
    leaves nothing to distinguish.
    """
    up, lo = ngt_values(N, K, eps)
    return _ceil(up), _ceil(lo), up <= 0


def public_factor(delta):
    """1/min{1, 2 - 2*delta}; infinite (unbounded) at delta = 1."""
    if delta >= 1:
        return math.inf
    return 1.0 / min(1.0, 2.0 - 2.0 * delta)


@dataclass(frozen=True)
class BoundReport:
    N: int
    K: int
    delta: float
    Rf: float
    eps: float
    t_sufficient_sagt: int
    t_corollary: int
    t_converse_sagt: int
    t_sufficient_sngt: int
    t_converse_sngt: int
    t_sufficient_ngt: int
    t_converse_ngt: int
    t_public: float
    i_star: int
    max_term: float

    FIELDS = (
        "N", "K", "delta", "Rf", "eps",
        "t_sufficient_sagt", "t_corollary", "t_converse_sagt",
        "t_sufficient_sngt", "t_converse_sngt",
        "t_sufficient_ngt", "t_converse_ngt",
        "t_public", "i_star", "max_term",
    )  # fmt: skip


def bound_report(N, K, delta, Rf, eps):
    inner, i_star = sngt_inner(N, K)
    up_s, lo_s = sngt_bounds(N, K, delta, eps)
    if K <= MI_MAX_K:
        up_n, lo_n, _ = ngt_bounds(N, K, eps)
    else:
        up_n = lo_n = -1
    t_public = public_factor(delta) * (1 + eps) * inner
    return BoundReport(
        N=N, K=K, delta=delta, Rf=Rf, eps=eps,
        t_sufficient_sagt=sufficient_sagt(N, K, delta, Rf, eps)[0],
        t_corollary=corollary_bound(N, K, delta, Rf, eps) if K < N else -1,
        t_converse_sagt=converse_sagt(N, K, delta, Rf),
        t_sufficient_sngt=up_s,
        t_converse_sngt=lo_s,
        t_sufficient_ngt=up_n,
        t_converse_ngt=lo_n,
        t_public=_ceil(t_public) if math.isfinite(t_public) else math.inf,
        i_star=i_star if i_star is not None else 0,
        max_term=round(inner, 9),
    )  # fmt: skip


def reports_to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BoundReport.FIELDS)
    for r in reports:
        d = asdict(r)
        w.writerow([d[k] for k in BoundReport.FIELDS])
    return buf.getvalue()
