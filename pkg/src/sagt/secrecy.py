"""Eavesdropper leakage I(W; Z^T) for a fixed codebook.

The exact routes enumerate everything Eve cannot see: the mixer's sub-bin
choices (uniform), the keys of the defective items and the erasure pattern.
The key law on the defective set is computed from the actual MDS expansion by
enumerating every source key, so the audit stays exact even where the
expanded keys are not perfectly uniform.
"""

import csv
import io
import math
from dataclasses import asdict, dataclass
from itertools import product
from math import comb

import numpy as np

from . import _rng
from .codebook import derive_MF, generate
from .gf_mds import bits_to_int, expand_keys, mds_generator
from .subsets import colex_unrank

EXACT_BUDGET = 10**8
MC_CHUNK = 1 << 18
CSV_FIELDS = ("N", "K", "T", "M", "F", "delta", "Rf", "method", "mi_bits", "mi_per_test")


class LeakageBudgetExceeded(RuntimeError):
    """Exact enumeration is too large; use monte_carlo_leakage instead."""


@dataclass(frozen=True)
class LeakageReport:
    N: int
    K: int
    T: int
    M: int
    F: int
    delta: float
    Rf: float
    method: str
    mi_bits: float
    size: int  # enumeration size (exact) or number of samples (monte-carlo)
    stderr: float = 0.0
    note: str = ""

    @property
    def mi_per_test(self):
        return self.mi_bits / self.T

    normalized = mi_per_test

    def csv_row(self):
        d = asdict(self)
        d["mi_per_test"] = self.mi_per_test
        return [_fmt(d[k]) for k in CSV_FIELDS]


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def reports_to_csv(reports, scheme_labels=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = list(CSV_FIELDS)
    if scheme_labels is not None:
        head = ["scheme"] + head
    w.writerow(head)
    for i, r in enumerate(reports):
        row = r.csv_row()
        w.writerow(([scheme_labels[i]] if scheme_labels is not None else []) + row)
    return buf.getvalue()


def _mi_from_conditionals(p_z_given_w):
    """I(W; Z) for uniform W from rows P(z | w)."""
    pzw = np.asarray(p_z_given_w, dtype=float)
    pz = pzw.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pzw > 0, pzw * np.log2(pzw / pz), 0.0)
    return max(0.0, float(terms.sum() / pzw.shape[0]))


def key_law(G, S_K, F, subset):
    """Exact joint law of the defective items' key indices, shape (F,)*K."""
    K = G.K
    law = np.zeros((F,) * K)
    if S_K == 0:
        law[(0,) * K] = 1.0
        return law
    n = 1 << (K * S_K)
    src = ((np.arange(n)[:, None] >> np.arange(K * S_K - 1, -1, -1)) & 1).astype(np.uint8)
    f = bits_to_int(expand_keys(src.reshape(n, K, S_K), G)) % F  # (n, N)
    np.add.at(law, tuple(f[:, j] for j in subset), 1.0 / n)
    return law


def _packed(rows):
    """Integer id of each length-T row, with test t as the t-th most significant bit."""
    T = rows.shape[-1]
    return rows.astype(np.int64) @ (1 << np.arange(T - 1, -1, -1, dtype=np.int64))


def outcome_law(cb, subset, f_law):
    """P(Y = y | defective set) as a length-2^T vector."""
    K = len(subset)
    ids = [_packed(cb.bins[j]).T for j in subset]  # each (F, M)
    acc = ids[0]
    for k in range(1, K):
        acc = acc[..., None, None] | ids[k]
    # f-law has axes (F,)*K; interleave singleton M axes to match acc (F, M, F, M, ...)
    wshape = []
    for _ in range(K):
        wshape += [cb.F, 1]
    weight = f_law.reshape(wshape) * np.ones(acc.shape) / cb.M**K
    return np.bincount(acc.ravel(), weight.ravel(), minlength=1 << cb.T)


def _erasure_kernel(delta):
    # rows: z = 0, 1, erased; columns: y = 0, 1
    return np.array([[delta, 0.0], [0.0, delta], [1 - delta, 1 - delta]])


def _check_delta(d):
    if not 0 <= d <= 1:
        raise ValueError(f"need 0 <= delta <= 1, got {d}")
    return d


def _check_budget(cb, K, budget):
    size = comb(cb.N, K) * cb.M**K * cb.F**K * 3**cb.T
    if size > budget:
        raise LeakageBudgetExceeded(f"exact enumeration size {size} exceeds {budget}; use monte_carlo_leakage")
    return size


def _outcome_laws(cb, G, K, S_K):
    laws = []
    for w in range(comb(cb.N, K)):
        subset = colex_unrank(w, K)
        laws.append(outcome_law(cb, subset, key_law(G, S_K, cb.F, subset)))
    return np.array(laws)


def _s_k(cb):
    return int(round(math.log2(cb.F)))


def exact_leakage(cb, G, params, budget=EXACT_BUDGET, delta=None):
    """I(W; Z^T | codebook) by pushing each P(Y|w) through the erasure channel.

    ``delta`` overrides params.delta; the auditor accepts delta = 1 (Eve sees
    everything), which a protocol run never uses.
    """
    K = params.K
    d = params.delta if delta is None else _check_delta(delta)
    size = _check_budget(cb, K, budget)
    T = cb.T
    py = _outcome_laws(cb, G, K, _s_k(cb))
    kern = _erasure_kernel(d)
    pz = py.reshape((py.shape[0],) + (2,) * T)
    for ax in range(1, T + 1):
        pz = np.moveaxis(np.tensordot(kern, pz, axes=([1], [ax])), 0, ax)
    mi = _mi_from_conditionals(pz.reshape(py.shape[0], -1))
    return LeakageReport(params.N, K, T, cb.M, cb.F, d, params.Rf, "exact", mi, size)


def exact_leakage_by_mask(cb, G, params, budget=EXACT_BUDGET, delta=None):
    """Independent route: average I(W; Y_A) over observed-position sets A.

    Eve learns which positions were erased, and that pattern is independent
    of W, so I(W; Z) = sum_A P(A) I(W; Y restricted to A).
    """
    K = params.K
    size = _check_budget(cb, K, budget)
    T = cb.T
    d = params.delta if delta is None else _check_delta(delta)
    py = _outcome_laws(cb, G, K, _s_k(cb)).reshape((-1,) + (2,) * T)
    total = 0.0
    for mask in product((0, 1), repeat=T):
        seen = sum(mask)
        weight = d**seen * (1 - d) ** (T - seen)
        if weight == 0:
            continue
        hidden = tuple(1 + t for t in range(T) if not mask[t])
        marg = py.sum(axis=hidden) if hidden else py
        total += weight * _mi_from_conditionals(marg.reshape(py.shape[0], -1))
    return LeakageReport(params.N, K, T, cb.M, cb.F, d, params.Rf, "exact-by-mask", total, size)


def average_exact_leakage(params, codebook_seeds, budget=EXACT_BUDGET):
    """Mean exact leakage over several seeded codebooks: an estimate of I(W; Z | C_T)."""
    G = mds_generator(params.K, params.N)
    vals = [exact_leakage(generate(params.replace(seed=s)), G, params.replace(seed=s), budget) for s in codebook_seeds]
    r = vals[0]
    mis = np.array([v.mi_bits for v in vals])
    se = float(mis.std(ddof=1) / math.sqrt(len(mis))) if len(mis) > 1 else 0.0
    return LeakageReport(r.N, r.K, r.T, r.M, r.F, r.delta, r.Rf, "exact-avg", float(mis.mean()), len(mis), se)


def plugin_mi(counts):
    """Plug-in mutual information (bits) from a joint count table."""
    c = np.asarray(counts, dtype=float)
    n = c.sum()
    if n == 0:
        return 0.0
    rw = c.sum(axis=1, keepdims=True)
    cz = c.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(c > 0, c * np.log2(c * n / (rw * cz)), 0.0)
    return max(0.0, float(t.sum() / n))


def _sample_block(cb, G, params, n, seed, subsets):
    K, T = params.K, cb.T
    S_K = _s_k(cb)
    ids = _packed(cb.bins)  # (N, M, F)
    counts = np.zeros((len(subsets), 3**T), dtype=np.int64)
    pow3 = 3 ** np.arange(T, dtype=np.int64)
    shifts = np.arange(T - 1, -1, -1, dtype=np.int64)
    done = 0
    chunk_no = 0
    while done < n:
        k = min(MC_CHUNK, n - done)
        rng = _rng.stream(seed, "mc", chunk_no)
        w = rng.integers(0, len(subsets), k)
        sub = subsets[w]  # (k, K)
        m = rng.integers(0, cb.M, (k, K))
        if S_K:
            src = rng.integers(0, 2, (k, K, S_K), dtype=np.uint8)
            f_all = bits_to_int(expand_keys(src, G)) % cb.F  # (k, N)
            f = np.take_along_axis(f_all, sub, axis=1)
        else:
            f = np.zeros((k, K), dtype=np.int64)
        y = np.zeros(k, dtype=np.int64)
        for i in range(K):
            y |= ids[sub[:, i], m[:, i], f[:, i]]
        ybits = (y[:, None] >> shifts) & 1
        seen = rng.random((k, T)) < params.delta
        digits = np.where(seen, ybits, 2)
        z = digits @ pow3
        counts += np.bincount(w * 3**T + z, minlength=counts.size).reshape(counts.shape)
        done += k
        chunk_no += 1
    return counts


def monte_carlo_leakage(params, trials, seed, blocks=10, codebook=None, G=None, M=None, F=None):
    """Plug-in estimate of I(W; Z^T) from sampled (w, z) pairs.

    Each block draws a fresh codebook (or reuses ``codebook``), samples
    trials/blocks pairs through the full key pipeline, and computes the
    plug-in MI. The estimate is the block mean; the standard error comes
    from the spread between blocks. ``M`` and ``F`` override the per-block
    codebook shape (M = F = 1 gives the paired unkeyed baseline, whose rows
    are the keyed blocks' first rows). Plug-in MI is biased upward by roughly
    (|W|-1)(|Z|-1) / (2 n ln 2) bits at n samples per block.
    """
    if trials < 1000:
        raise ValueError("monte_carlo_leakage needs at least 1000 trials")
    if params.T > 40:
        raise ValueError("T too large for the z-histogram")
    G = G or mds_generator(params.K, params.N)
    subsets = np.array([colex_unrank(w, params.K) for w in range(comb(params.N, params.K))], dtype=np.int64)
    per = trials // blocks
    ests = []
    for b in range(blocks):
        if codebook is None:
            cb = generate(params.replace(seed=_rng.derive_seed(params.seed, "block", b)), M=M, F=F)
        else:
            cb = codebook
        counts = _sample_block(cb, G, params, per, _rng.derive_seed(seed, "block", b), subsets)
        ests.append(plugin_mi(counts))
    ests = np.array(ests)
    se = float(ests.std(ddof=1) / math.sqrt(blocks)) if blocks > 1 else math.nan
    if codebook is not None:
        M, F = codebook.M, codebook.F
    else:
        dM, dF, _ = derive_MF(params)
        M, F = M or dM, F or dF
    return LeakageReport(
        params.N, params.K, params.T, M, F, params.delta, params.Rf, "monte-carlo",
        float(ests.mean()), per * blocks, se, "plug-in estimate, biased upward at small sample sizes",
    )  # fmt: skip


@dataclass(frozen=True)
class LeakageComparison:
    keyed: LeakageReport
    unkeyed: LeakageReport

    @property
    def gap(self):
        return self.unkeyed.mi_bits - self.keyed.mi_bits

    @property
    def ordered(self):
        return self.keyed.mi_bits <= self.unkeyed.mi_bits + 1e-12


def leakage_comparison(params, budget=EXACT_BUDGET):
    """Exact leakage of the keyed scheme versus the same codebook seed with M = F = 1.

    The unkeyed arm's single codeword per item is the keyed arm's first
    codeword, so both arms see the same base rows.
    """
    G = mds_generator(params.K, params.N)
    keyed = exact_leakage(generate(params), G, params, budget)
    plain = exact_leakage(generate(params, M=1, F=1), G, params, budget)
    return LeakageComparison(keyed, plain)
