"""SAGT rounds: lab feedback, key expansion, mixer selection, pooling, eavesdropping.

The private link carries uniform random bits only. Bits streamed during round
r become the key for round r + 1, so the first round of a session has no key
and runs as a secure non-adaptive round with more tests.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .bounds import sngt_bounds
from .channel import eavesdrop, pool
from .codebook import Codebook, derive_MF, generate
from .decoder import DEFAULT_SEARCH_BUDGET, decode
from .gf_mds import bits_to_int, expand_keys, mds_generator, split_chunks
from .subsets import DefectiveIndex

_FLOOR_SLACK = 1e-9


def feedback_budget(T, Rf):
    """Bits the private link can carry in T tests: floor(T * Rf)."""
    return max(0, math.floor(T * Rf + _FLOOR_SLACK))


@dataclass(frozen=True)
class KeyMaterial:
    feedback_bits: np.ndarray
    source_keys: np.ndarray  # (K, S_K)
    expanded_keys: np.ndarray  # (N, S_K)
    f_indices: np.ndarray  # (N,)

    def same_as(self, other):
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("feedback_bits", "source_keys", "expanded_keys", "f_indices")
        )


def derive_keys(feedback_bits, G, S_K, F):
    """Split, expand and index the feedback bits; run identically at both ends."""
    bits = np.asarray(feedback_bits, dtype=np.uint8)
    source = split_chunks(bits, G.K, S_K)
    expanded = expand_keys(source, G)
    f = bits_to_int(expanded) % F
    return KeyMaterial(bits, source, expanded, f)


@dataclass
class RoundTranscript:
    round_index: int
    params: object
    codebook_seed: int
    keys: KeyMaterial
    m_choices: np.ndarray
    w: DefectiveIndex
    rows: np.ndarray  # (K, T) rows actually pooled for the defectives
    y: object
    z: object
    M: int
    F: int
    S_K: int
    result: object = None
    error: str = ""
    feedback_positions: tuple = ()
    substituted: tuple = ()
    codebook: object = None

    @property
    def T(self):
        return self.y.T

    @property
    def decoded(self):
        return self.result.w_hat if self.result is not None and self.result.ok else None

    @property
    def ok(self):
        d = self.decoded
        return d is not None and d.w == self.w.w

    LOG_HEADER = "round,w,decoded,ok,T,M,F,S_K"

    def log_line(self):
        d = self.decoded
        dec = str(d.w) if d is not None else (self.result.status if self.result else self.error or "none")
        return f"{self.round_index},{self.w.w},{dec},{int(self.ok)},{self.T},{self.M},{self.F},{self.S_K}"


def _check_match(params, cb, G):
    M, F, _ = derive_MF(params)
    if (cb.N, cb.T) != (params.N, params.T) or (cb.M, cb.F) != (M, F):
        raise ValueError(
            f"codebook shape (N={cb.N}, M={cb.M}, F={cb.F}, T={cb.T}) does not match "
            f"params (N={params.N}, M={M}, F={F}, T={params.T})"
        )
    if (G.K, G.N) != (params.K, params.N):
        raise ValueError(f"generator is ({G.K}, {G.N}), params need ({params.K}, {params.N})")


def _as_index(w, params):
    if isinstance(w, DefectiveIndex):
        return w
    return DefectiveIndex.from_index(int(w), params.N, params.K)


def lab_feedback(seed, n_bits):
    return _rng.stream(seed, "feedback").integers(0, 2, n_bits, dtype=np.uint8)


def run_round(params, cb, G, w, seed, feedback_bits=None, round_index=0, do_decode=True, budget=DEFAULT_SEARCH_BUDGET):
    _check_match(params, cb, G)
    w = _as_index(w, params)
    M, F, S_K = derive_MF(params)
    if feedback_bits is None:
        feedback_bits = lab_feedback(seed, feedback_budget(params.T, params.Rf))
    bits = np.asarray(feedback_bits, dtype=np.uint8)

    lab = derive_keys(bits, G, S_K, F)
    mixer = derive_keys(bits.copy(), G, S_K, F)
    if not lab.same_as(mixer):
        raise AssertionError("lab and mixer disagree on keys")

    m_choices = _rng.stream(seed, "mixer").integers(0, M, params.N)
    subset = np.array(w.subset, dtype=np.int64)
    rows = cb.bins[subset, m_choices[subset], mixer.f_indices[subset]]
    y = pool(rows)
    z = eavesdrop(y, params.delta, _rng.derive_seed(seed, "eve"))

    t = RoundTranscript(round_index, params, params.seed, lab, m_choices, w, rows, y, z, M, F, S_K)
    if do_decode:
        try:
            t.result = decode(cb, lab.f_indices, y, params.K, budget=budget)
        except RuntimeError as exc:
            t.error = str(exc)
    return t


def first_round_tests(params, eps):
    """T_0: the secure non-adaptive sufficiency bound."""
    return sngt_bounds(params.N, params.K, params.delta, eps)[0]


def run_first_round(params, w, seed, eps, round_index=0, budget=DEFAULT_SEARCH_BUDGET):
    """One keyless round at T_0 tests with M_0 = 2^floor(T_0 (delta - eps_sec)/K), F_0 = 1."""
    p0 = params.replace(T=max(1, first_round_tests(params, eps)), Rf=0.0)
    cb = generate(p0)
    G = mds_generator(params.K, params.N)
    return run_round(p0, cb, G, w, seed, round_index=round_index, budget=budget)


@dataclass
class SessionReport:
    transcripts: list = field(default_factory=list)

    @property
    def rounds(self):
        return len(self.transcripts)

    @property
    def total_tests(self):
        return sum(t.T for t in self.transcripts)

    @property
    def amortized_tests(self):
        return self.total_tests / self.rounds

    @property
    def errors(self):
        return sum(not t.ok for t in self.transcripts)

    def log(self):
        return "\n".join([RoundTranscript.LOG_HEADER] + [t.log_line() for t in self.transcripts]) + "\n"


def run_session(params, rounds, w_sequence, seed, eps, budget=DEFAULT_SEARCH_BUDGET):
    """Round 1 keyless at T_0, later rounds keyed by the previous round's stream."""
    if rounds < 1:
        raise ValueError("a session needs at least one round")
    w_sequence = list(w_sequence)
    if len(w_sequence) < rounds:
        raise ValueError(f"need {rounds} defective indices, got {len(w_sequence)}")
    G = mds_generator(params.K, params.N)
    report = SessionReport()
    streamed = None
    for r in range(rounds):
        rseed = _rng.derive_seed(seed, "round", r)
        cseed = _rng.derive_seed(params.seed, "codebook", r)
        if r == 0:
            t = run_first_round(params.replace(seed=cseed), w_sequence[r], rseed, eps, round_index=r, budget=budget)
        else:
            p = params.replace(seed=cseed)
            need = feedback_budget(p.T, p.Rf)
            if streamed.shape[0] < need:
                raise ValueError(f"round {r} needs {need} key bits, previous round streamed {streamed.shape[0]}")
            t = run_round(p, generate(p), G, w_sequence[r], rseed, streamed[:need], round_index=r, budget=budget)
        report.transcripts.append(t)
        # the lab streams fresh bits at rate Rf during this round for the next one
        streamed = lab_feedback(_rng.derive_seed(rseed, "stream"), feedback_budget(t.T, params.Rf))
    return report


def column_bits(seed, p, t, j):
    """Entry j of the alternative column-codeword for test t."""
    return _rng.bernoulli(p, seed, np.uint64(0xC01), t, j)


def run_round_columns(params, w, seed, feedback_bits=None, do_decode=True, budget=DEFAULT_SEARCH_BUDGET):
    """Per-test variant: feedback bits swap whole test columns.

    Each item keeps a row-bin of M rows (F = 1). Each test t has a
    column-bin of two column-codewords over the N items: index 0 is the
    column of the original matrix, index 1 a fresh i.i.d. Bernoulli(ln2/K)
    column. The first floor(T*Rf) tests are feedback-dependent; for those
    the bit sent before the test picks the column. Bit 0 keeps the original.
    """
    w = _as_index(w, params)
    M, _, _ = derive_MF(params)
    base = generate(params, M=M, F=1)
    S = feedback_budget(params.T, params.Rf)
    if feedback_bits is None:
        feedback_bits = lab_feedback(seed, S)
    bits = np.asarray(feedback_bits, dtype=np.uint8)[:S]
    if bits.shape[0] < S:
        raise ValueError(f"need {S} feedback bits, got {bits.shape[0]}")

    positions = tuple(range(S))
    swapped = tuple(t for t, b in zip(positions, bits) if b)
    bins = base.bins.copy()
    if swapped:
        tt = np.array(swapped, dtype=np.uint64)[:, None]
        jj = np.arange(params.N, dtype=np.uint64)[None, :]
        alt = column_bits(params.seed, params.p, tt, jj)  # (len(swapped), N)
        bins[:, :, 0, list(swapped)] = alt.T[:, None, :]
    cb = Codebook(params, bins)

    m_choices = _rng.stream(seed, "mixer").integers(0, M, params.N)
    subset = np.array(w.subset, dtype=np.int64)
    rows = cb.bins[subset, m_choices[subset], 0]
    y = pool(rows)
    z = eavesdrop(y, params.delta, _rng.derive_seed(seed, "eve"))
    f0 = np.zeros(params.N, dtype=np.int64)
    keys = KeyMaterial(bits, np.zeros((params.K, 0), np.uint8), np.zeros((params.N, 0), np.uint8), f0)
    t = RoundTranscript(0, params, params.seed, keys, m_choices, w, rows, y, z, M, 1, 0,
                        feedback_positions=positions, substituted=swapped, codebook=cb)  # fmt: skip
    if do_decode:
        try:
            t.result = decode(cb, f0, y, params.K, budget=budget)
        except RuntimeError as exc:
            t.error = str(exc)
    return t


@dataclass(frozen=True)
class ReliabilityPoint:
    T: int
    M: int
    F: int
    trials: int
    errors: int
    mean_candidates: float
    skipped: bool = False

    @property
    def error_rate(self):
        return self.errors / self.trials if self.trials else math.nan


def reliability_trial(params, G, seed, budget=DEFAULT_SEARCH_BUDGET):
    """One planted trial: fresh codebook, uniform w, full round, decode."""
    p = params.replace(seed=_rng.derive_seed(seed, "codebook"))
    w = int(_rng.stream(seed, "w").integers(0, math.comb(p.N, p.K)))
    return run_round(p, generate(p), G, w, seed, budget=budget)


def monte_carlo_reliability(params, trials, seed, threads=1, budget=DEFAULT_SEARCH_BUDGET):
    """Error rate over seeded trials; trial i always uses the same seed.

    Trial seeds depend only on (seed, i), not on T or on scheduling, so sweeps
    over T share their randomness and results do not depend on ``threads``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    G = mds_generator(params.K, params.N)
    M, F, _ = derive_MF(params)
    seeds = [_rng.derive_seed(seed, "trial", i) for i in range(trials)]

    def one(s):
        return reliability_trial(params, G, s, budget)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(one, seeds))
    else:
        out = [one(s) for s in seeds]
    if any(t.error for t in out):
        return ReliabilityPoint(params.T, M, F, trials, 0, 0.0, skipped=True)
    errors = sum(not t.ok for t in out)
    cand = sum(t.result.candidates for t in out) / trials
    return ReliabilityPoint(params.T, M, F, trials, errors, cand)


def bound_sweep(t_bound, lo=0.5, hi=1.5, points=10):
    """``points`` test counts evenly spaced from lo*t_bound to hi*t_bound, rounded half up."""
    if points == 1:
        return [max(1, math.floor(t_bound * lo + 0.5))]
    return [max(1, math.floor(t_bound * (lo + (hi - lo) * i / (points - 1)) + 0.5)) for i in range(points)]
