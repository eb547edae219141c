import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagt.codebook import Codebook, CodebookParams, derive_MF, generate, row


def P(**kw):
    base = dict(N=4, K=1, T=6, delta=0.5, Rf=0.25, eps_sec=0.05, seed=0)
    base.update(kw)
    return CodebookParams(**base)


def test_derive_mf_worked_example():
    p = CodebookParams(N=10, K=2, T=40, delta=0.5, Rf=0.2, eps_sec=0.05)
    assert derive_MF(p) == (32, 16, 4)


def test_zero_rate_feedback():
    M, F, S_K = derive_MF(P(Rf=0.0, T=20))
    assert (F, S_K) == (1, 0)
    assert M == 2 ** math.floor(20 * 0.45)


@pytest.mark.parametrize("T,K", [(5, 1), (17, 2), (60, 3)])
def test_rf_above_delta_clamps_m(T, K):
    p = CodebookParams(N=10, K=K, T=T, delta=0.3, Rf=0.5)
    assert derive_MF(p)[0] == 1


@pytest.mark.parametrize(
    "kw",
    [dict(K=0), dict(K=5, N=4), dict(T=0), dict(delta=1.0), dict(delta=-0.1), dict(Rf=1.5), dict(eps_sec=-1)],
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        P(**kw)


def test_shape_small():
    cb = generate(CodebookParams(N=2, K=1, T=3, delta=0.0))
    assert cb.bins.shape == (2, 1, 1, 3)


def test_shape_matches_derived():
    p = P(T=8)
    M, F, _ = derive_MF(p)
    cb = generate(p)
    assert cb.bins.shape == (4, M, F, 8)
    assert (cb.N, cb.M, cb.F, cb.T) == (4, M, F, 8)


def test_k1_density():
    p = CodebookParams(N=100, K=1, T=1000, delta=0.0, seed=7)
    cb = generate(p)
    n = cb.bins.size
    assert n >= 10**5
    sigma = math.sqrt(p.p * (1 - p.p) / n)
    assert abs(cb.bins.mean() - math.log(2)) < 5 * sigma


def test_k3_density():
    p = CodebookParams(N=50, K=3, T=2000, delta=0.0, seed=3)
    cb = generate(p)
    sigma = math.sqrt(p.p * (1 - p.p) / cb.bins.size)
    assert abs(cb.bins.mean() - p.p) < 5 * sigma


def test_same_seed_same_codebook():
    assert np.array_equal(generate(P(seed=11)).bins, generate(P(seed=11)).bins)
    assert not np.array_equal(generate(P(seed=11)).bins, generate(P(seed=12)).bins)


def test_rows_shared_across_splits():
    # flat index m*F + f: a 2x2 bin and a 4x1 bin hold the same four rows
    a = generate(P(T=6), M=2, F=2)
    b = generate(P(T=6), M=4, F=1)
    assert np.array_equal(a.bins.reshape(4, 4, 6), b.bins.reshape(4, 4, 6))


def test_longer_t_extends_shorter():
    short = generate(P(T=6), M=2, F=2)
    long = generate(P(T=10), M=2, F=2)
    assert np.array_equal(long.bins[..., :6], short.bins)


def test_tests_are_independent_of_one_another():
    # neighbouring positions should not be correlated
    cb = generate(CodebookParams(N=200, K=1, T=400, delta=0.0, seed=5))
    x = cb.bins[:, 0, 0, :].astype(float)
    r = np.corrcoef(x[:, :-1].ravel(), x[:, 1:].ravel())[0, 1]
    assert abs(r) < 5 / math.sqrt(x[:, 1:].size)


def test_memory_budget_guard():
    with pytest.raises(MemoryError):
        generate(CodebookParams(N=1000, K=1, T=1000, delta=0.0), budget=10**5)


def test_row_lookup():
    cb = generate(P(T=8))
    assert np.array_equal(row(cb, 0, 0, 0), cb.bins[0, 0, 0])
    assert np.array_equal(row(cb, 3, cb.M - 1, cb.F - 1), row(cb, 3, cb.M - 1, cb.F - 1))
    with pytest.raises(IndexError):
        row(cb, 0, 0, cb.F)
    with pytest.raises(IndexError):
        row(cb, 4, 0, 0)
    with pytest.raises(IndexError):
        row(cb, 0, -1, 0)


def test_bins_are_read_only():
    cb = generate(P())
    with pytest.raises(ValueError):
        cb.bins[0, 0, 0, 0] = True


def test_dump_load_round_trip(tmp_path):
    cb = generate(P(T=7))
    path = tmp_path / "cb.bin"
    cb.dump(path)
    raw = path.read_bytes()
    assert np.frombuffer(raw[:16], "<u4").tolist() == [cb.N, cb.M, cb.F, cb.T]
    back = Codebook.load(path, cb.params)
    assert np.array_equal(back.bins, cb.bins)


def test_from_rows():
    cb = Codebook.from_rows([[1, 0, 1], [0, 1, 1]])
    assert cb.bins.shape == (2, 1, 1, 3)


@settings(max_examples=40, deadline=None)
@given(
    T=st.integers(1, 80),
    K=st.integers(1, 4),
    delta=st.floats(0, 0.99),
    Rf=st.floats(0, 1),
    eps_sec=st.floats(0, 0.3),
)
def test_derive_mf_invariants(T, K, delta, Rf, eps_sec):
    p = CodebookParams(N=max(K, 5), K=K, T=T, delta=delta, Rf=Rf, eps_sec=eps_sec)
    M, F, S_K = derive_MF(p)
    assert M >= 1 and F >= 1 and F == 2**S_K
    assert S_K <= T * Rf / K + 1e-9
    assert math.log2(M) <= max(0.0, T * (delta - Rf - eps_sec) / K) + 1e-9
