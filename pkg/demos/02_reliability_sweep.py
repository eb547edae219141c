"""Does the lab actually decode at the sufficiency bound?

Plants a random defective pair, runs full rounds (keys, mixer choices,
pooling, decoding) and sweeps T around the bound. The bound is asymptotic,
so at N = 50 the error rate at the bound itself is far from zero; it falls
off steadily as T grows.
"""

# %% setup
import math

from sagt import bounds as b
from sagt import _rng
from sagt.codebook import CodebookParams, derive_MF, generate
from sagt.gf_mds import mds_generator
from sagt.protocol import bound_sweep, monte_carlo_reliability, run_round

N, K, delta, Rf, eps = 50, 2, 0.5, 0.25, 0.2
T_bound, _ = b.sufficient_sagt(N, K, delta, Rf, eps)
print("bound:", T_bound, "tests")

# %% one round, step by step
params = CodebookParams(N, K, T_bound, delta, Rf, seed=1)
M, F, S_K = derive_MF(params)
print(f"M={M} sub-bins x F={F} keyed codewords per item, {S_K} key bits per source chunk")
cb, G = generate(params), mds_generator(K, N)
w = int(_rng.stream(3, "w").integers(math.comb(N, K)))
t = run_round(params, cb, G, w, seed=3)
print("defectives :", t.w.subset)
print("lab sees   :", t.y)
print("Eve sees   :", t.z)
print("decoded    :", t.result.status, t.decoded.subset if t.decoded else None)

# %% error rate across a sweep (shared trial seeds at every T)
for T in bound_sweep(T_bound, 0.5, 1.5, 10):
    pt = monte_carlo_reliability(params.replace(T=T), 300, seed=7, threads=4)
    bar = "#" * round(40 * pt.error_rate)
    print(f"T={T:3d} M={pt.M:2d} F={pt.F:2d} error={pt.error_rate:.3f} {bar}")
