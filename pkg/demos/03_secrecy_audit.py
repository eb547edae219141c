"""How much does the eavesdropper learn?

Exact I(W; Z) for a tiny instance, conditioned on the codebook: with and
without keys, across T, and as Eve's view improves. A Monte Carlo estimate
is checked against the exact value.
"""

# %% setup
import numpy as np

from sagt.codebook import CodebookParams, generate
from sagt.gf_mds import mds_generator
from sagt.secrecy import exact_leakage, exact_leakage_by_mask, leakage_comparison, monte_carlo_leakage

p = CodebookParams(N=4, K=1, T=6, delta=0.5, Rf=0.25, seed=0)
G = mds_generator(1, 4)
cb = generate(p)
print(f"M={cb.M}, F={cb.F}; W has log2 4 = 2 bits of entropy")

# %% two independent enumerations agree
a = exact_leakage(cb, G, p).mi_bits
m = exact_leakage_by_mask(cb, G, p).mi_bits
print(f"kernel route {a:.12f}\nmask route   {m:.12f}")

# %% keys and sub-bins hide the defective
c = leakage_comparison(p)
print(f"keyed {c.keyed.mi_bits:.4f} bits  vs  unkeyed {c.unkeyed.mi_bits:.4f} bits")

# %% more tests, less leakage per test
for T in (4, 6, 8):
    q = p.replace(T=T)
    r = exact_leakage(generate(q), G, q)
    print(f"T={T}: I={r.mi_bits:.4f} bits, I/T={r.normalized:.4f}")

# %% leakage grows with what Eve sees
for d in np.linspace(0, 1, 6):
    print(f"delta={d:.1f}: {exact_leakage(cb, G, p, delta=d).mi_bits:.4f} bits")

# %% plug-in Monte Carlo on the same codebook
mc = monte_carlo_leakage(p, 2_000_000, seed=1, blocks=5, codebook=cb)
print(f"monte carlo {mc.mi_bits:.4f} +/- {mc.stderr:.4f} (exact {a:.4f}); {mc.note}")
