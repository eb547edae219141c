"""How many tests does secure adaptive group testing need?

Walks through the test-count bounds: the price of an eavesdropper without
feedback, how private feedback buys that price back, and where the bounds
collapse to the non-secure ones.
"""

# %% setup
from sagt import bounds as b

N, K, eps = 100, 2, 0.2

# %% counting bound vs. the sufficiency bound
# log2 C(N, K) bits identify the defective pair; each test carries at most one bit.
print(f"log2 C({N},{K}) = {b.log2_binom(N, K):.2f} bits")
T, i_star = b.sufficient_sagt(N, K, 0.0, 0.0, eps)
print(f"no eavesdropper: {T} tests suffice (max attained at i={i_star})")

# %% an eavesdropper seeing half the outcomes doubles the non-adaptive price
for delta in (0.25, 0.5, 0.75):
    up, lo = b.sngt_bounds(N, K, delta, eps)
    print(f"delta={delta:.2f}  secure non-adaptive: {lo} <= T <= {up}")

# %% private feedback at rate Rf shrinks the factor 1/(1 - delta + Rf)
delta = 0.5
print(f"\ndelta={delta}: sufficient / converse tests as Rf grows")
for Rf in (0.0, 0.1, 0.25, 0.4, 0.5, 0.75):
    suff = b.sufficient_sagt(N, K, delta, Rf, eps)[0]
    conv = b.converse_sagt(N, K, delta, Rf)
    print(f"  Rf={Rf:.2f}  factor={b.secure_adaptive_factor(delta, Rf):.3f}  {conv:3d} <= T <= {suff:3d}")
# once Rf >= delta the factor is 1: the secure and non-secure bounds coincide

# %% the corollary trades tightness for a closed form
for n in (100, 1000, 10**6):
    print(f"N={n:>7}: sufficient {b.sufficient_sagt(n, K, 0.5, 0.25, eps)[0]:4d}  "
          f"corollary {b.corollary_bound(n, K, 0.5, 0.25, eps):4d}")

# %% public feedback (bound only)
for delta in (0.3, 0.6, 0.75, 0.9):
    print(f"public-feedback factor at delta={delta}: {b.public_factor(delta):.2f}")

# %% the whole report as CSV, as `sagt bounds` writes it
reports = [b.bound_report(N, K, d, r, eps) for d in (0.25, 0.5) for r in (0.1, 0.25)]
print(b.reports_to_csv(reports))
