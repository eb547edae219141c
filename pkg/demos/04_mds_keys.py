"""Turning K key chunks into N item keys.

The lab streams K uniform chunks; the mixer needs a key for each of N
items, and whichever K items are defective must hold jointly uniform keys.
A Vandermonde generator over GF(2^m) does this because any K of its
columns are invertible.
"""

# %% setup
from itertools import combinations, product

import numpy as np

from sagt.gf_mds import IRREDUCIBLE_POLYS, bits_to_int, expand_keys, field_new, mds_generator

# %% the field
gf = field_new(2)
print("GF(4) multiplication table:\n", gf.mul(*np.meshgrid(range(4), range(4), indexing="ij")))
print("polynomial for m=8:", bin(IRREDUCIBLE_POLYS[8]))

# %% the generator and its text form
G = mds_generator(2, 5)
print(G.to_text())
print("MDS:", G.is_mds())

# %% every pair of full shares is a bijective image of the two sources
S_K = 3
src = np.array(list(product((0, 1), repeat=2 * S_K)), dtype=np.uint8).reshape(-1, 2, S_K)
full = expand_keys(src, G, truncate=False)
for a, c in combinations(range(5), 2):
    assert len({full[i, [a, c]].tobytes() for i in range(len(src))}) == len(src)
print("all 10 pairs of full shares take 64 distinct values")

# %% truncating back to S_K bits can break that when m does not divide S_K
for S_K in (2, 3):
    src = np.array(list(product((0, 1), repeat=2 * S_K)), dtype=np.uint8).reshape(-1, 2, S_K)
    keys = bits_to_int(expand_keys(src, G))
    bad = [(a, c) for a, c in combinations(range(5), 2) if len(set(zip(keys[:, a], keys[:, c]))) < len(src)]
    print(f"m={G.m}, S_K={S_K}: truncated pairs that are not uniform: {bad}")
