"""
Multiword products up to 52 bits
================================

Splitting each reduced entry into u base-alpha digits (alpha = ceil(p^(1/u)))
makes the word products small enough to accumulate in doubles again. The
(u, v)-product then recombines uv word products with scalings mod p.
"""

import numpy as np

from fpmodmat import (FpContext, decompose, exact_mod_gemm, mw_block_size, mw_product,
                      mw_product_concat, mw_product_workspace, to_exact)
from fpmodmat.primes import largest_prime_with_bits

p = largest_prime_with_bits(52)
ctx = FpContext(p)
rng = np.random.default_rng(1)
A = rng.integers(0, p, (24, 40)).astype(float)
B = rng.integers(0, p, (40, 8)).astype(float)

###############################################################################
# Two words of about 26 bits each, reconstructing A exactly.
d = decompose(A, 2, ctx)
print("alpha =", d.base, "max word =", max(int(w.max()) for w in d.words))
print("reconstructs:", d.reconstruct().tolist() == to_exact(A))

###############################################################################
# (2,2) at 52 bits is only feasible with lambda = 1; (2,3) gets a few hundred.
ref = exact_mod_gemm(A, B, p)
for u, v in ((2, 2), (2, 3)):
    lam = mw_block_size(u, v, p)
    C = mw_product(A, B, u, v, lam, ctx, "accelerated")
    print(f"({u},{v}) lambda={lam}: exact={to_exact(C) == ref}")

###############################################################################
# With a narrow B, the words of B can be placed side by side so a single
# wide GEMM replaces v narrow ones.
C = mw_product_concat(A, B, 2, 3, mw_block_size(2, 3, p), ctx, "accelerated", side="B")
print("concatenated (2,3):", to_exact(C) == ref)

###############################################################################
# For composite moduli the scaling inverses may not exist; the workspace
# variant avoids them.
q = 91
cq = FpContext(q, allow_composite=True)
A = rng.integers(0, q, (5, 6)).astype(float)
B = rng.integers(0, q, (6, 4)).astype(float)
C = mw_product_workspace(A, B, 2, 2, mw_block_size(2, 2, q), cq)
print("mod 91:", to_exact(C) == exact_mod_gemm(A, B, q))
