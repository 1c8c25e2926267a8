"""
Why single-word products stop at 26 bits
========================================

The blocked product adds lambda rank-1 panels between reductions. Every
partial sum must stay below 2^53, so lambda shrinks like 2^53 / p^2 and
reaches zero once p has 27 bits (beyond about 2^26.5).
"""

import time

import numpy as np

from fpmodmat import FpContext, block_gemm_mod, exact_mod_gemm, max_block_size_sw, to_exact
from fpmodmat.primes import largest_prime_with_bits

for bits in (10, 16, 20, 24, 26, 27):
    p = largest_prime_with_bits(bits)
    print(f"{bits:2d} bits  p={p:<10d} lambda={max_block_size_sw(p - 1, p - 1, p)}")

###############################################################################
# The result is exact for any panel width up to the bound...
rng = np.random.default_rng(0)
p = largest_prime_with_bits(26)
ctx = FpContext(p)
A = rng.integers(0, p, (17, 33)).astype(float)
B = rng.integers(0, p, (33, 9)).astype(float)
C = block_gemm_mod(None, A, B, 2, ctx, "accelerated")
print("exact:", to_exact(C) == exact_mod_gemm(A, B, p))

###############################################################################
# ...but the number of reductions grows as lambda shrinks, which is what
# makes small moduli fast and 26-bit moduli slow.
n = 384
for bits in (10, 26):
    p = largest_prime_with_bits(bits)
    ctx = FpContext(p)
    lam = max_block_size_sw(p - 1, p - 1, p)
    A = rng.integers(0, p, (n, n)).astype(float)
    t0 = time.perf_counter()
    block_gemm_mod(None, A, A, lam, ctx, "accelerated")
    dt = time.perf_counter() - t0
    print(f"{bits} bits: lambda={min(lam, n)}, {2 * n**3 / dt * 1e-9:.2f} effective Gflops/s")
