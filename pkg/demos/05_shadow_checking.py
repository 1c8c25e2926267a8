"""
Replaying a product in exact arithmetic
=======================================

The shadow checker recomputes every panel in Python integers and flags the
first partial sum that leaves the exactly representable range. Planned block
sizes never trip it; one more column does.
"""

import numpy as np

from fpmodmat import (FpContext, block_gemm_mod, max_block_size_sw, mw_block_size, mw_product,
                      shadow_trace)
from fpmodmat.oracle import worst_case_matrix
from fpmodmat.primes import largest_prime_with_bits

p = largest_prime_with_bits(24)
ctx = FpContext(p)
lam = max_block_size_sw(p - 1, p - 1, p)
A = worst_case_matrix(2, lam + 1, p)
B = worst_case_matrix(lam + 1, 2, p)

ok = shadow_trace(block_gemm_mod, None, A, B, lam, ctx)
print(f"lambda={lam}: passed={ok.passed} after {ok.checks} checks")

bad = shadow_trace(block_gemm_mod, None, A, B, lam + 1, ctx)
print(f"lambda={lam + 1}: passed={bad.passed}")
print("  first violation:", bad.first)

###############################################################################
# Multiword products can record C after every word pair, which is how the
# scaling steps are audited.
p = largest_prime_with_bits(35)
ctx = FpContext(p)
rng = np.random.default_rng(3)
A = rng.integers(0, p, (3, 5)).astype(float)
B = rng.integers(0, p, (5, 2)).astype(float)
v = shadow_trace(mw_product, A, B, 1, 2, mw_block_size(1, 2, p), ctx, record_steps=True)
for (i, j), C in v.steps:
    print(f"after word pair ({i},{j}):", C[0])
