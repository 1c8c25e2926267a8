"""
Reducing integers held in doubles
=================================

A double holds every integer up to 2^53 exactly. Reducing such values
mod p takes one multiply by a precomputed 1/p, a floor, and one fused
multiply-add for the remainder.
"""

import numpy as np

from fpmodmat import FMA_BACKEND, FpContext, fp_mul_reduce, fp_reduce, mod_inv, mod_pow

print("fma backend:", FMA_BACKEND)

# A 26-bit prime. Its context stores the correctly rounded reciprocal.
ctx = FpContext(67108859)
print(ctx, "q =", ctx.q)

###############################################################################
# Reduction accepts anything up to 2^(t-2) p, far beyond p^2.
x = np.array([0.0, 7.0, 2.0**40, float(ctx.reduce_bound)])
print(fp_reduce(x, ctx), [int(v) % ctx.p for v in x])

###############################################################################
# Products are split with an FMA into a rounded high part and an exact low
# part, so x*y need not fit in 53 bits. Here x*y is about 2^77.
x, y = 2.0**52 + 1, 2.0**25 - 3
print(fp_mul_reduce(x, y, ctx), (2**52 + 1) * (2**25 - 3) % ctx.p)

###############################################################################
# Powers and inverses build on the same primitive.
g = mod_pow(3, 10**18, ctx)
print("3^(10^18) mod p =", g, "inverse:", mod_inv(g, ctx), "check:", g * mod_inv(g, ctx) % ctx.p)
