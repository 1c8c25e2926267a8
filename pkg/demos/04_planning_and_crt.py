"""
Choosing a variant, and comparing with the multimodular approach
================================================================

The planner picks the cheapest (u, v) whose block size stays >= 1 at the
worst modulus of a given bit length. The same block-size rule bounds how
many products a multiword approach needs, which we set against the number
of CRT moduli a multimodular product would need.
"""

import numpy as np

from fpmodmat import multiply, select_variant, variant_bit_limit
from fpmodmat.planner import VARIANTS, crt_comparison

print("limits:", {uv: variant_bit_limit(*uv) for uv in VARIANTS})

###############################################################################
# Square shapes: (1,1), (1,2), (1,3), then (2,2).
prev = None
for bits in range(1, 53):
    plan = select_variant(bits, 1024, 1024, 1024)
    if (plan.u, plan.v) != prev:
        print(f"from {bits:2d} bits: ({plan.u},{plan.v})")
        prev = (plan.u, plan.v)

###############################################################################
# A tall-and-skinny product concatenates B's words and, at 40-42 bits,
# prefers the (1,4) product for its single wide GEMM.
for bits in (38, 41, 45):
    plan = select_variant(bits, 10923, 32768, 32)
    print(bits, plan, "storage entries:", plan.storage_entries)

###############################################################################
# Products needed, CRT vs multiword, for a long inner dimension.
for lam in (1, 512):
    print(f"lambda={lam}")
    for b, s, uv, u, v in crt_comparison(range(20, 53, 4), 32768, 53, lam):
        print(f"  {b} bits: CRT {s}, multiword {uv} ({u},{v})")

###############################################################################
# The one-call entry point plans and runs.
p = 2**45 - 55
A = np.random.default_rng(2).integers(0, p, (50, 60)).astype(float)
print(multiply(A, A.T.copy(), p)[:2, :3].astype(np.int64))
