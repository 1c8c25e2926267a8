"""Exact modular matrix multiplication C = AB mod p on floating-point GEMM.

Single-word blocked products for p up to about 2^(t/2), and (u, v)-multiword
products that reach p < 2^(t-1) by splitting the operands into small words.
"""

from ._fma import FMA_BACKEND, fma
from .block import InfeasibleError, block_gemm_mod, elementwise_reduce, max_block_size_sw
from .kernels import BlasKernel, GemmKernel, NaiveKernel, get_kernel
from .multiword import (WordDecomposition, concat_side, decompose, mw_product,
                        mw_product_concat, mw_product_workspace, word_base)
from .oracle import (ShadowTrace, Verdict, exact_mod_gemm, exact_mod_gemm_colmajor,
                     from_exact, shadow_trace, to_exact)
from .planner import (ProductPlan, crt_num_products, mw_block_size, mw_num_products,
                      plan_for_prime, select_variant, variant_bit_limit)
from .primes import is_prime, largest_prime_with_bits
from .scalar import (ContractError, FpContext, NoInverseError, fp_mul_reduce, fp_reduce,
                     mod_inv, mod_pow, scale_mod)

__version__ = "0.1.0"


def multiply(A, B, p, *, t=53, kernel=None, plan=None):
    """``A @ B mod p`` with the planner's choice of variant, block size and concatenation."""
    ctx = FpContext(p, t)
    m, k = A.shape
    n = B.shape[1]
    plan = plan or plan_for_prime(p, m, k, n, t)
    if plan.u == plan.v == 1:
        return block_gemm_mod(None, A, B, plan.lam, ctx, kernel)
    if plan.concat == "none":
        return mw_product(A, B, plan.u, plan.v, plan.lam, ctx, kernel)
    return mw_product_concat(A, B, plan.u, plan.v, plan.lam, ctx, kernel, side=plan.concat)
