"""Single-word blocked modular matrix product."""

import numpy as np

from .kernels import get_kernel
from .scalar import ContractError, FpContext, fp_reduce


class InfeasibleError(ValueError):
    """No block size >= 1 keeps the panel accumulation exact."""


def max_block_size_sw(max_a: int, max_b: int, p: int, t: int = 53) -> int:
    """Largest ``lam`` with ``lam*max_a*max_b + p - 1 <= 2^t``; 0 means infeasible.

    With ``max_a = max_b = p - 1`` this is the classical single-word block
    size ``floor((2^t - p + 1) / (p - 1)^2)``.
    """
    max_a, max_b = int(max_a), int(max_b)
    if max_a < 0 or max_b < 0:
        raise ValueError("entry bounds must be nonnegative")
    room = 2**t - (p - 1)
    if room < 0:
        return 0
    prod = max_a * max_b
    if prod == 0:
        # any block size is exact; report the largest meaningful one
        return room if room >= 1 else 0
    return room // prod


def elementwise_reduce(M, ctx: FpContext, trace=None):
    """Reduce every entry of ``M`` into [0, p)."""
    if trace is not None:
        trace.reduce_input(M)
    return fp_reduce(M, ctx)


def block_gemm_mod(C, A, B, lam: int, ctx: FpContext, kernel=None, *,
                   max_a=None, max_b=None, trace=None):
    """Return ``C + A @ B mod p`` computed panel by panel.

    The inner dimension is cut into ``ceil(k/lam)`` panels (the last one
    possibly narrower). Each panel product is accumulated straight into C by
    the kernel, then C is reduced. Exactness needs
    ``lam*max(A)*max(B) + p - 1 <= 2^t`` with C reduced on entry; ``max_a``
    and ``max_b`` are known upper bounds that save a scan in checked mode.

    ``C`` is not modified; a new array is returned.
    """
    kernel = get_kernel(kernel)
    A, B = ctx.asarray(A), ctx.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ContractError(f"cannot multiply {A.shape} by {B.shape}")
    m, k = A.shape
    n = B.shape[1]
    if C is None:
        C = np.zeros((m, n), dtype=ctx.dtype)
    else:
        C = np.array(C, dtype=ctx.dtype, order="C")
        if C.shape != (m, n):
            raise ContractError(f"accumulator shape {C.shape} != {(m, n)}")
    lam = int(lam)
    if lam < 1:
        raise InfeasibleError("block size infeasible (lambda < 1)")
    lam = min(lam, max(k, 1))
    if ctx.checked:
        ma = int(A.max(initial=0)) if max_a is None else int(max_a)
        mb = int(B.max(initial=0)) if max_b is None else int(max_b)
        if lam * ma * mb + ctx.p - 1 > 2**ctx.t:
            raise ContractError(
                f"lambda={lam} breaks lambda*max(A)*max(B) + p - 1 <= 2^{ctx.t}")
        if np.any(C >= ctx.fp):
            raise ContractError("accumulator is not reduced mod p")
    for j, start in enumerate(range(0, k, lam)):
        stop = min(start + lam, k)
        A_j, B_j = A[:, start:stop], B[start:stop, :]
        if trace is not None:
            trace.panel(j, C, A_j, B_j)
        kernel(C, A_j, B_j)
        if trace is not None:
            trace.after_panel(C)
            trace.reduce_input(C)
        C = fp_reduce(C, ctx)
    return C
