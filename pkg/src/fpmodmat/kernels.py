"""Pluggable ``C <- C + A @ B`` kernels on floating-point matrices.

Both kernels are exact as long as the caller guarantees nonnegative
integer entries and a final dot-product value of at most 2^t: every
partial sum is then an integer no larger than the result, so any
association order is exact.
"""

import numpy as np
from scipy.linalg import blas


class GemmKernel:
    """Accumulating matrix product; subclasses implement :meth:`__call__`."""

    name = "abstract"

    def __call__(self, C, A, B):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


class NaiveKernel(GemmKernel):
    """Rank-1 updates in numpy, one per inner index. No BLAS involved."""

    name = "naive"

    def __call__(self, C, A, B):
        for l in range(A.shape[1]):
            C += A[:, l, None] * B[None, l, :]
        return C


class BlasKernel(GemmKernel):
    """Vendor BLAS ``xgemm`` with ``beta=1``, accumulating into C in place."""

    name = "accelerated"

    def __call__(self, C, A, B):
        gemm = blas.get_blas_funcs("gemm", dtype=C.dtype)
        # row-major C is column-major C^T, so compute C^T += B^T A^T
        ct = C.T
        out = gemm(1.0, B.T, A.T, beta=1.0, c=ct, overwrite_c=True)
        if not np.shares_memory(out, C):
            C[...] = out.T
        return C


KERNELS = {"naive": NaiveKernel, "accelerated": BlasKernel}


def get_kernel(kernel=None) -> GemmKernel:
    """Resolve a kernel instance from a name, an instance, or None (naive)."""
    if kernel is None:
        return NaiveKernel()
    if isinstance(kernel, GemmKernel):
        return kernel
    try:
        return KERNELS[kernel]()
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}") from None
