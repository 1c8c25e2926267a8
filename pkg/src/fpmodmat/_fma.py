"""Fused multiply-add with a single rounding, as a numpy ufunc.

The hardware path lowers ``llvm.fma`` through numba; LLVM guarantees a
correctly rounded result (falling back to libm when the target has no FMA
unit). If numba is unusable, a software FMA built on exact rational
arithmetic is used instead: slow, but still a single rounding.
"""

from fractions import Fraction
import logging

import numpy as np

log = logging.getLogger(__name__)


def round_to_precision(r: Fraction, t: int) -> Fraction:
    """Round ``r`` to nearest with ties to even on a ``t``-bit significand.

    Exponent range is unbounded (no overflow or subnormals), which is
    enough for the integer-valued operands this package handles.
    """
    if r == 0:
        return Fraction(0)
    sign = -1 if r < 0 else 1
    r = abs(r)
    n, d = r.numerator, r.denominator
    e = n.bit_length() - d.bit_length()
    if Fraction(2) ** e > r:
        e -= 1
    # scale so the significand lands in [2^(t-1), 2^t)
    shift = e - t + 1
    scaled = r / Fraction(2) ** shift
    m = scaled.numerator // scaled.denominator
    rem = scaled - m
    if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and m % 2 == 1):
        m += 1
    return sign * m * Fraction(2) ** shift


def _software_fma_scalar(a, b, c, t):
    r = Fraction(float(a)) * Fraction(float(b)) + Fraction(float(c))
    return float(round_to_precision(r, t))


def _software_fma(a, b, c):
    a, b, c = np.broadcast_arrays(np.asarray(a), np.asarray(b), np.asarray(c))
    dtype = np.result_type(a, b, c)
    t = np.finfo(dtype).nmant + 1
    out = np.empty(a.shape, dtype=dtype)
    for idx in np.ndindex(a.shape):
        out[idx] = _software_fma_scalar(a[idx], b[idx], c[idx], t)
    return out[()] if out.ndim == 0 else out


def _build_hardware_fma():
    from llvmlite import ir
    from numba import vectorize
    from numba.extending import intrinsic

    @intrinsic
    def _llvm_fma(typingctx, a, b, c):
        sig = a(a, b, c)

        def codegen(context, builder, signature, args):
            ty = context.get_value_type(signature.return_type)
            fn = builder.module.declare_intrinsic(
                "llvm.fma", [ty], ir.FunctionType(ty, [ty, ty, ty])
            )
            return builder.call(fn, args)

        return sig, codegen

    # float32 loop first so single-precision inputs are not promoted
    @vectorize(
        ["float32(float32, float32, float32)", "float64(float64, float64, float64)"],
        cache=True,
    )
    def fma(a, b, c):
        return _llvm_fma(a, b, c)

    return fma


def has_single_rounding(fn) -> bool:
    """Detect whether ``fn`` fuses: an unfused a*b+c loses these low bits."""
    a64 = np.float64(1 + 2.0**-27)
    ok64 = fn(a64, np.float64(1 - 2.0**-27), np.float64(-1.0)) == -(2.0**-54)
    a32 = np.float32(1 + 2.0**-12)
    r32 = fn(a32, a32, np.float32(-(1 + 2.0**-11)))
    ok32 = r32 == np.float32(2.0**-24) and np.asarray(r32).dtype == np.float32
    return bool(ok64 and ok32)


def _select():
    try:
        hw = _build_hardware_fma()
        if has_single_rounding(hw):
            return hw, "hardware"
        log.warning("compiled fma failed the single-rounding probe")
    except Exception as exc:  # numba/llvmlite missing or broken
        log.warning("compiled fma unavailable (%s)", exc)
    log.warning("falling back to software fma; arithmetic will be slow")
    return _software_fma, "software"


fma, FMA_BACKEND = _select()
