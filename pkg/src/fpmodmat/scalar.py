"""Exact modular arithmetic on integers stored in floating-point.

Every routine here works elementwise on numpy arrays (or scalars) holding
nonnegative integer values. Binary64 (t=53) is the default working format;
binary32 (t=24) is supported so that boundary cases can be hit exhaustively.
"""

from dataclasses import dataclass, field

import numpy as np

from ._fma import fma
from .primes import is_prime

# significand width -> numpy dtype
FORMATS = {53: np.dtype(np.float64), 24: np.dtype(np.float32)}


class ContractError(ValueError):
    """A documented precondition was violated (raised only in checked mode)."""


class NoInverseError(ArithmeticError):
    """The element is not invertible modulo p."""


@dataclass(frozen=True)
class FpContext:
    """Prime field descriptor for floating-point modular arithmetic.

    Parameters
    ----------
    p : int
        Modulus, ``5 <= p < 2**(t-1)``. Must be prime unless
        ``allow_composite`` is set.
    t : int
        Significand width of the working format, 53 or 24.
    checked : bool
        Verify preconditions with exact integer arithmetic on every call.
    allow_composite : bool
        Skip the primality requirement (only the workspace multiword
        product is valid for composite moduli).
    """

    p: int
    t: int = 53
    checked: bool = False
    allow_composite: bool = False
    q: float = field(init=False, repr=False)
    dtype: np.dtype = field(init=False, repr=False)

    def __post_init__(self):
        p, t = int(self.p), int(self.t)
        if t not in FORMATS:
            raise ValueError(f"no working format with t={t}; use one of {sorted(FORMATS)}")
        if not 5 <= p < 2 ** (t - 1):
            raise ValueError(f"modulus must satisfy 5 <= p < 2^{t - 1}, got {p}")
        if not self.allow_composite and not is_prime(p):
            raise ValueError(f"{p} is not prime (pass allow_composite=True to override)")
        dtype = FORMATS[t]
        one = dtype.type(1)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "dtype", dtype)
        object.__setattr__(self, "q", one / dtype.type(p))

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    @property
    def fp(self):
        """p as a scalar of the working dtype."""
        return self.dtype.type(self.p)

    @property
    def reduce_bound(self) -> int:
        """Largest input accepted by :func:`fp_reduce`."""
        return 2 ** (self.t - 2) * self.p

    def mul_bound_ok(self, xy: int) -> bool:
        """Whether an exact product ``xy`` is within the product-reduction bound."""
        return 3 * xy <= 2 ** (self.t - 1) * self.p

    def asarray(self, x):
        return np.asarray(x, dtype=self.dtype)


def _as_ints(x):
    return np.asarray(x).astype(np.int64).astype(object)


def _check_integral(x, what):
    if not np.all(np.floor(x) == x):
        raise ContractError(f"{what}: non-integer input")
    if np.any(x < 0):
        raise ContractError(f"{what}: negative input")


def _check_reduce(x, ctx):
    _check_integral(x, "fp_reduce")
    # 2^(t-2) p is exactly representable, so this float comparison is exact
    if np.any(x > ctx.dtype.type(ctx.reduce_bound)):
        raise ContractError(f"fp_reduce: input exceeds 2^{ctx.t - 2}*p")


def _check_mul(x, y, ctx):
    _check_integral(x, "fp_mul_reduce")
    _check_integral(y, "fp_mul_reduce")
    xy = _as_ints(x) * _as_ints(y)
    worst = int(np.max(xy)) if np.ndim(xy) else int(xy)
    if not ctx.mul_bound_ok(worst):
        raise ContractError(f"fp_mul_reduce: product {worst} exceeds 2^{ctx.t - 1}/3*p")


def _correct(d, p):
    np.subtract(d, p, out=d, where=d >= p)
    np.add(d, p, out=d, where=d < 0)
    return d[()] if d.ndim == 0 else d


def fp_reduce(x, ctx: FpContext):
    """Reduce integers ``x <= 2^(t-2) p`` into ``[0, p)``.

    One multiply by the precomputed reciprocal, a floor, an FMA remainder
    and at most one correction in each direction.
    """
    x = ctx.asarray(x)
    if ctx.checked:
        _check_reduce(x, ctx)
    p = ctx.fp
    c = np.floor(x * ctx.q)
    d = np.asarray(fma(-c, p, x))
    return _correct(d, p)


def fp_mul_reduce(x, y, ctx: FpContext):
    """``x*y mod p`` for integers with ``x*y <= (2^(t-1)/3) p``.

    The product is split error-free into ``h + l`` with an FMA; ``h`` is
    reduced and the low part added back before the final corrections.
    """
    x, y = ctx.asarray(x), ctx.asarray(y)
    if ctx.checked:
        _check_mul(x, y, ctx)
    p = ctx.fp
    h = x * y
    low = fma(x, y, -h)
    c = np.floor(h * ctx.q)
    d = fma(-c, p, h)
    e = np.asarray(d + low)
    return _correct(e, p)


def scale_mod(m, g: int, ctx: FpContext, trace=None):
    """``g*m mod p`` for a reduced matrix ``m`` and a scalar ``0 <= g < p``.

    When ``g*(p-1)`` fits the product-reduction bound this is one
    :func:`fp_mul_reduce` sweep. Otherwise (p within a couple of bits of
    2^(t-1)) ``g`` is expanded in base 2^(t-3) and applied Horner-style, so
    every individual product stays within the bound.
    """
    g = int(g)
    if ctx.mul_bound_ok(g * (ctx.p - 1)):
        if trace is not None:
            trace.mul_input(m, g)
        return fp_mul_reduce(m, g, ctx)
    base = 2 ** (ctx.t - 3)
    digits = []
    while g:
        g, r = divmod(g, base)
        digits.append(r)
    acc = None
    for r in reversed(digits):
        if trace is not None:
            trace.mul_input(m, r)
        term = fp_mul_reduce(m, r, ctx)
        if acc is None:
            acc = term
            continue
        if trace is not None:
            trace.mul_input(acc, base)
        acc = fp_mul_reduce(acc, base, ctx) + term
        if trace is not None:
            trace.reduce_input(acc)
        acc = fp_reduce(acc, ctx)
    return acc


def mod_pow(base: int, e: int, ctx: FpContext) -> int:
    """``base**e mod p`` with a reduction after every multiplication.

    Falls back to exact integer powering when ``3p(p-1) > 2^(t-1) p``,
    where two reduced factors could break the product-reduction bound.
    """
    base, e = int(base), int(e)
    if not 0 <= base < ctx.p:
        raise ContractError("mod_pow: base must be reduced")
    if e < 0:
        raise ContractError("mod_pow: negative exponent")
    if not ctx.mul_bound_ok(ctx.p * (ctx.p - 1)):
        return pow(base, e, ctx.p)
    one = ctx.dtype.type(1)
    acc, sq = one, ctx.dtype.type(base)
    while e:
        if e & 1:
            acc = fp_mul_reduce(acc, sq, ctx)
        e >>= 1
        if e:
            sq = fp_mul_reduce(sq, sq, ctx)
    return int(acc)


def mod_inv(a: int, ctx: FpContext) -> int:
    """Inverse of ``a`` modulo p (extended Euclid on exact integers)."""
    try:
        return pow(int(a), -1, ctx.p)
    except ValueError:
        raise NoInverseError(f"{a} has no inverse modulo {ctx.p}") from None
