"""Multiword decompositions and the (u, v)-multiword modular products.

A reduced matrix M is written as ``sum(alpha**i * M_i)`` with
``alpha = ceil(p**(1/u))`` so each word has entries of roughly
``bits(p)/u`` bits. Products of words then fit a much larger block size
than products of full-size residues, which is what lets primes well beyond
``2^(t/2)`` go through floating-point GEMM exactly.
"""

from dataclasses import dataclass
import logging

import numpy as np

from ._fma import fma
from .block import InfeasibleError, block_gemm_mod
from .kernels import get_kernel
from .scalar import (ContractError, FpContext, fp_mul_reduce, fp_reduce,
                     mod_inv, mod_pow, scale_mod)

log = logging.getLogger(__name__)


def word_base(p: int, u: int) -> int:
    """Smallest integer ``a`` with ``a**u >= p``, i.e. the exact ``ceil(p**(1/u))``."""
    p, u = int(p), int(u)
    if p <= 1 or u < 1:
        raise ValueError("need p > 1 and u >= 1")
    if u == 1:
        return p
    c = max(1, round(p ** (1.0 / u)))
    while c**u < p:
        c += 1
    while c > 1 and (c - 1) ** u >= p:
        c -= 1
    return c


def word_bound(p: int, u: int) -> int:
    """Upper bound on the entries of a ``u``-word decomposition of a reduced matrix.

    This is ``alpha`` for ``u >= 2``; a single word is the matrix itself, so
    its entries stay below ``p - 1``.
    """
    return int(p) - 1 if int(u) == 1 else word_base(p, u)


@dataclass
class WordDecomposition:
    """``source == sum(base**i * words[i])`` with every word entry in [0, base]."""

    base: int
    words: list

    @property
    def count(self) -> int:
        return len(self.words)

    @property
    def bound(self) -> int:
        """Largest possible word entry."""
        return self.base - 1 if self.count == 1 else self.base

    @property
    def shape(self):
        return self.words[0].shape

    def reconstruct(self):
        """Exact recombination as an object array of Python ints."""
        acc = np.zeros(self.shape, dtype=object)
        for w in reversed(self.words):
            acc = acc * self.base + w.astype(np.int64).astype(object)
        return acc


def decompose(M, u: int, ctx: FpContext) -> WordDecomposition:
    """Split a reduced matrix into ``u`` base-``alpha`` digit matrices.

    Each quotient is ``floor(fl(T / alpha))``, which is the exact integer
    quotient for any ``T < 2^t``; the remainder ``T - alpha*R`` is taken
    with an FMA.
    """
    if int(u) < 1:
        raise ContractError("word count must be >= 1")
    M = ctx.asarray(M)
    if ctx.checked and np.any(M >= ctx.fp):
        raise ContractError("decompose: matrix is not reduced mod p")
    alpha = word_base(ctx.p, u)
    a = ctx.dtype.type(alpha)
    T = M.copy()
    words = []
    for _ in range(int(u) - 1):
        R = np.floor(T / a)
        words.append(np.asarray(fma(-a, R, T)))
        T = R
    words.append(T)
    return WordDecomposition(alpha, words)


def _words(M, count, ctx):
    if isinstance(M, WordDecomposition):
        if M.count != count:
            raise ContractError(f"decomposition has {M.count} words, expected {count}")
        if M.base != word_base(ctx.p, count):
            raise ContractError("decomposition base does not match the modulus")
        return M
    return decompose(M, count, ctx)


def _check_lambda(lam, max_a, max_b, ctx):
    lam = int(lam)
    if lam < 1 or lam * max_a * max_b + ctx.p - 1 > 2**ctx.t:
        raise InfeasibleError(
            f"lambda={lam} violates lambda*max_a*max_b + p - 1 <= 2^{ctx.t} "
            f"(word bounds {max_a} and {max_b}, p={ctx.p})")
    return lam


def _mul_mod(x, y, ctx):
    # scalar helper: floating-point path when the product bound allows it
    if ctx.mul_bound_ok(x * y):
        return int(fp_mul_reduce(x, y, ctx))
    return x * y % ctx.p


class _Scalings:
    """gamma_ij = alpha^i beta^j mod p and (lazily) its inverse."""

    def __init__(self, alpha, beta, ctx):
        self.ctx = ctx
        self.a, self.b = alpha % ctx.p, beta % ctx.p
        self._inv = {}

    def gamma(self, i, j):
        return _mul_mod(mod_pow(self.a, i, self.ctx), mod_pow(self.b, j, self.ctx), self.ctx)

    def _inv_pow(self, x, e):
        # a single-word operand has base p == 0 mod p, but only ever power 0
        if e == 0:
            return 1
        if x not in self._inv:
            self._inv[x] = mod_inv(x, self.ctx)
        return mod_pow(self._inv[x], e, self.ctx)

    def delta(self, i, j):
        return _mul_mod(self._inv_pow(self.a, i), self._inv_pow(self.b, j), self.ctx)


def _prepare(A, B, u, v, lam, ctx):
    wa, wb = _words(A, u, ctx), _words(B, v, ctx)
    m, k = wa.shape
    k2, n = wb.shape
    if k != k2:
        raise ContractError(f"cannot multiply {wa.shape} by {wb.shape}")
    lam = _check_lambda(lam, wa.bound, wb.bound, ctx)
    return wa, wb, lam, (m, k, n)


def mw_product(A, B, u: int, v: int, lam: int, ctx: FpContext, kernel=None, *, trace=None):
    """``A @ B mod p`` from ``u*v`` word products, without a workspace.

    For each word pair, C is first scaled by ``delta = gamma^-1 mod p``, the
    word product is accumulated into it with the blocked product, and the
    result is scaled back by ``gamma``. Needs p prime (or at least alpha and
    beta invertible) and ``lam*alpha*beta + p - 1 <= 2^t``.

    ``A`` or ``B`` may be passed already decomposed.
    """
    kernel = get_kernel(kernel)
    wa, wb, lam, (m, k, n) = _prepare(A, B, u, v, lam, ctx)
    sc = _Scalings(wa.base, wb.base, ctx)
    C = np.zeros((m, n), dtype=ctx.dtype)
    for i, A_i in enumerate(wa.words):
        for j, B_j in enumerate(wb.words):
            gamma, delta = sc.gamma(i, j), sc.delta(i, j)
            if trace is not None:
                trace.stage = f"word ({i},{j}) scale by delta"
            C = scale_mod(C, delta, ctx, trace)
            if trace is not None:
                trace.stage = f"word ({i},{j}) block product"
            C = block_gemm_mod(C, A_i, B_j, lam, ctx, kernel,
                               max_a=wa.bound, max_b=wb.bound, trace=trace)
            if trace is not None:
                trace.stage = f"word ({i},{j}) scale by gamma"
            C = scale_mod(C, gamma, ctx, trace)
            if trace is not None:
                trace.step(i, j, C)
    return C


def _accumulate(C, T, gamma, ctx, trace):
    T = scale_mod(T, gamma, ctx, trace)
    S = C + T
    if trace is not None:
        trace.reduce_input(S)
    return fp_reduce(S, ctx)


def concat_side(m: int, n: int) -> str:
    """Concatenate B's words when n < m, A's when n > m (B on a tie)."""
    return "A" if n > m else "B"


def mw_product_concat(A, B, u: int, v: int, lam: int, ctx: FpContext, kernel=None,
                      side=None, *, trace=None):
    """Same value as :func:`mw_product`, with the words of one operand concatenated.

    With ``side="B"`` each ``A_i`` multiplies ``[B_0 ... B_{v-1}]`` (k x nv)
    in one blocked product into an m x nv workspace, which is then scaled
    per block and accumulated into C. ``side="A"`` stacks the ``A_i``
    vertically instead. ``side=None`` picks by :func:`concat_side`.
    """
    kernel = get_kernel(kernel)
    wa, wb, lam, (m, k, n) = _prepare(A, B, u, v, lam, ctx)
    side = (side or concat_side(m, n)).upper()
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    sc = _Scalings(wa.base, wb.base, ctx)
    C = np.zeros((m, n), dtype=ctx.dtype)
    if side == "B":
        log.debug("concat-B workspace: %d entries", v * m * n)
        Bcat = np.ascontiguousarray(np.hstack(wb.words))
        for i, A_i in enumerate(wa.words):
            if trace is not None:
                trace.stage = f"word row {i} concatenated product"
            T = block_gemm_mod(None, A_i, Bcat, lam, ctx, kernel,
                               max_a=wa.bound, max_b=wb.bound, trace=trace)
            for j in range(v):
                if trace is not None:
                    trace.stage = f"word ({i},{j}) scale and accumulate"
                C = _accumulate(C, T[:, j * n:(j + 1) * n], sc.gamma(i, j), ctx, trace)
                if trace is not None:
                    trace.step(i, j, C)
    else:
        log.debug("concat-A workspace: %d entries", u * m * n)
        Acat = np.ascontiguousarray(np.vstack(wa.words))
        for j, B_j in enumerate(wb.words):
            if trace is not None:
                trace.stage = f"word column {j} concatenated product"
            T = block_gemm_mod(None, Acat, B_j, lam, ctx, kernel,
                               max_a=wa.bound, max_b=wb.bound, trace=trace)
            for i in range(u):
                if trace is not None:
                    trace.stage = f"word ({i},{j}) scale and accumulate"
                C = _accumulate(C, T[i * m:(i + 1) * m], sc.gamma(i, j), ctx, trace)
                if trace is not None:
                    trace.step(i, j, C)
    return C


def mw_product_workspace(A, B, u: int, v: int, lam: int, ctx: FpContext, kernel=None, *,
                         trace=None):
    """Inverse-free multiword product; valid for composite moduli.

    Each word product is reduced into a scratch matrix, scaled by gamma and
    added into C with one more reduction.
    """
    kernel = get_kernel(kernel)
    wa, wb, lam, (m, k, n) = _prepare(A, B, u, v, lam, ctx)
    sc = _Scalings(wa.base, wb.base, ctx)
    C = np.zeros((m, n), dtype=ctx.dtype)
    for i, A_i in enumerate(wa.words):
        for j, B_j in enumerate(wb.words):
            if trace is not None:
                trace.stage = f"word ({i},{j}) workspace product"
            T = block_gemm_mod(None, A_i, B_j, lam, ctx, kernel,
                               max_a=wa.bound, max_b=wb.bound, trace=trace)
            if trace is not None:
                trace.stage = f"word ({i},{j}) scale and accumulate"
            C = _accumulate(C, T, sc.gamma(i, j), ctx, trace)
            if trace is not None:
                trace.step(i, j, C)
    return C
