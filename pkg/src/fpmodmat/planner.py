"""Variant selection, block sizes, cost model and the multiword-vs-CRT product count.

Everything here is exact integer arithmetic on (bitsize, t, lambda); no
floating-point matrix is touched.
"""

from dataclasses import dataclass
import math

from .multiword import word_bound

# variants with a known bitsize limit, in increasing cost
VARIANTS = ((1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3))
# search space for product counting: u <= 2, v <= 4, u <= v
SEARCH_SPACE = ((1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4))

CONCAT_THRESHOLD = 256


def mw_block_size(u: int, v: int, p: int, t: int = 53) -> int:
    """Largest ``lam`` with ``lam*alpha*beta + p - 1 <= 2^t``; 0 when none exists.

    ``alpha`` and ``beta`` are the exact ceilings of ``p**(1/u)`` and
    ``p**(1/v)``, except that a single-word side is bounded by ``p - 1``.
    So for ``u = v = 1`` this is exactly the single-word block size.
    """
    room = 2**t - (p - 1)
    if room < 0:
        return 0
    return room // (word_bound(p, u) * word_bound(p, v))


def _worst_prime_surrogate(bits):
    # largest value of that bit length; bits=1 has no prime, use 2
    return max(2**bits - 1, 2)


def admits(u: int, v: int, bits: int, t: int = 53, min_lambda: int = 1) -> bool:
    """Whether every ``bits``-bit modulus runs the (u, v)-product with block size >= min_lambda."""
    if bits > t - 1:
        return False
    return mw_block_size(u, v, _worst_prime_surrogate(bits), t) >= min_lambda


def variant_bit_limit(u: int, v: int, t: int = 53, min_lambda: int = 1) -> int:
    """Largest bitsize the (u, v)-product handles exactly.

    The search uses the worst-case surrogate ``p = 2^b - 1`` (block size is
    decreasing in p) and is capped by the working-format requirement
    ``p < 2^(t-1)``. Returns 0 if not even 2-bit moduli fit.
    """
    if u < 1 or v < 1:
        raise ValueError("word counts must be >= 1")
    best = 0
    for b in range(2, t):
        if admits(u, v, b, t, min_lambda):
            best = b
        else:
            break
    return best


@dataclass(frozen=True)
class ProductPlan:
    u: int
    v: int
    lam: int
    concat: str  # "none", "A" or "B"
    m: int
    k: int
    n: int

    @property
    def predicted_products(self) -> int:
        return self.u * self.v

    @property
    def predicted_reductions(self) -> int:
        return self.u * self.v * self.m * self.n * (-(-self.k // self.lam) + 2)

    @property
    def storage_entries(self) -> int:
        base = self.k * (self.u * self.m + self.v * self.n) + self.m * self.n
        if self.concat == "B":
            return base + self.v * self.m * self.n
        if self.concat == "A":
            return base + self.u * self.m * self.n
        return base

    @property
    def predicted_flops(self) -> int:
        return 2 * self.u * self.v * self.m * self.k * self.n


def _rank(uv):
    u, v = uv
    # cheapest first, then fewer words in total, then the (1, v) family
    return (u * v, u + v, u)


def select_variant(bits: int, m: int, k: int, n: int, t: int = 53, min_lambda: int = 1,
                   concat_threshold: int = CONCAT_THRESHOLD) -> ProductPlan:
    """Cheapest (u, v) that handles ``bits``-bit moduli with block size >= min_lambda.

    Ties at equal ``uv`` go to fewer total words, so (2,2) beats (1,4),
    except when concatenation is active (``min(m, n) < concat_threshold``)
    where the wider concatenated (1,4) product is preferred. Concatenation
    stacks the words of B when ``n <= m`` and of A otherwise; in the latter
    case the word counts are swapped so the concatenated side carries the
    larger count. Block size is evaluated at the worst ``bits``-bit modulus.
    """
    if bits > t - 1:
        raise ValueError(f"modulus unrepresentable: {bits} bits > t-1 = {t - 1}")
    if bits < 1:
        raise ValueError("bits must be >= 1")
    concat_active = min(m, n) < concat_threshold
    ok = [uv for uv in VARIANTS if admits(*uv, bits, t, min_lambda)]
    if not ok:
        raise ValueError(f"no variant reaches block size {min_lambda} at {bits} bits")
    ok.sort(key=_rank)
    u, v = ok[0]
    if concat_active and (1, 4) in ok and u * v == 4:
        u, v = 1, 4
    concat = "none"
    if concat_active and u * v > 1:
        side = "A" if n > m else "B"
        concat = side
        if side == "A":
            u, v = v, u
    lam = mw_block_size(u, v, _worst_prime_surrogate(bits), t)
    return ProductPlan(u, v, min(lam, max(k, 1)), concat, m, k, n)


def plan_for_prime(p: int, m: int, k: int, n: int, t: int = 53, variant=None,
                   concat="auto", lam=None, concat_threshold: int = CONCAT_THRESHOLD) -> ProductPlan:
    """Concrete plan for a specific modulus, optionally forcing parts of it.

    The block size is computed for ``p`` itself rather than the worst
    modulus of its bitsize, so it can only be larger than
    :func:`select_variant`'s.
    """
    if variant is None:
        base = select_variant(p.bit_length(), m, k, n, t, concat_threshold=concat_threshold)
        u, v, side = base.u, base.v, base.concat
    else:
        u, v = variant
        side = "none"
        if min(m, n) < concat_threshold and u * v > 1:
            side = "A" if n > m else "B"
    if concat != "auto":
        side = {"off": "none", "none": "none", "a": "A", "b": "B"}[str(concat).lower()]
    if lam is None:
        lam = min(mw_block_size(u, v, p, t), max(k, 1))
    return ProductPlan(u, v, int(lam), side, m, k, n)


# --------------------------------------------------------- CRT comparison --


def crt_num_products(bits_p: int, k: int, t: int = 53, lam: int = 1) -> int:
    """Lower bound on the number of CRT moduli (hence products) for ``C = AB mod p``.

    ``ceil((4 log2 p + 2 log2 k) / (t - log2 lam))`` with ``log2 p`` taken as
    the bitsize. The bound can undercount slightly since the moduli must be
    pairwise coprime (see :data:`CRT_UNDERESTIMATE_NOTE`).
    """
    if min(bits_p, k, t, lam) <= 0:
        raise ValueError("all arguments must be positive")
    if lam >= 2**t:
        raise ValueError("lambda must be below 2^t")
    num = 4 * bits_p + 2 * math.log2(k)
    return math.ceil(num / (t - math.log2(lam)))


CRT_UNDERESTIMATE_NOTE = (
    "lower bound: coprime moduli cannot all sit at the maximal size, "
    "so the true count may be slightly higher")


def mw_num_products(bits_p: int, t: int = 53, lam: int = 1):
    """Cheapest (u, v) whose approximate count and exact block-size condition both hold.

    The approximate condition is ``(u+v) log2 p <= uv (t - log2 lam)``; the
    exact one is :func:`mw_block_size` >= ``lam`` at the worst ``bits_p``-bit
    modulus. Returns ``(u, v, uv)``.
    """
    if bits_p > t - 1:
        raise ValueError(f"modulus unrepresentable: {bits_p} bits > t-1")
    room = t - math.log2(lam)
    for u, v in sorted(SEARCH_SPACE, key=_rank):
        if (u + v) * bits_p <= u * v * room and admits(u, v, bits_p, t, lam):
            return u, v, u * v
    raise ValueError(f"no (u, v) with u <= 2, v <= 4 handles {bits_p} bits at lambda={lam}")


def crt_comparison(bits_range, k: int, t: int = 53, lam: int = 1):
    """Rows ``(bits, s_crt, uv_mw, u, v)`` for every bitsize in ``bits_range``."""
    rows = []
    for b in bits_range:
        u, v, uv = mw_num_products(b, t, lam)
        rows.append((b, crt_num_products(b, k, t, lam), uv, u, v))
    return rows
