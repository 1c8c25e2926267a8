"""Deterministic primality for 64-bit integers and small prime-search helpers."""

# Jim Sinclair's base set: no strong pseudoprime below 2^64 passes all of these.
_WITNESSES = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)
_SMALL = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Miller-Rabin with a witness set that is exact for every n < 2^64."""
    if n < 2:
        return False
    for sp in _SMALL:
        if n % sp == 0:
            return n == sp
    if n >= 1 << 64:
        raise ValueError("deterministic test only covers n < 2^64")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _WITNESSES:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prev_prime(n: int) -> int:
    """Largest prime strictly below n."""
    c = n - 1
    while c >= 2:
        if is_prime(c):
            return c
        c -= 1
    raise ValueError(f"no prime below {n}")


def largest_prime_with_bits(bits: int) -> int:
    """Largest prime p with bit length exactly ``bits`` (p < 2^bits)."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    return prev_prime(1 << bits)


def random_prime_with_bits(bits: int, rng) -> int:
    """Uniformly drawn candidate of the given bit length, advanced to the next prime that keeps the bitsize."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    lo, hi = 1 << (bits - 1), 1 << bits
    while True:
        c = int(rng.integers(lo, hi))
        while c < hi:
            if is_prime(c):
                return c
            c += 1
