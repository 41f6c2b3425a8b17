"""Primality testing and small-prime sieving."""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import compress

# Miller-Rabin with the first twelve primes as bases is exact below this bound
# (the smallest strong pseudoprime to all of them), which exceeds 2**64.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
DETERMINISTIC_LIMIT = 318665857834031151167461
# Extra random rounds above the deterministic range: 4**-64 == 2**-128.
PROBABLE_ROUNDS = 64


@lru_cache(maxsize=8)
def prime_sieve(limit: int) -> bytearray:
    """Flag table of length limit+1 with sieve[i] == 1 iff i is prime."""
    sieve = bytearray([1]) * (limit + 1)
    sieve[: min(2, limit + 1)] = bytes(min(2, limit + 1))
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return sieve


@lru_cache(maxsize=8)
def primes_up_to(limit: int) -> tuple[int, ...]:
    sieve = prime_sieve(limit)
    return tuple(compress(range(limit + 1), sieve))


def _strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Miller-Rabin, deterministic below 2**64 (and well beyond).

    Larger inputs get 64 extra rounds with bases drawn from a generator
    seeded by ``n`` itself, so the answer is reproducible; see
    :func:`primality_certainty` for how such results are labelled.
    """
    if n < 2:
        return False
    for p in _DETERMINISTIC_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while not d & 1:
        d >>= 1
        s += 1
    if not all(_strong_probable_prime(n, a, d, s) for a in _DETERMINISTIC_BASES):
        return False
    if n < DETERMINISTIC_LIMIT:
        return True
    rng = random.Random(n)
    return all(
        _strong_probable_prime(n, rng.randrange(2, n - 1), d, s)
        for _ in range(PROBABLE_ROUNDS)
    )


def primality_certainty(n: int) -> str:
    """'prime', 'probable-prime' or 'composite' (0 and 1 count as composite)."""
    if not is_prime(n):
        return "composite"
    return "prime" if n < DETERMINISTIC_LIMIT else "probable-prime"
