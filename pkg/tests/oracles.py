"""Brute-force reference implementations, deliberately naive and independent of opnlab."""

from math import gcd


def divisor_sum(n):
    """Sum of divisors by trial enumeration up to sqrt(n)."""
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d
            if d * d != n:
                total += n // d
        d += 1
    return total


def divisor_sum_with_atom(n, atom):
    """Divisor sum of n when the factor ``atom`` (dividing n once) is treated as a prime."""
    assert n % atom == 0 and (n // atom) % atom != 0
    return divisor_sum(n // atom) * (atom + 1)


def naive_is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def lucas_lehmer(p):
    """2^p - 1 prime, for odd prime p."""
    mp = (1 << p) - 1
    s = 4
    for _ in range(p - 2):
        s = (s * s - 2) % mp
    return s == 0


def valuation2(n):
    r = 0
    while n % 2 == 0:
        n //= 2
        r += 1
    return r


def naive_valid(p, k, m):
    return (
        naive_is_prime(p)
        and p % 4 == 1
        and k >= 1
        and k % 4 == 1
        and m >= 1
        and m % 2 == 1
        and gcd(p, m) == 1
    )


def naive_candidates(m_max, pk_max, positive_gap=True):
    """Every valid (p, k, m) by a plain double loop, sorted by (m, p, k)."""
    out = []
    for p in range(2, pk_max + 1):
        if not naive_is_prime(p) or p % 4 != 1:
            continue
        k = 1
        while p**k <= pk_max:
            for m in range(1, m_max + 1, 2):
                if gcd(p, m) == 1 and (not positive_gap or m * m > p**k):
                    out.append((p, k, m))
            k += 4
    return sorted(out, key=lambda c: (c[2], c[0], c[1]))
