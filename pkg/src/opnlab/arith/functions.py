"""Divisor-sum arithmetic: sigma, deficiency, aliquot sum, abundancy."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .factor import Factorization, factorize


def sigma(f: Factorization) -> int:
    """Sum of divisors from a factorization; pretend primes count as primes."""
    total = 1
    for p, e in f:
        total *= (p ** (e + 1) - 1) // (p - 1)
    return total


def sigma_of(n: int, pretend_primes=()) -> int:
    return sigma(factorize(n, pretend_primes))


def deficiency(n: int, sigma_n: int) -> int:
    return 2 * n - sigma_n


def aliquot(n: int, sigma_n: int) -> int:
    return sigma_n - n


@dataclass(frozen=True)
class ArithProfile:
    n: int
    sigma: int
    deficiency: int  # signed: negative for abundant n
    aliquot: int
    abundancy: Fraction
    factorization: Factorization

    @property
    def is_perfect(self) -> bool:
        return self.deficiency == 0


def profile(n: int, pretend_primes=()) -> ArithProfile:
    f = factorize(n, pretend_primes)
    s = sigma(f)
    prof = ArithProfile(n, s, deficiency(n, s), aliquot(n, s), Fraction(s, n), f)
    assert prof.deficiency + prof.aliquot == n
    assert (prof.abundancy == 2) == (prof.deficiency == 0)
    return prof


def is_perfect(n: int, pretend_primes=()) -> bool:
    """sigma(n) == 2n."""
    return sigma_of(n, pretend_primes) == 2 * n
