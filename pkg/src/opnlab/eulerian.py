"""Eulerian-form candidates N = p^k m^2 and the index i(p) at the special prime."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .arith import factorize, is_prime, sigma
from .errors import CandidateRejected


@dataclass(frozen=True)
class EulerianCandidate:
    p: int
    k: int
    m: int
    pretend_primes: frozenset[int] = field(default_factory=frozenset)

    @property
    def pk(self) -> int:
        return self.p**self.k

    @property
    def N(self) -> int:
        return self.p**self.k * self.m * self.m

    @property
    def key(self) -> tuple[int, int, int]:
        return self.m, self.p, self.k


def rejection_reasons(p: int, k: int, m: int, pretend_primes=()) -> list[tuple[str, str]]:
    reasons = []
    if not (p in pretend_primes or is_prime(p)):
        reasons.append(("NotPrime", f"{p} is not prime"))
    if p % 4 != 1:
        reasons.append(("BadResidue", f"p = {p} is {p % 4} mod 4, need 1"))
    if k < 1 or k % 4 != 1:
        reasons.append(("BadExponent", f"k = {k} is not a positive integer = 1 mod 4"))
    if m < 1:
        reasons.append(("NonPositiveM", f"m = {m} must be >= 1"))
    if gcd(p, m) != 1:
        reasons.append(("NotCoprime", f"gcd({p}, {m}) = {gcd(p, m)}"))
    if m % 2 == 0:
        reasons.append(("EvenM", f"m = {m} is even"))
    return reasons


def validate_candidate(p: int, k: int, m: int, pretend_primes=()) -> EulerianCandidate:
    """Check every Eulerian condition; raise CandidateRejected listing all failures."""
    pretend = frozenset(pretend_primes)
    reasons = rejection_reasons(p, k, m, pretend)
    if reasons:
        raise CandidateRejected(p, k, m, reasons)
    return EulerianCandidate(p, k, m, pretend)


def sigma_prime_power(p: int, k: int) -> int:
    return (p ** (k + 1) - 1) // (p - 1)


def sigma_m_squared(m: int, pretend_primes=()) -> int:
    return sigma(factorize(m, pretend_primes).power(2))


@dataclass(frozen=True)
class IndexReport:
    """The five expressions for i(p).

    They coincide when N is perfect; for the non-perfect candidates met in
    practice they generally disagree, and all five are reported as is.
    """

    e1: Fraction  # sigma(m^2) / p^k
    e2: Fraction  # 2 m^2 / sigma(p^k)
    e3: Fraction  # D(m^2) / s(p^k)
    e4: Fraction  # s(m^2) / (D(p^k) / 2)
    e5: int  # gcd(m^2, sigma(m^2))
    sigma_pk: int
    sigma_m2: int
    degenerate: tuple[str, ...] = ()

    @property
    def values(self) -> tuple:
        return self.e1, self.e2, self.e3, self.e4, self.e5

    @property
    def all_agree(self) -> bool:
        return len(set(self.values)) == 1

    @property
    def perfection_equivalent(self) -> bool:
        return self.e1 == self.e2


def index_report(c: EulerianCandidate) -> IndexReport:
    pk, m2 = c.pk, c.m * c.m
    s_pk = sigma_prime_power(c.p, c.k)
    s_m2 = sigma_m_squared(c.m, c.pretend_primes)
    d_pk = 2 * pk - s_pk
    # sigma(p^k) is a sum of k+1 = 2 mod 4 odd terms, so D(p^k) is even.
    assert d_pk % 2 == 0 and d_pk > 0
    degenerate = ()
    if c.m == 1:
        # s(1) = 0 zeroes e4 and D(1) = 1 makes e3 = 1 / s(p^k).
        degenerate = ("m_equals_one", "e4_zero_numerator")
    return IndexReport(
        e1=Fraction(s_m2, pk),
        e2=Fraction(2 * m2, s_pk),
        e3=Fraction(2 * m2 - s_m2, s_pk - pk),
        e4=Fraction(s_m2 - m2, d_pk // 2),
        e5=gcd(m2, s_m2),
        sigma_pk=s_pk,
        sigma_m2=s_m2,
        degenerate=degenerate,
    )


def perfection_oracle(c: EulerianCandidate) -> bool:
    """Ground truth sigma(N) == 2N, factoring N from scratch."""
    n = c.N
    return sigma(factorize(n, c.pretend_primes)) == 2 * n
