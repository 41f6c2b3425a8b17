"""Integer factorization: trial division, Brent's rho, then Montgomery-curve ECM.

Every random choice comes from a generator seeded by the number being split
and a base seed (``OPNLAB_SEED`` when set), so factorizations are reproducible.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import compress
from math import gcd, prod

try:
    from gmpy2 import mpz as _big
except ImportError:  # pragma: no cover
    _big = int

from ..errors import FactoringTimeout
from .primality import is_prime, prime_sieve, primes_up_to

TRIAL_BOUND = 10**6
DEFAULT_DIGIT_BOUND = 40
DEFAULT_MAX_CURVES = 2000
DEFAULT_SEED = 20201
RHO_ITERATIONS = 1 << 13

# (B1, curves) stages; the last stage repeats with growing B1 if allowed.
_ECM_SCHEDULE = ((2_000, 25), (11_000, 90), (50_000, 300), (250_000, 700))


def base_seed() -> int:
    env = os.environ.get("OPNLAB_SEED")
    return int(env) if env else DEFAULT_SEED


@dataclass(frozen=True)
class Factorization:
    """Canonical factorization: primes strictly increasing, exponents >= 1.

    ``pretend_primes`` holds composite (or untested) factors that are
    deliberately treated as atomic primes, e.g. 22021 in Descartes' spoof.
    """

    factors: tuple[tuple[int, int], ...] = ()
    pretend_primes: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"non-canonical factorization {self.factors}")
            if p not in self.pretend_primes and not is_prime(p):
                raise ValueError(f"{p} is not prime")
            last = p

    @property
    def value(self) -> int:
        return prod(p**e for p, e in self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def power(self, j: int) -> Factorization:
        """Factorization of value**j."""
        return Factorization(tuple((p, e * j) for p, e in self.factors), self.pretend_primes)

    def __mul__(self, other: Factorization) -> Factorization:
        merged = self.as_dict()
        for p, e in other.factors:
            merged[p] = merged.get(p, 0) + e
        return Factorization(
            tuple(sorted(merged.items())), self.pretend_primes | other.pretend_primes
        )

    def __str__(self):
        if not self.factors:
            return "1"
        return " * ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _perfect_power(n: int) -> tuple[int, int] | None:
    # Cofactors reaching this point have no prime factor below TRIAL_BOUND.
    for k in primes_up_to(max(2, n.bit_length() // 20)):
        r = _iroot(n, k)
        if r**k == n:
            return r, k
    return None


def _brent_rho(n: int, rng: random.Random, budget: int) -> int | None:
    y, c = rng.randrange(1, n), rng.randrange(1, n)
    m, g, r, q = 128, 1, 1, 1
    x = ys = y
    spent = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += m
        spent += r
        r <<= 1
        if g == 1 and spent > budget:
            return None
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
            if g > 1:
                break
    return g if g != n else None


def _xdbl(x, z, a24, n):
    s = (x + z) * (x + z) % n
    d = (x - z) * (x - z) % n
    t = s - d
    return s * d % n, t * (d + a24 * t) % n


def _xadd(xp, zp, xq, zq, xd, zd, n):
    u = (xp - zp) * (xq + zq)
    v = (xp + zp) * (xq - zq)
    return zd * (u + v) ** 2 % n, xd * (u - v) ** 2 % n


def _ladder(k, x, z, a24, n):
    """Montgomery ladder: x-coordinate of k*(x:z). Point formulas inlined for speed."""
    x0, z0 = x, z
    x1, z1 = _xdbl(x, z, a24, n)
    for bit in bin(k)[3:]:
        # add: (x0:z0) + (x1:z1), difference (x:z)
        u = (x1 - z1) * (x0 + z0)
        v = (x1 + z1) * (x0 - z0)
        xa, za = z * (u + v) ** 2 % n, x * (u - v) ** 2 % n
        if bit == "1":
            s_, d_ = (x1 + z1) ** 2 % n, (x1 - z1) ** 2 % n
            x0, z0 = xa, za
        else:
            s_, d_ = (x0 + z0) ** 2 % n, (x0 - z0) ** 2 % n
            x1, z1 = xa, za
        t_ = s_ - d_
        xd, zd = s_ * d_ % n, t_ * (d_ + a24 * t_) % n
        if bit == "1":
            x1, z1 = xd, zd
        else:
            x0, z0 = xd, zd
    return x0, z0


_STAGE2_D = 2310


@lru_cache(maxsize=16)
def _stage2_plan(b1: int, b2: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Primes b1 < q <= b2 written q = i*D +- j, grouped by giant step i."""
    d = _STAGE2_D
    sieve = prime_sieve(b2)
    groups: dict[int, set[int]] = {}
    for q in compress(range(b1 + 1, b2 + 1), sieve[b1 + 1 :]):
        i, j = divmod(q, d)
        if j > d // 2:
            i, j = i + 1, d - j
        groups.setdefault(i, set()).add(j)
    return tuple((i, tuple(sorted(js))) for i, js in sorted(groups.items()))


def _ecm_curve(n: int, b1: int, b2: int, rng: random.Random) -> int | None:
    """One Suyama-parametrized curve, stage 1 to b1 and standard stage 2 to b2."""
    sigma = rng.randrange(6, n - 1)
    u = (sigma * sigma - 5) % n
    v = 4 * sigma % n
    x, z = pow(u, 3, n), pow(v, 3, n)
    den = 16 * x * v % n
    g = gcd(den, n)
    if g != 1:
        return g if g != n else None
    a24 = pow(v - u, 3, n) * (3 * u + v) * pow(den, -1, n) % n

    for p in primes_up_to(b1):
        pe = p
        while pe * p <= b1:
            pe *= p
        x, z = _ladder(pe, x, z, a24, n)
    g = gcd(z, n)
    if g != 1:
        return g if g != n else None

    d = _STAGE2_D
    baby = {}
    q2 = _xdbl(x, z, a24, n)
    # Baby steps jQ, odd j < d/2 coprime to d. (j+2)Q = jQ + 2Q with difference (j-2)Q;
    # for j == 1 that is -Q, same x-coordinate as Q.
    prev = cur = (x, z)
    for j in range(1, d // 2, 2):
        if gcd(j, d) == 1:
            baby[j] = cur
        prev, cur = cur, _xadd(*cur, *q2, *prev, n)
    plan = _stage2_plan(b1, b2)
    i = plan[0][0]
    dq = _ladder(d, x, z, a24, n)
    r_prev = _ladder((i - 1) * d, x, z, a24, n) if i > 1 else None
    r_cur = _ladder(i * d, x, z, a24, n)
    acc = 1
    for gi, js in plan:
        while i < gi:
            if r_prev is None:
                nxt = _xdbl(*r_cur, a24, n)
            else:
                nxt = _xadd(*r_cur, *dq, *r_prev, n)
            r_prev, r_cur = r_cur, nxt
            i += 1
        xr, zr = r_cur
        for j in js:
            xj, zj = baby[j]
            acc = acc * (xr * zj - xj * zr) % n
    g = gcd(acc, n)
    if g not in (1, n):
        return g
    return None


def _split(n: int, rng: random.Random, digit_bound: int, max_curves: int, original: int) -> int:
    """A nontrivial divisor of the composite n (no factors below TRIAL_BOUND)."""
    pp = _perfect_power(n)
    if pp:
        return pp[0]
    big = _big(n)
    d = _brent_rho(big, rng, RHO_ITERATIONS)
    if d:
        return int(d)
    curves = 0
    stages = list(_ECM_SCHEDULE)
    while True:
        for b1, count in stages:
            for _ in range(count):
                if curves >= max_curves and len(str(n)) > digit_bound:
                    raise FactoringTimeout(original, n, curves)
                curves += 1
                d = _ecm_curve(big, b1, 100 * b1, rng)
                if d:
                    return int(d)
        b1 = stages[-1][0] * 4
        stages = [(b1, stages[-1][1])]


def factorize(
    n: int,
    pretend_primes=(),
    *,
    digit_bound: int = DEFAULT_DIGIT_BOUND,
    max_curves: int = DEFAULT_MAX_CURVES,
    seed: int | None = None,
) -> Factorization:
    """Canonical factorization of n >= 1.

    Members of ``pretend_primes`` dividing n are peeled off first and kept
    as atomic factors. Raises FactoringTimeout when a cofactor longer than
    ``digit_bound`` digits survives ``max_curves`` ECM curves.
    """
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    pretend = frozenset(int(q) for q in pretend_primes)
    found: dict[int, int] = {}
    rest = n
    for q in sorted(pretend):
        if q < 2:
            raise ValueError(f"pretend prime must be >= 2, got {q}")
        while rest % q == 0:
            rest //= q
            found[q] = found.get(q, 0) + 1

    for p in primes_up_to(TRIAL_BOUND):
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            found[p] = found.get(p, 0) + e

    if rest > 1:
        rng = random.Random(f"{base_seed() if seed is None else seed}:{n}")
        stack = [rest]
        while stack:
            c = stack.pop()
            if c < TRIAL_BOUND * TRIAL_BOUND or is_prime(c):
                # Below TRIAL_BOUND**2 a survivor of trial division is prime.
                found[c] = found.get(c, 0) + 1
                continue
            d = _split(c, rng, digit_bound, max_curves, n)
            stack.extend((d, c // d))

    return Factorization(tuple(sorted(found.items())), pretend)
