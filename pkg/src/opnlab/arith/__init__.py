from .factor import Factorization, factorize
from .functions import ArithProfile, aliquot, deficiency, is_perfect, profile, sigma, sigma_of
from .primality import is_prime, primality_certainty, prime_sieve, primes_up_to

__all__ = [
    "ArithProfile",
    "Factorization",
    "aliquot",
    "deficiency",
    "factorize",
    "is_perfect",
    "is_prime",
    "primality_certainty",
    "prime_sieve",
    "primes_up_to",
    "profile",
    "sigma",
    "sigma_of",
]
