"""Elementary arithmetic: factorization, Moebius, characters, divisors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

_MAX_INPUT = 2**63 - 1

# residues mod 30 coprime to 30, as step increments from 7
_WHEEL = (4, 2, 4, 2, 4, 6, 2, 6)


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def __iter__(self):
        return iter(self.factors)


def _check_positive(n: int) -> None:
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    if n > _MAX_INPUT:
        raise ValueError(f"{n} exceeds 2^63 - 1")


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factorization:
    """Trial division with a 2-3-5 wheel."""
    _check_positive(n)
    value = n
    out = []
    for p in (2, 3, 5):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    p = 7
    i = 0
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += _WHEEL[i]
        i = (i + 1) % 8
    if n > 1:
        out.append((n, 1))
    return Factorization(value, tuple(out))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for q in range(3, isqrt(n) + 1, 2):
        if n % q == 0:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for q in range(2, isqrt(n) + 1):
        if sieve[q]:
            sieve[q * q :: q] = bytearray(len(range(q * q, n + 1, q)))
    return [i for i, flag in enumerate(sieve) if flag]


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac.factors) % 2 else 1


def chi4(n: int) -> int:
    """Primitive character mod 4."""
    if n < 0:
        raise ValueError("chi4 expects n >= 0")
    r = n % 4
    if r == 1:
        return 1
    if r == 3:
        return -1
    return 0


def legendre_symbol(a: int, p: int) -> int:
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"legendre_symbol needs an odd prime, got {p}")
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisor_count(n: int) -> int:
    count = 1
    for _, e in factorize(n):
        count *= e + 1
    return count


def has_prime_factor_3_mod_4(n: int) -> bool:
    return any(p % 4 == 3 for p, _ in factorize(n))
