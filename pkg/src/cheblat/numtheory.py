"""Prime utilities and exact modular residue arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SIMPLE_SIEVE_LIMIT = 10**7
_SEGMENT = 1 << 20

# these witnesses make Miller-Rabin deterministic for all n < 3.3e24
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def nextprime(x) -> int:
    """Smallest prime strictly greater than x."""
    if x < 2:
        return 2
    n = math.floor(x) + 1
    while not is_prime(n):
        n += 1
    return n


@dataclass(frozen=True)
class PrimeRange:
    """All primes within [lo, hi], ascending and complete."""

    lo: int
    hi: int
    primes: tuple[int, ...]

    def __len__(self):
        return len(self.primes)

    def __getitem__(self, i):
        return self.primes[i]

    def __iter__(self):
        return iter(self.primes)


def primes_in(lo: int, hi: int) -> PrimeRange:
    """Complete ascending run of primes in the closed interval [lo, hi]."""
    lo, hi = int(lo), int(hi)
    if not 3 <= lo <= hi:
        raise ValueError(f"need 3 <= lo <= hi, got [{lo}, {hi}]")
    if hi <= _SIMPLE_SIEVE_LIMIT:
        flags = _sieve_flags(hi)
        found = np.flatnonzero(flags[lo:]) + lo
        return PrimeRange(lo, hi, tuple(int(p) for p in found))
    # segmented sieve above the simple limit to bound memory
    base = [int(p) for p in np.flatnonzero(_sieve_flags(math.isqrt(hi)))]
    out: list[int] = []
    start = lo
    while start <= hi:
        stop = min(start + _SEGMENT, hi + 1)
        seg = np.ones(stop - start, dtype=bool)
        for p in base:
            first = max(p * p, (start + p - 1) // p * p)
            if first < stop:
                seg[first - start :: p] = False
        out.extend(int(v) + start for v in np.flatnonzero(seg))
        start = stop
    return PrimeRange(lo, hi, tuple(out))


def _sieve_flags(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def residue(h, z, size) -> int:
    """Inner product h.z reduced to [0, size - 1], exact for any magnitudes."""
    if len(h) != len(z):
        raise ValueError("dimension mismatch between frequency and generating vector")
    acc = 0
    for a, b in zip(h, z):
        acc += int(a) * int(b)
    return acc % int(size)
