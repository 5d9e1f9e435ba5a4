"""Word-size prime fields, CRT lifting and rational reconstruction.

Real numbers at a chosen decimal precision are plain ``mpmath.mpf`` values
created inside :func:`precision`; nothing here wraps them further.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
from sympy import isprime

DEFAULT_DIGITS = 500
MAX_OFFSET = 1000


class ModularError(ArithmeticError):
    """Raised when a modular computation cannot proceed (bad modulus, zero divisor)."""


def check_prime(p: int) -> int:
    p = int(p)
    if p < 2 or not isprime(p):
        raise ModularError(f"modulus {p} is not prime")
    return p


def generate_prime_batch(count: int, bits: int = 30) -> list[int]:
    """The ``count`` largest primes ``2**bits - r`` with ``0 < r < 1000``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 8 <= bits <= 62:
        raise ValueError("bits must lie in [8, 62]")
    top = 1 << bits
    primes = []
    for r in range(1, MAX_OFFSET):
        if isprime(top - r):
            primes.append(top - r)
            if len(primes) == count:
                return primes
    raise ValueError(f"only {len(primes)} primes of the form 2^{bits}-r with r<{MAX_OFFSET}")


def prime_pool(count: int, bits: int = 30) -> list[int]:
    """``count`` distinct primes drawn from the families 2^bits - r,
    2^(bits-1) - r, ... in that order (each family has only a few dozen)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[int] = []
    while len(out) < count:
        if bits < 8:
            raise ValueError("prime families exhausted")
        top = 1 << bits
        out += [top - r for r in range(1, MAX_OFFSET) if isprime(top - r)][: count - len(out)]
        bits -= 1
    return out


def balanced(v: int, modulus: int) -> int:
    v %= modulus
    return v - modulus if 2 * v > modulus else v


def crt_combine(residues: Iterable[tuple[int, int]]) -> int:
    """Integer in ``(-P/2, P/2]`` congruent to every ``(residue, prime)`` pair."""
    pairs = [(int(r), int(p)) for r, p in residues]
    moduli = [p for _, p in pairs]
    if len(set(moduli)) != len(moduli):
        raise ValueError("duplicate moduli in CRT batch")
    if not pairs:
        raise ValueError("empty CRT batch")
    value, modulus = pairs[0][0] % pairs[0][1], pairs[0][1]
    for r, p in pairs[1:]:
        # Garner step: value + modulus * s with s chosen mod p
        s = ((r - value) * pow(modulus, -1, p)) % p
        value += modulus * s
        modulus *= p
    return balanced(value, modulus)


def crt_combine_arrays(arrays: Sequence[Sequence[int]], primes: Sequence[int]) -> list[int]:
    """Componentwise :func:`crt_combine` of equally long residue vectors."""
    primes = [int(p) for p in primes]
    if len(set(primes)) != len(primes):
        raise ValueError("duplicate moduli in CRT batch")
    if len(arrays) != len(primes) or not primes:
        raise ValueError("need one residue vector per prime")
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("residue vectors differ in length")
    values = [int(v) % primes[0] for v in arrays[0]]
    modulus = primes[0]
    for arr, p in zip(arrays[1:], primes[1:]):
        inv = pow(modulus % p, -1, p)
        values = [v + modulus * (((int(r) - v) * inv) % p) for v, r in zip(values, arr)]
        modulus *= p
    return [balanced(v, modulus) for v in values]


def crt_capacity(primes: Sequence[int]) -> int:
    """Largest |v| recoverable by balanced lifting: floor((P-1)/2)."""
    return (math.prod(int(p) for p in primes) - 1) // 2


def rational_reconstruct(residue: int, modulus: int) -> Fraction | None:
    """Smallest fraction ``p/q`` with ``p == q*residue (mod modulus)``.

    Both ``|p|`` and ``q`` are bounded by ``sqrt(modulus/2)``; ``None`` when no
    such fraction exists.
    """
    residue, modulus = int(residue), int(modulus)
    if not 0 <= residue < modulus:
        raise ValueError("residue must lie in [0, modulus)")
    bound = math.isqrt(modulus // 2)
    r0, r1 = modulus, residue
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(abs(s1), modulus) != 1:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return Fraction(r1, s1)


def to_residues(values: Sequence[int], p: int) -> np.ndarray:
    return np.array([int(v) % p for v in values], dtype=np.int64)


def rational_mod(value: Fraction, p: int) -> int:
    value = Fraction(value)
    return (value.numerator * pow(value.denominator, -1, p)) % p


@contextmanager
def precision(digits: int = DEFAULT_DIGITS):
    """Run the block with ``mpmath`` working at ``digits`` decimal digits."""
    if digits < 1:
        raise ValueError("precision must be at least one digit")
    with mpmath.workdps(digits):
        yield


def to_real(value, digits: int):
    """Round an int, Fraction or mpf to ``digits`` decimal digits."""
    with mpmath.workdps(digits):
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        return +mpmath.mpf(value)
