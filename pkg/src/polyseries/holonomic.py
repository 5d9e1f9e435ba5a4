"""ODE <-> P-recurrence conversion, series extension and operator application."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import mpmath

from .exactarith import ModularError, check_prime
from .ode import LinearODE, falling, padd, peval, pmul, pscale

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolynomialRecurrence:
    """``sum_s q_s(n) t_{n+s} = 0`` for every ``n >= 0`` (negative indices read 0).

    ``coeffs[s]`` lists the integer coefficients of ``q_s`` in ``n``.
    ``offset`` records how ``n`` relates to the power of x the relation was
    read off: it is the coefficient of ``x^(n - offset)``.
    """

    coeffs: tuple[tuple[int, ...], ...]
    offset: int = 0

    @property
    def span(self) -> int:
        return len(self.coeffs) - 1

    def q(self, s: int, n: int) -> int:
        return peval(self.coeffs[s], n)

    def leading_roots(self) -> list[int]:
        """Non-negative integer roots of the leading polynomial q_span."""
        lead = list(self.coeffs[-1])
        bound = 2 + max((abs(c) for c in lead), default=0)
        roots = []
        # integer roots divide the lowest non-zero coefficient
        shift = next(i for i, c in enumerate(lead) if c)
        if shift:
            roots.append(0)
        c0 = abs(lead[shift])
        for d in _divisors(c0):
            if d < bound and peval(lead, d) == 0:
                roots.append(d)
        return sorted(set(roots))


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _npoly_falling(shift: int, k: int) -> list[int]:
    """Coefficients in n of (n + shift)(n + shift - 1)...(n + shift - k + 1)."""
    out = [1]
    for j in range(k):
        out = pmul(out, [shift - j, 1])
    return out


def ode_to_recurrence(ode: LinearODE) -> PolynomialRecurrence:
    """Read off the coefficient of x^r in ``sum_k P_k F^(k)``.

    The monomial ``x^j d^k`` sends ``t_i`` (with ``i = r - j + k``) to
    ``i (i-1) ... (i-k+1) t_i``; collecting by ``i - r`` gives the recurrence.
    """
    terms = {}
    for k, poly in enumerate(ode.polys):
        for j, c in enumerate(poly):
            if c:
                terms.setdefault(k - j, []).append((k, c))
    dmin, dmax = min(terms), max(terms)
    coeffs = []
    for s in range(dmax - dmin + 1):
        q = []
        for k, c in terms.get(s + dmin, []):
            # index of t is n + s; r = n - dmin
            q = padd(q, pscale(_npoly_falling(s, k), c))
        coeffs.append(q)
    g = reduce(math.gcd, (abs(c) for q in coeffs for c in q), 0)
    sign = -1 if coeffs[-1] and coeffs[-1][-1] < 0 else 1
    coeffs = tuple(tuple(sign * c // g for c in q) for q in coeffs)
    return PolynomialRecurrence(coeffs, offset=dmin)


def recurrence_residual(rec: PolynomialRecurrence, values: Sequence, n: int):
    return sum(rec.q(s, n) * values[n + s] for s in range(rec.span + 1) if rec.coeffs[s])


def extend_series(rec: PolynomialRecurrence, seed: Sequence, N: int, mode: str = "exact",
                  p: int | None = None, digits: int | None = None) -> list:
    """Extend ``seed`` (t_0, t_1, ...) to ``N`` terms by forward recursion.

    ``mode`` is ``"exact"`` (Python ints, exact division checked),
    ``"modular"`` (residues mod ``p``) or ``"real"`` (mpf at ``digits``).
    """
    s = rec.span
    if len(seed) < s:
        raise ValueError(f"seed needs at least {s} terms")
    lead = rec.coeffs[-1]
    active = [(j, rec.coeffs[j]) for j in range(s) if rec.coeffs[j]]
    if mode == "modular":
        p = check_prime(p)
        out = [int(v) % p for v in seed]
    elif mode == "real":
        if digits is None:
            raise ValueError("real mode needs digits")
        ctx = mpmath.mp.clone()
        ctx.dps = digits
        out = [ctx.mpf(v) if not isinstance(v, Fraction) else ctx.mpf(v.numerator) / v.denominator
               for v in seed]
    elif mode == "exact":
        out = [int(v) for v in seed]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    # check the seed against the recurrence on its overlap
    for n in range(0, len(seed) - s):
        if peval(lead, n) == 0:
            continue
        r = recurrence_residual(rec, out, n)
        if mode == "exact" and r != 0:
            raise ValueError(f"seed violates the recurrence at n={n}")
        if mode == "modular" and r % p:
            raise ValueError(f"seed violates the recurrence at n={n} mod {p}")
    for n in range(len(out) - s, N - s):
        d = peval(lead, n)
        acc = 0
        for j, q in active:
            acc += peval(q, n) * out[n + j]
        if mode == "exact":
            if d == 0:
                raise ZeroDivisionError(f"leading coefficient vanishes at n={n}; extend the seed")
            val, rem = divmod(-acc, d)
            if rem:
                raise ArithmeticError(f"non-integral term t_{n + s}; seed is not a solution")
            out.append(val)
        elif mode == "modular":
            d %= p
            if d == 0:
                raise ModularError(f"leading coefficient is 0 mod {p} at n={n}")
            out.append((-acc * pow(d, -1, p)) % p)
        else:
            if d == 0:
                raise ZeroDivisionError(f"leading coefficient vanishes at n={n}; extend the seed")
            out.append(-acc / d)
    return out[:N]


def extend_real_monitored(rec: PolynomialRecurrence, seed: Sequence, N: int, digits: int,
                          guard: int = 50) -> tuple[list, float]:
    """Real-mode extension at ``digits`` checked against a rerun at ``digits + guard``.

    Returns the terms and the worst number of matching significant digits.
    """
    lo = extend_series(rec, seed, N, "real", digits=digits)
    hi = extend_series(rec, seed, N, "real", digits=digits + guard)
    worst = float(digits)
    with mpmath.workdps(digits + guard):
        for a, b in zip(lo, hi):
            if b:
                rel = abs((a - b) / b)
                if rel:
                    worst = min(worst, float(-mpmath.log10(rel)))
    if worst < digits / 2:
        log.warning("real-mode extension kept only %.0f of %d digits", worst, digits)
    return lo, worst


def apply_ode(ode: LinearODE, series: Sequence, p: int | None = None) -> list:
    """Coefficients r = 0..valid of ``sum_k P_k F^(k)`` for the truncated series.

    Coefficient ``r`` needs ``t`` up to index ``r + max_k (k - val(P_k))``;
    only coefficients fully determined by the given terms are returned.
    """
    terms = list(series)
    lag = max(k - next(j for j, c in enumerate(poly) if c)
              for k, poly in enumerate(ode.polys) if any(poly))
    valid = len(terms) - max(lag, 0)
    if valid <= 0:
        raise ValueError("series too short for this ODE")
    out = []
    for r in range(valid):
        acc = 0
        for k, poly in enumerate(ode.polys):
            for j in range(min(len(poly), r + 1)):
                c = poly[j]
                if c:
                    i = r - j + k
                    acc += c * falling(i, k) * terms[i]
        out.append(acc % p if p else acc)
    return out


def seed_length(rec: PolynomialRecurrence, minimum: int = 60) -> int:
    roots = rec.leading_roots()
    return max(minimum, (max(roots) + rec.span + 1) if roots else rec.span)
