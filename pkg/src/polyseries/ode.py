"""Linear ODEs with integer polynomial coefficients, plus the small amount of
integer-polynomial arithmetic the pipeline needs (lists, constant term first)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

Poly = list[int]


def ptrim(a: Sequence[int]) -> Poly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def padd(a: Sequence[int], b: Sequence[int]) -> Poly:
    n = max(len(a), len(b))
    return ptrim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pscale(a: Sequence[int], c) -> list:
    return ptrim([c * v for v in a])


def pmul(a: Sequence[int], b: Sequence[int]) -> Poly:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                out[i + j] += u * v
    return ptrim(out)


def ppow(a: Sequence[int], e: int) -> Poly:
    out = [1]
    for _ in range(e):
        out = pmul(out, a)
    return out


def peval(a: Sequence, x):
    acc = 0 * x
    for c in reversed(a):
        acc = acc * x + c
    return acc


def pderiv(a: Sequence[int]) -> Poly:
    return ptrim([i * a[i] for i in range(1, len(a))])


def valuation(a: Sequence[int]) -> int:
    """x-adic valuation; infinite for the zero polynomial."""
    for i, v in enumerate(a):
        if v:
            return i
    return math.inf


def falling(i: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= i - j
    return out


@dataclass(frozen=True)
class LinearODE:
    """``sum_k P_k(x) F^(k)(x) = 0`` with ``polys[k]`` the coefficients of ``P_k``.

    Stored normalised: trailing zeros trimmed, content 1, leading coefficient
    of ``P_m`` positive.
    """

    polys: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        polys = [ptrim(int(c) for c in p) for p in self.polys]
        while polys and not polys[-1]:
            polys.pop()
        if not polys or len(polys) < 2:
            raise ValueError("need a non-zero leading polynomial of order >= 1")
        g = reduce(math.gcd, (abs(c) for p in polys for c in p), 0)
        sign = -1 if polys[-1][-1] < 0 else 1
        polys = tuple(tuple(sign * c // g for c in p) for p in polys)
        object.__setattr__(self, "polys", polys)

    @classmethod
    def from_lists(cls, polys: Sequence[Sequence[int]]) -> "LinearODE":
        return cls(tuple(tuple(p) for p in polys))

    @property
    def order(self) -> int:
        return len(self.polys) - 1

    @property
    def leading(self) -> Poly:
        return list(self.polys[-1])

    def degree(self, k: int | None = None) -> int:
        if k is not None:
            return len(self.polys[k]) - 1
        return max(len(p) for p in self.polys) - 1

    def normalized(self) -> "LinearODE":
        return LinearODE(self.polys)

    def poly(self, k: int) -> Poly:
        return list(self.polys[k]) if k < len(self.polys) else []
