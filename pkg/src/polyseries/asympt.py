"""Asymptotic amplitude fits for r_n = t_{n+2} / 4^n.

The model is

    r_n ~ n^(-1/2) sum_{i<=K} (a_i log n + b_i) n^(-i)
          + (-1)^n n^(-1/2) sum_{i<=2K} c_i n^(-7-i)

with the exponentially small contribution of farther singularities ignored.
The 4K+3 amplitudes come from an exactly determined linear system on the
last 4K+3 samples.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

log = logging.getLogger(__name__)

DESK_TERMS = 50000
DESK_DIGITS = 300
DESK_K = 30
ABSENCE_THRESHOLD = mpmath.mpf("1e-40")


def required_digits(K: int) -> int:
    """Working precision the fit needs: the basis columns n^(-i) over a
    window of 4K+3 consecutive n are nearly dependent."""
    return 100 + 12 * K


def working_digits(r: "NormalizedSeries", K: int) -> int:
    """Default fit precision: the series precision, raised to the
    conditioning budget when exact terms are available to re-round."""
    if r.source is None:
        return r.digits
    return max(r.digits, required_digits(K))


@dataclass
class NormalizedSeries:
    """r_n at ``digits`` digits; ``source`` keeps the exact t_n when known so a
    fit can re-round its window at a higher precision."""

    values: list
    digits: int
    source: Sequence[int] | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)

    def window(self, start: int, stop: int, digits: int) -> list:
        if digits <= self.digits or self.source is None:
            if digits > self.digits:
                log.warning("r_n carries %d digits; fit at %d digits is limited by the data",
                            self.digits, digits)
            return [+v for v in self.values[start:stop]]
        return [mpmath.ldexp(mpmath.mpf(int(self.source[n + 2])), -2 * n) for n in range(start, stop)]


@dataclass(frozen=True)
class BasisTerm:
    """n^(-power) * log(n)^logs, times (-1)^n when ``alternating``."""

    power: Fraction
    logs: int = 0
    alternating: bool = False
    name: str = ""

    def __call__(self, n: int, logn):
        v = mpmath.mpf(n) ** (-mpmath.mpf(self.power.numerator) / self.power.denominator)
        if self.logs:
            v *= logn ** self.logs
        if self.alternating and n % 2:
            v = -v
        return v


def model_basis(K: int) -> list[BasisTerm]:
    half = Fraction(1, 2)
    out = []
    for i in range(K + 1):
        out.append(BasisTerm(half + i, 1, False, f"a{i}"))
        out.append(BasisTerm(half + i, 0, False, f"b{i}"))
    for i in range(2 * K + 1):
        out.append(BasisTerm(half + 7 + i, 0, True, f"c{i}"))
    return out


def half_integer_terms(count: int = 2) -> list[BasisTerm]:
    """log n / n^j and 1 / n^j for j = 1..count (with the n^(-1/2) prefactor
    these are the odd half-integer steps missing from the model)."""
    out = []
    for j in range(count):
        p = Fraction(1, 2) + Fraction(2 * j + 1, 2)
        out.append(BasisTerm(p, 1, False, f"log n/n^{p}"))
        out.append(BasisTerm(p, 0, False, f"1/n^{p}"))
    return out


def log_squared_terms() -> list[BasisTerm]:
    return [BasisTerm(Fraction(1, 2), 2, False, "log^2 n/n^(1/2)")]


def alternating_log_terms() -> list[BasisTerm]:
    return [BasisTerm(Fraction(15, 2), 1, True, "(-1)^n log n/n^(15/2)")]


@dataclass
class AmplitudeModel:
    K: int
    amplitudes: dict
    basis: list
    window: tuple[int, int]
    digits: int

    @property
    def a(self) -> list:
        return [self.amplitudes[f"a{i}"] for i in range(self.K + 1)]

    @property
    def b(self) -> list:
        return [self.amplitudes[f"b{i}"] for i in range(self.K + 1)]

    @property
    def c(self) -> list:
        return [self.amplitudes[f"c{i}"] for i in range(2 * self.K + 1)]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def predict(self, n: int):
        with mpmath.workdps(self.digits):
            logn = mpmath.log(n)
            return mpmath.fsum(self.amplitudes[t.name] * t(n, logn) for t in self.basis)


def normalize(t: Sequence[int], digits: int) -> NormalizedSeries:
    """r_n = t_{n+2} / 4^n rounded to ``digits`` digits, for n = 0..len(t)-3."""
    with mpmath.workdps(digits):
        vals = [mpmath.ldexp(mpmath.mpf(int(t[n + 2])), -2 * n) for n in range(len(t) - 2)]
    return NormalizedSeries(vals, digits, t)


def solve_full_pivot(A: list[list], y: list) -> list:
    """Gaussian elimination with complete pivoting at the current precision."""
    n = len(A)
    A = [row[:] + [y[i]] for i, row in enumerate(A)]
    perm = list(range(n))
    for k in range(n):
        best, bi, bj = mpmath.mpf(-1), k, k
        for i in range(k, n):
            row = A[i]
            for j in range(k, n):
                v = abs(row[j])
                if v > best:
                    best, bi, bj = v, i, j
        if best == 0:
            raise ZeroDivisionError("singular system")
        A[k], A[bi] = A[bi], A[k]
        if bj != k:
            for row in A:
                row[k], row[bj] = row[bj], row[k]
            perm[k], perm[bj] = perm[bj], perm[k]
        piv = A[k][k]
        rowk = A[k]
        for i in range(k + 1, n):
            f = A[i][k] / piv
            if f:
                rowi = A[i]
                for j in range(k, n + 1):
                    rowi[j] -= f * rowk[j]
    x = [mpmath.mpf(0)] * n
    for k in range(n - 1, -1, -1):
        s = A[k][n] - mpmath.fsum(A[k][j] * x[j] for j in range(k + 1, n))
        x[k] = s / A[k][k]
    out = [mpmath.mpf(0)] * n
    for k in range(n):
        out[perm[k]] = x[k]
    return out


def fit_basis(r: NormalizedSeries, basis: Sequence[BasisTerm], stop: int | None = None,
              digits: int | None = None) -> tuple[dict, tuple[int, int]]:
    """Solve the square system sum_j x_j basis_j(n) = r_n on the last len(basis) samples before ``stop``."""
    dim = len(basis)
    stop = len(r) if stop is None else stop
    start = stop - dim
    if start < 1:
        raise ValueError(f"need at least {dim + 1} terms for {dim} amplitudes")
    digits = digits or r.digits
    with mpmath.workdps(digits):
        rhs = r.window(start, stop, digits)
        rows = []
        for n in range(start, stop):
            logn = mpmath.log(n)
            rows.append([b(n, logn) for b in basis])
        # column scaling: unit max-norm columns
        scale = [max(abs(rows[i][j]) for i in range(dim)) for j in range(dim)]
        for row in rows:
            for j in range(dim):
                row[j] /= scale[j]
        try:
            x = solve_full_pivot(rows, rhs)
        except ZeroDivisionError:
            raise ArithmeticError("numerically singular amplitude system; use more terms or digits")
        amps = {b.name: x[j] / scale[j] for j, b in enumerate(basis)}
    return amps, (start, stop - 1)


def fit_amplitudes(r: NormalizedSeries, K: int, digits: int | None = None,
                   stop: int | None = None) -> AmplitudeModel:
    dim = 4 * K + 3
    if len(r) < dim + 1:
        raise ValueError(f"K={K} needs at least {dim + 1} terms")
    digits = digits or working_digits(r, K)
    if digits < required_digits(K):
        log.warning("K=%d at %d digits is below the %d-digit conditioning budget",
                    K, digits, required_digits(K))
    basis = model_basis(K)
    amps, window = fit_basis(r, basis, stop, digits)
    return AmplitudeModel(K, amps, basis, window, digits)


def agreement_digits(x, y) -> float:
    d = abs(x - y)
    if d == 0:
        return math.inf
    return float(-mpmath.log10(d))


def stability_report(r: NormalizedSeries, K1: int, K2: int, digits: int | None = None) -> dict:
    """-log10 |difference| of every amplitude shared by the K1 and K2 fits."""
    m1 = fit_amplitudes(r, K1, digits)
    m2 = fit_amplitudes(r, K2, digits)
    return {k: agreement_digits(v, m2.amplitudes[k]) for k, v in m1.amplitudes.items()
            if k in m2.amplitudes}


def absence_test(r: NormalizedSeries, K: int, extra: Sequence[BasisTerm],
                 digits: int | None = None) -> dict:
    """Fit the model plus ``extra`` terms; return |amplitude| of each extra term."""
    names = {b.name for b in model_basis(K)}
    if any(e.name in names for e in extra):
        raise ValueError("extra term duplicates a model term")
    digits = digits or working_digits(r, K)
    amps, _ = fit_basis(r, model_basis(K) + list(extra), None, digits)
    return {e.name: abs(amps[e.name]) for e in extra}


# --- closed-form recognition ---------------------------------------------------------------

def default_units(digits: int) -> dict:
    with mpmath.workdps(digits):
        p = mpmath.pi ** mpmath.mpf(1.5)
        return {"1/pi^(3/2)": 1 / p, "1/(sqrt(3) pi^(3/2))": 1 / (mpmath.sqrt(3) * p)}


@dataclass
class Recognition:
    unit: str
    ratio: Fraction
    residual: object


def _best_fraction(x, max_den: int):
    """Last continued-fraction convergent of x with denominator <= max_den."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    y = x
    best = Fraction(0)
    for _ in range(200):
        a = int(mpmath.floor(y))
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_den:
            break
        best = Fraction(h1, k1)
        frac = y - a
        if frac == 0:
            break
        y = 1 / frac
    return best


def identify_constant(value, units: dict | None = None, digits: int | None = None,
                      max_den: int = 10 ** 9) -> Recognition | None:
    """value = (p/q) * unit for the first unit where a continued-fraction
    convergent with q <= max_den matches to within 10^(10 - digits)."""
    digits = digits or mpmath.mp.dps
    units = units or default_units(digits + 10)
    with mpmath.workdps(digits + 10):
        if value == 0:
            name = next(iter(units))
            return Recognition(name, Fraction(0), mpmath.mpf(0))
        tol = mpmath.mpf(10) ** (10 - digits)
        for name, u in units.items():
            x = value / u
            fr = _best_fraction(x, max_den)
            if fr == 0:
                continue
            res = abs(x - mpmath.mpf(fr.numerator) / fr.denominator) / abs(x)
            if res < tol:
                return Recognition(name, fr, res)
    return None


def _closed_form(rec: Recognition | None) -> str:
    if rec is None:
        return ""
    if rec.ratio == 0:
        return "0"
    num, den = rec.ratio.numerator, rec.ratio.denominator
    unit = rec.unit.split("/", 1)[1]
    frac = f"{num}" if den == 1 else f"{num}/{den}"
    return f"{frac}/{unit}" if den == 1 else f"({frac})/{unit}"


def amplitude_report(model: AmplitudeModel, agreement: dict | None = None,
                     recognize: int = 3, min_digits: int = 30) -> str:
    """One line per amplitude: name, value to its confidence digits, closed form.

    Confidence digits come from ``agreement`` (a stability report) and default
    to the model precision less a guard.  Amplitudes a_i, c_i with i <= ``recognize``
    are passed to :func:`identify_constant` when they carry ``min_digits`` digits.
    """
    lines = []
    for term in model.basis:
        name = term.name
        value = model.amplitudes[name]
        conf = model.digits - 20 if agreement is None else agreement.get(name, 0)
        conf = int(min(conf, model.digits - 20))
        # significant digits = absolute digits + decimal exponent
        sig = conf + int(mpmath.floor(mpmath.log10(abs(value)))) + 1 if value else 1
        shown = mpmath.nstr(value, sig) if sig >= 1 else "(no significant digits)"
        form = ""
        idx = int(name[1:])
        if name[0] in "ac" and idx <= recognize and conf >= min_digits:
            form = _closed_form(identify_constant(value, digits=conf))
        lines.append(f"{name:>4}  {shown}  {form}".rstrip())
    return "\n".join(lines) + "\n"
