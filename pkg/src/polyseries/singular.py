"""Singular points of a linear ODE: classification, indicial exponents,
Frobenius bases with logarithms, apparent-singularity verdicts.

Around a point the operator is rewritten as ``sum_t z^t J_t(theta)`` with
``theta = z d/dz`` and ``J_0`` the indicial polynomial.  Finite points use
``z = x - alpha``; infinity uses ``w = 1/x`` where ``theta_x = -theta_w``.

Arithmetic at a point lives either in the exact field Q[x]/(f) (used for
minimal polynomials of degree <= ``EXACT_DEGREE``) or in mpmath complex
numbers, where every zero test returns one of three zones so a tolerance
never silently decides a mathematical question.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy

from .ode import LinearODE, pmul, ptrim

EXACT_DEGREE = 2
NUMERIC_DIGITS = 80
ZERO_BELOW = mpmath.mpf("1e-30")
NONZERO_ABOVE = mpmath.mpf("1e-27")
RECOGNITION_TOL = mpmath.mpf("1e-20")
INFINITY = "infinity"

ZERO, NONZERO, INCONCLUSIVE = "zero", "nonzero", "inconclusive"


# --- integer polynomial helpers -------------------------------------------------

def _divmod_int(a: Sequence[int], b: Sequence[int]):
    """Exact division over Q; returns (quotient, remainder) as Fraction lists."""
    a = [Fraction(c) for c in a]
    b = ptrim(b)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(ptrim(a)) >= len(b) and any(a):
        a = ptrim(a)
        shift = len(a) - len(b)
        f = a[-1] / b[-1]
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a = ptrim(a)
    return q, ptrim(a)


def multiplicity(poly: Sequence[int], factor: Sequence[int]) -> int:
    """Largest e with factor^e dividing poly (the zero polynomial returns a large number)."""
    poly = ptrim(poly)
    if not poly:
        return 10 ** 9
    e = 0
    while True:
        q, r = _divmod_int(poly, factor)
        if r:
            return e
        poly = q
        e += 1


# --- exact algebraic field ------------------------------------------------------

class NumberField:
    """Q[x]/(f) for an irreducible integer polynomial f (constant term first)."""

    def __init__(self, minpoly: Sequence[int]):
        self.minpoly = tuple(int(c) for c in ptrim(minpoly))
        self.degree = len(self.minpoly) - 1
        lead = Fraction(self.minpoly[-1])
        # x^d = -sum_{i<d} (f_i / f_d) x^i
        self._tail = [-Fraction(c) / lead for c in self.minpoly[:-1]]
        self._sym = sympy.Symbol("a")
        self._spoly = sympy.Poly(list(reversed(self.minpoly)), self._sym, domain="QQ")

    def element(self, coeffs) -> "AlgNum":
        c = [Fraction(v) for v in coeffs] + [Fraction(0)] * self.degree
        return AlgNum(self, tuple(self._reduce(c)))

    def _reduce(self, c):
        c = list(c)
        d = self.degree
        for i in range(len(c) - 1, d - 1, -1):
            v = c[i]
            if v:
                for j, t in enumerate(self._tail):
                    c[i - d + j] += v * t
            c[i] = Fraction(0)
        return c[:d]

    def gen(self) -> "AlgNum":
        if self.degree == 1:
            return self.element([self._tail[0]])
        return self.element([0, 1])

    def inverse(self, a: "AlgNum") -> "AlgNum":
        if self.degree == 1:
            return self.element([1 / a.c[0]])
        pa = sympy.Poly(list(reversed([sympy.Rational(v.numerator, v.denominator) for v in a.c])),
                        self._sym, domain="QQ")
        inv = sympy.invert(pa, self._spoly)
        coeffs = list(reversed(inv.all_coeffs()))
        return self.element([Fraction(int(v.p), int(v.q)) for v in coeffs])

    def numeric(self, a: "AlgNum", root):
        return sum((mpmath.mpf(v.numerator) / v.denominator) * root ** i for i, v in enumerate(a.c))


class AlgNum:
    __slots__ = ("F", "c")

    def __init__(self, F: NumberField, c: tuple):
        self.F = F
        self.c = c

    def _lift(self, other):
        if isinstance(other, AlgNum):
            return other
        return self.F.element([other])

    def __add__(self, other):
        o = self._lift(other)
        return AlgNum(self.F, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        return AlgNum(self.F, tuple(-a for a in self.c))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, AlgNum):
            o = Fraction(other)
            return AlgNum(self.F, tuple(a * o for a in self.c))
        d = self.F.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    if b:
                        prod[i + j] += a * b
        return AlgNum(self.F, tuple(self.F._reduce(prod)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, AlgNum):
            return self * (1 / Fraction(other))
        return self * self.F.inverse(other)

    def __bool__(self):
        return any(self.c)

    def __eq__(self, other):
        return not (self - other)

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"AlgNum({[str(v) for v in self.c]})"


# --- arithmetic contexts ----------------------------------------------------------

class ExactContext:
    exact = True

    def __init__(self, F: NumberField):
        self.F = F
        self.alpha = F.gen()

    def const(self, v):
        return self.F.element([v])

    def zero_test(self, value, scale=None) -> str:
        return NONZERO if value else ZERO


class NumericContext:
    exact = False

    def __init__(self, root, digits: int = NUMERIC_DIGITS):
        self.digits = digits
        self.alpha = root

    def const(self, v):
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        return mpmath.mpc(v)

    def zero_test(self, value, scale=None) -> str:
        scale = scale if scale else mpmath.mpf(1)
        rel = abs(value) / scale
        if rel < ZERO_BELOW:
            return ZERO
        if rel > NONZERO_ABOVE:
            return NONZERO
        return INCONCLUSIVE


# --- domain types ---------------------------------------------------------------------

@dataclass
class SingularPoint:
    """A finite irreducible factor of P_m (all its roots) or the point at infinity."""

    minpoly: tuple[int, ...] | None
    multiplicity: int
    roots: list = field(default_factory=list)
    regular: bool = True

    @property
    def is_infinity(self) -> bool:
        return self.minpoly is None

    @property
    def degree(self) -> int:
        return 1 if self.minpoly is None else len(self.minpoly) - 1

    @property
    def classification(self) -> str:
        return "regular" if self.regular else "irregular"

    def label(self) -> str:
        if self.is_infinity:
            return INFINITY
        x = sympy.Symbol("x")
        return str(sympy.Poly(list(reversed(self.minpoly)), x).as_expr())


@dataclass
class ExponentSet:
    values: tuple
    exact: bool = True

    def __post_init__(self):
        self.values = tuple(sorted(self.values, key=lambda v: (float(mpmath.re(v)), float(mpmath.im(v)))
                                   if not isinstance(v, Fraction) else (float(v), 0.0)))

    def __len__(self):
        return len(self.values)

    def total(self):
        return sum(self.values)

    def __str__(self):
        return ", ".join(str(v) for v in self.values)


@dataclass
class LocalSolution:
    """z^exponent * sum_n sum_l coeffs[n][l] z^n log(z)^l around ``point``."""

    point: str
    exponent: Fraction
    log_degree: int
    coeffs: list


@dataclass
class ApparentVerdict:
    verdict: str            # apparent | genuine | inconclusive
    forced_log: bool
    distinct_nonneg: bool
    reason: str = ""


# --- local operator ----------------------------------------------------------------

def _theta_polys(m: int) -> list[list[int]]:
    """theta(theta-1)...(theta-k+1) as integer polynomials in theta."""
    out = []
    for k in range(m + 1):
        p = [1]
        for j in range(k):
            p = pmul(p, [-j, 1])
        out.append(p)
    return out


def _taylor(poly: Sequence[int], alpha, ctx):
    """Coefficients of P(alpha + z) in z."""
    b = [ctx.const(c) for c in poly]
    n = len(b) - 1
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            b[j] = b[j] + alpha * b[j + 1]
    return b


class LocalOperator:
    """``sum_t z^t J_t(theta)`` at one point (one selected root for finite points)."""

    def __init__(self, ode: LinearODE, point: SingularPoint, root_index: int = 0):
        self.ode = ode
        self.point = point
        m = ode.order
        ff = _theta_polys(m)
        if point.is_infinity:
            self.ctx = ExactContext(NumberField([0, 1]))
            # x^m L = sum_s x^s I_s(theta_x); lowest w-power is s_max
            I = {}
            for k, poly in enumerate(ode.polys):
                for j, c in enumerate(poly):
                    if c:
                        s = j + m - k
                        I.setdefault(s, {})
                        I[s][k] = I[s].get(k, 0) + c
            smax = max(I)
            self.regular = max(I[smax]) == m
            self._raw = {}
            for s, terms in I.items():
                poly = []
                for k, c in terms.items():
                    # substitute theta_x = -theta_w
                    neg = [v * (-1) ** i for i, v in enumerate(ff[k])]
                    poly = _padd(poly, [c * v for v in neg])
                self._raw[smax - s] = [self.ctx.const(v) for v in poly]
            self.T = max(self._raw)
        else:
            f = point.minpoly
            if len(f) - 1 <= EXACT_DEGREE:
                self.ctx = ExactContext(NumberField(f))
                alpha = self.ctx.alpha
            else:
                self.ctx = NumericContext(point.roots[root_index])
                alpha = point.roots[root_index]
            with mpmath.workdps(getattr(self.ctx, "digits", 15)):
                self._build_finite(ode, f, alpha, ff)
        self.J0 = self._raw.get(0, [])

    def _build_finite(self, ode, f, alpha, ff):
        m = ode.order
        orders = [multiplicity(p, f) for p in ode.polys]
        self.orders = orders
        smin = min(orders[k] + m - k for k in range(m + 1) if ode.polys[k])
        self.regular = orders[m] == smin
        taylor = [_taylor(p, alpha, self.ctx) if p else [] for p in ode.polys]
        for k in range(m + 1):
            for j in range(min(orders[k], len(taylor[k]))):
                taylor[k][j] = self.ctx.const(0)
        self._raw = {}
        self.T = max(len(t) for t in taylor) + m
        for t in range(self.T + 1):
            poly = [self.ctx.const(0)]
            for k in range(m + 1):
                j = t + smin - m + k
                if 0 <= j < len(taylor[k]):
                    c = taylor[k][j]
                    poly = _padd_field(poly, [c * v for v in ff[k]], self.ctx)
            self._raw[t] = poly

    def J(self, t: int):
        return self._raw.get(t, [])


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _padd_field(a, b, ctx):
    n = max(len(a), len(b))
    z = ctx.const(0)
    return [(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)]


def _taylor_at(poly, lam, ctx):
    """Coefficients a_i of poly(lam + D) = sum_i a_i D^i (lam rational)."""
    b = [c for c in poly]
    n = len(b) - 1
    lamc = ctx.const(lam)
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            b[j] = b[j] + lamc * b[j + 1]
    return b


# --- public operations ------------------------------------------------------------

def find_singular_points(ode: LinearODE, digits: int = NUMERIC_DIGITS) -> list[SingularPoint]:
    """Irreducible factors of P_m (one point each, all roots attached) plus infinity."""
    x = sympy.Symbol("x")
    lead = sympy.Poly(list(reversed(ode.leading)), x, domain="ZZ")
    _, factors = sympy.factor_list(lead)
    points = []
    for fac, mult in factors:
        if fac.degree() < 1:
            continue
        coeffs = [int(c) for c in reversed(fac.all_coeffs())]
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
        with mpmath.workdps(digits):
            roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=400, extraprec=4 * digits)
            roots = sorted((mpmath.mpc(r) for r in roots), key=lambda r: (float(r.real), float(r.imag)))
        pt = SingularPoint(tuple(coeffs), int(mult), roots)
        pt.regular = _finite_regular(ode, pt)
        points.append(pt)
    points.sort(key=lambda p: (p.degree, [abs(c) for c in p.minpoly]))
    inf = SingularPoint(None, 0, [mpmath.inf])
    inf.regular = LocalOperator(ode, inf).regular
    points.append(inf)
    return points


def _finite_regular(ode: LinearODE, pt: SingularPoint) -> bool:
    m = ode.order
    orders = [multiplicity(p, pt.minpoly) for p in ode.polys]
    return all(orders[k] + (m - k) >= orders[m] for k in range(m + 1) if ode.polys[k])


def _indicial_exact(op: LocalOperator) -> tuple[list[Fraction], int]:
    """Rational roots (with multiplicity) of J0 over Q(alpha), and how many
    roots are left over (irrational)."""
    J0 = op.J0
    F = op.ctx.F
    th = sympy.Symbol("theta")
    comps = []
    for i in range(F.degree):
        coeffs = [sympy.Rational(c.c[i].numerator, c.c[i].denominator) for c in J0]
        comps.append(sympy.Poly(list(reversed(coeffs)), th, domain="QQ"))
    g = comps[0]
    for c in comps[1:]:
        g = sympy.gcd(g, c)
    rational = []
    for r, mult in sympy.roots(g, filter="Q").items():
        rational += [Fraction(int(r.p), int(r.q))] * mult
    m = len(J0) - 1
    return rational, m - len(rational)


def _recognize(z, tol=RECOGNITION_TOL, max_den: int = 1000):
    if abs(mpmath.im(z)) > tol:
        return None
    fr = Fraction(str(mpmath.nstr(mpmath.re(z), 40))).limit_denominator(max_den)
    if abs(mpmath.re(z) - mpmath.mpf(fr.numerator) / fr.denominator) < tol:
        return fr
    return None


def indicial_exponents(ode: LinearODE, point: SingularPoint, root_index: int = 0) -> ExponentSet:
    if not point.regular:
        raise ValueError(f"point {point.label()} is irregular")
    op = LocalOperator(ode, point, root_index)
    return _exponents_of(op)


def _exponents_of(op: LocalOperator) -> ExponentSet:
    if op.ctx.exact:
        rational, leftover = _indicial_exact(op)
        if leftover:
            # irrational roots are reported numerically, not as an error
            rest = [r for r in _numeric_roots(op) if _recognize(r) is None][:leftover]
            return ExponentSet(tuple(rational) + tuple(rest), exact=False)
        return ExponentSet(tuple(rational), exact=True)
    with mpmath.workdps(op.ctx.digits):
        roots = _numeric_roots(op)
        out, exact = [], True
        for r in roots:
            fr = _recognize(r)
            if fr is None:
                exact = False
                out.append(r)
            else:
                out.append(fr)
        if exact:
            # validate: each recognised root with its multiplicity annihilates J0 and derivatives
            for fr in set(out):
                mult = out.count(fr)
                a = _taylor_at(op.J0, fr, op.ctx)
                scale = max(abs(c) for c in a)
                for i in range(mult):
                    if op.ctx.zero_test(a[i], scale) != ZERO:
                        raise ArithmeticError(f"exponent {fr} failed validation at order {i}")
        return ExponentSet(tuple(out), exact=exact)


def _numeric_roots(op: LocalOperator):
    coeffs = op.J0
    ctx = op.ctx
    digits = getattr(ctx, "digits", NUMERIC_DIGITS)
    with mpmath.workdps(digits):
        if ctx.exact:
            F = ctx.F
            # pick the first root numerically
            with mpmath.workdps(digits):
                root = mpmath.polyroots(list(reversed(F.minpoly)), extraprec=4 * digits)[0]
            coeffs = [F.numeric(c, root) for c in coeffs]
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return mpmath.polyroots(list(reversed(coeffs)), maxsteps=400, extraprec=4 * digits)


def fuchs_sum_check(exponent_sets: Sequence[tuple[ExponentSet, int]], m: int, n: int):
    """``exponent_sets`` pairs each set with how many points share it (the
    degree of the factor; 1 for infinity).  Returns (lhs, rhs, passed)."""
    lhs = sum(Fraction(es.total()) * count for es, count in exponent_sets)
    rhs = Fraction((n - 1) * m * (m - 1), 2)
    return lhs, rhs, lhs == rhs


def _classes(exps: ExponentSet):
    """Group exponents by residue mod 1: {rho0: [(offset, multiplicity), ...]}."""
    groups = {}
    for e in exps.values:
        key = e - math.floor(e)
        groups.setdefault(key, []).append(e)
    out = {}
    for key, vals in groups.items():
        rho0 = min(vals)
        offs = {}
        for v in vals:
            offs[int(v - rho0)] = offs.get(int(v - rho0), 0) + 1
        out[rho0] = sorted(offs.items())
    return out


def _apply_shifted(poly, lam, u, ctx):
    """poly(lam + D) applied to a log-polynomial u (list over log powers, each a list over params)."""
    if not u:
        return []
    a = _taylor_at(poly, lam, ctx)
    L = len(u)
    P = len(u[0])
    zero = ctx.const(0)
    out = [[zero] * P for _ in range(L)]
    for i, ai in enumerate(a):
        if i >= L:
            break
        if ctx.exact and not ai:
            continue
        for l in range(i, L):
            fac = math.factorial(l) // math.factorial(l - i)
            src = u[l]
            row = out[l - i]
            for q in range(P):
                row[q] = row[q] + ai * fac * src[q]
    return out


def _frobenius(op: LocalOperator, rho0: Fraction, offsets: list[tuple[int, int]], N: int,
               status: list):
    """Coefficients f_0..f_N (log-polys over free params) for the class starting at rho0."""
    ctx = op.ctx
    zero = ctx.const(0)
    one = ctx.const(1)
    mult = dict(offsets)
    nparams = sum(mult.values())
    f = []
    pidx = 0
    for n in range(N + 1):
        lam = rho0 + n
        # g = -sum_s J_s(lam - s + D) f_{n-s}
        L = max((len(fk) for fk in f), default=0)
        g = [[zero] * nparams for _ in range(L)]
        scale = [[mpmath.mpf(0)] * nparams for _ in range(L)] if not ctx.exact else None
        for s in range(1, min(n, op.T) + 1):
            Js = op.J(s)
            if not Js or not f[n - s]:
                continue
            term = _apply_shifted(Js, lam - s, f[n - s], ctx)
            if scale is not None:
                # magnitude of every elementary product, for relative zero tests
                bound = _apply_shifted([abs(c) for c in Js], abs(lam - s),
                                       [[abs(v) for v in row] for row in f[n - s]], ctx)
            for l in range(len(term)):
                for q in range(nparams):
                    g[l][q] = g[l][q] - term[l][q]
                    if scale is not None:
                        scale[l][q] += abs(bound[l][q])
        mu = mult.get(n, 0)
        a = _taylor_at(op.J0, lam, ctx)
        if mu and L:
            # resonance: components of g that would force a new logarithm
            for l in range(L):
                for q in range(nparams):
                    sc = scale[l][q] if scale is not None else None
                    z = ctx.zero_test(g[l][q], sc) if sc is None or sc > 0 else ZERO
                    if z == ZERO:
                        g[l][q] = zero
                    elif z == INCONCLUSIVE:
                        status.append(("inconclusive", n, l, q))
        # solve sum_{i>=mu} a_i D^i f = g : first h with sum a_i D^(i-mu) h = g
        h = [[zero] * nparams for _ in range(L)]
        for l in range(L - 1, -1, -1):
            for q in range(nparams):
                acc = g[l][q]
                for i in range(mu + 1, len(a)):
                    j = l + (i - mu)
                    if j >= L:
                        break
                    acc = acc - a[i] * (math.factorial(j) // math.factorial(l)) * h[j][q]
                h[l][q] = acc / a[mu]
        # integrate mu times: log^l -> log^(l+mu) * l!/(l+mu)!
        newL = max(L + mu if any(_nz(ctx, h[l][q]) for l in range(L) for q in range(nparams)) else 0, mu)
        fn = [[zero] * nparams for _ in range(newL)]
        for l in range(L):
            for q in range(nparams):
                if _nz(ctx, h[l][q]):
                    fn[l + mu][q] = h[l][q] * Fraction(math.factorial(l), math.factorial(l + mu))
        for l in range(mu):
            fn[l][pidx] = one
            pidx += 1
        while fn and not any(_nz(ctx, v) for v in fn[-1]):
            fn.pop()
        f.append(fn)
    return f, nparams


def _nz(ctx, v) -> bool:
    if ctx.exact:
        return bool(v)
    return v != 0


def local_basis(ode: LinearODE, point: SingularPoint, truncation: int = 10, root_index: int = 0,
                _status: list | None = None) -> list[LocalSolution]:
    """Formal local solutions at ``point``: one per exponent (with multiplicity).

    Each exponent class rho0 + Z is solved once with free parameters; the
    basis vector for parameter q sets it to 1 and the others to 0.
    """
    if not point.regular:
        raise ValueError(f"point {point.label()} is irregular")
    op = LocalOperator(ode, point, root_index)
    exps = _exponents_of(op)
    if not exps.exact:
        raise ValueError("local bases need rational exponents")
    status = [] if _status is None else _status
    with mpmath.workdps(getattr(op.ctx, "digits", 15)):
        out = []
        for rho0, offsets in sorted(_classes(exps).items(), key=lambda kv: kv[0]):
            N = max(truncation, offsets[-1][0])
            f, nparams = _frobenius(op, rho0, offsets, N, status)
            q = 0
            for off, mu in offsets:
                for _ in range(mu):
                    coeffs = [[fn[l][q] for l in range(len(fn))] for fn in f]
                    logdeg = max((l for fn in coeffs for l, v in enumerate(fn) if _nz(op.ctx, v)),
                                 default=0)
                    out.append(LocalSolution(point.label(), rho0 + off, logdeg, coeffs))
                    q += 1
    return out


def apparent_check(ode: LinearODE, point: SingularPoint, root_index: int = 0) -> ApparentVerdict:
    """Apparent iff the exponents are distinct non-negative integers and the
    Frobenius construction forces no logarithm."""
    if point.is_infinity:
        return ApparentVerdict("genuine", False, False, "point at infinity")
    op = LocalOperator(ode, point, root_index)
    exps = _exponents_of(op)
    vals = exps.values
    distinct = exps.exact and len(set(vals)) == len(vals) and all(
        isinstance(v, Fraction) and v.denominator == 1 and v >= 0 for v in vals)
    status: list = []
    basis = local_basis(ode, point, 1, root_index, status) if exps.exact else []
    forced = any(s.log_degree > 0 for s in basis)
    if status:
        return ApparentVerdict(INCONCLUSIVE, forced, distinct,
                               f"resonance residual in the uncertain zone at {status[0][1:]}")
    if not distinct:
        reason = "repeated exponent" if exps.exact and len(set(vals)) < len(vals) else "non-integer or negative exponent"
        return ApparentVerdict("genuine", forced, False, reason)
    if forced:
        return ApparentVerdict("genuine", True, True, "logarithm forced at a resonance")
    return ApparentVerdict("apparent", False, True, "analytic basis")


# --- analysis driver and report ----------------------------------------------------------

@dataclass
class PointReport:
    point: SingularPoint
    exponents: ExponentSet
    verdicts: list


def analyze(ode: LinearODE, check_apparent: bool = True) -> tuple[list[PointReport], tuple]:
    points = find_singular_points(ode)
    reports = []
    for pt in points:
        if not pt.regular:
            reports.append(PointReport(pt, ExponentSet(()), []))
            continue
        exps = indicial_exponents(ode, pt)
        verdicts = []
        if check_apparent and not pt.is_infinity:
            verdicts = [apparent_check(ode, pt, i) for i in range(pt.degree)] \
                if pt.degree > EXACT_DEGREE else [apparent_check(ode, pt, 0)] * pt.degree
        reports.append(PointReport(pt, exps, verdicts))
    finite = sum(r.point.degree for r in reports if not r.point.is_infinity)
    fuchs = None
    if all(r.point.regular for r in reports):
        fuchs = fuchs_sum_check([(r.exponents, r.point.degree) for r in reports], ode.order, finite)
    return reports, fuchs


def render_report(reports: list[PointReport], fuchs) -> str:
    """One block per point; ``key: value`` lines, blank line between blocks."""
    blocks = []
    for r in reports:
        pt = r.point
        lines = [f"point: {pt.label()}", f"roots: {pt.degree}",
                 f"class: {pt.classification}"]
        if pt.regular:
            lines.append(f"exponents: {r.exponents}")
        if r.verdicts:
            counts = {}
            for v in r.verdicts:
                counts[v.verdict] = counts.get(v.verdict, 0) + 1
            verdict = ", ".join(f"{k} {c}/{pt.degree}" for k, c in sorted(counts.items()))
            lines.append(f"verdict: {verdict}")
            lines.append(f"forced-log: {'yes' if any(v.forced_log for v in r.verdicts) else 'no'}")
        blocks.append("\n".join(lines))
    if fuchs is not None:
        lhs, rhs, ok = fuchs
        blocks.append(f"sum = {lhs}, expected = {rhs}")
    return "\n\n".join(blocks) + "\n"


# --- higher-order refit diagnostic -----------------------------------------------------

@dataclass
class RefitReport:
    order: int
    found: bool
    nullity: int
    primes: tuple
    verified_terms: int
    leading: list
    absent_factors: list
    present_factors: list


def refit_diagnostic(ode: LinearODE, seed: Sequence[int], order: int = 14, q: int = 5,
                     lead_factor: Sequence[int] | None = None, terms: int = 800,
                     primes: Sequence[int] | None = None) -> RefitReport:
    """Fit a higher-order ODE whose leading polynomial is ``lead_factor * S^order``
    times a constant, on series extended modulo each prime from ``ode``'s
    recurrence, and report which irreducible factors of ``ode``'s leading
    polynomial it avoids.  Factors an equation can shed are apparent.

    By default ``lead_factor`` is the product of the factors of P_m that are
    not part of the scaffold and have degree <= 2 (the non-apparent candidates).
    """
    from .exactarith import generate_prime_batch
    from .holonomic import extend_series, ode_to_recurrence, seed_length
    from .modlinalg import canonical_null_vector
    from .odefit import DegreeSchedule, build_design_matrix

    pts = [p for p in find_singular_points(ode) if not p.is_infinity]
    scaffold_like = {(0, 1), (1, -4), (-1, 4)}
    if lead_factor is None:
        lead_factor = [1]
        for p in pts:
            if p.degree <= EXACT_DEGREE and p.minpoly not in scaffold_like:
                lead_factor = pmul(lead_factor, p.minpoly)
    schedule = DegreeSchedule(tuple(q + (order - k) for k in range(order)) + (0,),
                              lead_factor=tuple(lead_factor))
    rec = ode_to_recurrence(ode)
    seed = [int(v) for v in seed[: max(seed_length(rec), 60)]]
    primes = list(primes) if primes else generate_prime_batch(2, 30)
    rows = min(terms, schedule.unknowns + 60)
    found, nullity, verified = True, 0, terms
    leading = None
    for p in primes:
        series = extend_series(rec, seed, terms, mode="modular", p=p)
        design = build_design_matrix(series, schedule, p, margin=0, rows=rows)
        v, pivot, nullity = canonical_null_vector(design.matrix, p)
        if v is None or pivot != 0:
            found = False
            break
        # the same vector must annihilate every extended term, not only the fitted rows
        full = build_design_matrix(series, schedule, p, margin=0, rows=terms).matrix
        if ((full.astype(object) @ [int(c) for c in v]) % p).any():
            found = False
            break
    if found:
        leading = pmul(schedule.fixed_factor(order), [1])
    absent, present = [], []
    for p in pts:
        target = present if found and multiplicity(leading, p.minpoly) > 0 else absent
        target.append(p.label())
    return RefitReport(order, found, nullity, tuple(primes), verified if found else 0,
                       leading or [], absent if found else [], present)
