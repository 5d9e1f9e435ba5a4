"""Guessing linear ODEs with a Fuchsian-style ansatz ``P_k = Q_k * S^k``.

Unknowns are the coefficients of the Q_k.  Over each prime the design
matrix nullspace is reduced to a canonical vector pinned to 1; vectors
from several primes are CRT-lifted and rationally reconstructed.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exactarith import (ModularError, check_prime, crt_combine_arrays, prime_pool,
                         rational_reconstruct)
from .holonomic import apply_ode
from .modlinalg import MAX_PRIME, canonical_null_vector
from .ode import LinearODE, pmul, ppow, valuation

log = logging.getLogger(__name__)

DEFAULT_MARGIN = 10
MIN_HELD_OUT = 10
STAIRCASE_R = (1, -4)


class NeedMorePrimes(ArithmeticError):
    pass


class AnnihilationFailure(AssertionError):
    """Raised by :func:`verify_annihilation`; ``index`` is the first bad residual."""

    def __init__(self, index: int, value):
        super().__init__(f"residual at x^{index} is {value}, not 0")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class DegreeSchedule:
    """Order ``m``, scaffold ``S = x R(x)`` and the degree of every Q_k."""

    degrees: tuple[int, ...]
    R: tuple[int, ...] = STAIRCASE_R
    lead_factor: tuple[int, ...] = (1,)

    def __post_init__(self):
        if len(self.degrees) < 2 or any(d < 0 for d in self.degrees):
            raise ValueError("need order >= 1 and non-negative degrees")

    @classmethod
    def uniform(cls, m: int, q: int, R: Sequence[int] = STAIRCASE_R) -> "DegreeSchedule":
        return cls(tuple([q] * (m + 1)), tuple(R))

    @classmethod
    def fuchsian(cls, m: int, q: int, R: Sequence[int] = STAIRCASE_R) -> "DegreeSchedule":
        """deg Q_k = q + (m - k)(deg S - 1), the largest degrees a point at
        infinity can tolerate while staying regular."""
        rho = len(R)  # deg S = deg R + 1
        return cls(tuple(q + (rho - 1) * (m - k) for k in range(m + 1)), tuple(R))

    @property
    def order(self) -> int:
        return len(self.degrees) - 1

    @property
    def unknowns(self) -> int:
        """L: free coefficients after pinning the leading one of Q_m."""
        return sum(d + 1 for d in self.degrees) - 1

    def columns(self) -> list[tuple[int, int]]:
        """Unknown ordering (k, j) for Q_k's x^j: Q_m from the top degree down,
        then Q_{m-1}, and so on.  The canonical solution is pinned to 1 at the
        first column it reaches, normally the leading coefficient of Q_m."""
        return [(k, j) for k in range(self.order, -1, -1) for j in range(self.degrees[k], -1, -1)]

    def scaffold(self) -> list[int]:
        return [0] + list(self.R)

    def fixed_factor(self, k: int) -> list[int]:
        """Known part of P_k: S^k, times ``lead_factor`` for k = m."""
        f = ppow(self.scaffold(), k)
        return pmul(f, self.lead_factor) if k == self.order else f


@dataclass
class FitCertificate:
    terms_used: int
    terms_predicted: int
    primes_used: tuple[int, ...] = ()
    checked_range: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.terms_predicted < 0:
            raise ValueError("negative prediction count")


@dataclass
class DesignMatrix:
    matrix: np.ndarray
    schedule: DegreeSchedule
    p: int
    degenerate: bool = False


def _residues(series: Sequence, p: int) -> np.ndarray:
    return np.array([int(v) % p for v in series], dtype=object)


def build_design_matrix(series: Sequence, schedule: DegreeSchedule, p: int,
                        margin: int = DEFAULT_MARGIN, rows: int | None = None) -> DesignMatrix:
    """Row ``r`` is the coefficient of ``x^r`` in ``sum_k Q_k S^k F^(k)`` as a
    linear form in the Q coefficients (column order from ``schedule.columns``)."""
    p = check_prime(p)
    if p >= MAX_PRIME:
        raise ModularError("design matrices need p < 2^31")
    L = schedule.unknowns
    need = L + margin
    if len(series) < need:
        raise ValueError(f"schedule with L={L} needs at least {need} terms, got {len(series)}")
    nrows = len(series) if rows is None else rows
    if nrows > len(series):
        raise ValueError("more rows than terms")
    t = [int(v) % p for v in series[:nrows]]
    m = schedule.order
    cols = schedule.columns()
    A = np.zeros((nrows, len(cols)), dtype=np.int64)
    U = []
    for k in range(m + 1):
        Rk = [c % p for c in ppow(schedule.R, k)]
        if k == m:
            Rk = [c % p for c in pmul(Rk, schedule.lead_factor)]
        # U_k = R^k * (x^k F^(k)) mod p, truncated to nrows
        xk = [0] * nrows
        for i in range(k, nrows):
            ff = 1
            for j in range(k):
                ff = ff * (i - j) % p
            xk[i] = ff * t[i] % p
        xk = np.array(xk, dtype=object)
        acc = np.zeros(nrows, dtype=object)
        for d, c in enumerate(Rk):
            if c and d < nrows:
                acc[d:] += c * xk[: nrows - d]
        U.append(np.array([int(v) % p for v in acc], dtype=np.int64))
    for ci, (k, j) in enumerate(cols):
        # x^j * U_k contributes U_k[r - j]
        if j < nrows:
            A[j:, ci] = U[k][: nrows - j]
    degenerate = not A.any()
    return DesignMatrix(A, schedule, p, degenerate)


def solve_candidate(design: DesignMatrix, backend: str | None = None,
                    warn: bool = True) -> np.ndarray | None:
    """Canonical solution consistent with every row, or ``None``."""
    if design.degenerate:
        log.warning("design matrix is identically zero; every vector solves it")
    v, _, nullity = canonical_null_vector(design.matrix, design.p, backend)
    if warn and nullity > 1:
        log.warning("nullspace dimension %d over p=%d; taking the canonical pinned vector",
                    nullity, design.p)
    return v


def lift_ode(vectors: Sequence[Sequence[int]], primes: Sequence[int],
             schedule: DegreeSchedule) -> LinearODE:
    """CRT + rational reconstruction of per-prime pinned vectors into an integer ODE."""
    if len(vectors) != len(primes) or not vectors:
        raise ValueError("need one vector per prime")
    pins = {next(i for i, c in enumerate(v) if int(c) % p) for v, p in zip(vectors, primes)}
    if len(pins) != 1 or any(int(v[min(pins)]) % p != 1 for v, p in zip(vectors, primes)):
        raise ValueError("vectors disagree on the pinned component")
    lifted = crt_combine_arrays([[int(c) for c in v] for v in vectors], primes)
    modulus = math.prod(int(p) for p in primes)
    fracs = []
    for c in lifted:
        f = rational_reconstruct(c % modulus, modulus)
        if f is None:
            raise NeedMorePrimes(f"rational reconstruction failed with {len(primes)} primes; need more primes")
        fracs.append(f)
    den = math.lcm(*(f.denominator for f in fracs))
    ints = [int(f * den) for f in fracs]
    m = schedule.order
    Q = [[0] * (d + 1) for d in schedule.degrees]
    for (k, j), c in zip(schedule.columns(), ints):
        Q[k][j] = c
    return LinearODE.from_lists([pmul(Q[k], schedule.fixed_factor(k)) for k in range(m + 1)])


def ode_lag(ode: LinearODE) -> int:
    return max(max(k - valuation(p), 0) for k, p in enumerate(ode.polys) if p)


def verify_annihilation(ode: LinearODE, series: Sequence, start: int = 0, stop: int | None = None,
                        p: int | None = None, terms_used: int = 0,
                        primes: Sequence[int] = ()) -> FitCertificate:
    """Check that residual coefficients ``start..stop`` (inclusive) vanish.

    ``stop`` defaults to the last residual determined by the series.  With
    ``p`` the series may hold residues and the check is modular.
    """
    res = apply_ode(ode, series, p)
    last = len(res) - 1
    stop = last if stop is None else stop
    if stop > last:
        raise ValueError(f"residual x^{stop} needs more terms (last determined is x^{last})")
    for r in range(start, stop + 1):
        if res[r] != 0:
            raise AnnihilationFailure(r, res[r])
    # held-out terms: residual rows beyond those the fit used
    predicted = max(0, stop + 1 - max(start, terms_used))
    return FitCertificate(terms_used, predicted, tuple(primes), (start, stop))


@dataclass
class SearchReport:
    ode: LinearODE | None
    certificate: FitCertificate | None
    schedule: DegreeSchedule | None
    attempted: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.ode is not None

    @property
    def largest_L(self) -> int:
        return max((L for _, L, _ in self.attempted), default=0)

    def summary(self) -> str:
        if self.found:
            return (f"found order {self.ode.order} ODE, schedule {self.schedule.degrees}, "
                    f"L={self.schedule.unknowns}, predicted {self.certificate.terms_predicted} terms")
        return f"no ODE found; {len(self.attempted)} schedules tried, largest L={self.largest_L}"


def _solve_one(args):
    series, schedule, p, rows = args
    design = build_design_matrix(series, schedule, p, margin=0, rows=rows)
    v, _, nullity = canonical_null_vector(design.matrix, p)
    return (None if v is None else [int(c) for c in v]), nullity


def candidate_schedules(m_range: Iterable[int], degree_range: Iterable[int],
                        kind: str = "uniform", R: Sequence[int] = STAIRCASE_R) -> list[DegreeSchedule]:
    make = {"uniform": DegreeSchedule.uniform, "fuchsian": DegreeSchedule.fuchsian}[kind]
    out = {make(m, q, R) for m in m_range for q in degree_range}
    return sorted(out, key=lambda s: (s.unknowns, s.order, s.degrees))


def fit_schedule(series: Sequence, schedule: DegreeSchedule, primes: Sequence[int],
                 margin: int = DEFAULT_MARGIN, min_held_out: int = MIN_HELD_OUT,
                 jobs: int = 1, cache: dict | None = None) -> tuple[LinearODE, FitCertificate] | None:
    """Fit ``schedule`` on the first L + margin terms and verify on the rest.

    ``cache`` maps primes to already computed solutions, so a caller widening
    the prime batch only pays for the new primes.
    """
    L = schedule.unknowns
    rows = L + margin
    if len(series) < rows:
        raise ValueError(f"schedule with L={L} needs at least {rows} terms, got {len(series)}")
    cache = {} if cache is None else cache
    series = list(series)
    # one prime first: an inconsistent system needs no further work
    if primes[0] not in cache:
        cache[primes[0]] = _solve_one((series, schedule, primes[0], rows))
    if cache[primes[0]][0] is None:
        return None
    todo = [p for p in primes if p not in cache]
    tasks = [(series, schedule, p, rows) for p in todo]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            cache.update(zip(todo, pool.map(_solve_one, tasks)))
    else:
        cache.update((p, _solve_one(t)) for p, t in zip(todo, tasks))
    vecs = [cache[p][0] for p in primes]
    if any(v is None for v in vecs):
        return None
    nullity = cache[primes[0]][1]
    if nullity > 1 and not cache.get("warned"):
        cache["warned"] = True
        log.warning("schedule %s: nullspace dimension %d; using the canonical vector",
                    schedule.degrees, nullity)
    ode = lift_ode(vecs, primes, schedule)
    try:
        cert = verify_annihilation(ode, series, 0, None, None, rows, primes)
    except AnnihilationFailure as exc:
        log.info("schedule %s: candidate fails at x^%d", schedule.degrees, exc.index)
        return None
    if cert.terms_predicted < min_held_out:
        return None
    return ode, cert


def search_fuchsian(series: Sequence, m_range: Iterable[int], degree_range: Iterable[int],
                    kind: str = "uniform", n_primes: int = 2, prime_bits: int = 30,
                    margin: int = DEFAULT_MARGIN, min_held_out: int = MIN_HELD_OUT,
                    R: Sequence[int] = STAIRCASE_R, jobs: int = 1,
                    schedules: Sequence[DegreeSchedule] | None = None,
                    max_primes: int = 128) -> SearchReport:
    """Try schedules in increasing L; return the first verified ODE.

    Schedules too large to leave ``margin + min_held_out`` spare terms are
    skipped (and reported).  On reconstruction failure the prime batch is
    doubled, up to ``max_primes``.
    """
    if n_primes < 2:
        raise ValueError("at least two primes are required")
    plan = list(schedules) if schedules is not None else candidate_schedules(m_range, degree_range, kind, R)
    if not plan:
        raise ValueError("empty search range")
    series = [int(v) for v in series]
    report = SearchReport(None, None, None)
    for sched in plan:
        L = sched.unknowns
        if L + margin + min_held_out > len(series):
            report.attempted.append((sched, L, "too few terms"))
            continue
        count, hit, cache = n_primes, None, {}
        while count <= max_primes:
            primes = prime_pool(count, prime_bits)
            try:
                hit = fit_schedule(series, sched, primes, margin, min_held_out, jobs, cache)
                break
            except NeedMorePrimes:
                log.info("schedule %s: lift failed with %d primes", sched.degrees, count)
                count *= 2
        report.attempted.append((sched, L, "found" if hit else "none"))
        if hit is not None:
            report.ode, report.certificate = hit
            report.schedule = sched
            return report
    return report
