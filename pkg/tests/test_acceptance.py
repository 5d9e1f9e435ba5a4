"""Acceptance criteria 1-10 at their stated tolerances.

The 260-term series comes from an 18-prime enumeration run (the first three
primes double as the 3-prime run); the 50000-term series is its exact
extension by the shipped order-8 recurrence.  Each criterion records one
PASS/FAIL line, printed in the terminal summary.
"""
import math
import resource
import time
from fractions import Fraction

import mpmath
import pytest

import conftest
from polyseries import asympt as am
from polyseries import fileio
from polyseries.enumeration import (assemble_t, brute_force_t, enumerate_imperfect,
                                    enumerate_staircase, lift_imperfect, lift_limit)
from polyseries.exactarith import generate_prime_batch
from polyseries.holonomic import apply_ode, extend_series, ode_to_recurrence, seed_length
from polyseries.odefit import search_fuchsian, verify_annihilation
from polyseries.singular import (RECOGNITION_TOL, analyze, find_singular_points,
                                 refit_diagnostic)

pytestmark = pytest.mark.slow

N_ENUM = 260
N_ASYMPT = 50000
SEED = 60


def record(k: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE_LINES[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(conftest.ACCEPTANCE_LINES[k])


# --- shared runs -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def shipped_ode():
    return fileio.load_shipped_ode()


@pytest.fixture(scope="module")
def staircase():
    return enumerate_staircase(N_ENUM)


@pytest.fixture(scope="module")
def runs18():
    """Per-prime imperfect counts at N = 260 for 18 primes, with timings."""
    primes = generate_prime_batch(18)
    enumerate_imperfect(10, primes[0])        # JIT warm-up outside the timings
    runs, secs = [], []
    for p in primes:
        t0 = time.perf_counter()
        runs.append(enumerate_imperfect(N_ENUM, p))
        secs.append(time.perf_counter() - t0)
    rss_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 2**20
    return primes, runs, secs, rss_gb


@pytest.fixture(scope="module")
def t260(runs18, staircase):
    _, runs, _, _ = runs18
    return assemble_t(staircase, lift_imperfect(runs)).coeffs


@pytest.fixture(scope="module")
def t_residues(runs18, staircase):
    """t_n mod p straight from each prime's run (no lifting)."""
    primes, runs, _, _ = runs18
    return {p: [(2 * n * staircase.get(n) + 2 * r.coeffs[n]) % p for n in range(N_ENUM + 1)]
            for p, r in zip(primes[:3], runs[:3])}


@pytest.fixture(scope="module")
def desk(t260, shipped_ode):
    """Exact 50000-term extension, normalised at 300 digits, and its timing."""
    t0 = time.perf_counter()
    rec = ode_to_recurrence(shipped_ode)
    t = extend_series(rec, t260[:SEED], N_ASYMPT + 2)
    r = am.normalize(t, am.DESK_DIGITS)
    return r, time.perf_counter() - t0


@pytest.fixture(scope="module")
def fit30(desk):
    r, ext_secs = desk
    t0 = time.perf_counter()
    model = am.fit_amplitudes(r, am.DESK_K, am.DESK_DIGITS)
    return model, ext_secs + time.perf_counter() - t0


# --- criteria ----------------------------------------------------------------------------

def test_c01_enumeration_exact(staircase):
    c10 = enumerate_staircase(10)
    exact = assemble_t(c10, enumerate_imperfect(10, None))
    primes = generate_prime_batch(2)
    lifted = assemble_t(c10, lift_imperfect([enumerate_imperfect(10, p) for p in primes]))
    brute = brute_force_t(10)
    first = exact.coeffs[2:7]
    catalan_ok = all(staircase[n] == math.comb(2 * n - 2, n - 1) // n for n in range(2, 101))
    ok = (first == [4, 12, 42, 152, 562] and brute.coeffs[:11] == exact.coeffs == lifted.coeffs
          and catalan_ok)
    record(1, ok, f"t2..t6={first}, brute force = transfer matrix for n<=10, Catalan n<=100: {catalan_ok}")
    assert ok


def test_c02_enumeration_at_scale(runs18, t260):
    primes, runs, secs, rss_gb = runs18
    three = sum(secs[:3])
    lim = lift_limit(primes[:3])
    lift3 = lift_imperfect(runs[:3], lim + 1).coeffs
    lift18 = lift_imperfect(runs).coeffs
    consistent = lift3 == lift18[: lim + 1]
    # spot sample: 18-prime t_n against the exact recurrence extension of the shipped ODE
    rec = ode_to_recurrence(fileio.load_shipped_ode())
    ext = extend_series(rec, t260[:SEED], N_ENUM + 1)
    sample = [45 + (N_ENUM - 45) * i // 9 for i in range(10)]
    spot = all(t260[n] == ext[n] for n in sample)
    ok = three <= 3600 and rss_gb <= 4 and consistent and spot
    record(2, ok, f"3 primes {three:.0f} s, peak RSS {rss_gb:.2f} GB, 3- vs 18-prime lift agree "
                  f"for n<={lim}: {consistent}, spot sample {sample[0]}..{sample[-1]}: {spot}")
    assert ok


def test_c03_ode_verification(shipped_ode, t260, t_residues):
    modular = {p: not any(apply_ode(shipped_ode, res, p)) for p, res in t_residues.items()}
    window = len(apply_ode(shipped_ode, t260))
    exact80 = verify_annihilation(shipped_ode, t260[:80])
    exact_full = not any(apply_ode(shipped_ode, t260))
    ok = all(modular.values()) and exact80.checked_range[1] >= 0 and exact_full
    record(3, ok, f"residuals zero on x^0..x^{window - 1} mod 3 primes, exact on first 80 terms "
                  f"(x^0..x^{exact80.checked_range[1]})")
    assert ok


def test_c04_recurrence_round_trip(shipped_ode, t260):
    rec = ode_to_recurrence(shipped_ode)
    span_rule = (max(shipped_ode.degree(k) - k for k in range(9))
                 + max(k - next(j for j, c in enumerate(p) if c) for k, p in enumerate(shipped_ode.polys)))
    regen = extend_series(rec, t260[:SEED], N_ENUM + 1)
    ok = regen == t260 and seed_length(rec) <= SEED and rec.span == span_rule
    record(4, ok, f"span {rec.span}, 60-term seed regenerates t_0..t_{N_ENUM} exactly")
    assert ok


def test_c05_ode_search(t260, staircase):
    t0 = time.perf_counter()
    report = search_fuchsian(t260, [10], [12], kind="fuchsian")
    secs = time.perf_counter() - t0
    held = report.certificate.terms_predicted if report.found else 0
    resub = report.found and verify_annihilation(report.ode, t260).checked_range[0] == 0
    stair = search_fuchsian(staircase.dense(), range(1, 3), range(0, 4))
    order = stair.ode.order if stair.found else None
    ok = report.found and held >= 40 and resub and secs <= 1800 and order is not None and order <= 2
    record(5, ok, f"order-10 fit (q_m=12, L={report.schedule.unknowns if report.found else '-'}) "
                  f"predicts {held} held-out terms in {secs:.0f} s; staircase order {order}")
    assert ok


EXPECTED = {
    "x": [-1, 0, 0, 0, 1, 2, 3, 4],
    "4*x - 1": ["-1/2", "-1/2", 0, "1/2", 1, "3/2", 2, 3],
    "4*x + 1": [0, 1, 2, 3, 4, 5, 6, "13/2"],
    "4*x**2 + 1": [0, 1, 2, 3, 4, 5, 6, "13/2"],
    "7*x**2 + x + 1": [0, 1, 2, 2, 3, 4, 5, 6],
    "infinity": [-2, "-3/2", -1, -1, "-1/2", "1/2", "3/2", "5/2"],
    "Q8": [0, 1, 2, 3, 4, 5, 6, 8],
}


def test_c06_singularity_analysis(shipped_ode):
    reports, (lhs, rhs, fuchs_ok) = analyze(shipped_ode)
    by = {("Q8" if r.point.degree == 25 else r.point.label()): r for r in reports}
    table = {k: list(by[k].exponents.values) == [Fraction(v) for v in vals]
             for k, vals in EXPECTED.items()}
    exact = all(by[k].exponents.exact for k in EXPECTED)
    n = sum(r.point.degree for r in reports if not r.point.is_infinity)
    q8 = by["Q8"].verdicts
    apparent = sum(v.verdict == "apparent" for v in q8)
    quarter = by["4*x - 1"].verdicts[0].verdict == "genuine"
    quad = by["7*x**2 + x + 1"].verdicts
    quad_ok = all(v.verdict == "genuine" and v.forced_log for v in quad)
    ok = (all(table.values()) and exact and lhs == rhs == 868 and fuchs_ok and n == 32
          and apparent == 25 and quarter and quad_ok and RECOGNITION_TOL == mpmath.mpf("1e-20"))
    record(6, ok, f"exponent sets {sum(table.values())}/7 exact, sum = {lhs}, expected = {rhs} (n={n}), "
                  f"Q8 apparent {apparent}/25, x=1/4 genuine, 1+x+7x^2 genuine with forced log")
    assert ok


def test_c07_refit_diagnostic(shipped_ode, t260):
    rep = refit_diagnostic(shipped_ode, t260[:SEED])
    q8 = next(p.label() for p in find_singular_points(shipped_ode) if p.degree == 25)
    ok = rep.found and q8 in rep.absent_factors and q8 not in rep.present_factors
    record(7, ok, f"order-14 fit with constant Q_14 found over {len(rep.primes)} primes "
                  f"(nullity {rep.nullity}); Q8 absent from P_14: {q8 in rep.absent_factors}")
    assert ok


def _digits(x, y) -> float:
    return am.agreement_digits(x, y)


def test_c08_asymptotics_desk(fit30):
    model, secs = fit30
    with mpmath.workdps(am.DESK_DIGITS):
        p32 = mpmath.pi ** mpmath.mpf(1.5)
        a0 = _digits(model.a[0], 3 * mpmath.sqrt(3) / p32)
        c0 = _digits(model.c[0], -24 / p32)
    b0_text = mpmath.nstr(model.b[0], 40, strip_zeros=False)
    b0_ok = b0_text.startswith("3.173275384589898481765")
    # a3 is positive: with the sign flipped the model misses r_15000 by ~2e-13
    want = {"a1": Fraction(-89, 8), "a2": Fraction(1019, 384), "a3": Fraction(10484935, 248832),
            "c1": Fraction(225), "c2": Fraction(-16575, 16), "c3": Fraction(389295, 128)}
    units = am.default_units(am.DESK_DIGITS)
    recog = {}
    for name, ratio in want.items():
        unit = "1/(sqrt(3) pi^(3/2))" if name[0] == "a" else "1/pi^(3/2)"
        # residual bound 10^(10 - 30) = 1e-20
        hit = am.identify_constant(model.amplitudes[name], {unit: units[unit]}, digits=30)
        recog[name] = hit is not None and hit.ratio == ratio
    ok = a0 >= 50 and c0 >= 40 and b0_ok and all(recog.values()) and secs <= 1800
    record(8, ok, f"a0 {a0:.0f} digits, c0 {c0:.0f} digits, b0 = {b0_text[:25]}..., "
                  f"recognised {sum(recog.values())}/6, {secs:.0f} s incl. extension")
    assert ok


def test_c09_stability(desk):
    r, _ = desk
    s = am.stability_report(r, 30, 40)
    ok = s["a0"] >= 100 and s["b0"] >= 100 and s["c0"] >= 90
    record(9, ok, f"K=30 vs K=40: a0 {s['a0']:.0f}, b0 {s['b0']:.0f}, c0 {s['c0']:.0f} digits; "
                  f"a20 {s['a20']:.0f}, c20 {s['c20']:.0f}")
    assert ok


def test_c10_absence(desk):
    r, _ = desk
    groups = {"half-integer": am.half_integer_terms(), "log^2": am.log_squared_terms(),
              "alternating log": am.alternating_log_terms()}
    groups["all together"] = sum(groups.values(), [])
    worst = {}
    for name, extra in groups.items():
        worst[name] = max(am.absence_test(r, am.DESK_K, extra).values())
    ok = all(v < am.ABSENCE_THRESHOLD for v in worst.values())
    record(10, ok, "largest added amplitude: " + ", ".join(f"{k} {mpmath.nstr(v, 2)}"
                                                        for k, v in worst.items()))
    assert ok


# --- properties at the desk operating point ------------------------------------------------

def test_back_prediction(fit30, desk):
    model, _ = fit30
    r, _ = desk
    n = N_ASYMPT // 2
    with mpmath.workdps(am.DESK_DIGITS):
        rel = abs(model.predict(n) - r.values[n]) / r.values[n]
    assert rel < mpmath.mpf("1e-20")


def test_stability_monotone(desk):
    r, _ = desk
    s = am.stability_report(r, 30, 40)
    for kind, top in (("a", 20), ("b", 20), ("c", 20)):
        for i in range(top):
            assert s[f"{kind}{i}"] >= s[f"{kind}{i + 1}"] - 12
