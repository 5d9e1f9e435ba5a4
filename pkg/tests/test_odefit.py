import logging
import random

import pytest

from polyseries.exactarith import generate_prime_batch
from polyseries.holonomic import apply_ode
from polyseries.ode import LinearODE
from polyseries.odefit import (AnnihilationFailure, DegreeSchedule, NeedMorePrimes,
                               build_design_matrix, lift_ode, search_fuchsian,
                               solve_candidate, verify_annihilation)

P = generate_prime_batch(4)


def test_schedule_unknowns():
    s = DegreeSchedule.uniform(2, 3)
    assert s.unknowns == 3 * 4 - 1
    f = DegreeSchedule.fuchsian(10, 12)
    assert f.degrees == tuple(12 + (10 - k) for k in range(11))
    assert f.unknowns == 197
    assert DegreeSchedule.fuchsian(8, 30).unknowns == 314


def test_geometric_series_hand_system():
    # F = 1/(1-x) with S = x(1-x): Q_1 = 1, Q_0 = -x gives x(1-x)F' - xF = 0
    sched = DegreeSchedule((1, 0), R=(1, -1))
    F = [1] * 30
    vecs = [solve_candidate(build_design_matrix(F, sched, p)) for p in P[:2]]
    ode = lift_ode(vecs, P[:2], sched)
    assert ode == LinearODE.from_lists([[0, -1], [0, 1, -1]])
    assert not any(apply_ode(ode, F))


def test_short_series_names_length():
    with pytest.raises(ValueError, match="at least 12 terms"):
        build_design_matrix([1] * 10, DegreeSchedule((1, 0), R=(1, -1)), P[0])


def test_zero_series_is_degenerate(caplog):
    sched = DegreeSchedule.uniform(1, 1)
    d = build_design_matrix([0] * 30, sched, P[0])
    assert d.degenerate
    with caplog.at_level(logging.WARNING):
        solve_candidate(d)
    assert "identically zero" in caplog.text


def test_random_series_has_no_candidate():
    rng = random.Random(1)
    series = [rng.randrange(P[0]) for _ in range(80)]
    sched = DegreeSchedule.uniform(2, 3)
    assert solve_candidate(build_design_matrix(series, sched, P[0])) is None
    report = search_fuchsian(series, range(1, 3), range(0, 4))
    assert not report.found and report.largest_L > 0
    assert "no ODE found" in report.summary()


def test_catalan_order_two(catalan_series):
    report = search_fuchsian(catalan_series, range(1, 3), range(0, 4))
    assert report.found and report.ode.order <= 2
    cert = verify_annihilation(report.ode, catalan_series)
    assert cert.terms_predicted >= 10


def test_lift_rejects_disagreeing_pins():
    sched = DegreeSchedule((1, 0), R=(1, -1))
    with pytest.raises(ValueError, match="pinned"):
        lift_ode([[1, 5, 3], [0, 1, 3]], P[:2], sched)


def test_lift_needs_more_primes():
    # 2002 has no fraction with numerator and denominator below sqrt(p/2) mod p
    sched = DegreeSchedule((1, 0), R=(1, -1))
    with pytest.raises(NeedMorePrimes, match="need more primes"):
        lift_ode([[1, 2002, 0]], [1_000_003], sched)


def test_verify_reports_first_bad_index(catalan_series):
    # hand-checked annihilator of sum c_n x^n
    ode = LinearODE.from_lists([[0, -2, 8], [0, -1, 6, -8], [0, 0, 1, -8, 16]])
    ok = verify_annihilation(ode, catalan_series)
    assert ok.checked_range[0] == 0
    bad = list(catalan_series)
    bad[20] += 1
    with pytest.raises(AnnihilationFailure) as exc:
        verify_annihilation(ode, bad)
    assert exc.value.index == 20
