"""Command-line pipeline.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 arithmetic or resource error.
"""
from __future__ import annotations

import argparse
import logging
import resource
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import asympt, fileio
from .enumeration import (assemble_t, enumerate_imperfect, enumerate_staircase,
                          imperfect_peak_states, lift_imperfect, lift_limit)
from .exactarith import generate_prime_batch
from .holonomic import extend_series, ode_to_recurrence, seed_length
from .odefit import AnnihilationFailure, search_fuchsian, verify_annihilation
from .series import Series
from .singular import analyze, render_report

log = logging.getLogger("polyseries")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ARITH = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class PipelineConfig:
    max_n: int = 10
    primes: int = 3
    prime_bits: int = 30
    digits: int = asympt.DESK_DIGITS
    K: int = asympt.DESK_K
    terms: int = asympt.DESK_TERMS
    jobs: int = 1
    out: Path = Path(".")

    def __post_init__(self):
        for name in ("max_n", "primes", "prime_bits", "digits", "K", "terms", "jobs"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        self.jobs = min(self.jobs, self.primes)


def int_range(text: str) -> range:
    """'10' or '8-12' (inclusive)."""
    try:
        lo, _, hi = text.partition("-")
        lo = int(lo)
        hi = int(hi) if hi else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A-B, got {text!r}")
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(lo, hi + 1)


# --- enumerate ----------------------------------------------------------------------------

def _enumerate_prime(args):
    N, p = args
    t0 = time.perf_counter()
    s = enumerate_imperfect(N, p)
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    return p, s.coeffs, time.perf_counter() - t0, rss


def run_enumeration(cfg: PipelineConfig, echo=print) -> tuple[Series, Series, Series]:
    """Staircase exactly, imperfect per prime (bounded pool), CRT lift, assemble t."""
    N = cfg.max_n
    if N < 4:
        log.warning("max-n=%d: no imperfect polygon fits; t_n = 0 for n < 2", N)
    work_n = max(N, 4)
    c = enumerate_staircase(work_n)
    primes = generate_prime_batch(cfg.primes, cfg.prime_bits)
    tasks = [(work_n, p) for p in primes]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_enumerate_prime, tasks))
    else:
        results = [_enumerate_prime(t) for t in tasks]
    peak = imperfect_peak_states(work_n)
    runs = []
    for p, coeffs, secs, rss in results:
        echo(f"prime {p}: {secs:.1f} s, peak states {peak}, max rss {rss:.0f} MB")
        runs.append(Series(list(coeffs), modulus=p, kind="p"))
    limit = min(work_n, lift_limit(primes))
    if limit < N:
        log.warning("%d primes lift p_n only for n <= %d; use more primes for n <= %d",
                    len(primes), limit, N)
    lifted = lift_imperfect(runs, min(N, limit) + 1)
    c = Series(c.coeffs[: lifted.stop - 1], start=1, kind="c")
    t = assemble_t(c, lifted)
    c = Series([0] + c.coeffs, kind="c")
    return c, lifted, t


def cmd_enumerate(ns, cfg: PipelineConfig) -> int:
    c, p, t = run_enumeration(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for s in (c, p, t):
        fileio.write_series(cfg.out / f"{s.kind}.series", s)
    print(f"wrote c, p, t series for n <= {cfg.max_n} to {cfg.out}")
    return EXIT_OK


# --- ODE commands ----------------------------------------------------------------------------

def cmd_verify_ode(ns, cfg: PipelineConfig) -> int:
    ode = fileio.read_ode(ns.ode)
    s = fileio.read_series(ns.series)
    series = s.dense()
    try:
        cert = verify_annihilation(ode, series, p=s.modulus)
    except AnnihilationFailure as exc:
        print(f"FAIL: residual at x^{exc.index} is {exc.value}")
        return EXIT_FAIL
    lo, hi = cert.checked_range
    print(f"PASS: residuals vanish for x^{lo} .. x^{hi} ({hi - lo + 1} coefficients)")
    return EXIT_OK


def cmd_fit_ode(ns, cfg: PipelineConfig) -> int:
    s = fileio.read_series(ns.series)
    if s.modulus is not None:
        raise UsageError("fit-ode needs an exact series")
    report = search_fuchsian(s.dense(), ns.order, ns.degree, kind=ns.schedule,
                             n_primes=max(2, cfg.primes if ns.primes_given else 2),
                             prime_bits=cfg.prime_bits, jobs=cfg.jobs)
    print(report.summary())
    if not report.found:
        return EXIT_FAIL
    cert = report.certificate
    print(f"terms used {cert.terms_used}, held-out terms predicted {cert.terms_predicted}, "
          f"primes {len(cert.primes_used)}")
    if ns.out_file:
        fileio.write_ode(ns.out_file, report.ode)
        print(f"wrote {ns.out_file}")
    else:
        sys.stdout.write(fileio.render_ode(report.ode))
    return EXIT_OK


def cmd_analyze(ns, cfg: PipelineConfig) -> int:
    ode = fileio.read_ode(ns.ode) if ns.ode else fileio.load_shipped_ode()
    reports, fuchs = analyze(ode, check_apparent=not ns.no_apparent)
    sys.stdout.write(render_report(reports, fuchs))
    return EXIT_OK


# --- amplitudes ----------------------------------------------------------------------------

def run_amplitudes(ode, seed: list[int], cfg: PipelineConfig, echo=print) -> dict:
    """Extend, normalize, fit at K and K+10, absence tests; returns the pieces."""
    if not any(seed):
        raise UsageError("seed series is identically zero")
    rec = ode_to_recurrence(ode)
    need = seed_length(rec)
    if len(seed) < need:
        raise UsageError(f"seed has {len(seed)} terms, the recurrence needs {need}")
    t0 = time.perf_counter()
    t = extend_series(rec, seed[:need], cfg.terms + 2, mode="exact")
    echo(f"extended to {cfg.terms + 2} exact terms in {time.perf_counter() - t0:.1f} s")
    r = asympt.normalize(t, cfg.digits)
    model = asympt.fit_amplitudes(r, cfg.K, cfg.digits)
    echo(f"fit K={cfg.K} on n = {model.window[0]}..{model.window[1]} at {model.digits} digits")
    stab = asympt.stability_report(r, cfg.K, cfg.K + 10)
    extra = (asympt.half_integer_terms() + asympt.log_squared_terms()
             + asympt.alternating_log_terms())
    absent = asympt.absence_test(r, cfg.K, extra, cfg.digits)
    return {"series": r, "model": model, "stability": stab, "absence": absent}


def cmd_amplitudes(ns, cfg: PipelineConfig) -> int:
    import mpmath

    ode = fileio.read_ode(ns.ode) if ns.ode else fileio.load_shipped_ode()
    s = fileio.read_series(ns.seed)
    if s.modulus is not None:
        raise UsageError("amplitudes needs an exact seed series")
    res = run_amplitudes(ode, [int(v) for v in s.dense()], cfg)
    print(f"# amplitudes, K={cfg.K}, N={cfg.terms}, digits={cfg.digits}; "
          f"confidence from K vs K+10")
    sys.stdout.write(asympt.amplitude_report(res["model"], res["stability"]))
    print("# absence tests (|amplitude|, verdict)")
    for name, v in res["absence"].items():
        verdict = "absent" if v < asympt.ABSENCE_THRESHOLD else "PRESENT"
        print(f"{name}  {mpmath.nstr(v, 3)}  {verdict}")
    return EXIT_OK


# --- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyseries",
                                 description="Three-choice polygon series pipeline.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--primes", type=int, default=None, help="prime count")
        p.add_argument("--prime-bits", type=int, default=30)
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--digits", type=int, default=asympt.DESK_DIGITS)
        p.add_argument("--K", type=int, default=asympt.DESK_K)
        p.add_argument("--terms", type=int, default=asympt.DESK_TERMS)
        p.add_argument("--max-n", type=int, default=10)
        return p

    p = common(sub.add_parser("enumerate", help="count c_n, p_n, t_n"))
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.set_defaults(func=cmd_enumerate)

    p = common(sub.add_parser("verify-ode", help="check an ODE annihilates a series"))
    p.add_argument("ode", type=Path)
    p.add_argument("series", type=Path)
    p.set_defaults(func=cmd_verify_ode)

    p = common(sub.add_parser("fit-ode", help="search for an annihilating ODE"))
    p.add_argument("series", type=Path)
    p.add_argument("--order", type=int_range, required=True, help="m or m1-m2")
    p.add_argument("--degree", type=int_range, required=True, help="q or q1-q2")
    p.add_argument("--schedule", choices=("fuchsian", "uniform"), default="fuchsian")
    p.add_argument("--out", dest="out_file", type=Path, default=None, help="ODE output file")
    p.set_defaults(func=cmd_fit_ode)

    p = common(sub.add_parser("analyze", help="singularity report"))
    p.add_argument("ode", type=Path, nargs="?", help="default: shipped order-8 ODE")
    p.add_argument("--no-apparent", action="store_true", help="skip the apparent-singularity check")
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("amplitudes", help="asymptotic amplitude fit"))
    p.add_argument("seed", type=Path, help="exact t series with at least the seed window")
    p.add_argument("--ode", type=Path, default=None, help="default: shipped order-8 ODE")
    p.set_defaults(func=cmd_amplitudes)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    ns.primes_given = ns.primes is not None
    try:
        cfg = PipelineConfig(max_n=ns.max_n, primes=ns.primes or 3, prime_bits=ns.prime_bits,
                             digits=ns.digits, K=ns.K, terms=ns.terms, jobs=ns.jobs,
                             out=getattr(ns, "out", Path(".")))
        return ns.func(ns, cfg)
    except (UsageError, fileio.FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARITH


if __name__ == "__main__":
    sys.exit(main())
