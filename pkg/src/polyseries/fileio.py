"""Line-oriented text formats for series and ODEs, and the shipped data files.

Series file::

    # polyseries series v1
    kind t
    modulus exact            (or a prime)
    digits 300               (optional, real-valued kinds only)
    2 4
    3 12
    ...

ODE file::

    order m
    P k <degree> <c0> <c1> ... <cdeg>
"""
from __future__ import annotations

import os
from fractions import Fraction
from importlib import resources
from pathlib import Path

import mpmath

from .ode import LinearODE
from .series import Series

SERIES_MAGIC = "# polyseries series v1"
KINDS = ("t", "c", "p", "r")
DATA_ENV = "POLYSERIES_DATA_DIR"


class FormatError(ValueError):
    pass


def render_series(s: Series) -> str:
    if s.kind not in KINDS:
        raise FormatError(f"unknown series kind {s.kind!r}")
    head = [SERIES_MAGIC, f"kind {s.kind}",
            f"modulus {'exact' if s.modulus is None else s.modulus}"]
    if s.digits is not None:
        head.append(f"digits {s.digits}")
    body = []
    for i, v in enumerate(s.coeffs):
        if isinstance(v, mpmath.mpf):
            txt = mpmath.nstr(v, s.digits or mpmath.mp.dps)
        elif isinstance(v, Fraction):
            txt = str(v)
        else:
            txt = str(int(v))
        body.append(f"{s.start + i} {txt}")
    return "\n".join(head + body) + "\n"


def parse_series(text: str) -> Series:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != SERIES_MAGIC:
        raise FormatError("missing series header")
    kind, modulus, digits = None, None, None
    i = 1
    while i < len(lines) and not lines[i].lstrip()[:1].isdigit() and not lines[i].lstrip().startswith("-"):
        key, _, val = lines[i].partition(" ")
        if key == "kind":
            kind = val.strip()
        elif key == "modulus":
            modulus = None if val.strip() == "exact" else int(val)
        elif key == "digits":
            digits = int(val)
        else:
            raise FormatError(f"unknown header line {lines[i]!r}")
        i += 1
    if kind not in KINDS:
        raise FormatError(f"bad or missing kind {kind!r}")
    idx, vals = [], []
    for ln in lines[i:]:
        a, b = ln.split()
        idx.append(int(a))
        if digits is not None:
            vals.append(mpmath.mpf(b) if "/" not in b else Fraction(b))
        else:
            vals.append(Fraction(b) if "/" in b else int(b))
    if any(b != a + 1 for a, b in zip(idx, idx[1:])):
        raise FormatError("indices must be consecutive and increasing")
    if modulus is not None and any(not 0 <= v < modulus for v in vals):
        raise FormatError("residue outside [0, modulus)")
    return Series(vals, idx[0] if idx else 0, modulus, kind, digits)


def read_series(path) -> Series:
    if digits_hint := _peek_digits(path):
        with mpmath.workdps(digits_hint):
            return parse_series(Path(path).read_text())
    return parse_series(Path(path).read_text())


def _peek_digits(path) -> int | None:
    with open(path) as fh:
        for _ in range(5):
            ln = fh.readline()
            if ln.startswith("digits "):
                return int(ln.split()[1])
    return None


def write_series(path, s: Series) -> None:
    if s.digits:
        with mpmath.workdps(s.digits):
            Path(path).write_text(render_series(s))
    else:
        Path(path).write_text(render_series(s))


def render_ode(ode: LinearODE) -> str:
    out = [f"order {ode.order}"]
    for k, p in enumerate(ode.polys):
        out.append(" ".join(["P", str(k), str(len(p) - 1)] + [str(c) for c in p]))
    return "\n".join(out) + "\n"


def parse_ode(text: str) -> LinearODE:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0][0] != "order":
        raise FormatError("missing 'order m' header")
    m = int(lines[0][1])
    polys: list = [None] * (m + 1)
    for parts in lines[1:]:
        if parts[0] != "P":
            raise FormatError(f"unexpected line {' '.join(parts)!r}")
        k, deg = int(parts[1]), int(parts[2])
        coeffs = [int(c) for c in parts[3:]]
        if len(coeffs) != deg + 1:
            raise FormatError(f"P {k}: degree {deg} but {len(coeffs)} coefficients")
        if not 0 <= k <= m or polys[k] is not None:
            raise FormatError(f"bad or repeated index P {k}")
        polys[k] = coeffs
    return LinearODE.from_lists([p or [] for p in polys])


def read_ode(path) -> LinearODE:
    return parse_ode(Path(path).read_text())


def write_ode(path, ode: LinearODE) -> None:
    Path(path).write_text(render_ode(ode))


def data_path(name: str) -> Path:
    override = os.environ.get(DATA_ENV)
    if override:
        return Path(override) / name
    return Path(str(resources.files("polyseries") / "data" / name))


def load_shipped_ode() -> LinearODE:
    """The shipped order-8 ODE for the three-choice generating function."""
    return read_ode(data_path("appendix_a.ode"))
