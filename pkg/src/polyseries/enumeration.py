"""Transfer-matrix enumeration of staircase and imperfect staircase polygons.

Diagonal sweep: at iteration ``k`` the line ``x + y = k + 3/2`` cuts the open
boundary walks, whose endpoints sit on the diagonal ``x + y = k + 1``.
Gaps are half the distance between consecutive endpoints along the diagonal.

State tables (per iteration ``k``, budget ``B = N - k - 1``):

* staircase ``C[i]``: two walks with gap ``i``; half-perimeter is ``k + 1``.
* four-walk ``G[l, m, n][e]``: gaps lower/middle/upper all ``>= 1``;
  half-perimeter ``h = k + 1 + m + e``. A coefficient survives only while
  ``h + l + n <= N`` (closing both outer pairs costs at least ``l + n``).
* two-walk ``D[g, e]``: one outer pair already joined, remaining gap ``g``;
  half-perimeter ``h = k + 1 + e``; survives while ``h + g <= N``.

Two-walk states live in their own array instead of under the reserved key
``(g, 0, 0)`` of the four-walk table.

Order of sub-phases within one iteration ``k -> k + 1``: staircase step,
creation of four-walk states from staircase states, the 16-way four-walk
step (rejecting middle joins), routing of freshly joined outer pairs into
the two-walk table (or straight to completion when both pairs close at
once), two-walk step with completion at gap 0. Every phase reads only
iteration-``k`` tables, so the order does not change the result.
"""
from __future__ import annotations

import itertools
import logging
from math import comb

import numpy as np

from ._accel import njit, resolve_backend
from .exactarith import check_prime, crt_combine_arrays, crt_capacity
from .series import Series

log = logging.getLogger(__name__)


def _four_walk_moves():
    """Distinct gap changes (dl, dm, dn) of the 16 joint steps, with multiplicity."""
    tally = {}
    for dA, dB, dC, dD in itertools.product((1, -1), repeat=4):
        key = ((dA - dB) // 2, (dB - dC) // 2, (dC - dD) // 2)
        tally[key] = tally.get(key, 0) + 1
    moves = sorted(tally)
    return np.array(moves, dtype=np.int64), np.array([tally[m] for m in moves], dtype=np.int64)


MOVES, MOVE_WEIGHTS = _four_walk_moves()


# --------------------------------------------------------------------------
# staircase polygons
# --------------------------------------------------------------------------

def enumerate_staircase(N: int) -> Series:
    """Exact staircase counts ``c_1 .. c_N`` by the two-walk transfer matrix."""
    if N < 2:
        raise ValueError("N must be >= 2")
    c = [0] * (N + 1)
    C = {1: 1}
    for k in range(N - 1):
        nxt = {}
        for i, v in C.items():
            for g, w in ((i + 1, 1), (i - 1, 1), (i, 2)):
                if g == 0:
                    c[k + 2] += w * v
                elif k + 2 + g <= N:
                    nxt[g] = nxt.get(g, 0) + w * v
        C = nxt
    return Series(c[1:], start=1, kind="c")


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


# --------------------------------------------------------------------------
# imperfect staircase polygons: packed numba kernel
# --------------------------------------------------------------------------

@njit(cache=True)
def _layout(k, N, L, off, ln):
    """Offsets of the four-walk rows alive at iteration k; returns pool size."""
    B = N - k - 1
    smax = min(k + 1, B)
    off[:, :, :] = -1
    ln[:, :, :] = 0
    total = 0
    for l in range(1, L + 1):
        for m in range(1, smax + 1):
            for n in range(1, L + 1):
                s = l + m + n
                if s > smax:
                    break
                emax = min(B - s, k - 1 - m)
                if emax < 0:
                    continue
                off[l, m, n] = total
                ln[l, m, n] = emax + 1
                total += emax + 1
    return total


@njit(cache=True)
def _addmod(a, b, p):
    s = a + b
    if s >= p:
        s -= p
    return s


@njit(cache=True)
def _pull_row(l, m, n, width, off, ln, pool, C, moves, weights, p, acc):
    """acc[0:width] = four-walk weights of target (l, m, n), pulled from iteration k."""
    L = off.shape[0] - 1
    M = off.shape[1] - 1
    for e in range(width):
        acc[e] = 0
    for t in range(moves.shape[0]):
        dl = moves[t, 0]
        dm = moves[t, 1]
        dn = moves[t, 2]
        sl = l - dl
        sm = m - dm
        sn = n - dn
        if sl < 1 or sm < 1 or sn < 1 or sl > L or sn > L or sm > M:
            continue
        o = off[sl, sm, sn]
        if o < 0:
            continue
        # target e' = source e + 1 - dm  (h grows by 2, m by dm, k by 1)
        shift = 1 - dm
        lo = max(0, shift)
        hi = min(width, ln[sl, sm, sn] + shift)
        w = weights[t]
        for e in range(lo, hi):
            v = pool[o + e - shift]
            acc[e] = _addmod(acc[e], v, p)
            if w == 2:
                acc[e] = _addmod(acc[e], v, p)
    if m == 1 and width > 0:
        # creation from staircase gap i: fork j steps from the upper walk
        s = l + n
        v = C[s + 2]
        if l >= 1:
            v = _addmod(v, C[s + 1], p)
        if n >= 1:
            v = _addmod(v, C[s + 1], p)
        if l >= 1 and n >= 1:
            v = _addmod(v, C[s], p)
        acc[0] = _addmod(acc[0], v, p)


@njit(cache=True)
def _imperfect_packed(N, p):
    L = N // 2 + 1
    M = N
    counts = np.zeros(N + 1, np.int64)
    C = np.zeros(N + 4, np.int64)
    C1 = np.zeros(N + 4, np.int64)
    C[1] = 1 % p
    D = np.zeros((L + 2, N + 1), np.int64)
    D1 = np.zeros((L + 2, N + 1), np.int64)
    off0 = np.full((L + 1, M + 1, L + 1), -1, np.int64)
    ln0 = np.zeros((L + 1, M + 1, L + 1), np.int64)
    off1 = np.full((L + 1, M + 1, L + 1), -1, np.int64)
    ln1 = np.zeros((L + 1, M + 1, L + 1), np.int64)
    pool0 = np.zeros(_layout(0, N, L, off0, ln0) + 1, np.int64)
    acc = np.zeros(N + 2, np.int64)
    peak = 0
    for k in range(N - 1):
        k1 = k + 1
        B1 = N - k1 - 1
        # staircase step
        C1[:] = 0
        for i in range(1, N + 2):
            v = C[i]
            if v == 0:
                continue
            if i + 1 <= B1:
                C1[i + 1] = _addmod(C1[i + 1], v, p)
            if 1 <= i - 1 <= B1:
                C1[i - 1] = _addmod(C1[i - 1], v, p)
            if i <= B1:
                C1[i] = _addmod(C1[i], v, p)
                C1[i] = _addmod(C1[i], v, p)
        # four-walk step into the packed table of iteration k1
        size = _layout(k1, N, L, off1, ln1)
        peak = max(peak, size)
        pool1 = np.zeros(size + 1, np.int64)
        smax = min(k1 + 1, B1)
        for l in range(1, L + 1):
            for m in range(1, smax + 1):
                for n in range(1, L + 1):
                    if l + m + n > smax:
                        break
                    o = off1[l, m, n]
                    if o < 0:
                        continue
                    width = ln1[l, m, n]
                    _pull_row(l, m, n, width, off0, ln0, pool0, C, MOVES, MOVE_WEIGHTS, p, acc)
                    for e in range(width):
                        pool1[o + e] = acc[e]
        # two-walk step with completion at gap 0
        D1[:, :] = 0
        for e in range(N + 1):
            v = D[1, e]
            h = k1 + 1 + e
            if v != 0 and h <= N:
                counts[h] = _addmod(counts[h], v, p)
        for g in range(1, L + 1):
            for e in range(0, B1 - g + 1):
                v = _addmod(D[g - 1, e], D[g + 1, e], p)
                v = _addmod(v, D[g, e], p)
                v = _addmod(v, D[g, e], p)
                D1[g, e] = v
        # joins of an outer pair: route to two-walk states or complete
        for g in range(0, L + 1):
            for m in range(1, M + 1):
                width = min(B1 - m - g, k1 - 1 - m) + 1
                if width <= 0:
                    continue
                _pull_row(0, m, g, width, off0, ln0, pool0, C, MOVES, MOVE_WEIGHTS, p, acc)
                for e in range(width):
                    v = acc[e]
                    if v == 0:
                        continue
                    if g == 0:
                        h = k1 + 1 + m + e
                        counts[h] = _addmod(counts[h], v, p)
                    else:
                        D1[g, m + e] = _addmod(D1[g, m + e], v, p)
                if g == 0:
                    continue
                _pull_row(g, m, 0, width, off0, ln0, pool0, C, MOVES, MOVE_WEIGHTS, p, acc)
                for e in range(width):
                    v = acc[e]
                    if v != 0:
                        D1[g, m + e] = _addmod(D1[g, m + e], v, p)
        C, C1 = C1, C
        D, D1 = D1, D
        off0, off1 = off1, off0
        ln0, ln1 = ln1, ln0
        pool0 = pool1
    return counts, peak


# --------------------------------------------------------------------------
# imperfect staircase polygons: dense numpy twin (also exact-integer mode)
# --------------------------------------------------------------------------

def _shifted(size, shift):
    """Source and target slices along one axis for target = source + shift."""
    lo, hi = max(0, -shift), min(size, size - shift)
    return slice(lo, hi), slice(lo + shift, hi + shift)


def _imperfect_dense(N, p=None):
    exact = p is None
    dtype = object if exact else np.int64
    L, M, E = N // 2 + 1, N, N
    shape = (L + 1, M + 1, L + 1, E + 1)
    l_ax = np.arange(L + 1)[:, None, None, None]
    m_ax = np.arange(M + 1)[None, :, None, None]
    n_ax = np.arange(L + 1)[None, None, :, None]
    e_ax = np.arange(E + 1)[None, None, None, :]
    G = np.zeros(shape, dtype=dtype)
    D = np.zeros((L + 2, E + 1), dtype=dtype)
    C = np.zeros(N + 4, dtype=dtype)
    C[1] = 1
    counts = np.zeros(N + 1, dtype=dtype)
    wide = not exact and p >= 1 << 58

    def reduce(a):
        return a if exact else a % p

    for k in range(N - 1):
        k1 = k + 1
        B1 = N - k1 - 1
        C1 = np.zeros_like(C)
        C1[2:] += C[1:-1]
        C1[1:-1] += C[2:]
        C1[1:] += 2 * C[1:]
        C1[0] = 0
        C1[max(B1 + 1, 0):] = 0
        G1 = np.zeros(shape, dtype=dtype)
        for (dl, dm, dn), w in zip(MOVES, MOVE_WEIGHTS):
            s_l, t_l = _shifted(L + 1, dl)
            s_m, t_m = _shifted(M + 1, dm)
            s_n, t_n = _shifted(L + 1, dn)
            s_e, t_e = _shifted(E + 1, 1 - dm)
            G1[t_l, t_m, t_n, t_e] += int(w) * G[s_l, s_m, s_n, s_e]
            if wide:
                G1 %= p
        # creation: fork inside a staircase of gap i, lands on m = 1, e = 0
        for a in range(L + 1):
            for b in range(L + 1 - a):
                s = a + b
                v = C[s + 2] + (C[s + 1] if a >= 1 else 0) + (C[s + 1] if b >= 1 else 0)
                v += C[s] if (a >= 1 and b >= 1) else 0
                G1[a, 1, b, 0] += v
        G1[:, 0] = 0
        alive = (l_ax + m_ax + n_ax + e_ax <= B1) & (m_ax + e_ax <= k1 - 1)
        G1 = reduce(np.where(alive, G1, 0).astype(dtype))
        # two-walk step; completion when the gap closes
        D1 = np.zeros_like(D)
        hs = k1 + 1 + np.arange(E + 1)
        ok = hs <= N
        np.add.at(counts, hs[ok], D[1, ok])
        D1[1:L + 1] = D[0:L] + D[2:L + 2] + 2 * D[1:L + 1]
        D1[0] = 0
        # route joined outer pairs
        for m in range(1, M + 1):
            for e in range(E + 1):
                h = k1 + 1 + m + e
                if h > N:
                    break
                counts[h] += G1[0, m, 0, e]
                if m + e <= E:
                    D1[1:L + 1, m + e] += G1[0, m, 1:L + 1, e] + G1[1:L + 1, m, 0, e]
            counts, D1 = reduce(counts), reduce(D1)
        G1[0] = 0
        G1[:, :, 0] = 0
        g_ax = np.arange(L + 2)[:, None]
        D1 = reduce(np.where(k1 + 1 + np.arange(E + 1)[None, :] + g_ax <= N, D1, 0).astype(dtype))
        counts = reduce(counts)
        C, G, D = reduce(C1), G1, D1
    return counts


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------

def enumerate_imperfect(N: int, p: int | None, backend: str | None = None) -> Series:
    """Imperfect staircase counts ``p_0 .. p_N``, modulo ``p`` (``None``: exact).

    Exact mode always uses the dense numpy path and is meant for small N.
    """
    if N < 4:
        raise ValueError("N must be >= 4")
    if p is None:
        counts = _imperfect_dense(N, None)
        return Series([int(v) for v in counts], kind="p")
    p = check_prime(p)
    if p >= 1 << 62:
        raise ValueError("modulus must be below 2**62")
    if resolve_backend(backend) == "numba":
        counts, peak = _imperfect_packed(N, p)
        log.debug("N=%d p=%d peak four-walk coefficients %d", N, p, peak)
    else:
        counts = _imperfect_dense(N, p)
    return Series([int(v) for v in counts], modulus=p, kind="p")


def imperfect_peak_states(N: int) -> int:
    """Largest packed four-walk table (coefficients) over the sweep."""
    L = N // 2 + 1
    off = np.full((L + 1, N + 1, L + 1), -1, np.int64)
    ln = np.zeros_like(off)
    return max(_layout(k, N, L, off, ln) for k in range(N))


def lift_limit(primes) -> int:
    """Largest n for which 4^n (a bound on p_n) fits the balanced CRT range."""
    cap = crt_capacity(primes)
    n = 0
    while 2 * 4 ** (n + 1) < cap:
        n += 1
    return n


def lift_imperfect(runs: list[Series], stop: int | None = None) -> Series:
    """CRT-lift per-prime residue series to exact counts ``p_0 .. p_(stop-1)``."""
    primes = [r.modulus for r in runs]
    values = crt_combine_arrays([r.coeffs[:stop] for r in runs], primes)
    if any(v < 0 for v in values):
        raise ArithmeticError("negative lifted count: CRT range too small for these terms")
    log.debug("CRT capacity %d bits", crt_capacity(primes).bit_length())
    return Series(values, kind="p")


def assemble_t(c: Series, p: Series) -> Series:
    """``t_n = 2 n c_n + 2 p_n`` over the common index range 0..N."""
    if c.stop != p.stop:
        raise ValueError(f"length mismatch: c ends at {c.stop - 1}, p at {p.stop - 1}")
    N = c.stop - 1
    t = [2 * n * int(c.get(n)) + 2 * int(p.get(n)) for n in range(N + 1)]
    return Series(t, kind="t")


# --------------------------------------------------------------------------
# brute-force oracle
# --------------------------------------------------------------------------

BRUTE_FORCE_LIMIT = 12

# step directions E, N, W, S; after a horizontal step no right-hand turn
_DX = np.array([1, 0, -1, 0], np.int64)
_DY = np.array([0, 1, 0, -1], np.int64)
_ALLOWED = np.array([
    [0, 1, -1],   # after E: E, N
    [1, 0, 2],    # after N: N, E, W
    [2, 3, -1],   # after W: W, S
    [3, 0, 2],    # after S: S, E, W
], np.int64)


@njit(cache=True)
def _walk_dfs(nmax, dx, dy, allowed):
    steps = 2 * nmax
    R = steps + 1
    size = 2 * R + 1
    visited = np.zeros((size, size), np.bool_)
    counts = np.zeros(nmax + 1, np.int64)
    xs = np.zeros(steps + 1, np.int64)
    ys = np.zeros(steps + 1, np.int64)
    dirs = np.zeros(steps + 1, np.int64)
    choice = np.zeros(steps + 1, np.int64)
    visited[R, R] = True
    for first in range(4):
        xs[1] = dx[first]
        ys[1] = dy[first]
        dirs[1] = first
        visited[R + xs[1], R + ys[1]] = True
        depth = 1
        choice[1] = 0
        while depth >= 1:
            if choice[depth] >= 3:
                visited[R + xs[depth], R + ys[depth]] = False
                depth -= 1
                if depth >= 1:
                    choice[depth] += 1
                continue
            d = allowed[dirs[depth], choice[depth]]
            if d < 0:
                choice[depth] = 3
                continue
            x = xs[depth] + dx[d]
            y = ys[depth] + dy[d]
            s = depth + 1
            if x == 0 and y == 0:
                if s % 2 == 0:
                    counts[s // 2] += 1
                choice[depth] += 1
                continue
            if abs(x) + abs(y) > steps - s or visited[R + x, R + y]:
                choice[depth] += 1
                continue
            depth = s
            xs[depth] = x
            ys[depth] = y
            dirs[depth] = d
            choice[depth] = 0
            visited[R + x, R + y] = True
    return counts


def brute_force_t(n_max: int) -> Series:
    """Count rooted three-choice polygon walks of length 2n, n <= n_max, by DFS."""
    if n_max > BRUTE_FORCE_LIMIT:
        raise ValueError(f"n_max={n_max} exceeds the exhaustive-search guard {BRUTE_FORCE_LIMIT}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    counts = _walk_dfs(n_max, _DX, _DY, _ALLOWED)
    return Series([int(v) for v in counts], kind="t")
