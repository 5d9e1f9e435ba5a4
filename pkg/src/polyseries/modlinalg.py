"""Dense Gaussian elimination over Z/pZ for word-size primes (p < 2^31).

Entries are int64 residues; products stay below 2^62 so no wide arithmetic
is needed.  The numba kernel and the numpy fallback produce identical output.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit, resolve_backend
from .exactarith import ModularError, check_prime

MAX_PRIME = 1 << 31


@njit(cache=True)
def _rref_kernel(A, p):
    rows, cols = A.shape
    pivots = np.full(cols, -1, dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if A[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                tmp = A[r, j]
                A[r, j] = A[piv, j]
                A[piv, j] = tmp
        # inverse by Fermat
        inv = 1
        base = A[r, c]
        e = p - 2
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for j in range(c, cols):
            A[r, j] = (A[r, j] * inv) % p
        for i in range(rows):
            if i != r:
                f = A[i, c]
                if f != 0:
                    for j in range(c, cols):
                        A[i, j] = (A[i, j] - f * A[r, j]) % p
        pivots[c] = r
        r += 1
    return r, pivots


def _rref_numpy(A, p):
    rows, cols = A.shape
    pivots = np.full(cols, -1, dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r, c:] = (A[r, c:] * inv) % p
        f = A[:, c].copy()
        f[r] = 0
        mask = f != 0
        if mask.any():
            A[mask, c:] = (A[mask, c:] - np.outer(f[mask], A[r, c:]) % p) % p
        pivots[c] = r
        r += 1
    return r, pivots


def rref_mod(A, p: int, backend: str | None = None):
    """Reduced row echelon form of ``A`` mod ``p``.

    Returns ``(R, rank, pivots)`` where ``pivots[c]`` is the row holding the
    pivot of column ``c`` or -1 for a free column.
    """
    p = check_prime(p)
    if p >= MAX_PRIME:
        raise ModularError("elimination needs p < 2^31")
    R = np.array(A, dtype=np.int64) % p
    if R.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    if resolve_backend(backend) == "numba" and USE_NUMBA:
        rank, piv = _rref_kernel(R, p)
    else:
        rank, piv = _rref_numpy(R, p)
    return R, int(rank), piv


def nullspace_mod(A, p: int, backend: str | None = None) -> np.ndarray:
    """Basis of the right nullspace, one vector per free column (rows of the result)."""
    R, rank, piv = rref_mod(A, p, backend)
    cols = R.shape[1]
    free = [c for c in range(cols) if piv[c] < 0]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for b, f in enumerate(free):
        basis[b, f] = 1
        for c in range(cols):
            if piv[c] >= 0:
                basis[b, c] = (-R[piv[c], f]) % p
    return basis


def canonical_null_vector(A, p: int, backend: str | None = None):
    """First row of the reduced echelon form of the right nullspace of ``A``.

    That vector is unique given the column order: its first non-zero entry
    (the *pivot*) sits in the earliest column any null vector can reach, is
    equal to 1, and the vector vanishes on the other basis pivots.  Returns
    ``(v, pivot, nullity)`` or ``(None, -1, 0)`` for a trivial nullspace.
    """
    basis = nullspace_mod(A, p, backend)
    if basis.shape[0] == 0:
        return None, -1, 0
    R, _, piv = rref_mod(basis, p, backend)
    first = int(np.nonzero(R[0])[0][0])
    return R[0].copy(), first, basis.shape[0]
