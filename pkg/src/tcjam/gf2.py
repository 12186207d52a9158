"""Dense GF(2) linear algebra on uint8 arrays.

Bit vectors are 1-D ``uint8`` arrays of 0/1, matrices are 2-D ``uint8``
arrays (row-major).  Nothing here packs bits; the decoders that need word
parallelism do their own packing.
"""

import numpy as np
from numba import njit


class RankError(ValueError):
    """Raised when a generator matrix is not of full row rank."""


def as_bits(x) -> np.ndarray:
    a = np.asarray(x)
    if a.size == 0:
        raise ValueError("empty bit array")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("bit arrays may only contain 0 and 1")
    return a.astype(np.uint8)


def encode_linear(G, msg) -> np.ndarray:
    """Return ``msg @ G`` over GF(2).

    ``msg`` may be a single message of length ``k`` or a ``(frames, k)`` batch.
    """
    G = as_bits(G)
    msg = as_bits(msg)
    if G.ndim != 2:
        raise ValueError("G must be a matrix")
    if msg.shape[-1] != G.shape[0]:
        raise ValueError(f"message length {msg.shape[-1]} does not match G with {G.shape[0]} rows")
    # int32 accumulation is exact for any k < 2**31
    return ((msg.astype(np.int32) @ G.astype(np.int32)) & 1).astype(np.uint8)


def syndrome(H, word) -> np.ndarray:
    H = as_bits(H)
    word = as_bits(word)
    return ((word.astype(np.int32) @ H.T.astype(np.int32)) & 1).astype(np.uint8)


def rref(A):
    """Reduced row echelon form. Returns ``(R, pivot_cols)``; zero rows are kept at the bottom."""
    R = as_bits(A).copy()
    m, n = R.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        hit = np.nonzero(R[:, c])[0]
        hit = hit[hit != r]
        R[hit] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A) -> int:
    return len(rref(A)[1])


def null_space(H) -> np.ndarray:
    """Basis of ``{x : H x^T = 0}`` as rows."""
    R, pivots = rref(H)
    n = R.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = R[row, f]
    return basis


@njit(cache=True)
def _systematize_kernel(A, preference, k):
    # In-place elimination on A (k x n). Returns basis columns in the order found,
    # or a short array when the rank is deficient.
    n = A.shape[1]
    basis = np.empty(k, dtype=np.int64)
    r = 0
    for idx in range(preference.shape[0]):
        if r == k:
            break
        c = preference[idx]
        p = -1
        for i in range(r, k):
            if A[i, c]:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(n):
                t = A[r, j]
                A[r, j] = A[p, j]
                A[p, j] = t
        for i in range(k):
            if i != r and A[i, c]:
                for j in range(n):
                    A[i, j] ^= A[r, j]
        basis[r] = c
        r += 1
    return basis[:r]


def systematize_preferred(G, preference=None):
    """Systematize ``G`` on the first independent columns in ``preference`` order.

    ``preference`` is a total order of column indices (callers pass positions
    already sorted by decreasing reliability, ties broken by lower index).

    Returns ``(G_sys, perm, basis_cols)`` where ``G_sys = [I_k | P]`` is the
    row-reduced generator with its columns taken in order ``perm``, and
    ``perm = basis_cols + remaining columns in preference order``.  Column
    ``j`` of ``G_sys`` is original column ``perm[j]``; ``G_sys[:, argsort(perm)]``
    spans the same code as ``G``.
    """
    A = as_bits(G).copy()
    k, n = A.shape
    if preference is None:
        preference = np.arange(n)
    preference = np.asarray(preference, dtype=np.int64)
    if preference.shape != (n,) or not np.array_equal(np.sort(preference), np.arange(n)):
        raise ValueError("preference must be a permutation of the column indices")
    basis = _systematize_kernel(A, preference, k)
    if basis.shape[0] < k:
        raise RankError(f"generator has rank {basis.shape[0]} < {k}")
    in_basis = np.zeros(n, dtype=bool)
    in_basis[basis] = True
    rest = preference[~in_basis[preference]]
    perm = np.concatenate([basis, rest])
    return A[:, perm], perm, basis


def systematic_generator_from_parity(H):
    """Generator ``G`` with ``G H^T = 0`` and an identity on a set of information columns.

    Returns ``(G, info_cols)``.  Information columns are the non-pivot columns
    of ``rref(H)``, so a message lands verbatim at ``codeword[info_cols]``.
    """
    G = null_space(H)
    R, pivots = rref(H)
    info = np.array([c for c in range(R.shape[1]) if c not in set(pivots)], dtype=np.int64)
    return G, info
