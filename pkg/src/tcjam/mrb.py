"""Most-reliable-basis (ordered statistics) soft decoding of binary linear codes.

The decoder ranks positions by ``|llr|``, systematizes the generator on the
most reliable independent positions, re-encodes the hard decisions there and
reprocesses every test error pattern of weight up to the configured order.
Candidates are compared by the correlation ``sum(llr * (1 - 2 c))``, which is
evaluated as ``sum(|llr|) - 2 * cost`` with ``cost`` the total reliability of
the positions where the candidate disagrees with the hard decisions.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .gf2 import RankError, as_bits, rank, systematize_preferred

_NO_BUDGET = np.int64(-1)


@dataclass(frozen=True)
class MrbConfig:
    """``pattern_budget`` caps the number of tested patterns, the weight-0 one
    included, in the order: increasing weight, least reliable positions first.
    Cost-based pruning is only used when no budget is set."""

    order: int = 4
    pattern_budget: Optional[int] = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("MRB order must be >= 0")
        if self.pattern_budget is not None and self.pattern_budget < 1:
            raise ValueError("pattern_budget must be >= 1 when given")


def _pack_rows(M: np.ndarray) -> np.ndarray:
    rows, cols = M.shape
    nw = (cols + 63) // 64
    out = np.zeros((rows, nw), dtype=np.uint64)
    for j in range(cols):
        out[:, j >> 6] |= M[:, j].astype(np.uint64) << np.uint64(j & 63)
    return out


@njit(cache=True)
def _bit(words, j):
    return (words[j >> 6] >> np.uint64(j & 63)) & np.uint64(1)


@njit(cache=True)
def _mrb_frame(llr, Gp, k, n, order, budget, out_cw):
    rel = np.abs(llr)
    pref = np.argsort(-rel, kind="mergesort")
    nwn = Gp.shape[1]
    A = Gp.copy()

    # systematize on the most reliable independent columns
    basis = np.empty(k, dtype=np.int64)
    is_basis = np.zeros(n, dtype=np.bool_)
    r = 0
    for t in range(n):
        if r == k:
            break
        c = pref[t]
        w = c >> 6
        b = np.uint64(c & 63)
        p = -1
        for i in range(r, k):
            if (A[i, w] >> b) & np.uint64(1):
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(nwn):
                tmp = A[r, j]
                A[r, j] = A[p, j]
                A[p, j] = tmp
        for i in range(k):
            if i != r and (A[i, w] >> b) & np.uint64(1):
                for j in range(nwn):
                    A[i, j] ^= A[r, j]
        basis[r] = c
        is_basis[c] = True
        r += 1
    if r < k:
        return np.nan

    # parity positions, their reliabilities and the parity part of each basis row
    m = n - k
    par = np.empty(m, dtype=np.int64)
    q = 0
    for j in range(n):
        if not is_basis[j]:
            par[q] = j
            q += 1
    nwp = (m + 63) // 64
    P = np.zeros((k, nwp), dtype=np.uint64)
    for i in range(k):
        for t in range(m):
            if _bit(A[i], par[t]):
                P[i, t >> 6] |= np.uint64(1) << np.uint64(t & 63)

    hard = np.zeros(n, dtype=np.uint8)
    for j in range(n):
        if llr[j] < 0.0:
            hard[j] = 1

    # discrepancy of the order-0 candidate on the parity positions
    d0 = np.zeros(nwp, dtype=np.uint64)
    for i in range(k):
        if hard[basis[i]]:
            for j in range(nwp):
                d0[j] ^= P[i, j]
    for t in range(m):
        if hard[par[t]]:
            d0[t >> 6] ^= np.uint64(1) << np.uint64(t & 63)

    # byte lookup tables: weighted popcount of each parity byte
    T = np.zeros((nwp * 8, 256))
    for t in range(m):
        byte = t >> 3
        bit = t & 7
        wgt = rel[par[t]]
        step = 1 << bit
        for v in range(256):
            if v & step:
                T[byte, v] += wgt

    # basis rows by ascending reliability; flipping cheap positions first
    brel = np.empty(k)
    for i in range(k):
        brel[i] = rel[basis[i]]
    rows = np.argsort(brel, kind="mergesort")
    cost = brel[rows]
    prefix = np.zeros(k + 1)
    for i in range(k):
        prefix[i + 1] = prefix[i] + cost[i]

    best = 0.0
    for j in range(nwp):
        x = d0[j]
        for b8 in range(8):
            best += T[j * 8 + b8, (x >> np.uint64(8 * b8)) & np.uint64(255)]
    best_w = 0
    best_idx = np.zeros(max(order, 1), dtype=np.int64)

    prune = budget < 0
    evaluated = 1  # the order-0 candidate counts as the first tested pattern
    idx = np.zeros(max(order, 1), dtype=np.int64)
    pc = np.zeros(max(order, 1))
    px = np.zeros((max(order, 1), nwp), dtype=np.uint64)
    done = budget >= 0 and evaluated >= budget
    for wt in range(1, min(order, k) + 1):
        if done:
            break
        depth = 0
        idx[0] = -1
        while depth >= 0:
            idx[depth] += 1
            i = idx[depth]
            remaining = wt - depth - 1
            if i > k - 1 - remaining:
                depth -= 1
                continue
            partial = cost[i]
            if depth > 0:
                partial += pc[depth - 1]
            if prune and partial + prefix[i + 1 + remaining] - prefix[i + 1] >= best:
                depth -= 1
                continue
            row = rows[i]
            for j in range(nwp):
                if depth > 0:
                    px[depth, j] = px[depth - 1, j] ^ P[row, j]
                else:
                    px[depth, j] = P[row, j]
            pc[depth] = partial
            if remaining > 0:
                depth += 1
                idx[depth] = i
                continue
            evaluated += 1
            total = partial
            for j in range(nwp):
                x = d0[j] ^ px[depth, j]
                for b8 in range(8):
                    total += T[j * 8 + b8, (x >> np.uint64(8 * b8)) & np.uint64(255)]
                if prune and total >= best:
                    break
            if total < best:
                best = total
                best_w = wt
                for t in range(wt):
                    best_idx[t] = idx[t]
            if budget >= 0 and evaluated >= budget:
                done = True
                break

    # rebuild the winning codeword from the reduced generator
    msg_b = hard[basis].copy()
    for t in range(best_w):
        msg_b[rows[best_idx[t]]] ^= 1
    acc = np.zeros(nwn, dtype=np.uint64)
    for i in range(k):
        if msg_b[i]:
            for j in range(nwn):
                acc[j] ^= A[i, j]
    for j in range(n):
        out_cw[j] = _bit(acc, j)
    return rel.sum() - 2.0 * best


@njit(cache=True)
def _mrb_batch(llrs, Gp, k, n, order, budget):
    frames = llrs.shape[0]
    cws = np.zeros((frames, n), dtype=np.uint8)
    metrics = np.empty(frames)
    for f in range(frames):
        metrics[f] = _mrb_frame(llrs[f], Gp, k, n, order, budget, cws[f])
    return cws, metrics


class MrbDecoder:
    """Order-``i`` MRB decoder bound to one generator matrix."""

    def __init__(self, G, config: MrbConfig = MrbConfig()):
        G = as_bits(G)
        k, n = G.shape
        if rank(G) != k:
            raise RankError(f"generator matrix has rank < {k}")
        self.G = G
        self.k, self.n = k, n
        self.config = config
        self._Gp = _pack_rows(G)
        # information set and inverse for mapping codewords back to messages
        Gs, perm, basis = systematize_preferred(G)
        self._info = np.sort(basis)
        sub = G[:, self._info]
        self._inv = _gf2_inverse(sub)

    def codeword_to_message(self, cw: np.ndarray) -> np.ndarray:
        cw = np.atleast_2d(cw)
        return ((cw[:, self._info].astype(np.int32) @ self._inv.astype(np.int32)) & 1).astype(np.uint8)

    def decode_batch(self, llrs: np.ndarray, order: Optional[int] = None):
        llrs = np.ascontiguousarray(np.atleast_2d(llrs), dtype=np.float64)
        if llrs.shape[1] != self.n:
            raise ValueError(f"expected {self.n} llrs per frame, got {llrs.shape[1]}")
        if not np.all(np.isfinite(llrs)):
            raise ValueError("llrs must be finite")
        order = self.config.order if order is None else order
        budget = _NO_BUDGET if self.config.pattern_budget is None else np.int64(self.config.pattern_budget)
        cws, metrics = _mrb_batch(llrs, self._Gp, self.k, self.n, int(order), budget)
        return cws, self.codeword_to_message(cws), metrics

    def decode(self, llr, order: Optional[int] = None):
        cws, msgs, metrics = self.decode_batch(np.asarray(llr, dtype=float)[None, :], order)
        return cws[0], msgs[0], float(metrics[0])


def _gf2_inverse(M: np.ndarray) -> np.ndarray:
    k = M.shape[0]
    aug = np.concatenate([M.copy(), np.eye(k, dtype=np.uint8)], axis=1)
    for c in range(k):
        p = c + np.nonzero(aug[c:, c])[0][0]
        if p != c:
            aug[[c, p]] = aug[[p, c]]
        hit = np.nonzero(aug[:, c])[0]
        hit = hit[hit != c]
        aug[hit] ^= aug[c]
    # M @ X = I, and codeword[info] = msg @ M, so msg = codeword[info] @ X
    return aug[:, k:]


def mrb_decode(llr, G, config: MrbConfig = MrbConfig()):
    """Decode one frame. Returns ``(codeword, message, metric)``."""
    return MrbDecoder(G, config).decode(llr)
