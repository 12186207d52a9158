"""Binary LDPC codes: alist ingestion, systematic encoding and LLR sum-product decoding."""

from dataclasses import dataclass, field
from typing import List

import numpy as np
from numba import njit

from .gf2 import as_bits, rank, systematic_generator_from_parity

MSG_CLAMP = 30.0


class AlistError(ValueError):
    pass


@dataclass(frozen=True)
class ParityCheck:
    """Sparse parity-check matrix held as row and column adjacency lists (0-based)."""

    n: int
    m: int
    rows: tuple  # rows[i] -> column indices of check i
    G: np.ndarray = field(init=False, repr=False, compare=False)
    info_cols: np.ndarray = field(init=False, repr=False, compare=False)
    cols: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cols: List[list] = [[] for _ in range(self.n)]
        for i, r in enumerate(self.rows):
            if len(set(r)) != len(r):
                raise AlistError(f"duplicate edge in check {i}")
            for j in r:
                if not 0 <= j < self.n:
                    raise AlistError(f"column index {j} out of range in check {i}")
                cols[j].append(i)
        object.__setattr__(self, "cols", tuple(tuple(c) for c in cols))
        G, info = systematic_generator_from_parity(self.dense())
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "info_cols", info)

    @classmethod
    def from_dense(cls, H) -> "ParityCheck":
        H = as_bits(H)
        return cls(H.shape[1], H.shape[0], tuple(tuple(int(j) for j in np.nonzero(r)[0]) for r in H))

    def dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            H[i, list(r)] = 1
        return H

    @property
    def rank(self) -> int:
        return rank(self.dense())

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    def edges(self):
        """CSR edge layout for the decoder: ``(edge_var, check_ptr, var_edges, var_ptr)``."""
        edge_var = np.array([j for r in self.rows for j in r], dtype=np.int64)
        check_ptr = np.zeros(self.m + 1, dtype=np.int64)
        check_ptr[1:] = np.cumsum([len(r) for r in self.rows])
        order = np.argsort(edge_var, kind="stable")
        var_ptr = np.zeros(self.n + 1, dtype=np.int64)
        var_ptr[1:] = np.cumsum(np.bincount(edge_var, minlength=self.n))
        return edge_var, check_ptr, order.astype(np.int64), var_ptr


def load_alist(text: str) -> ParityCheck:
    lines = [ln.split() for ln in text.strip().splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        max_c, max_r = int(lines[1][0]), int(lines[1][1])
        col_deg = [int(x) for x in lines[2]]
        row_deg = [int(x) for x in lines[3]]
    except (IndexError, ValueError) as exc:
        raise AlistError("malformed alist header") from exc
    if len(col_deg) != n or len(row_deg) != m:
        raise AlistError("degree list lengths do not match dimensions")
    if max(col_deg) > max_c or max(row_deg) > max_r:
        raise AlistError("degree exceeds declared maximum")
    if len(lines) < 4 + n + m:
        raise AlistError("alist truncated")
    col_lists, row_lists = [], []
    for j in range(n):
        idx = [int(x) for x in lines[4 + j] if int(x) != 0]
        if len(idx) != col_deg[j]:
            raise AlistError(f"column {j + 1} lists {len(idx)} entries, degree says {col_deg[j]}")
        if any(not 1 <= i <= m for i in idx):
            raise AlistError(f"row index out of range in column {j + 1}")
        col_lists.append(idx)
    for i in range(m):
        idx = [int(x) for x in lines[4 + n + i] if int(x) != 0]
        if len(idx) != row_deg[i]:
            raise AlistError(f"row {i + 1} lists {len(idx)} entries, degree says {row_deg[i]}")
        if any(not 1 <= j <= n for j in idx):
            raise AlistError(f"column index out of range in row {i + 1}")
        if len(set(idx)) != len(idx):
            raise AlistError(f"duplicate edge in row {i + 1}")
        row_lists.append(idx)
    from_cols = {(i - 1, j) for j, c in enumerate(col_lists) for i in c}
    from_rows = {(i, j - 1) for i, r in enumerate(row_lists) for j in r}
    if len(from_cols) != sum(col_deg):
        raise AlistError("duplicate edge in column lists")
    if from_cols != from_rows:
        raise AlistError("row and column adjacency lists disagree")
    return ParityCheck(n, m, tuple(tuple(j - 1 for j in r) for r in row_lists))


def write_alist(pc: ParityCheck) -> str:
    col_deg = [len(c) for c in pc.cols]
    row_deg = [len(r) for r in pc.rows]
    mc, mr = max(col_deg), max(row_deg)
    out = [f"{pc.n} {pc.m}", f"{mc} {mr}", " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for c in pc.cols:
        idx = [i + 1 for i in c] + [0] * (mc - len(c))
        out.append(" ".join(map(str, idx)))
    for r in pc.rows:
        idx = [j + 1 for j in r] + [0] * (mr - len(r))
        out.append(" ".join(map(str, idx)))
    return "\n".join(out) + "\n"


def ldpc_encode(pc: ParityCheck, msg) -> np.ndarray:
    msg = as_bits(msg)
    if msg.shape[-1] != pc.k:
        raise ValueError(f"message must have {pc.k} bits, got {msg.shape[-1]}")
    return ((msg.astype(np.int32) @ pc.G.astype(np.int32)) & 1).astype(np.uint8)


def ldpc_message(pc: ParityCheck, codewords: np.ndarray) -> np.ndarray:
    return np.atleast_2d(codewords)[:, pc.info_cols]


@njit(cache=True)
def _spa_batch(llrs, edge_var, check_ptr, var_edges, var_ptr, max_iter):
    frames, n = llrs.shape
    m = check_ptr.shape[0] - 1
    E = edge_var.shape[0]
    v2c = np.empty(E)
    c2v = np.zeros(E)
    t = np.empty(E)
    total = np.empty(n)
    hard = np.zeros((frames, n), dtype=np.uint8)
    conv = np.zeros(frames, dtype=np.bool_)
    used = np.zeros(frames, dtype=np.int64)
    for f in range(frames):
        L = llrs[f]
        for e in range(E):
            x = L[edge_var[e]]
            v2c[e] = min(max(x, -MSG_CLAMP), MSG_CLAMP)
        it = 0
        ok = False
        while it < max_iter:
            it += 1
            for c in range(m):
                a, b = check_ptr[c], check_ptr[c + 1]
                for e in range(a, b):
                    t[e] = np.tanh(0.5 * v2c[e])
                # exclusive products via prefix/suffix sweeps
                acc = 1.0
                for e in range(a, b):
                    c2v[e] = acc
                    acc *= t[e]
                acc = 1.0
                for e in range(b - 1, a - 1, -1):
                    p = c2v[e] * acc
                    acc *= t[e]
                    if p >= 1.0:
                        v = MSG_CLAMP
                    elif p <= -1.0:
                        v = -MSG_CLAMP
                    else:
                        v = 2.0 * np.arctanh(p)
                    c2v[e] = min(max(v, -MSG_CLAMP), MSG_CLAMP)
            for v in range(n):
                s = L[v]
                for q in range(var_ptr[v], var_ptr[v + 1]):
                    s += c2v[var_edges[q]]
                total[v] = s
                for q in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edges[q]
                    x = s - c2v[e]
                    v2c[e] = min(max(x, -MSG_CLAMP), MSG_CLAMP)
            ambiguous = False
            for v in range(n):
                hard[f, v] = 1 if total[v] < 0.0 else 0
                if total[v] == 0.0:
                    ambiguous = True
            ok = not ambiguous
            if ok:
                for c in range(m):
                    par = 0
                    for e in range(check_ptr[c], check_ptr[c + 1]):
                        par ^= hard[f, edge_var[e]]
                    if par:
                        ok = False
                        break
            if ok:
                break
        conv[f] = ok
        used[f] = it
    return hard, conv, used


def spa_decode_batch(pc: ParityCheck, llrs, max_iter: int = 100):
    """Flooding LLR-SPA. Returns ``(codewords, converged, iterations_used)``.

    A frame counts as converged only when every check is satisfied and no
    posterior LLR is exactly zero.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    llrs = np.ascontiguousarray(np.atleast_2d(llrs), dtype=np.float64)
    if llrs.shape[1] != pc.n:
        raise ValueError(f"expected {pc.n} llrs per frame, got {llrs.shape[1]}")
    edge_var, check_ptr, var_edges, var_ptr = pc.edges()
    return _spa_batch(llrs, edge_var, check_ptr, var_edges, var_ptr, int(max_iter))


def spa_decode(pc: ParityCheck, llr, max_iter: int = 100):
    cw, conv, used = spa_decode_batch(pc, np.asarray(llr, dtype=float)[None, :], max_iter)
    return cw[0], bool(conv[0]), int(used[0])


# -- placeholder (128, 64) quasi-cyclic code ----------------------------------------
#
# NOT the NASA/CCSDS protograph code.  4 x 8 array of 16 x 16 circulants: the
# information part holds circulant permutations with the shifts below (no
# 4-cycles), the parity part is a block dual-diagonal of identities, so the
# matrix has full rank 64.

QC_Z = 16
QC_INFO_SHIFTS = (
    (0, 0, 0, 0),
    (15, 11, 14, 3),
    (11, 5, 7, 0),
    (9, 13, 10, 2),
)


def _circulant(Z: int, shift: int) -> np.ndarray:
    return np.roll(np.eye(Z, dtype=np.uint8), shift, axis=1)


def qc_parity_check(shifts=QC_INFO_SHIFTS, Z: int = QC_Z) -> np.ndarray:
    mb = len(shifts)
    H = np.zeros((mb * Z, 2 * mb * Z), dtype=np.uint8)
    for i in range(mb):
        for j in range(mb):
            H[i * Z:(i + 1) * Z, j * Z:(j + 1) * Z] = _circulant(Z, shifts[i][j])
        H[i * Z:(i + 1) * Z, (mb + i) * Z:(mb + i + 1) * Z] = np.eye(Z, dtype=np.uint8)
        if i + 1 < mb:
            H[(i + 1) * Z:(i + 2) * Z, (mb + i) * Z:(mb + i + 1) * Z] = np.eye(Z, dtype=np.uint8)
    return H


def has_four_cycle(H) -> bool:
    H = np.asarray(H, dtype=np.int64)
    overlap = H @ H.T
    np.fill_diagonal(overlap, 0)
    return bool((overlap > 1).any())


def placeholder_ldpc() -> ParityCheck:
    return ParityCheck.from_dense(qc_parity_check())
