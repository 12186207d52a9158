"""Transfer-frame partitioning into CLTU blocks, the R x R row-by-column
interleaver and deterministic-length burst jamming."""

from dataclasses import dataclass
from math import ceil, isqrt
from typing import Optional, Union

import numpy as np

from .channel import ReceivedBlock, db2lin


@dataclass(frozen=True)
class CltuLayout:
    M: int
    k: int
    n: int

    def __post_init__(self):
        if self.M < 1 or self.k < 1 or self.n < self.k:
            raise ValueError("need M >= 1 and n >= k >= 1")

    @property
    def N(self) -> int:
        return ceil(self.M / self.k)

    @property
    def fill(self) -> int:
        return self.N * self.k - self.M

    @property
    def C(self) -> int:
        return self.N * self.n

    @property
    def R(self) -> int:
        return side(self.C)


def side(C: int) -> int:
    """Smallest R with R*R >= C."""
    r = isqrt(C)
    return r if r * r == C else r + 1


def partition_tf(tf, k: int) -> np.ndarray:
    """Split a transfer frame into ``ceil(M/k)`` blocks, zero-filling the last one."""
    tf = np.asarray(tf, dtype=np.uint8)
    if tf.ndim != 1 or tf.size < 1:
        raise ValueError("transfer frame must be a non-empty bit vector")
    N = ceil(tf.size / k)
    out = np.zeros(N * k, dtype=np.uint8)
    out[: tf.size] = tf
    return out.reshape(N, k)


def departition(blocks, M: int) -> np.ndarray:
    return np.asarray(blocks, dtype=np.uint8).reshape(-1)[:M]


def rowcol_permutation(C: int) -> np.ndarray:
    """Write row-wise into an R x R array, read column-wise skipping empty cells.

    Returned ``perm`` satisfies ``interleaved[j] = bits[perm[j]]``.
    """
    if C < 1:
        raise ValueError("C must be >= 1")
    R = side(C)
    grid = np.arange(R * R).reshape(R, R)
    order = grid.T.reshape(-1)
    return order[order < C]


def rowcol_interleave(bits) -> np.ndarray:
    """Interleave along the last axis."""
    a = np.asarray(bits)
    return a[..., rowcol_permutation(a.shape[-1])]


def rowcol_deinterleave(bits) -> np.ndarray:
    a = np.asarray(bits)
    perm = rowcol_permutation(a.shape[-1])
    out = np.empty_like(a)
    out[..., perm] = a
    return out


@dataclass(frozen=True)
class BurstSpec:
    length: int
    ebj0p_db: float
    placement: Union[str, int] = "random"  # "random" or a fixed start index

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("burst length must be >= 1")
        if self.placement != "random" and not isinstance(self.placement, int):
            raise ValueError("placement must be 'random' or an integer start")


def ebj0p_from_sir(sir_db: float, K: float) -> float:
    """Eb/J0P in dB from the in-pulse S/J_P and the processing gain."""
    return sir_db + 10.0 * np.log10(K)


def burst_variance(spec: BurstSpec, rate: float) -> float:
    return 1.0 / (2.0 * rate * db2lin(spec.ebj0p_db))


def apply_burst(symbols, spec: BurstSpec, ebn0_db: float, rate: float, rng: np.random.Generator,
                start: Optional[np.ndarray] = None) -> ReceivedBlock:
    """Thermal noise on every symbol plus one burst of ``spec.length`` consecutive
    symbols per row (post-interleaver order)."""
    x = np.atleast_2d(np.asarray(symbols, dtype=np.float64))
    frames, C = x.shape
    B = spec.length
    if B > C:
        raise ValueError(f"burst length {B} exceeds CLTU length {C}")
    if start is None:
        if spec.placement == "random":
            start = rng.integers(0, C - B + 1, size=frames)
        else:
            if not 0 <= spec.placement <= C - B:
                raise ValueError("fixed burst start out of range")
            start = np.full(frames, spec.placement)
    s_n = 0.0 if ebn0_db == float("inf") else 1.0 / (2.0 * rate * db2lin(ebn0_db))
    s_b = burst_variance(spec, rate)
    thermal = rng.standard_normal(x.shape)
    burst = rng.standard_normal((frames, B))
    cols = start[:, None] + np.arange(B)[None, :]
    rows = np.arange(frames)[:, None]
    mask = np.zeros(x.shape, dtype=bool)
    mask[rows, cols] = True
    y = x + np.sqrt(s_n) * thermal
    y[rows, cols] += np.sqrt(s_b) * burst
    return ReceivedBlock(y, mask, s_n, s_n + s_b, B / C)


def codeword_hits(C: int, n: int, start: int, length: int, interleaved: bool = True) -> np.ndarray:
    """Number of burst-hit symbols in each codeword after deinterleaving."""
    mask = np.zeros(C, dtype=bool)
    mask[start:start + length] = True
    if interleaved:
        mask = rowcol_deinterleave(mask)
    return mask.reshape(-1, n).sum(axis=1)
