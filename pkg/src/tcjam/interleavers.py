"""Turbo-code interleaver families and the plain-text permutation file format.

A permutation ``pi`` of length ``k`` is applied as ``x_interleaved[i] = x[pi[i]]``.
"""

from dataclasses import dataclass, field
from math import gcd, isqrt
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class InterleaverError(ValueError):
    pass


def check_bijection(perm, k: Optional[int] = None) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    k = perm.size if k is None else k
    if perm.shape != (k,):
        raise InterleaverError(f"permutation must have length {k}")
    seen = np.zeros(k, dtype=bool)
    if perm.min(initial=0) < 0 or perm.max(initial=0) >= k:
        raise InterleaverError("permutation entries out of range")
    seen[perm] = True
    if not seen.all():
        raise InterleaverError("permutation is not a bijection")
    return perm


def inverse(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def qpp_permutation(k: int, f1: int, f2: int) -> np.ndarray:
    """pi(j) = (f1*j + f2*j^2) mod k; rejects parameters that do not give a bijection."""
    if k < 1:
        raise InterleaverError("k must be positive")
    if gcd(f1, k) != 1:
        raise InterleaverError(f"QPP needs gcd(f1, k) = 1, got f1={f1}, k={k}")
    j = np.arange(k, dtype=np.int64)
    perm = (f1 * j + f2 * j * j) % k
    try:
        return check_bijection(perm, k)
    except InterleaverError:
        raise InterleaverError(f"QPP parameters f1={f1}, f2={f2} are not a permutation polynomial mod {k}") from None


def _local_map(k: int, dither: Sequence[int], what: str) -> np.ndarray:
    d = np.asarray(dither, dtype=np.int64)
    size = d.size
    if size == 0 or k % size:
        raise InterleaverError(f"{what} dither length {size} must divide k={k}")
    check_bijection(d, size)
    i = np.arange(k, dtype=np.int64)
    return size * (i // size) + d[i % size]


def drp_permutation(k: int, read_dither, write_dither, increment: int, offset: int = 0) -> np.ndarray:
    """Dithered relative prime interleaver.

    ``pi = write ∘ relative_prime ∘ read``: the read dither permutes inside
    blocks of ``len(read_dither)``, the relative-prime step maps
    ``i -> (offset + increment*i) mod k`` and the write dither permutes inside
    blocks of ``len(write_dither)``.
    """
    if gcd(increment, k) != 1:
        raise InterleaverError(f"DRP increment {increment} is not relatively prime to k={k}")
    read = _local_map(k, read_dither, "read")
    write = _local_map(k, write_dither, "write")
    i = np.arange(k, dtype=np.int64)
    rp = (offset + increment * i) % k
    return check_bijection(read[rp[write]], k)


def random_permutation(k: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).permutation(k).astype(np.int64)


def spread_permutation(k: int, S: Optional[int] = None, seed: int = 0, max_tries: int = 1000) -> np.ndarray:
    """S-random interleaver by rejection: any two inputs within distance S land
    more than S apart.  Default ``S = floor(sqrt(k/2))``."""
    S = isqrt(k // 2) if S is None else S
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        pool = list(rng.permutation(k))
        out = []
        stuck = False
        while pool:
            for idx, cand in enumerate(pool):
                if all(abs(int(cand) - int(prev)) > S for prev in out[-S:]):
                    out.append(int(cand))
                    pool.pop(idx)
                    break
            else:
                stuck = True
                break
        if not stuck:
            return check_bijection(out, k)
    raise InterleaverError(f"no S-random interleaver found for k={k}, S={S} within {max_tries} tries")


def spread_statistic(perm) -> int:
    """min over i != j of |i - j| + |pi(i) - pi(j)|."""
    perm = np.asarray(perm, dtype=np.int64)
    i = np.arange(perm.size)
    d = np.abs(i[:, None] - i[None, :]) + np.abs(perm[:, None] - perm[None, :])
    np.fill_diagonal(d, np.iinfo(np.int64).max)
    return int(d.min())


def write_permutation_file(path, perm) -> None:
    perm = check_bijection(perm)
    Path(path).write_text(f"{perm.size}\n" + " ".join(str(int(p)) for p in perm) + "\n")


def read_permutation_file(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if not tokens:
        raise InterleaverError("empty permutation file")
    k = int(tokens[0])
    if len(tokens) - 1 != k:
        raise InterleaverError(f"permutation file declares k={k} but lists {len(tokens) - 1} indices")
    return check_bijection([int(t) for t in tokens[1:]], k)


@dataclass(frozen=True)
class InterleaverDef:
    """Interleaver description plus its materialized permutation."""

    kind: str
    k: int
    params: dict = field(default_factory=dict)
    permutation: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.params
        if self.kind == "qpp":
            perm = qpp_permutation(self.k, p["f1"], p["f2"])
        elif self.kind == "drp":
            perm = drp_permutation(self.k, p["read_dither"], p["write_dither"], p["increment"], p.get("offset", 0))
        elif self.kind == "random":
            perm = random_permutation(self.k, p.get("seed", 0))
        elif self.kind == "spread":
            perm = spread_permutation(self.k, p.get("S"), p.get("seed", 0), p.get("max_tries", 1000))
        elif self.kind == "explicit":
            perm = p["permutation"] if "permutation" in p else read_permutation_file(p["file"])
            perm = check_bijection(perm, self.k)
        else:
            raise InterleaverError(f"unknown interleaver kind {self.kind!r}")
        object.__setattr__(self, "permutation", check_bijection(perm, self.k))

    @classmethod
    def from_permutation(cls, perm) -> "InterleaverDef":
        perm = check_bijection(perm)
        return cls("explicit", int(perm.size), {"permutation": perm.tolist()})

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "InterleaverDef":
        d = dict(d)
        kind = d.pop("kind")
        k = int(d.pop("k"))
        return cls(kind, k, d)
