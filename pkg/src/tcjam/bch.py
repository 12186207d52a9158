"""BCH(63,56) telecommand code with hard decoding, and the eBCH(128,64) encoder.

Polynomials are integers with bit ``i`` holding the coefficient of ``x**i``.
Codewords are transmitted highest degree first, so the message occupies the
leading positions of every codeword.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from math import comb

import numpy as np

from .gf2 import as_bits, encode_linear

# CCSDS TC generator x^7 + x^6 + x^2 + 1
BCH63_GENERATOR = (1 << 7) | (1 << 6) | (1 << 2) | 1
# primitive polynomial for GF(2^7) used by the eBCH construction, x^7 + x^3 + 1
GF128_PRIMITIVE = (1 << 7) | (1 << 3) | 1


class Status(str, Enum):
    CLEAN = "clean"
    CORRECTED = "corrected"
    DETECTED = "detected-uncorrectable"


class Mode(str, Enum):
    SEC = "SEC"
    TED = "TED"


def poly_degree(p: int) -> int:
    return p.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a: int, m: int):
    q = 0
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        shift = poly_degree(a) - dm
        q |= 1 << shift
        a ^= m << shift
    return q, a


def _systematic_cyclic_generator(g: int, n: int, k: int) -> np.ndarray:
    """Rows are codewords of unit messages, message bits first (highest degree first)."""
    r = n - k
    G = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        deg = k - 1 - i
        rem = poly_mod(1 << (deg + r), g)
        G[i, i] = 1
        for j in range(r):
            G[i, k + j] = (rem >> (r - 1 - j)) & 1
    return G


@dataclass(frozen=True)
class Bch63Spec:
    n: int = 63
    k: int = 56
    generator: int = BCH63_GENERATOR
    G: np.ndarray = field(init=False, repr=False, compare=False)
    H: np.ndarray = field(init=False, repr=False, compare=False)
    _syndrome_pos: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        G = _systematic_cyclic_generator(self.generator, self.n, self.k)
        r = self.n - self.k
        # column j of H is x^(n-1-j) mod g(x)
        H = np.zeros((r, self.n), dtype=np.uint8)
        for j in range(self.n):
            rem = poly_mod(1 << (self.n - 1 - j), self.generator)
            for i in range(r):
                H[i, j] = (rem >> (r - 1 - i)) & 1
        weights = 1 << np.arange(r - 1, -1, -1)
        col_ids = weights @ H.astype(np.int64)
        lut = np.full(1 << r, -1, dtype=np.int64)
        lut[col_ids] = np.arange(self.n)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "_syndrome_pos", lut)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def syndrome_ids(self, words: np.ndarray) -> np.ndarray:
        r = self.n - self.k
        s = (words.astype(np.int32) @ self.H.T.astype(np.int32)) & 1
        return s @ (1 << np.arange(r - 1, -1, -1))


BCH63 = Bch63Spec()


def bch63_encode(msg, spec: Bch63Spec = BCH63) -> np.ndarray:
    msg = as_bits(msg)
    if msg.shape[-1] != spec.k:
        raise ValueError(f"BCH(63,56) message must have {spec.k} bits, got {msg.shape[-1]}")
    return encode_linear(spec.G, msg)


def bch63_decode_hard_batch(words: np.ndarray, mode: Mode = Mode.SEC, spec: Bch63Spec = BCH63):
    """Vectorized hard decoder.

    Returns ``(msgs, status_codes)`` with codes 0 = clean, 1 = corrected,
    2 = detected-uncorrectable.
    """
    words = np.atleast_2d(as_bits(words))
    if words.shape[1] != spec.n:
        raise ValueError(f"BCH(63,56) word must have {spec.n} bits, got {words.shape[1]}")
    sid = spec.syndrome_ids(words)
    status = np.where(sid == 0, 0, 2).astype(np.int8)
    out = words.copy()
    if Mode(mode) is Mode.SEC:
        pos = spec._syndrome_pos[sid]
        fix = (sid != 0) & (pos >= 0)
        rows = np.nonzero(fix)[0]
        out[rows, pos[rows]] ^= 1
        status[fix] = 1
    return out[:, : spec.k], status


_STATUS_BY_CODE = (Status.CLEAN, Status.CORRECTED, Status.DETECTED)


def bch63_decode_hard(word, mode: Mode = Mode.SEC, spec: Bch63Spec = BCH63):
    msgs, codes = bch63_decode_hard_batch(np.asarray(word)[None, :], mode, spec)
    return msgs[0], _STATUS_BY_CODE[codes[0]]


def _binom_pmf(n: int, p: float) -> np.ndarray:
    j = np.arange(n + 1)
    return np.array([comb(n, int(i)) for i in j], dtype=float) * p ** j * (1.0 - p) ** (n - j)


def _sec_failure(p: float, n: int = 63) -> float:
    """P(at least two of n independent bits are wrong), summed term by term."""
    return float(_binom_pmf(n, p)[2:].sum())


def bch63_hard_cer_analytic(p_clean: float, p_jam: float, rho: float, interleaved: bool, n: int = 63) -> float:
    """Codeword error rate of the SEC decoder under pulsed jamming.

    ``p_clean``/``p_jam`` are the hard-decision bit error probabilities of clean
    and jammed symbols.  Without interleaving a pulse covers whole codewords
    with probability ``rho``; with an ideal interleaver each symbol is jammed
    independently with probability ``rho``.
    """
    for name, p in (("p_clean", p_clean), ("p_jam", p_jam)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if not interleaved:
        return rho * _sec_failure(p_jam, n) + (1.0 - rho) * _sec_failure(p_clean, n)
    # number of jammed symbols J ~ Bin(n, rho); errors = Bin(J, p_jam) + Bin(n-J, p_clean)
    pj = _binom_pmf(n, rho)
    fail = 0.0
    for J in range(n + 1):
        total = np.convolve(_binom_pmf(J, p_jam), _binom_pmf(n - J, p_clean))
        fail += pj[J] * total[2:].sum()
    return float(min(fail, 1.0))


# -- eBCH(128, 64) ------------------------------------------------------------


def _gf_tables(prim: int, m: int):
    size = (1 << m) - 1
    exp = np.zeros(2 * size, dtype=np.int64)
    log = np.full(size + 1, -1, dtype=np.int64)
    x = 1
    for i in range(size):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x >> m:
            x ^= prim
    exp[size:] = exp[:size]
    if len(set(exp[:size].tolist())) != size:
        raise ValueError("polynomial is not primitive")
    return exp, log


def _cyclotomic_coset(i: int, n: int):
    coset, j = [], i % n
    while j not in coset:
        coset.append(j)
        j = (2 * j) % n
    return coset


def minimal_polynomial(i: int, prim: int = GF128_PRIMITIVE, m: int = 7) -> int:
    """Minimal polynomial of alpha**i over GF(2), as an integer bitmask."""
    exp, log = _gf_tables(prim, m)
    size = (1 << m) - 1
    # coefficient list in GF(2^m), lowest degree first
    poly = [1]
    for j in _cyclotomic_coset(i, size):
        root = int(exp[j])
        new = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            new[d + 1] ^= c
            if c and root:
                new[d] ^= int(exp[(log[c] + log[root]) % size])
        poly = new
    if any(c not in (0, 1) for c in poly):
        raise AssertionError("minimal polynomial has non-binary coefficients")
    return sum(c << d for d, c in enumerate(poly))


@lru_cache(maxsize=None)
def bch_generator(n: int, k: int, prim: int = GF128_PRIMITIVE, m: int = 7) -> int:
    """Narrow-sense BCH generator: product of the distinct minimal polynomials of
    alpha^1, alpha^2, ... until the degree reaches ``n - k``."""
    g, used, i = 1, set(), 1
    while poly_degree(g) < n - k:
        leader = min(_cyclotomic_coset(i, n))
        if leader not in used:
            used.add(leader)
            g = poly_mul(g, minimal_polynomial(i, prim, m))
        i += 1
    if poly_degree(g) != n - k:
        raise ValueError(f"no narrow-sense BCH code with n={n}, k={k}")
    return g


@dataclass(frozen=True)
class Ebch128Spec:
    n: int = 128
    k: int = 64
    primitive: int = GF128_PRIMITIVE
    generator: int = field(init=False)
    G: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = bch_generator(self.n - 1, self.k, self.primitive, 7)
        Gb = _systematic_cyclic_generator(g, self.n - 1, self.k)
        par = Gb.sum(axis=1, dtype=np.int64) & 1
        G = np.concatenate([Gb, par[:, None].astype(np.uint8)], axis=1)
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "G", G)

    @property
    def rate(self) -> float:
        return self.k / self.n


EBCH128 = Ebch128Spec()


def ebch128_encode(msg, spec: Ebch128Spec = EBCH128) -> np.ndarray:
    msg = as_bits(msg)
    if msg.shape[-1] != spec.k:
        raise ValueError(f"eBCH(128,64) message must have {spec.k} bits, got {msg.shape[-1]}")
    return encode_linear(spec.G, msg)
