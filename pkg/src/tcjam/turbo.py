"""Rate-1/2 parallel turbo code built from two recursive systematic encoders.

Pre-puncture layout of the ``2(k + m)`` coded bits (``m`` = encoder memory)::

    [ u_0 .. u_{k-1} | q_0 .. q_{k-1} | tail parity enc 1 (m) | tail parity enc 2 (m) ]

where ``q_t`` is the parity of encoder 1 for even ``t`` and of encoder 2 for
odd ``t`` (encoder 2 runs on the interleaved message).  Tail input bits are a
function of the encoder state and are not transmitted.  The default puncture
pattern removes the ``2m`` tail parity bits, giving exactly ``2k`` bits.

LLRs follow ``L = log P(bit=0) / P(bit=1)``.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .gf2 import as_bits
from .interleavers import InterleaverDef, inverse

LLR_CLAMP = 100.0


def poly_from_powers(powers: Sequence[int]) -> int:
    return sum(1 << p for p in set(powers))


@dataclass(frozen=True)
class RscSpec:
    """Recursive systematic encoder ``(1, feedforward / feedback)``.

    Polynomials are bitmasks with bit ``i`` = coefficient of ``D**i``.  The
    default is the 16-state CCSDS constituent: feedback ``1 + D^3 + D^4`` and
    feedforward ``1 + D + D^3 + D^4``.
    """

    feedback: int = poly_from_powers([0, 3, 4])
    feedforward: int = poly_from_powers([0, 1, 3, 4])
    memory: int = field(init=False)
    next_state: np.ndarray = field(init=False, repr=False, compare=False)
    parity: np.ndarray = field(init=False, repr=False, compare=False)
    tail_input: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.feedback & 1:
            raise ValueError("feedback polynomial must have a constant term")
        m = max(self.feedback.bit_length(), self.feedforward.bit_length()) - 1
        if m < 1:
            raise ValueError("encoder needs memory >= 1")
        S = 1 << m
        ns = np.zeros((S, 2), dtype=np.int64)
        par = np.zeros((S, 2), dtype=np.int64)
        tail = np.zeros(S, dtype=np.int64)
        for s in range(S):
            # bit i-1 of s holds a_{t-i}
            fb = 0
            for i in range(1, m + 1):
                if (self.feedback >> i) & 1:
                    fb ^= (s >> (i - 1)) & 1
            tail[s] = fb
            for u in (0, 1):
                a = u ^ fb
                p = a & (self.feedforward & 1)
                for i in range(1, m + 1):
                    if (self.feedforward >> i) & 1:
                        p ^= (s >> (i - 1)) & 1
                ns[s, u] = ((s << 1) | a) & (S - 1)
                par[s, u] = p
        object.__setattr__(self, "memory", m)
        object.__setattr__(self, "next_state", ns)
        object.__setattr__(self, "parity", par)
        object.__setattr__(self, "tail_input", tail)

    @property
    def states(self) -> int:
        return 1 << self.memory


CCSDS_RSC = RscSpec()


def rsc_encode(bits, terminate: bool = True, spec: RscSpec = CCSDS_RSC):
    """Returns ``(systematic, parity, tail_systematic, tail_parity)``; the tail
    arrays are empty when ``terminate`` is false."""
    bits = np.asarray(bits, dtype=np.uint8)
    s = 0
    par = np.zeros(bits.size, dtype=np.uint8)
    for t, u in enumerate(bits):
        par[t] = spec.parity[s, u]
        s = spec.next_state[s, u]
    tail_u = np.zeros(spec.memory if terminate else 0, dtype=np.uint8)
    tail_p = np.zeros_like(tail_u)
    if terminate:
        for j in range(spec.memory):
            u = spec.tail_input[s]
            tail_u[j] = u
            tail_p[j] = spec.parity[s, u]
            s = spec.next_state[s, u]
        assert s == 0
    return bits.copy(), par, tail_u, tail_p


def rsc_final_state(bits, spec: RscSpec = CCSDS_RSC) -> int:
    s = 0
    for u in np.asarray(bits, dtype=np.uint8):
        s = spec.next_state[s, u]
    return int(s)


def default_puncture(k: int, memory: int) -> tuple:
    return tuple(range(2 * k, 2 * k + 2 * memory))


@dataclass(frozen=True)
class TurboSpec:
    k: int
    interleaver: InterleaverDef
    rsc: RscSpec = CCSDS_RSC
    puncture: Optional[tuple] = None

    def __post_init__(self):
        if self.interleaver.k != self.k:
            raise ValueError(f"interleaver length {self.interleaver.k} != k={self.k}")
        m = self.rsc.memory
        punc = default_puncture(self.k, m) if self.puncture is None else tuple(sorted(int(i) for i in self.puncture))
        if len(set(punc)) != 2 * m or min(punc) < 0 or max(punc) >= self.n_pre:
            raise ValueError(f"puncture pattern must remove exactly {2 * m} distinct positions of {self.n_pre}")
        object.__setattr__(self, "puncture", punc)

    @property
    def n_pre(self) -> int:
        return 2 * (self.k + self.rsc.memory)

    @property
    def n_post(self) -> int:
        return self.n_pre - len(self.puncture)

    n = n_post

    @property
    def rate(self) -> float:
        return self.k / self.n_post

    @property
    def kept(self) -> np.ndarray:
        mask = np.ones(self.n_pre, dtype=bool)
        mask[list(self.puncture)] = False
        return np.nonzero(mask)[0]

    @property
    def perm(self) -> np.ndarray:
        return self.interleaver.permutation


@njit(cache=True)
def _encode_pre(msg, perm, ns, par, tail, m, out):
    k = msg.shape[0]
    for t in range(k):
        out[t] = msg[t]
    s1 = 0
    s2 = 0
    for t in range(k):
        u1 = msg[t]
        u2 = msg[perm[t]]
        p1 = par[s1, u1]
        p2 = par[s2, u2]
        out[k + t] = p1 if t % 2 == 0 else p2
        s1 = ns[s1, u1]
        s2 = ns[s2, u2]
    for j in range(m):
        u = tail[s1]
        out[2 * k + j] = par[s1, u]
        s1 = ns[s1, u]
        u = tail[s2]
        out[2 * k + m + j] = par[s2, u]
        s2 = ns[s2, u]


@njit(cache=True)
def _encode_batch(msgs, perm, ns, par, tail, m, kept):
    frames, k = msgs.shape
    n_pre = 2 * (k + m)
    buf = np.zeros(n_pre, dtype=np.uint8)
    out = np.zeros((frames, kept.shape[0]), dtype=np.uint8)
    for f in range(frames):
        _encode_pre(msgs[f], perm, ns, par, tail, m, buf)
        for j in range(kept.shape[0]):
            out[f, j] = buf[kept[j]]
    return out


def turbo_encode_pre(msg, spec: TurboSpec) -> np.ndarray:
    msg = as_bits(msg)
    if msg.shape[-1] != spec.k:
        raise ValueError(f"message must have {spec.k} bits")
    r = spec.rsc
    msgs = np.atleast_2d(msg)
    out = _encode_batch(msgs, spec.perm, r.next_state, r.parity, r.tail_input, r.memory, np.arange(spec.n_pre))
    return out if msg.ndim == 2 else out[0]


def turbo_encode(msg, spec: TurboSpec) -> np.ndarray:
    """Encode one message or a ``(frames, k)`` batch to ``2k``-bit codewords."""
    msg = as_bits(msg)
    if msg.shape[-1] != spec.k:
        raise ValueError(f"message must have {spec.k} bits, got {msg.shape[-1]}")
    r = spec.rsc
    msgs = np.ascontiguousarray(np.atleast_2d(msg))
    out = _encode_batch(msgs, spec.perm, r.next_state, r.parity, r.tail_input, r.memory, spec.kept)
    return out if msg.ndim == 2 else out[0]


# -- decoding -------------------------------------------------------------------

NEG = -1e30

# log(1 + exp(-d)) on [0, 16) with linear interpolation; abs error < 1e-6
_CORR_STEP = 1.0 / 256.0
_CORR = np.log1p(np.exp(-np.arange(0.0, 16.0 + 2 * _CORR_STEP, _CORR_STEP)))
_CORR_MAX = 16.0


@njit(cache=True, inline="always")
def _maxstar(a, b):
    if a > b:
        d = a - b
        m = a
    else:
        d = b - a
        m = b
    if d >= _CORR_MAX:
        return m
    x = d / _CORR_STEP
    i = int(x)
    fr = x - i
    return m + _CORR[i] + fr * (_CORR[i + 1] - _CORR[i])


@njit(cache=True)
def _bcjr(Ls, La, Lp, k, m, ns, par, tail, alpha, beta, g, app):
    S = ns.shape[0]
    T = k + m
    for s in range(S):
        alpha[0, s] = NEG
        beta[T, s] = NEG
    alpha[0, 0] = 0.0
    beta[T, 0] = 0.0
    for t in range(T):
        lu = 0.5 * (Ls[t] + La[t]) if t < k else 0.0
        lp = 0.5 * Lp[t]
        g[t, 0, 0] = lu + lp
        g[t, 0, 1] = lu - lp
        g[t, 1, 0] = -lu + lp
        g[t, 1, 1] = -lu - lp
    for t in range(T):
        for s in range(S):
            alpha[t + 1, s] = NEG
        for s in range(S):
            a = alpha[t, s]
            if t < k:
                for u in range(2):
                    n2 = ns[s, u]
                    alpha[t + 1, n2] = _maxstar(alpha[t + 1, n2], a + g[t, u, par[s, u]])
            else:
                u = tail[s]
                n2 = ns[s, u]
                alpha[t + 1, n2] = _maxstar(alpha[t + 1, n2], a + g[t, u, par[s, u]])
        mx = alpha[t + 1, 0]
        for s in range(1, S):
            if alpha[t + 1, s] > mx:
                mx = alpha[t + 1, s]
        for s in range(S):
            alpha[t + 1, s] -= mx
    for t in range(T - 1, -1, -1):
        mx = NEG
        for s in range(S):
            if t < k:
                v0 = beta[t + 1, ns[s, 0]] + g[t, 0, par[s, 0]]
                v1 = beta[t + 1, ns[s, 1]] + g[t, 1, par[s, 1]]
                acc = _maxstar(v0, v1)
            else:
                u = tail[s]
                acc = beta[t + 1, ns[s, u]] + g[t, u, par[s, u]]
            beta[t, s] = acc
            if acc > mx:
                mx = acc
        for s in range(S):
            beta[t, s] -= mx
    for t in range(k):
        l0 = NEG
        l1 = NEG
        for s in range(S):
            a = alpha[t, s]
            l0 = _maxstar(l0, a + g[t, 0, par[s, 0]] + beta[t + 1, ns[s, 0]])
            l1 = _maxstar(l1, a + g[t, 1, par[s, 1]] + beta[t + 1, ns[s, 1]])
        app[t] = l0 - l1


@njit(cache=True)
def bcjr_app(Ls, La, Lp, k, m, ns, par, tail):
    """Log-MAP a-posteriori LLRs of the ``k`` information bits of one terminated
    constituent.  ``Ls``/``La`` have length ``k``, ``Lp`` length ``k + m``."""
    S = ns.shape[0]
    T = k + m
    alpha = np.empty((T + 1, S))
    beta = np.empty((T + 1, S))
    g = np.empty((T, 2, 2))
    app = np.empty(k)
    _bcjr(Ls, La, Lp, k, m, ns, par, tail, alpha, beta, g, app)
    return app


@njit(cache=True)
def _turbo_decode_batch(llr_pre, perm, k, m, ns, par, tail, iterations, early_stop):
    frames = llr_pre.shape[0]
    out = np.zeros((frames, k), dtype=np.uint8)
    used = np.zeros(frames, dtype=np.int64)
    S = ns.shape[0]
    T = k + m
    alpha = np.empty((T + 1, S))
    beta = np.empty((T + 1, S))
    g = np.empty((T, 2, 2))
    app1 = np.empty(k)
    app2 = np.empty(k)
    Ls1 = np.empty(k)
    Ls2 = np.empty(k)
    Lp1 = np.zeros(T)
    Lp2 = np.zeros(T)
    La1 = np.zeros(k)
    La2 = np.zeros(k)
    appf = np.empty(k)
    for f in range(frames):
        y = llr_pre[f]
        for t in range(k):
            Ls1[t] = y[t]
            Ls2[t] = y[perm[t]]
            Lp1[t] = y[k + t] if t % 2 == 0 else 0.0
            Lp2[t] = y[k + t] if t % 2 == 1 else 0.0
            La1[t] = 0.0
        for j in range(m):
            Lp1[k + j] = y[2 * k + j]
            Lp2[k + j] = y[2 * k + m + j]
        it = 0
        while it < iterations:
            it += 1
            _bcjr(Ls1, La1, Lp1, k, m, ns, par, tail, alpha, beta, g, app1)
            for i in range(k):
                j = perm[i]
                La2[i] = app1[j] - Ls1[j] - La1[j]
            _bcjr(Ls2, La2, Lp2, k, m, ns, par, tail, alpha, beta, g, app2)
            for i in range(k):
                La1[perm[i]] = app2[i] - Ls2[i] - La2[i]
                appf[perm[i]] = app2[i]
            if early_stop:
                agree = True
                for t in range(k):
                    if (app1[t] < 0.0) != (appf[t] < 0.0):
                        agree = False
                        break
                if agree:
                    break
        for t in range(k):
            out[f, t] = 1 if appf[t] < 0.0 else 0
        used[f] = it
    return out, used


def depuncture(llr_post: np.ndarray, spec: TurboSpec) -> np.ndarray:
    llr_post = np.atleast_2d(llr_post)
    pre = np.zeros((llr_post.shape[0], spec.n_pre))
    pre[:, spec.kept] = llr_post
    return pre


def turbo_decode_batch(llrs, spec: TurboSpec, iterations: int = 10, early_stop: bool = True):
    """Iterative log-MAP decoding. Returns ``(messages, iterations_used)``."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if llrs.shape[1] != spec.n_post:
        raise ValueError(f"expected {spec.n_post} llrs per frame, got {llrs.shape[1]}")
    pre = np.clip(depuncture(llrs, spec), -LLR_CLAMP, LLR_CLAMP)
    r = spec.rsc
    return _turbo_decode_batch(pre, spec.perm, spec.k, r.memory, r.next_state, r.parity, r.tail_input,
                               int(iterations), bool(early_stop))


def turbo_decode(llr, spec: TurboSpec, iterations: int = 10, early_stop: bool = True):
    msgs, used = turbo_decode_batch(np.asarray(llr, dtype=float)[None, :], spec, iterations, early_stop)
    return msgs[0], int(used[0])


# -- distance estimation --------------------------------------------------------


@dataclass(frozen=True)
class DistanceReport:
    d_min_upper: int
    A_min: int
    w_min: int
    search_input_weight_cap: int
    witness: tuple
    post_puncture: bool = True
    is_upper_bound: bool = True


@njit(cache=True)
def _dmin_search(k, max_w, perm, ns, par, tail, m, kept_mask):
    n_pre = 2 * (k + m)
    msg = np.zeros(k, dtype=np.uint8)
    buf = np.zeros(n_pre, dtype=np.uint8)
    best = n_pre + 1
    count = 0
    wsum = 0
    witness = np.full(max_w, -1, dtype=np.int64)
    idx = np.zeros(max_w, dtype=np.int64)
    setpos = np.full(max_w, -1, dtype=np.int64)
    for wt in range(1, max_w + 1):
        depth = 0
        idx[0] = -1
        while depth >= 0:
            if setpos[depth] >= 0:
                msg[setpos[depth]] = 0
                setpos[depth] = -1
            idx[depth] += 1
            if idx[depth] > k - (wt - depth):
                depth -= 1
                continue
            msg[idx[depth]] = 1
            setpos[depth] = idx[depth]
            if depth < wt - 1:
                depth += 1
                idx[depth] = idx[depth - 1]
                continue
            _encode_pre(msg, perm, ns, par, tail, m, buf)
            w = 0
            for j in range(n_pre):
                if kept_mask[j]:
                    w += buf[j]
            if w < best:
                best = w
                count = 1
                wsum = wt
                witness[:] = -1
                for t in range(wt):
                    witness[t] = idx[t]
            elif w == best:
                count += 1
                wsum += wt
        msg[:] = 0
    return best, count, wsum, witness


def estimate_dmin(spec: TurboSpec, max_input_weight: int = 3, post_puncture: bool = True) -> DistanceReport:
    """Minimum weight over all messages of weight <= ``max_input_weight``.

    This is an upper bound on the true minimum distance.
    """
    if not 1 <= max_input_weight <= spec.k:
        raise ValueError("max_input_weight must be in [1, k]")
    r = spec.rsc
    mask = np.ones(spec.n_pre, dtype=np.bool_)
    if post_puncture:
        mask[list(spec.puncture)] = False
    best, count, wsum, witness = _dmin_search(spec.k, max_input_weight, spec.perm, r.next_state, r.parity,
                                              r.tail_input, r.memory, mask)
    return DistanceReport(int(best), int(count), int(wsum), max_input_weight,
                          tuple(int(i) for i in witness if i >= 0), post_puncture)


def search_interleaver(kind: str, k: int, trials: int, seed: int = 0, max_input_weight: int = 3,
                       rsc: RscSpec = CCSDS_RSC, block: int = 4):
    """Random search over QPP or DRP parameters maximizing ``(d_min, -A_min, -w_min)``."""
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(trials):
        if kind == "qpp":
            f1 = int(rng.integers(1, k // 2)) * 2 + 1
            f2 = int(rng.integers(1, k // 2)) * 2
            params = {"f1": f1 % k, "f2": f2 % k}
        elif kind == "drp":
            incs = [p for p in range(1, k) if np.gcd(p, k) == 1]
            params = {
                "read_dither": rng.permutation(block).tolist(),
                "write_dither": rng.permutation(block).tolist(),
                "increment": int(rng.choice(incs)),
                "offset": int(rng.integers(0, k)),
            }
        else:
            raise ValueError("search supports 'qpp' and 'drp'")
        try:
            il = InterleaverDef(kind, k, params)
        except ValueError:
            continue
        rep = estimate_dmin(TurboSpec(k, il, rsc), max_input_weight)
        key = (rep.d_min_upper, -rep.A_min, -rep.w_min)
        if best is None or key > best[0]:
            best = (key, il, rep)
    return best[1], best[2]


# Defaults found with search_interleaver (see README); overridable via config.
DEFAULT_INTERLEAVERS = {
    64: {"kind": "drp", "k": 64, "read_dither": [5, 7, 3, 2, 1, 0, 6, 4],
         "write_dither": [4, 5, 6, 0, 7, 2, 1, 3], "increment": 21, "offset": 42},  # d<=8 A=5 w=13, weight<=4
    128: {"kind": "drp", "k": 128, "read_dither": [5, 1, 3, 6, 4, 0, 2, 7],
          "write_dither": [0, 1, 2, 4, 6, 5, 7, 3], "increment": 95, "offset": 126},  # d<=10 A=3 w=4, weight<=3
    256: {"kind": "qpp", "k": 256, "f1": 159, "f2": 160},  # d<=12 A=3 w=9, weight<=3
}


def default_turbo(k: int = 64) -> TurboSpec:
    if k not in DEFAULT_INTERLEAVERS:
        raise ValueError(f"no default interleaver for k={k}; supply one explicitly")
    return TurboSpec(k, InterleaverDef.from_dict(DEFAULT_INTERLEAVERS[k]))


def exhaustive_dmin(spec: TurboSpec) -> int:
    """Brute-force minimum nonzero codeword weight (feasible only for small k)."""
    if spec.k > 20:
        raise ValueError("exhaustive search limited to k <= 20")
    best = None
    for start in range(1, 1 << spec.k, 4096):
        vals = np.arange(start, min(start + 4096, 1 << spec.k), dtype=np.int64)
        msgs = ((vals[:, None] >> np.arange(spec.k)) & 1).astype(np.uint8)
        w = turbo_encode(msgs, spec).sum(axis=1).min()
        best = w if best is None else min(best, w)
    return int(best)


def number_of_messages(k: int, max_w: int) -> int:
    return sum(comb(k, w) for w in range(1, max_w + 1))
