"""Seeded Monte Carlo sweeps producing CER/FER curves.

Frames are simulated in fixed-size blocks.  Block ``b`` of grid point ``p``
draws everything from ``default_rng([seed, p, b])``, blocks are aggregated in
index order and the run stops at the first block after which the stop rule
holds.  The result therefore does not depend on how many worker processes
computed the blocks.
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import bounds
from .bch import BCH63, EBCH128, Mode, bch63_decode_hard_batch
from .channel import (JSI, Alignment, ChannelConfig, ChannelError, Cw, NoJam, Pn, Pulsed, apply_channel,
                      llr_frontend, modulate)
from .cltu import BurstSpec, CltuLayout, apply_burst, departition, partition_tf, rowcol_permutation
from .gf2 import encode_linear
from .interleavers import InterleaverDef
from .ldpc import ldpc_encode, load_alist, placeholder_ldpc, spa_decode_batch
from .mrb import MrbConfig, MrbDecoder
from .turbo import DEFAULT_INTERLEAVERS, TurboSpec, turbo_decode_batch, turbo_encode


class ConfigError(ValueError):
    """Invalid or inconsistent sweep configuration."""


SCHEMES = ("uncoded", "bch63", "ebch128", "turbo", "ldpc")
SWEEP_VARS = ("ebn0_db", "ebj0_db", "sir_db")
INTERLEAVING = ("none", "ideal", "rowcol")
JAM_TYPES = ("none", "pulsed", "cw", "pn", "burst")

_SCHEME_KEYS = {
    "uncoded": {"id", "n"},
    "bch63": {"id", "mode"},
    "ebch128": {"id", "order", "pattern_budget"},
    "turbo": {"id", "k", "interleaver", "puncture", "iterations", "early_stop"},
    "ldpc": {"id", "alist", "max_iter"},
}
_JAM_KEYS = {
    "none": {"type"},
    "pulsed": {"type", "rho", "ebj0_db"},
    "cw": {"type", "sir_db", "K", "theta_j", "delta_omega"},
    "pn": {"type", "sir_db", "K"},
    "burst": {"type", "length", "ebj0_db", "placement"},
}
_TOP_KEYS = {"name", "scheme", "channel", "sweep", "jsi", "clip", "interleaving", "cltu", "stop",
             "block_frames", "bounds", "seed"}


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


# -- schemes ---------------------------------------------------------------------


class Scheme:
    n: int
    k: int

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, msgs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def decode(self, llrs: np.ndarray):
        """Return ``(messages, failed)``; ``failed`` flags declared decoding failures."""
        raise NotImplementedError


class Uncoded(Scheme):
    def __init__(self, n: int = 1):
        self.n = self.k = n

    def encode(self, msgs):
        return msgs

    def decode(self, llrs):
        return (llrs < 0).astype(np.uint8), np.zeros(len(llrs), dtype=bool)


class Bch63Hard(Scheme):
    n, k = BCH63.n, BCH63.k

    def __init__(self, mode: str = "SEC"):
        self.mode = Mode(mode.upper())

    def encode(self, msgs):
        return encode_linear(BCH63.G, msgs)

    def decode(self, llrs):
        msgs, codes = bch63_decode_hard_batch((llrs < 0).astype(np.uint8), self.mode)
        return msgs, codes == 2


class Ebch128Mrb(Scheme):
    n, k = EBCH128.n, EBCH128.k

    def __init__(self, order: int = 4, pattern_budget: Optional[int] = None):
        self.dec = MrbDecoder(EBCH128.G, MrbConfig(order, pattern_budget))

    def encode(self, msgs):
        return encode_linear(EBCH128.G, msgs)

    def decode(self, llrs):
        _, msgs, _ = self.dec.decode_batch(llrs)
        return msgs, np.zeros(len(llrs), dtype=bool)


class Turbo(Scheme):
    def __init__(self, k: int = 64, interleaver: Optional[dict] = None, puncture=None, iterations: int = 10,
                 early_stop: bool = True):
        if interleaver is None:
            if k not in DEFAULT_INTERLEAVERS:
                raise ConfigError(f"no default turbo interleaver for k={k}")
            interleaver = DEFAULT_INTERLEAVERS[k]
        il = InterleaverDef.from_dict({"k": k, **interleaver})
        self.spec = TurboSpec(k, il, puncture=None if puncture is None else tuple(puncture))
        self.n, self.k = self.spec.n_post, k
        self.iterations, self.early_stop = iterations, early_stop

    def encode(self, msgs):
        return turbo_encode(msgs, self.spec)

    def decode(self, llrs):
        msgs, _ = turbo_decode_batch(llrs, self.spec, self.iterations, self.early_stop)
        return msgs, np.zeros(len(llrs), dtype=bool)


class Ldpc(Scheme):
    def __init__(self, alist: Optional[str] = None, max_iter: int = 100):
        self.pc = placeholder_ldpc() if alist is None else load_alist(Path(alist).read_text())
        self.n, self.k = self.pc.n, self.pc.k
        self.max_iter = max_iter

    def encode(self, msgs):
        return ldpc_encode(self.pc, msgs)

    def decode(self, llrs):
        cw, conv, _ = spa_decode_batch(self.pc, llrs, self.max_iter)
        return cw[:, self.pc.info_cols], ~conv


@lru_cache(maxsize=16)
def _build_scheme(key: str) -> Scheme:
    d = json.loads(key)
    sid = d.pop("id")
    try:
        if sid == "uncoded":
            return Uncoded(**d)
        if sid == "bch63":
            return Bch63Hard(**d)
        if sid == "ebch128":
            return Ebch128Mrb(**d)
        if sid == "turbo":
            return Turbo(**d)
        if sid == "ldpc":
            return Ldpc(**d)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, OSError) as exc:
        raise ConfigError(f"invalid {sid} scheme: {exc}") from exc
    raise ConfigError(f"unknown scheme {sid!r}")


def build_scheme(d: dict) -> Scheme:
    return _build_scheme(json.dumps(d, sort_keys=True))


# -- sweep specification -----------------------------------------------------------


@dataclass(frozen=True)
class StopRule:
    min_codeword_errors: int = 100
    min_frame_errors: int = 0
    max_frames: int = 1_000_000


@dataclass(frozen=True)
class SweepSpec:
    scheme: dict
    channel: dict
    sweep_var: str
    grid: tuple
    jsi: str = "perfect"
    clip: bool = False
    interleaving: str = "none"
    cltu: Optional[dict] = None
    stop: StopRule = StopRule()
    block_frames: int = 1000
    bounds: tuple = ()
    seed: int = 0
    name: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        _reject_unknown(d, _TOP_KEYS, "config")
        for req in ("scheme", "channel", "sweep"):
            if req not in d:
                raise ConfigError(f"missing required key {req!r}")
        scheme = dict(d["scheme"])
        _reject_unknown(scheme, set().union(*_SCHEME_KEYS.values()), "scheme")
        if scheme.get("id") not in SCHEMES:
            raise ConfigError(f"scheme id must be one of {', '.join(SCHEMES)}")
        _reject_unknown(scheme, _SCHEME_KEYS[scheme["id"]], f"scheme {scheme['id']}")

        channel = dict(d["channel"])
        _reject_unknown(channel, {"ebn0_db", "jamming"}, "channel")
        jam = dict(channel.get("jamming", {"type": "none"}))
        if jam.get("type") not in JAM_TYPES:
            raise ConfigError(f"jamming type must be one of {', '.join(JAM_TYPES)}")
        _reject_unknown(jam, _JAM_KEYS[jam["type"]], f"jamming {jam['type']}")
        channel["jamming"] = jam

        sweep = d["sweep"]
        _reject_unknown(sweep, {"var", "grid"}, "sweep")
        var = sweep.get("var")
        if var not in SWEEP_VARS:
            raise ConfigError(f"sweep var must be one of {', '.join(SWEEP_VARS)}")
        try:
            grid = tuple(float(x) for x in sweep.get("grid", ()))
        except (TypeError, ValueError) as exc:
            raise ConfigError("sweep grid must be a list of numbers") from exc
        stop = d.get("stop", {})
        _reject_unknown(stop, {"min_codeword_errors", "min_frame_errors", "max_frames"}, "stop")
        jsi = d.get("jsi", "perfect")
        clip = d.get("clip")
        spec = cls(
            scheme=scheme,
            channel=channel,
            sweep_var=var,
            grid=grid,
            jsi=jsi,
            clip=(jsi == "none") if clip is None else bool(clip),
            interleaving=d.get("interleaving", "none"),
            cltu=d.get("cltu"),
            stop=StopRule(**stop),
            block_frames=int(d.get("block_frames", 1000)),
            bounds=tuple(d.get("bounds", ())),
            seed=int(d.get("seed", 0)),
            name=str(d.get("name", "")),
        )
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path) -> "SweepSpec":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    def validate(self):
        if not self.grid:
            raise ConfigError("sweep grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        if any(math.isnan(x) for x in self.grid):
            raise ConfigError("sweep grid contains NaN")
        if self.jsi not in ("perfect", "none"):
            raise ConfigError("jsi must be 'perfect' or 'none'")
        if self.interleaving not in INTERLEAVING:
            raise ConfigError(f"interleaving must be one of {', '.join(INTERLEAVING)}")
        st = self.stop
        if st.min_codeword_errors < 1 or st.max_frames < 1 or st.min_frame_errors < 0:
            raise ConfigError("stop rule values must be positive")
        if self.block_frames < 1:
            raise ConfigError("block_frames must be >= 1")
        jam = self.channel["jamming"]
        jt = jam["type"]
        if self.cltu is not None:
            _reject_unknown(self.cltu, {"M"}, "cltu")
            if not isinstance(self.cltu.get("M"), int) or self.cltu["M"] < 1:
                raise ConfigError("cltu.M must be a positive integer")
            if self.interleaving == "ideal":
                raise ConfigError("CLTU mode cannot be combined with ideal interleaving")
            if jt not in ("none", "burst"):
                raise ConfigError("CLTU mode supports only 'none' or 'burst' jamming")
        else:
            if self.interleaving == "rowcol":
                raise ConfigError("row-column interleaving requires a cltu section")
            if jt == "burst":
                raise ConfigError("burst jamming requires a cltu section")
        owner = {"ebn0_db": "channel", "ebj0_db": "jamming", "sir_db": "jamming"}[self.sweep_var]
        if owner == "jamming":
            ok = {"ebj0_db": ("pulsed", "burst"), "sir_db": ("cw", "pn")}[self.sweep_var]
            if jt not in ok:
                raise ConfigError(f"sweep var {self.sweep_var} does not apply to {jt} jamming")
            if self.sweep_var in jam:
                raise ConfigError(f"{self.sweep_var} is both fixed and swept")
        elif "ebn0_db" in self.channel:
            raise ConfigError("ebn0_db is both fixed and swept")
        for b in self.bounds:
            if b not in ("sp59", "esplb"):
                raise ConfigError(f"unknown bound {b!r}")
            if b == "esplb" and jt != "pulsed":
                raise ConfigError("esplb applies only to pulsed jamming")
        if self.bounds and self.scheme["id"] == "uncoded":
            raise ConfigError("bounds are not defined for the uncoded scheme")
        # resolving one point exercises the remaining checks
        scheme = build_scheme(self.scheme)
        if self.cltu is not None:
            CltuLayout(self.cltu["M"], scheme.k, scheme.n)
        self.point(0, scheme)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "scheme": self.scheme,
            "channel": self.channel,
            "sweep": {"var": self.sweep_var, "grid": list(self.grid)},
            "jsi": self.jsi,
            "clip": self.clip,
            "interleaving": self.interleaving,
            "stop": {"min_codeword_errors": self.stop.min_codeword_errors,
                     "min_frame_errors": self.stop.min_frame_errors, "max_frames": self.stop.max_frames},
            "block_frames": self.block_frames,
            "bounds": list(self.bounds),
            "seed": self.seed,
        }
        if self.cltu is not None:
            d["cltu"] = self.cltu
        return d

    def point(self, index: int, scheme: Optional[Scheme] = None) -> "Point":
        scheme = scheme or build_scheme(self.scheme)
        value = self.grid[index]
        ch = dict(self.channel)
        jam = dict(ch.pop("jamming"))
        if self.sweep_var == "ebn0_db":
            ch["ebn0_db"] = value
        else:
            jam[self.sweep_var] = value
        if "ebn0_db" not in ch:
            raise ConfigError("channel.ebn0_db is required unless it is swept")
        ebn0 = float(ch["ebn0_db"])
        jt = jam.pop("type")
        burst = None
        try:
            if jt == "none":
                j = NoJam()
            elif jt == "pulsed":
                align = Alignment.IDEAL if self.interleaving == "ideal" else Alignment.CODEWORD
                j = Pulsed(float(jam["rho"]), float(jam["ebj0_db"]), align)
            elif jt == "cw":
                j = Cw(float(jam["sir_db"]), float(jam["K"]), float(jam.get("theta_j", 0.0)),
                       float(jam.get("delta_omega", 0.0)))
            elif jt == "pn":
                j = Pn(float(jam["sir_db"]), float(jam["K"]))
            else:
                j = NoJam()
                placement = jam.get("placement", "random")
                burst = BurstSpec(int(jam["length"]), float(jam["ebj0_db"]), placement)
            cfg = ChannelConfig(ebn0, scheme.rate, j)
        except KeyError as exc:
            raise ConfigError(f"jamming {jt} is missing {exc.args[0]!r}") from exc
        except (ChannelError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        return Point(index, value, cfg, burst)


@dataclass(frozen=True)
class Point:
    index: int
    value: float
    cfg: ChannelConfig
    burst: Optional[BurstSpec] = None


# -- simulation ----------------------------------------------------------------------


@dataclass
class Counts:
    frames: int = 0
    codewords: int = 0
    cw_errors: int = 0
    fr_errors: int = 0

    def add(self, other: "Counts"):
        self.frames += other.frames
        self.codewords += other.codewords
        self.cw_errors += other.cw_errors
        self.fr_errors += other.fr_errors


def ci95(errors: int, trials: int) -> float:
    if trials == 0:
        return float("nan")
    p = errors / trials
    return 1.96 * math.sqrt(p * (1.0 - p) / trials)


@dataclass
class SimResult:
    sweep_var: str
    value_db: float
    frames: int
    codewords: int
    cw_errors: int
    fr_errors: int
    seed: int
    wall_time: float = 0.0
    sp59: Optional[float] = None
    esplb: Optional[float] = None

    @property
    def cer(self) -> float:
        return self.cw_errors / self.codewords

    @property
    def fer(self) -> float:
        return self.fr_errors / self.frames

    @property
    def cer_ci95(self) -> float:
        return ci95(self.cw_errors, self.codewords)

    @property
    def fer_ci95(self) -> float:
        return ci95(self.fr_errors, self.frames)


def simulate_block(spec: SweepSpec, point: Point, block: int, size: int) -> Counts:
    """Simulate ``size`` frames of one block with its own RNG substream."""
    scheme = build_scheme(spec.scheme)
    rng = np.random.default_rng([spec.seed, point.index, block])
    jsi = JSI(spec.jsi)
    if spec.cltu is None:
        msgs = rng.integers(0, 2, size=(size, scheme.k), dtype=np.uint8)
        rx = apply_channel(modulate(scheme.encode(msgs)), point.cfg, rng)
        llr = llr_frontend(rx, jsi, spec.clip)
        dec, failed = scheme.decode(llr)
        bad = failed | (dec != msgs).any(axis=1)
        e = int(bad.sum())
        return Counts(size, size, e, e)

    lay = CltuLayout(spec.cltu["M"], scheme.k, scheme.n)
    tfs = rng.integers(0, 2, size=(size, lay.M), dtype=np.uint8)
    blocks = np.stack([partition_tf(tf, lay.k) for tf in tfs])  # (size, N, k)
    coded = scheme.encode(blocks.reshape(-1, lay.k)).reshape(size, lay.C)
    perm = rowcol_permutation(lay.C) if spec.interleaving == "rowcol" else None
    if perm is not None:
        coded = coded[:, perm]
    x = modulate(coded)
    if point.burst is not None:
        rx = apply_burst(x, point.burst, point.cfg.ebn0_db, scheme.rate, rng)
    else:
        rx = apply_channel(x, point.cfg, rng)
    llr = llr_frontend(rx, jsi, spec.clip)
    if perm is not None:
        de = np.empty_like(llr)
        de[:, perm] = llr
        llr = de
    dec, failed = scheme.decode(llr.reshape(-1, lay.n))
    cw_bad = failed | (dec != blocks.reshape(-1, lay.k)).any(axis=1)
    dec_tf = np.stack([departition(b, lay.M) for b in dec.reshape(size, lay.N, lay.k)])
    fr_bad = failed.reshape(size, lay.N).any(axis=1) | (dec_tf != tfs).any(axis=1)
    return Counts(size, size * lay.N, int(cw_bad.sum()), int(fr_bad.sum()))


def _block_sizes(spec: SweepSpec):
    b, done = 0, 0
    while done < spec.stop.max_frames:
        size = min(spec.block_frames, spec.stop.max_frames - done)
        yield b, size
        b += 1
        done += size


def _stop(spec: SweepSpec, c: Counts) -> bool:
    return c.cw_errors >= spec.stop.min_codeword_errors and c.fr_errors >= spec.stop.min_frame_errors


_WORKER_SPEC: Optional[SweepSpec] = None


def _init_worker(spec_dict: dict):
    global _WORKER_SPEC
    _WORKER_SPEC = SweepSpec.from_dict(spec_dict)


def _worker_block(index: int, block: int, size: int) -> Counts:
    spec = _WORKER_SPEC
    return simulate_block(spec, spec.point(index), block, size)


def _bound_values(spec: SweepSpec, point: Point, scheme: Scheme):
    sp = es = None
    cfg = point.cfg
    if "sp59" in spec.bounds:
        sp = bounds.sp59(scheme.rate, scheme.n, cfg.ebn0_db)
    if "esplb" in spec.bounds:
        j = cfg.jam
        es = bounds.esplb(scheme.rate, scheme.n, cfg.ebn0_db, j.ebj0_db, j.rho)
    return sp, es


def run_point(spec: SweepSpec, index: int, workers: int = 1, pool: Optional[ProcessPoolExecutor] = None) -> SimResult:
    scheme = build_scheme(spec.scheme)
    point = spec.point(index, scheme)
    t0 = time.perf_counter()
    total = Counts()
    blocks = _block_sizes(spec)
    if workers <= 1 or pool is None:
        for b, size in blocks:
            total.add(simulate_block(spec, point, b, size))
            if _stop(spec, total):
                break
    else:
        finished = False
        while not finished:
            wave = [next(blocks, None) for _ in range(workers)]
            wave = [w for w in wave if w is not None]
            if not wave:
                break
            futures = [pool.submit(_worker_block, index, b, size) for b, size in wave]
            results = [f.result() for f in futures]
            for c in results:
                total.add(c)
                if _stop(spec, total):
                    finished = True
                    break
    sp, es = _bound_values(spec, point, scheme)
    return SimResult(spec.sweep_var, point.value, total.frames, total.codewords, total.cw_errors, total.fr_errors,
                     spec.seed, time.perf_counter() - t0, sp, es)


def run_sweep(spec: SweepSpec, workers: int = 1, out=None, progress=None) -> List[SimResult]:
    """Simulate every grid point in order; write CSV to ``out`` (path or text stream) if given."""
    results = []
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(spec.to_dict(),))
    try:
        for i in range(len(spec.grid)):
            r = run_point(spec, i, workers, pool)
            results.append(r)
            if progress is not None:
                progress(r)
    finally:
        if pool is not None:
            pool.shutdown()
    if out is not None:
        text = to_csv(results, spec.bounds)
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="\n") as fh:
                fh.write(text)
    return results


CSV_COLUMNS = ["sweep_var", "value_db", "frames", "cw_errors", "fr_errors", "cer", "fer", "cer_ci95", "fer_ci95",
               "seed"]


def _fmt(x: float) -> str:
    return repr(float(x))


def to_csv(results: List[SimResult], bound_cols=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = CSV_COLUMNS + [b for b in ("sp59", "esplb") if b in bound_cols]
    w.writerow(cols)
    for r in results:
        row = [r.sweep_var, _fmt(r.value_db), r.frames, r.cw_errors, r.fr_errors, _fmt(r.cer), _fmt(r.fer),
               _fmt(r.cer_ci95), _fmt(r.fer_ci95), r.seed]
        if "sp59" in bound_cols:
            row.append(_fmt(r.sp59))
        if "esplb" in bound_cols:
            row.append(_fmt(r.esplb))
        w.writerow(row)
    return buf.getvalue()


def with_seed(spec: SweepSpec, seed: int) -> SweepSpec:
    return replace(spec, seed=seed)
