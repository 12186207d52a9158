"""Symbol-level jamming channel with BPSK, Gaussian jamming models and the LLR frontend.

Units: symbols have unit amplitude, and every ratio is mapped to a noise
variance per real dimension::

    thermal        sigma_N^2 = 1 / (2 R_c Eb/N0)
    pulsed (on)    sigma_P^2 = 1 / (2 R_c (Eb/J0) rho)
    CW             sigma_J^2 = cos^2(theta_j) (J/S) / (2 K)
    PN             CW with theta_j = 0
    burst          sigma_B^2 = 1 / (2 R_c Eb/J0P)

Independent disturbances add their variances.
"""

from dataclasses import dataclass, field
from enum import Enum
from math import cos
from typing import Union

import numpy as np
from scipy.special import ndtr


class ChannelError(ValueError):
    pass


def db2lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


class Alignment(str, Enum):
    CODEWORD = "codeword-aligned"
    IDEAL = "ideal-interleaved"


class JSI(str, Enum):
    PERFECT = "perfect"
    NONE = "none"


@dataclass(frozen=True)
class NoJam:
    kind: str = field(default="none", init=False)


@dataclass(frozen=True)
class Pulsed:
    rho: float
    ebj0_db: float
    alignment: Alignment = Alignment.CODEWORD
    kind: str = field(default="pulsed", init=False)

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ChannelError(f"duty cycle rho must lie in (0, 1], got {self.rho}")
        object.__setattr__(self, "alignment", Alignment(self.alignment))


@dataclass(frozen=True)
class Cw:
    sir_db: float
    K: float
    theta_j: float = 0.0
    delta_omega: float = 0.0
    kind: str = field(default="cw", init=False)

    def __post_init__(self):
        if self.K < 1:
            raise ChannelError(f"processing gain K must be >= 1, got {self.K}")
        if self.delta_omega != 0.0:
            raise ChannelError("only the worst case delta_omega = 0 is modelled for CW jamming")


@dataclass(frozen=True)
class Pn:
    sir_db: float
    K: float
    kind: str = field(default="pn", init=False)

    def __post_init__(self):
        if self.K < 1:
            raise ChannelError(f"processing gain K must be >= 1, got {self.K}")

    def as_cw(self) -> Cw:
        return Cw(self.sir_db, self.K, 0.0, 0.0)


Jam = Union[NoJam, Pulsed, Cw, Pn]


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    rate: float
    jam: Jam = NoJam()

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ChannelError(f"code rate must lie in (0, 1], got {self.rate}")

    @property
    def sigma_n2(self) -> float:
        if self.ebn0_db == float("inf"):
            return 0.0
        return 1.0 / (2.0 * self.rate * db2lin(self.ebn0_db))

    @property
    def sigma_j2(self) -> float:
        """Extra variance on jammed samples."""
        jam = self.jam
        if isinstance(jam, Pulsed):
            if jam.ebj0_db == float("inf"):
                return 0.0
            return 1.0 / (2.0 * self.rate * db2lin(jam.ebj0_db) * jam.rho)
        if isinstance(jam, Pn):
            jam = jam.as_cw()
        if isinstance(jam, Cw):
            return cos(jam.theta_j) ** 2 / (db2lin(jam.sir_db) * 2.0 * jam.K)
        return 0.0

    @property
    def jam_fraction(self) -> float:
        jam = self.jam
        if isinstance(jam, Pulsed):
            return jam.rho
        if isinstance(jam, (Cw, Pn)):
            return 1.0
        return 0.0


@dataclass
class ReceivedBlock:
    samples: np.ndarray
    jam_mask: np.ndarray
    sigma_clean2: float
    sigma_jam2: float
    jam_fraction: float = 0.0  # expected fraction of jammed samples, used without JSI

    @property
    def sigma2(self) -> np.ndarray:
        return np.where(self.jam_mask, self.sigma_jam2, self.sigma_clean2)


def modulate(bits) -> np.ndarray:
    """BPSK: 0 -> +1, 1 -> -1."""
    b = np.asarray(bits)
    return 1.0 - 2.0 * b.astype(np.float64)


def slice_hard(samples) -> np.ndarray:
    return (np.asarray(samples) < 0).astype(np.uint8)


def apply_channel(symbols, cfg: ChannelConfig, rng: np.random.Generator) -> ReceivedBlock:
    """Add thermal noise plus the configured jamming.

    ``symbols`` is ``(n,)`` or ``(frames, n)``; with codeword-aligned pulses each
    row is one codeword and is jammed as a whole.
    """
    x = np.asarray(symbols, dtype=np.float64)
    jam = cfg.jam
    if isinstance(jam, Pulsed):
        if jam.alignment is Alignment.CODEWORD:
            rows = rng.random(x.shape[:-1] if x.ndim > 1 else ()) < jam.rho
            mask = np.broadcast_to(np.asarray(rows)[..., None], x.shape).copy()
        else:
            mask = rng.random(x.shape) < jam.rho
    elif isinstance(jam, (Cw, Pn)):
        mask = np.ones(x.shape, dtype=bool)
    else:
        mask = np.zeros(x.shape, dtype=bool)
    s_clean = cfg.sigma_n2
    s_jam = cfg.sigma_n2 + cfg.sigma_j2
    std = np.sqrt(np.where(mask, s_jam, s_clean))
    y = x + std * rng.standard_normal(x.shape)
    return ReceivedBlock(y, mask, s_clean, s_jam, cfg.jam_fraction)


def llr_frontend(rx: ReceivedBlock, jsi: JSI = JSI.PERFECT, clip: bool = False, clip_level: float = 2.0) -> np.ndarray:
    """Channel LLRs ``2 y / sigma^2``.

    Perfect JSI uses the true per-sample variance.  Without JSI every sample
    gets ``sigma_N^2 + jam_fraction * sigma_J^2`` and, when ``clip`` is set, the
    samples are first limited to ``[-clip_level, clip_level]`` (twice the unit
    amplitude by default).
    """
    y = rx.samples
    if JSI(jsi) is JSI.PERFECT:
        var = rx.sigma2
    else:
        var = rx.sigma_clean2 + rx.jam_fraction * (rx.sigma_jam2 - rx.sigma_clean2)
        if clip:
            y = np.clip(y, -clip_level, clip_level)
    with np.errstate(divide="ignore"):
        llr = 2.0 * y / var
    # noiseless channel: saturate instead of producing inf
    return np.nan_to_num(llr, nan=0.0, posinf=1e3, neginf=-1e3)


def bit_error_probability(sigma2: float) -> float:
    """Hard-decision error probability of a unit-amplitude BPSK symbol."""
    if sigma2 <= 0.0:
        return 0.0
    return float(ndtr(-1.0 / np.sqrt(sigma2)))
