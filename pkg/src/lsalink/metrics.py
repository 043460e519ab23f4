"""Receiver complexity, BLER statistics, spectral/energy efficiency and Welch PSD."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import signal

WILSON_Z95 = 1.959963984540054

CSV_COLUMNS = (
    "waveform",
    "M",
    "K",
    "scheme",
    "code_rate",
    "esn0_db",
    "blocks",
    "block_errors",
    "bler",
    "bler_lo",
    "bler_hi",
    "se_bps_hz",
    "ee_relative",
    "seed",
)

RECEIVER_KINDS = ("traditional-ofdm", "mf-ofdm", "sc")


def complexity_count(kind: str, M: int, N_FFT: int = 512, N: int = 300, L: int = 38, alpha: int = 2) -> int:
    """Complex multiplications per received block for each receiver architecture.

    traditional-ofdm: one FFT plus N per-bin MF products per antenna.
    mf-ofdm: an (L+1)-tap time-domain MF per antenna and one shared FFT.
    sc: an alpha*(L+1)-tap oversampled MF per antenna.
    """
    if kind not in RECEIVER_KINDS:
        raise ValueError(f"unknown receiver kind {kind!r}; expected one of {RECEIVER_KINDS}")
    if min(M, N_FFT, N, L + 1) < 1:
        raise ValueError("all parameters must be >= 1")
    log2n = int(round(math.log2(N_FFT)))
    if 1 << log2n != N_FFT:
        raise ValueError("N_FFT must be a power of two")
    fft_mults = N_FFT // 2 * log2n
    if kind == "traditional-ofdm":
        return M * (fft_mults + N)
    if kind == "mf-ofdm":
        return M * (L + 1) + fft_mults
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    return M * (L + 1) * alpha


def complexity_table(antennas=(2, 8, 32, 128, 512), **params) -> dict:
    return {kind: [complexity_count(kind, M, **params) for M in antennas] for kind in RECEIVER_KINDS}


def bler_estimate(errors: int, trials: int, z: float = WILSON_Z95):
    """Point estimate and Wilson-score interval, ``(p, (lo, hi))``."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= errors <= trials:
        raise ValueError("errors must lie in [0, trials]")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return p, (lo, hi)


def spectral_efficiency(
    bler: float,
    bits_per_symbol: int,
    code_rate: float,
    net_symbol_rate: float,
    occupied_bandwidth: float,
) -> float:
    """Delivered information bits per second per hertz."""
    if not 0 <= bler <= 1:
        raise ValueError("bler must lie in [0, 1]")
    return bits_per_symbol * code_rate * (1.0 - bler) * net_symbol_rate / occupied_bandwidth


def relative_energy_efficiency(se: float, esn0_db: float, overhead: float = 1.0) -> float:
    """Information rate per unit transmit power, with N0 and large-scale fading normalized.

    Transmit power scales with the symbol energy and with ``overhead``, the
    ratio of gross to useful samples (``(N_FFT + N_CP) / N_FFT`` for OFDM, 1
    for single carrier).
    """
    if not math.isfinite(esn0_db):
        raise ValueError("Es/N0 must be finite")
    return se / (10.0 ** (esn0_db / 10.0) * overhead)


def psd_welch(samples, sample_rate: float, segment_length: int = 4096, overlap: float = 0.5):
    """Hann-windowed Welch PSD.

    Complex input yields a two-sided spectrum ordered by frequency; real input
    a one-sided one. In both cases ``sum(psd) * df`` is the mean-square power.
    """
    x = np.asarray(samples).ravel()
    if segment_length < 2 or segment_length > x.size:
        raise ValueError(f"segment length {segment_length} invalid for {x.size} samples")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must be in [0, 1)")
    noverlap = int(round(segment_length * overlap))
    f, p = signal.welch(
        x,
        fs=sample_rate,
        window="hann",
        nperseg=segment_length,
        noverlap=noverlap,
        detrend=False,
        return_onesided=not np.iscomplexobj(x),
        scaling="density",
    )
    if np.iscomplexobj(x):
        f = np.fft.fftshift(f)
        p = np.fft.fftshift(p)
    return f, p


@dataclass
class MetricRecord:
    waveform: str
    M: int
    K: int
    scheme: str
    code_rate: float
    esn0_db: float
    blocks: int
    block_errors: int
    bler: float
    bler_lo: float
    bler_hi: float
    se_bps_hz: float
    ee_relative: float
    seed: int

    def __post_init__(self):
        if self.block_errors > self.blocks:
            raise ValueError("more block errors than blocks")
        if not (0 <= self.bler <= 1 and self.bler_lo <= self.bler <= self.bler_hi):
            raise ValueError("inconsistent BLER interval")

    def row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_COLUMNS}

    @classmethod
    def from_row(cls, row: dict) -> "MetricRecord":
        types = {f: t for f, t in cls.__annotations__.items()}
        conv = {"int": int, "float": float, "str": str}
        return cls(**{k: conv[types[k]](row[k]) for k in CSV_COLUMNS})
