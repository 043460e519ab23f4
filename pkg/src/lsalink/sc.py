"""Single-carrier transmit chain and the oversampled matched-filter array receiver.

The receiver has no equalizer. Each antenna correlates its oversampled stream
with the conjugate of its own composite response (transmit RRC convolved with
the multipath channel), the antennas are summed, and the sum is read out at
the symbol instants. Residual ISI left by a finite array is treated as extra
Gaussian noise when the receiver reports its effective noise level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .channel import ChannelRealization, DiscreteChannel, DiscreteKind, discretize, filter_through
from .modem import PulseShape, SymbolBlock, rrc_taps

DEFAULT_SYMBOL_RATE = 300 * 7.68e6 / 552  # OFDM net rate with a 40-sample CP


@dataclass(frozen=True)
class ScConfig:
    symbol_rate: float = DEFAULT_SYMBOL_RATE
    oversample_factor: int = 2
    rolloff: float = 0.22
    span: int = 12
    mf_length: Optional[int] = 78

    def __post_init__(self):
        if int(self.oversample_factor) != self.oversample_factor or self.oversample_factor < 1:
            raise ValueError("oversample_factor must be an integer >= 1")
        if self.mf_length is not None and self.mf_length < 1:
            raise ValueError("mf_length must be >= 1")
        if self.symbol_rate <= 0:
            raise ValueError("symbol_rate must be positive")

    @classmethod
    def matching(cls, ofdm_cfg, channel_memory: int = 38, **kwargs) -> "ScConfig":
        """Same net symbol rate as ``ofdm_cfg``; MF length alpha * (L + 1)."""
        alpha = kwargs.pop("oversample_factor", 2)
        return cls(
            symbol_rate=ofdm_cfg.net_symbol_rate,
            oversample_factor=alpha,
            mf_length=alpha * (channel_memory + 1),
            **kwargs,
        )

    @property
    def symbol_duration(self) -> float:
        return 1.0 / self.symbol_rate

    @property
    def sample_rate(self) -> float:
        return self.oversample_factor * self.symbol_rate

    @cached_property
    def pulse(self) -> PulseShape:
        return rrc_taps(self.rolloff, self.span, self.oversample_factor)


class ScDetection(NamedTuple):
    estimates: np.ndarray
    gain: float
    noise_variance: float  # N0 / G plus residual ISI, per symbol
    isi_variance: float


def _upsample(x: np.ndarray, alpha: int) -> np.ndarray:
    up = np.zeros(x.size * alpha, dtype=complex)
    up[::alpha] = x
    return up


def sc_tx(symbols, cfg: ScConfig) -> np.ndarray:
    """Upsample by alpha and shape with the unit-energy RRC pulse.

    Output length is ``(n - 1) * alpha + len(pulse)``; each symbol carries
    unit energy, so the average power per symbol period is one.
    """
    x = symbols.symbols if isinstance(symbols, SymbolBlock) else np.asarray(symbols, dtype=complex)
    x = x.ravel()
    if x.size == 0:
        return np.zeros(0, dtype=complex)
    alpha = cfg.oversample_factor
    taps = cfg.pulse.taps
    out = np.convolve(_upsample(x, alpha), taps)
    return out[: (x.size - 1) * alpha + taps.size]


def composite_channel(ch: ChannelRealization, cfg: ScConfig) -> DiscreteChannel:
    """Transmit pulse convolved with the multipath channel, sampled at alpha / T.

    Sample 0 sits ``span`` symbols before the zero-delay tap so the whole
    truncated pulse of every tap is kept; the response is zero-padded to at
    least ``mf_length`` taps.
    """
    T = cfg.symbol_duration
    lead = cfg.span * T
    length = int(math.ceil((ch.profile.max_delay + 2 * lead) * cfg.sample_rate)) + 1
    length = max(length, cfg.mf_length or 0)
    pulse = cfg.pulse
    return discretize(
        ch,
        cfg.sample_rate,
        DiscreteKind.PULSE_COMPOSITE,
        pulse=lambda t: pulse.waveform(t, T),
        length=length,
        lead=lead,
    )


def sc_channel_output(symbols, dchan: DiscreteChannel, cfg: ScConfig) -> np.ndarray:
    """Noise-free antenna streams: upsampled symbols through each composite response."""
    x = symbols.symbols if isinstance(symbols, SymbolBlock) else np.asarray(symbols, dtype=complex)
    rx = filter_through(dchan, _upsample(x.ravel(), cfg.oversample_factor))
    keep = (x.size - 1) * cfg.oversample_factor + dchan.taps.shape[1]
    return rx[:, :keep]


def mf_window(dchan: DiscreteChannel, length: int) -> int:
    """Start index of the ``length``-tap window holding the most composite energy."""
    n = dchan.taps.shape[1]
    if length >= n:
        return 0
    energy = np.sum(np.abs(dchan.taps) ** 2, axis=0)
    csum = np.concatenate([[0.0], np.cumsum(energy)])
    return int(np.argmax(csum[length:] - csum[:-length]))


def _correlate(g_full: np.ndarray, g_mf: np.ndarray) -> np.ndarray:
    """``sum_m sum_n conj(g_mf[m, n]) g_full[m, n + j]`` for j = -(W-1) .. Lg-1."""
    Lg = g_full.shape[1]
    W = g_mf.shape[1]
    nfft = 1 << int(math.ceil(math.log2(Lg + W)))
    spec = np.sum(np.fft.fft(g_full, nfft, axis=1) * np.fft.fft(g_mf, nfft, axis=1).conj(), axis=0)
    circ = np.fft.ifft(spec)
    return np.concatenate([circ[nfft - (W - 1) :], circ[:Lg]]) if W > 1 else circ[:Lg]


def sc_rx_mf(rx_streams, dchan: DiscreteChannel, cfg: ScConfig, n_symbols: int, n0: float = 0.0) -> ScDetection:
    """Oversampled matched filter, antenna sum and symbol-rate readout.

    The readout instant of symbol ``i`` is the zero lag of the composite
    autocorrelation, i.e. its peak, so no timing search is needed.
    """
    if not np.isclose(dchan.sample_rate, cfg.sample_rate):
        raise ValueError(f"channel sampled at {dchan.sample_rate} Hz, receiver runs at {cfg.sample_rate} Hz")
    rx = np.atleast_2d(np.asarray(rx_streams, dtype=complex))
    if rx.shape[0] != dchan.antenna_count:
        raise ValueError(f"{rx.shape[0]} streams for a {dchan.antenna_count}-antenna channel")
    alpha = cfg.oversample_factor
    Lg = dchan.taps.shape[1]
    W = Lg if cfg.mf_length is None else cfg.mf_length
    if W > Lg:
        raise ValueError(f"mf_length {W} exceeds the {Lg}-tap composite channel")
    a = mf_window(dchan, W)
    g = dchan.taps[:, a : a + W]

    need = (n_symbols - 1) * alpha + a + W
    if rx.shape[1] < need:
        rx = np.pad(rx, ((0, 0), (0, need - rx.shape[1])))
    gc = g.conj()
    stop = (n_symbols - 1) * alpha + 1
    z = np.zeros(n_symbols, dtype=complex)
    for n in range(W):
        z += gc[:, n] @ rx[:, a + n : a + n + stop : alpha]

    gain = float(np.sum(np.abs(g) ** 2))
    corr = _correlate(dchan.taps, g)  # lag j stored at index j + W - 1
    lags = np.arange(-(W - 1), Lg) - a
    on_symbol = (lags % alpha == 0) & (lags != 0)
    isi = float(np.sum(np.abs(corr[on_symbol]) ** 2) / gain**2)
    return ScDetection(z / gain, gain, n0 / gain + isi, isi)
