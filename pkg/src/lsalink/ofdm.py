"""CP-OFDM transmitter and the two matched-filter array receivers.

``ofdm_rx_traditional`` transforms every antenna stream and combines per
subcarrier with the conjugate CFR. ``ofdm_rx_mf`` applies the conjugate
sampled CIR as a circular time-domain matched filter on each antenna, sums
the antennas and runs a single FFT. Both return the same estimates whenever
the CFR is the DFT of the sampled CIR.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import CfrGrid, DiscreteChannel
from .modem import SymbolBlock


@dataclass(frozen=True)
class OfdmConfig:
    fft_size: int = 512
    used_subcarriers: int = 300
    cp_length: int = 40
    subcarrier_spacing: float = 15e3
    subcarrier_map: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.used_subcarriers > self.fft_size:
            raise ValueError("more used subcarriers than FFT bins")
        if self.used_subcarriers % 2:
            raise ValueError("used subcarrier count must be even (symmetric about DC)")
        if self.cp_length < 0:
            raise ValueError("cp_length must be non-negative")
        if self.subcarrier_map is None:
            half = self.used_subcarriers // 2
            bins = np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])
            object.__setattr__(self, "subcarrier_map", bins)
        bins = np.asarray(self.subcarrier_map)
        if bins.size != self.used_subcarriers or np.any(bins == 0):
            raise ValueError("subcarrier map must list the used bins and exclude DC")
        if np.abs(bins).max() >= self.fft_size // 2:
            raise ValueError("subcarrier map exceeds the FFT band")

    @property
    def sample_rate(self) -> float:
        return self.fft_size * self.subcarrier_spacing

    @property
    def symbol_length(self) -> int:
        return self.fft_size + self.cp_length

    @property
    def fft_indices(self) -> np.ndarray:
        return np.mod(self.subcarrier_map, self.fft_size)

    @property
    def bin_frequencies(self) -> np.ndarray:
        return self.subcarrier_map * self.subcarrier_spacing

    @property
    def net_symbol_rate(self) -> float:
        """Data symbols per second once CP and guard band are paid for."""
        return self.used_subcarriers * self.sample_rate / self.symbol_length

    @property
    def cp_overhead(self) -> float:
        return self.symbol_length / self.fft_size

    @property
    def occupied_bandwidth(self) -> float:
        return self.used_subcarriers * self.subcarrier_spacing


@dataclass(frozen=True)
class OfdmFrame:
    samples: np.ndarray
    symbol_count: int


class OfdmDetection(NamedTuple):
    estimates: np.ndarray  # data symbols in transmit order
    gain: np.ndarray  # array gain A[k] per used bin


def ofdm_tx(symbols, cfg: OfdmConfig) -> OfdmFrame:
    """Map data symbols onto the used bins and build CP-OFDM time samples.

    The inverse transform is unitary, so the average sample power is
    ``N / N_FFT`` for unit-energy symbols.
    """
    x = symbols.symbols if isinstance(symbols, SymbolBlock) else np.asarray(symbols, dtype=complex)
    N = cfg.used_subcarriers
    if x.size % N:
        raise ValueError(f"{x.size} symbols do not fill whole OFDM symbols of {N} subcarriers")
    n_sym = x.size // N
    grid = np.zeros((n_sym, cfg.fft_size), dtype=complex)
    grid[:, cfg.fft_indices] = x.reshape(n_sym, N)
    body = np.fft.ifft(grid, axis=1, norm="ortho")
    with_cp = np.concatenate([body[:, cfg.fft_size - cfg.cp_length :], body], axis=1)
    return OfdmFrame(with_cp.ravel(), n_sym)


def _strip_cp(rx_streams: np.ndarray, cfg: OfdmConfig, symbol_count: int) -> np.ndarray:
    rx = np.atleast_2d(np.asarray(rx_streams, dtype=complex))
    need = symbol_count * cfg.symbol_length
    if rx.shape[1] < need:
        raise ValueError(f"streams hold {rx.shape[1]} samples, need {need}")
    blocks = rx[:, :need].reshape(rx.shape[0], symbol_count, cfg.symbol_length)
    return blocks[:, :, cfg.cp_length :]  # (M, n_sym, N_FFT)


def _symbol_count(rx: np.ndarray, cfg: OfdmConfig, symbol_count) -> int:
    if symbol_count is not None:
        return symbol_count
    return np.atleast_2d(rx).shape[1] // cfg.symbol_length


def ofdm_rx_traditional(rx_streams, cfr: CfrGrid, cfg: OfdmConfig, symbol_count=None) -> OfdmDetection:
    """Per-antenna FFT, then per-subcarrier conjugate-CFR combining."""
    n_sym = _symbol_count(rx_streams, cfg, symbol_count)
    y = _strip_cp(rx_streams, cfg, n_sym)
    H = np.asarray(cfr.values)
    if H.shape != (y.shape[0], cfg.used_subcarriers):
        raise ValueError(f"CFR shape {H.shape} does not match {y.shape[0]} antennas x {cfg.used_subcarriers} bins")
    R = np.fft.fft(y, axis=2, norm="ortho")[:, :, cfg.fft_indices]  # (M, n_sym, N)
    combined = np.einsum("mk,msk->sk", H.conj(), R)
    gain = np.sum(np.abs(H) ** 2, axis=0)
    return OfdmDetection((combined / gain).ravel(), gain)


def circular_matched_filter(y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``z[n] = sum_m sum_l conj(h_m[l]) y_m[(n + l) mod N]`` summed over antennas.

    ``y`` has shape (M, n_sym, N), ``h`` shape (M, L+1). The input is
    circularly extended by L samples so a linear sliding correlation gives the
    circular one.
    """
    L = h.shape[1] - 1
    N = y.shape[-1]
    if L >= N:
        raise ValueError("channel memory exceeds the FFT length")
    ext = np.concatenate([y, y[..., :L]], axis=-1)
    hc = h.conj()
    z = np.zeros(y.shape[1:], dtype=complex)
    for l in range(L + 1):
        z += np.einsum("m,msn->sn", hc[:, l], ext[:, :, l : l + N])
    return z


def ofdm_rx_mf(rx_streams, dchan: DiscreteChannel, cfg: OfdmConfig, symbol_count=None) -> OfdmDetection:
    """Time-domain circular matched filter per antenna, one shared FFT."""
    if not np.isclose(dchan.sample_rate, cfg.sample_rate):
        raise ValueError(f"channel sampled at {dchan.sample_rate} Hz, OFDM runs at {cfg.sample_rate} Hz")
    n_sym = _symbol_count(rx_streams, cfg, symbol_count)
    y = _strip_cp(rx_streams, cfg, n_sym)
    if dchan.antenna_count != y.shape[0]:
        raise ValueError("antenna count mismatch between streams and channel")
    z = circular_matched_filter(y, dchan.taps)
    Z = np.fft.fft(z, axis=1, norm="ortho")[:, cfg.fft_indices]
    H = np.fft.fft(dchan.taps, n=cfg.fft_size, axis=1)[:, cfg.fft_indices]
    gain = np.sum(np.abs(H) ** 2, axis=0)
    return OfdmDetection((Z / gain).ravel(), gain)
