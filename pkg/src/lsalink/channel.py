"""Tapped-delay-line Rayleigh channels for a large receive array.

Every antenna sees the same tap delays; tap gains are independent circular
Gaussians per tap and per antenna (WSSUS, no spatial correlation). Channels
are quasi-static: one realization per transmitted frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

# 3GPP Extended Typical Urban profile.
ETU_DELAYS_NS = (0, 50, 120, 200, 230, 500, 1600, 2300, 5000)
ETU_POWERS_DB = (-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0)


@dataclass(frozen=True)
class TapDelayProfile:
    """Power-delay profile: delays in seconds, linear powers summing to one."""

    delays: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=float).ravel()
        powers = np.asarray(self.powers, dtype=float).ravel()
        if delays.size < 1 or delays.size != powers.size:
            raise ValueError("delays and powers must be non-empty and of equal length")
        if delays[0] < 0 or np.any(np.diff(delays) <= 0):
            raise ValueError("delays must be non-negative and strictly increasing")
        if np.any(powers <= 0):
            raise ValueError("tap powers must be positive")
        if abs(powers.sum() - 1.0) > 1e-9:
            raise ValueError(f"tap powers must sum to 1, got {powers.sum():.12g}")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "powers", powers)

    @classmethod
    def from_db(cls, delays: Sequence[float], powers_db: Sequence[float]) -> "TapDelayProfile":
        """Build a profile from relative dB powers, normalizing to unit total power."""
        lin = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
        return cls(np.asarray(delays, dtype=float), lin / lin.sum())

    @property
    def num_taps(self) -> int:
        return self.delays.size

    @property
    def max_delay(self) -> float:
        return float(self.delays[-1])


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the CIR vector: ``gains[m, l]`` is the gain of tap l at antenna m."""

    gains: np.ndarray
    profile: TapDelayProfile

    def __post_init__(self):
        if self.gains.ndim != 2 or self.gains.shape[1] != self.profile.num_taps:
            raise ValueError(
                f"gain matrix shape {self.gains.shape} does not match "
                f"{self.profile.num_taps} profile taps"
            )

    @property
    def antenna_count(self) -> int:
        return self.gains.shape[0]


@dataclass(frozen=True)
class CfrGrid:
    values: np.ndarray  # (M, n_freq)
    frequencies: np.ndarray


class DiscreteKind(str, Enum):
    GRID_SNAPPED = "grid-snapped"
    PULSE_COMPOSITE = "pulse-composite"


@dataclass(frozen=True)
class DiscreteChannel:
    """Sampled per-antenna impulse response, ``taps`` has shape (M, L+1)."""

    taps: np.ndarray
    sample_rate: float
    kind: DiscreteKind
    lead: float = 0.0  # time of sample 0 relative to the zero-delay tap, seconds before

    def __post_init__(self):
        if self.taps.ndim != 2 or self.taps.shape[1] < 1:
            raise ValueError("taps must be a non-empty (M, L+1) matrix")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def memory(self) -> int:
        """Channel memory L (number of taps minus one)."""
        return self.taps.shape[1] - 1

    @property
    def antenna_count(self) -> int:
        return self.taps.shape[0]


def etu_profile() -> TapDelayProfile:
    """The 9-tap ETU power-delay profile, normalized to unit power (5 us spread)."""
    return TapDelayProfile.from_db(np.asarray(ETU_DELAYS_NS) * 1e-9, ETU_POWERS_DB)


def single_tap_profile(delay: float = 0.0) -> TapDelayProfile:
    return TapDelayProfile(np.array([delay]), np.array([1.0]))


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(profile: TapDelayProfile, M: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw independent Rayleigh tap gains for ``M`` antennas."""
    if M < 1:
        raise ValueError(f"antenna count must be >= 1, got {M}")
    gains = complex_normal(rng, (M, profile.num_taps), profile.powers[np.newaxis, :])
    return ChannelRealization(gains, profile)


def cfr_on_grid(ch: ChannelRealization, frequencies) -> CfrGrid:
    """Evaluate ``H_m(f) = sum_l c_m[l] exp(-j 2 pi f tau_l)`` on a frequency grid."""
    freqs = np.asarray(frequencies, dtype=float).ravel()
    if not np.all(np.isfinite(freqs)):
        raise ValueError("frequencies must be finite")
    steering = np.exp(-2j * np.pi * np.outer(ch.profile.delays, freqs))
    return CfrGrid(ch.gains @ steering, freqs)


def discretize(
    ch: ChannelRealization,
    sample_rate: float,
    kind: DiscreteKind | str = DiscreteKind.GRID_SNAPPED,
    pulse: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    length: Optional[int] = None,
    lead: float = 0.0,
) -> DiscreteChannel:
    """Sample a channel realization at ``sample_rate``.

    Parameters
    ----------
    ch : ChannelRealization
    sample_rate : float
        Sampling rate in Hz.
    kind : DiscreteKind
        ``grid-snapped`` rounds every tap delay to the nearest sample and sums
        coincident taps. ``pulse-composite`` evaluates
        ``sum_l c_m[l] * pulse(n / fs - lead - tau_l)`` at true fractional delays.
    pulse : callable, optional
        Continuous pulse ``p(t)`` (seconds), required for ``pulse-composite``.
    length : int, optional
        Number of output taps. Grid-snapped defaults to the last occupied index
        plus one; pulse-composite requires it.
    lead : float
        Time offset of sample 0 before the zero-delay tap; lets a symmetric
        pulse be represented causally.
    """
    kind = DiscreteKind(kind)
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if length is not None and length < 1:
        raise ValueError(f"truncation length must be >= 1, got {length}")

    delays = ch.profile.delays
    if kind is DiscreteKind.GRID_SNAPPED:
        idx = np.rint(delays * sample_rate).astype(int)
        n_taps = int(idx[-1]) + 1 if length is None else length
        taps = np.zeros((ch.antenna_count, n_taps), dtype=complex)
        keep = idx < n_taps
        np.add.at(taps, (slice(None), idx[keep]), ch.gains[:, keep])
        return DiscreteChannel(taps, sample_rate, kind)

    if pulse is None:
        raise ValueError("pulse-composite discretization needs a pulse")
    if length is None:
        raise ValueError("pulse-composite discretization needs an explicit length")
    t = np.arange(length) / sample_rate - lead
    basis = pulse(t[np.newaxis, :] - delays[:, np.newaxis])  # (L_taps, length)
    taps = ch.gains @ basis
    return DiscreteChannel(taps, sample_rate, kind, lead)


def orthogonality_defect(ch: ChannelRealization) -> float:
    """Largest off-diagonal magnitude of the normalized tap Gram matrix ``C^H C / M``."""
    n_taps = ch.profile.num_taps
    if n_taps < 2:
        return 0.0
    gram = ch.gains.conj().T @ ch.gains / ch.antenna_count
    off = np.abs(gram[~np.eye(n_taps, dtype=bool)])
    return float(off.max())


def snap_to_grid(ch: ChannelRealization, sample_rate: float) -> ChannelRealization:
    """Equivalent realization with delays rounded to the sample grid.

    Taps landing on the same sample are merged (gains and powers add), so the
    CFR of the result is exactly the DFT of the grid-snapped sampled CIR.
    """
    idx = np.rint(ch.profile.delays * sample_rate).astype(int)
    uniq, inverse = np.unique(idx, return_inverse=True)
    gains = np.zeros((ch.antenna_count, uniq.size), dtype=complex)
    powers = np.zeros(uniq.size)
    np.add.at(gains, (slice(None), inverse), ch.gains)
    np.add.at(powers, inverse, ch.profile.powers)
    return ChannelRealization(gains, TapDelayProfile(uniq / sample_rate, powers / powers.sum()))


def filter_through(dchan: DiscreteChannel, samples) -> np.ndarray:
    """Full linear convolution of one transmit stream with every antenna's taps.

    Returns shape (M, len(samples) + L).
    """
    x = np.asarray(samples, dtype=complex).ravel()
    n_out = x.size + dchan.memory
    nfft = 1 << int(np.ceil(np.log2(max(n_out, 1))))
    X = np.fft.fft(x, nfft)
    Hf = np.fft.fft(dchan.taps, nfft, axis=1)
    return np.fft.ifft(Hf * X[np.newaxis, :], axis=1)[:, :n_out]
