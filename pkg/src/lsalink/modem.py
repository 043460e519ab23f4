"""Gray-mapped QAM, max-log soft demapping, Nyquist pulses and AWGN.

Symbols are normalized to unit average energy, so the noise level alone sets
Es/N0. Constellation labels follow the LTE definitions: the first bit of each
pair picks the sign of the in-phase coordinate, the second the quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

RRC_TAPER = 0.3


class ModScheme(str, Enum):
    QPSK = "QPSK"
    QAM16 = "16QAM"

    @property
    def bits_per_symbol(self) -> int:
        return 2 if self is ModScheme.QPSK else 4

    @classmethod
    def parse(cls, name) -> "ModScheme":
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("-", "").replace("_", "")
        aliases = {"QPSK": cls.QPSK, "4QAM": cls.QPSK, "16QAM": cls.QAM16, "QAM16": cls.QAM16}
        if key not in aliases:
            raise ValueError(f"unknown modulation scheme {name!r}")
        return aliases[key]


def _label_bits(scheme: ModScheme) -> np.ndarray:
    """Bit labels of every constellation index, MSB first, shape (order, bps)."""
    bps = scheme.bits_per_symbol
    idx = np.arange(1 << bps)
    return ((idx[:, None] >> np.arange(bps - 1, -1, -1)) & 1).astype(np.int8)


def constellation(scheme) -> np.ndarray:
    """Points indexed by the integer label (MSB = first transmitted bit)."""
    scheme = ModScheme.parse(scheme)
    b = _label_bits(scheme).astype(float)
    if scheme is ModScheme.QPSK:
        return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2)
    re = (1 - 2 * b[:, 0]) * (1 + 2 * b[:, 2])
    im = (1 - 2 * b[:, 1]) * (1 + 2 * b[:, 3])
    return (re + 1j * im) / np.sqrt(10)


@dataclass(frozen=True)
class SymbolBlock:
    symbols: np.ndarray
    scheme: ModScheme

    def __len__(self) -> int:
        return self.symbols.size


def modulate_bits(bits, scheme) -> SymbolBlock:
    scheme = ModScheme.parse(scheme)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    bps = scheme.bits_per_symbol
    if bits.size % bps:
        raise ValueError(f"{bits.size} bits is not a multiple of {bps} bits per symbol")
    weights = 1 << np.arange(bps - 1, -1, -1)
    labels = bits.reshape(-1, bps) @ weights
    return SymbolBlock(constellation(scheme)[labels], scheme)


def hard_demap(symbols, scheme) -> np.ndarray:
    """Nearest-neighbour bit decisions."""
    scheme = ModScheme.parse(scheme)
    y = np.asarray(symbols, dtype=complex).ravel()
    pts = constellation(scheme)
    nearest = np.argmin(np.abs(y[:, None] - pts[None, :]), axis=1)
    return _label_bits(scheme)[nearest].ravel()


def llr_demap(symbols, noise_variance, scheme) -> np.ndarray:
    """Max-log LLRs, positive when bit 0 is more likely.

    ``noise_variance`` is the complex noise power per symbol, either a scalar
    or one value per symbol.
    """
    scheme = ModScheme.parse(scheme)
    y = np.asarray(symbols, dtype=complex).ravel()
    var = np.broadcast_to(np.asarray(noise_variance, dtype=float), y.shape)
    if np.any(var <= 0):
        raise ValueError("noise variance must be positive")
    pts = constellation(scheme)
    labels = _label_bits(scheme)
    dist = np.abs(y[:, None] - pts[None, :]) ** 2  # (n, order)
    bps = scheme.bits_per_symbol
    llr = np.empty((y.size, bps))
    for b in range(bps):
        d0 = dist[:, labels[:, b] == 0].min(axis=1)
        d1 = dist[:, labels[:, b] == 1].min(axis=1)
        llr[:, b] = (d1 - d0) / var
    return llr.ravel()


def rrc_waveform(t, beta: float, symbol_period: float = 1.0) -> np.ndarray:
    """Unnormalized root-raised-cosine impulse response (peak 1 - beta + 4 beta / pi)."""
    x = np.asarray(t, dtype=float) / symbol_period
    out = np.empty_like(x)
    at_zero = np.isclose(x, 0.0, atol=1e-12)
    at_sing = np.isclose(np.abs(x), 1.0 / (4.0 * beta), atol=1e-10)
    rest = ~(at_zero | at_sing)
    out[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    out[at_sing] = (beta / np.sqrt(2.0)) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
    )
    xr = x[rest]
    num = np.sin(np.pi * xr * (1 - beta)) + 4 * beta * xr * np.cos(np.pi * xr * (1 + beta))
    out[rest] = num / (np.pi * xr * (1 - (4 * beta * xr) ** 2))
    return out


def raised_cosine_waveform(t, beta: float, symbol_period: float = 1.0) -> np.ndarray:
    """Raised-cosine pulse with unit peak and zeros at nonzero multiples of the symbol period."""
    x = np.asarray(t, dtype=float) / symbol_period
    out = np.sinc(x)
    denom = 1.0 - (2.0 * beta * x) ** 2
    sing = np.isclose(denom, 0.0, atol=1e-10)
    out[~sing] *= np.cos(np.pi * beta * x[~sing]) / denom[~sing]
    out[sing] = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * beta))
    return out


def tukey_taper(t, half_width: float, fraction: float) -> np.ndarray:
    """Continuous Tukey window on ``[-half_width, half_width]``, cosine tapers of total ``fraction``."""
    u = (np.asarray(t, dtype=float) + half_width) / (2.0 * half_width)
    w = np.ones_like(u)
    if fraction > 0:
        edge = fraction / 2.0
        lo = u < edge
        hi = u > 1.0 - edge
        w[lo] = 0.5 * (1.0 - np.cos(np.pi * u[lo] / edge))
        w[hi] = 0.5 * (1.0 - np.cos(np.pi * (1.0 - u[hi]) / edge))
    w[(u < 0) | (u > 1)] = 0.0
    return w


@dataclass(frozen=True)
class PulseShape:
    """Sampled symmetric pulse with unit energy.

    ``taps`` cover ``-span .. +span`` symbols at ``oversample_factor`` samples
    per symbol, so there are ``2 * span * alpha + 1`` of them. The truncated
    RRC is Tukey-tapered, which keeps the matched-pair Nyquist residual under
    1e-3 of the peak at a 12-symbol span.
    """

    taps: np.ndarray
    oversample_factor: int
    rolloff: float
    span: int
    scale: float  # multiplies the tapered rrc_waveform to give the unit-energy taps
    taper: float = RRC_TAPER

    @property
    def delay(self) -> int:
        """Samples from the first tap to the pulse centre."""
        return self.span * self.oversample_factor

    def waveform(self, t, symbol_period: float) -> np.ndarray:
        """Continuous pulse consistent with ``taps``; zero outside the span."""
        t = np.asarray(t, dtype=float)
        half = self.span * symbol_period
        out = self.scale * rrc_waveform(t, self.rolloff, symbol_period) * tukey_taper(t, half, self.taper)
        out[np.abs(t) > half * (1 + 1e-12)] = 0.0
        return out


def rrc_taps(beta: float = 0.22, span_symbols: int = 12, alpha: int = 2, taper: float = RRC_TAPER) -> PulseShape:
    if not 0 < beta <= 1:
        raise ValueError(f"roll-off must be in (0, 1], got {beta}")
    if span_symbols < 2:
        raise ValueError(f"span must be >= 2 symbols, got {span_symbols}")
    if int(alpha) != alpha or alpha < 1:
        raise ValueError(f"oversampling factor must be an integer >= 1, got {alpha}")
    alpha = int(alpha)
    if not 0 <= taper <= 1:
        raise ValueError(f"taper fraction must be in [0, 1], got {taper}")
    k = np.arange(-span_symbols * alpha, span_symbols * alpha + 1)
    t = k / alpha
    raw = rrc_waveform(t, beta) * tukey_taper(t, span_symbols, taper)
    scale = 1.0 / np.linalg.norm(raw)
    return PulseShape(raw * scale, alpha, float(beta), int(span_symbols), float(scale), float(taper))


def add_awgn(samples, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of variance ``n0`` to every sample.

    Streams are arrays of any shape (typically antennas x samples); every
    entry gets an independent draw. With unit-energy symbols and unit-energy
    pulses, ``n0`` per sample is N0 at symbol level after matched filtering.
    """
    x = np.asarray(samples, dtype=complex)
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    if n0 == 0:
        return x.copy()
    s = np.sqrt(n0 / 2.0)
    return x + s * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))


def esn0_to_n0(esn0_db: float) -> float:
    """Noise variance per sample for unit symbol energy."""
    return float(10.0 ** (-esn0_db / 10.0))
