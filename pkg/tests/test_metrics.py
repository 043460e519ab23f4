import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lsalink import metrics
from lsalink.metrics import MetricRecord


def test_complexity_examples():
    assert metrics.complexity_count("traditional-ofdm", 2) == 5208
    assert metrics.complexity_count("mf-ofdm", 512) == 22272
    assert metrics.complexity_count("sc", 2) == 156
    with pytest.raises(ValueError):
        metrics.complexity_count("fbmc", 2)
    with pytest.raises(ValueError):
        metrics.complexity_count("sc", 0)


@given(st.integers(32, 4096), st.integers(1, 100))
def test_complexity_ordering(M, L):
    trad = metrics.complexity_count("traditional-ofdm", M)
    assert trad > metrics.complexity_count("mf-ofdm", M, L=min(L, 60))
    assert trad > metrics.complexity_count("sc", M, L=min(L, 60))


def _wilson(k, n, z=1.959963984540054):
    p = k / n
    c = (2 * n * p + z * z) / (2 * (n + z * z))
    h = z * math.sqrt(z * z + 4 * n * p * (1 - p)) / (2 * (n + z * z))
    return c - h, c + h


def test_bler_estimate():
    p, (lo, hi) = metrics.bler_estimate(0, 100)
    assert p == 0 and lo == 0 and hi > 0
    p, (lo, hi) = metrics.bler_estimate(50, 100)
    assert p == 0.5 and 0.5 - lo == pytest.approx(hi - 0.5, abs=1e-15)
    p, (lo, hi) = metrics.bler_estimate(10, 1000)
    rlo, rhi = _wilson(10, 1000)
    assert abs(lo - rlo) < 1e-12 and abs(hi - rhi) < 1e-12
    with pytest.raises(ValueError):
        metrics.bler_estimate(5, 0)
    with pytest.raises(ValueError):
        metrics.bler_estimate(5, 4)


def test_spectral_efficiency():
    assert metrics.spectral_efficiency(1.0, 2, 1 / 3, 4.2e6, 4.5e6) == 0.0
    se0 = metrics.spectral_efficiency(0.0, 2, 1 / 3, 4.2e6, 4.5e6)
    assert se0 == pytest.approx(0.622, rel=1e-3)
    assert metrics.spectral_efficiency(0.5, 2, 1 / 3, 4.2e6, 4.5e6) == pytest.approx(se0 / 2)


def test_energy_efficiency():
    se = 0.6
    ratio = metrics.relative_energy_efficiency(se, 10.0) / metrics.relative_energy_efficiency(se, 10.0, (512 + 36) / 512)
    assert ratio == pytest.approx(1.070, abs=1e-3)
    assert metrics.relative_energy_efficiency(0.0, 3.0) == 0.0
    assert metrics.relative_energy_efficiency(se, 3.0 + 10 * np.log10(2)) == pytest.approx(
        metrics.relative_energy_efficiency(se, 3.0) / 2
    )
    with pytest.raises(ValueError):
        metrics.relative_energy_efficiency(se, math.inf)


def test_psd_white_noise_flat():
    rng = np.random.default_rng(0)
    x = (rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)) / np.sqrt(2)
    f, p = metrics.psd_welch(x, 1.0)
    # unit variance spread over a unit-width band
    assert np.max(np.abs(10 * np.log10(p))) < 1.0
    assert np.all(np.diff(f) > 0)


def test_psd_tone_peak_and_parseval():
    fs = 1e6
    n = np.arange(200000)
    x = np.exp(2j * np.pi * 123e3 * n / fs)
    f, p = metrics.psd_welch(x, fs)
    assert abs(f[np.argmax(p)] - 123e3) <= fs / 4096
    rng = np.random.default_rng(1)
    for sig in (rng.standard_normal(300000) * 3, x * 2 + rng.standard_normal(n.size)):
        f, p = metrics.psd_welch(sig, fs)
        assert np.sum(p) * (f[1] - f[0]) == pytest.approx(np.mean(np.abs(sig) ** 2), rel=0.01)


def test_psd_rejects_bad_segmentation():
    with pytest.raises(ValueError):
        metrics.psd_welch(np.ones(100), 1.0, 4096)
    with pytest.raises(ValueError):
        metrics.psd_welch(np.ones(10000), 1.0, 1024, overlap=1.0)


def test_metric_record_roundtrip():
    r = MetricRecord("sc", 100, 1, "QPSK", 1 / 3, -21.0, 10, 1, 0.1, 0.02, 0.4, 0.5, 0.1, 7)
    assert tuple(r.row()) == metrics.CSV_COLUMNS
    back = MetricRecord.from_row({k: str(v) for k, v in r.row().items()})
    assert back == r
    with pytest.raises(ValueError):
        MetricRecord("sc", 100, 1, "QPSK", 1 / 3, 0.0, 1, 2, 1.0, 0.0, 1.0, 0.0, 0.0, 0)
    with pytest.raises(ValueError):
        MetricRecord("sc", 100, 1, "QPSK", 1 / 3, 0.0, 10, 1, 0.1, 0.2, 0.3, 0.0, 0.0, 0)
