import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsalink import channel as chn


def test_etu_profile_shape():
    p = chn.etu_profile()
    assert p.num_taps == 9
    assert p.max_delay == pytest.approx(5e-6)
    assert p.powers.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(p.delays * 1e9, [0, 50, 120, 200, 230, 500, 1600, 2300, 5000])
    rel = 10 * np.log10(p.powers / p.powers.max())
    np.testing.assert_allclose(rel, [-1, -1, -1, 0, 0, 0, -3, -5, -7], atol=1e-9)


@pytest.mark.parametrize(
    "delays,powers",
    [([], []), ([0, 1e-6], [1.0]), ([1e-6, 0], [0.5, 0.5]), ([0, 1e-6], [0.5, 0.6]), ([0], [-1.0])],
)
def test_profile_invariants_rejected(delays, powers):
    with pytest.raises(ValueError):
        chn.TapDelayProfile(np.array(delays), np.array(powers))


def test_draw_single_tap_unit_power():
    rng = np.random.default_rng(0)
    c = chn.draw_channel(chn.single_tap_profile(), 100000, rng).gains
    assert np.mean(np.abs(c) ** 2) == pytest.approx(1.0, rel=0.02)


def test_draw_deterministic_and_rejects_zero():
    p = chn.etu_profile()
    a = chn.draw_channel(p, 4, np.random.default_rng(3)).gains
    b = chn.draw_channel(p, 4, np.random.default_rng(3)).gains
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        chn.draw_channel(p, 0, np.random.default_rng(0))


def test_draw_column_variances():
    p = chn.etu_profile()
    rng = np.random.default_rng(1)
    g = np.concatenate([chn.draw_channel(p, 4, rng).gains for _ in range(10000)])
    var = np.mean(np.abs(g) ** 2, axis=0)
    # |c|^2 is exponential, so the std of the mean is sigma^2 / sqrt(n)
    tol = 3 * p.powers / np.sqrt(g.shape[0])
    assert np.all(np.abs(var - p.powers) < tol)


def test_total_power_per_draw():
    p = chn.etu_profile()
    rng = np.random.default_rng(2)
    tot = [np.sum(np.abs(chn.draw_channel(p, 1, rng).gains) ** 2) for _ in range(10000)]
    assert np.mean(tot) == pytest.approx(1.0, rel=0.02)


def test_cfr_flat_and_phase():
    rng = np.random.default_rng(0)
    ch = chn.draw_channel(chn.single_tap_profile(), 3, rng)
    cfr = chn.cfr_on_grid(ch, [-1e6, 0.0, 2e6])
    np.testing.assert_allclose(cfr.values, np.repeat(ch.gains, 3, axis=1))

    ch1 = chn.draw_channel(chn.single_tap_profile(1e-6), 1, rng)
    v = chn.cfr_on_grid(ch1, [0.0, 5e5]).values[0]
    assert v[1] / v[0] == pytest.approx(-1.0)


def test_cfr_matches_direct_sum():
    rng = np.random.default_rng(4)
    ch = chn.draw_channel(chn.etu_profile(), 5, rng)
    freqs = (np.arange(512) - 256) * 15e3
    got = chn.cfr_on_grid(ch, freqs).values
    ref = np.zeros_like(got)
    for m in range(5):
        for k, f in enumerate(freqs):
            ref[m, k] = sum(ch.gains[m, l] * np.exp(-2j * np.pi * f * ch.profile.delays[l]) for l in range(9))
    assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-12


def test_cfr_rejects_nonfinite():
    ch = chn.draw_channel(chn.etu_profile(), 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        chn.cfr_on_grid(ch, [0.0, np.nan])


def test_grid_snapped_etu_memory():
    ch = chn.draw_channel(chn.etu_profile(), 2, np.random.default_rng(0))
    d = chn.discretize(ch, 7.68e6)
    assert d.memory == 38
    assert d.kind is chn.DiscreteKind.GRID_SNAPPED
    nz = np.flatnonzero(np.any(d.taps != 0, axis=0))
    expected = np.unique(np.rint(ch.profile.delays * 7.68e6).astype(int))
    assert np.array_equal(nz, expected)


def test_grid_snapped_single_tap_impulse():
    ch = chn.draw_channel(chn.single_tap_profile(), 3, np.random.default_rng(0))
    d = chn.discretize(ch, 1e6)
    np.testing.assert_array_equal(d.taps[:, 0], ch.gains[:, 0])
    assert d.taps.shape == (3, 1)


def test_discretize_errors():
    ch = chn.draw_channel(chn.etu_profile(), 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        chn.discretize(ch, 7.68e6, length=0)
    with pytest.raises(ValueError):
        chn.discretize(ch, 7.68e6, "pulse-composite", length=10)
    with pytest.raises(ValueError):
        chn.discretize(ch, -1.0)


def test_grid_dft_equals_cfr():
    ch = chn.draw_channel(chn.etu_profile(), 4, np.random.default_rng(5))
    fs = 7.68e6
    d = chn.discretize(ch, fs)
    k = np.fft.fftfreq(512) * 512
    dft = np.fft.fft(d.taps, 512, axis=1)
    snapped = chn.snap_to_grid(ch, fs)
    cfr = chn.cfr_on_grid(snapped, k * fs / 512).values
    assert np.max(np.abs(dft - cfr)) / np.max(np.abs(cfr)) < 1e-10


def test_pulse_composite_fractional_delays():
    # a pulse that is 1 only at t == 0 picks out taps whose delays hit the grid exactly
    prof = chn.TapDelayProfile(np.array([0.0, 2e-6]), np.array([0.5, 0.5]))
    ch = chn.draw_channel(prof, 2, np.random.default_rng(0))
    d = chn.discretize(ch, 1e6, "pulse-composite", pulse=lambda t: np.isclose(t, 0, atol=1e-12).astype(float), length=4)
    np.testing.assert_allclose(d.taps[:, 0], ch.gains[:, 0])
    np.testing.assert_allclose(d.taps[:, 2], ch.gains[:, 1])
    assert np.all(d.taps[:, [1, 3]] == 0)


def test_orthogonality_defect():
    rng = np.random.default_rng(6)
    assert chn.orthogonality_defect(chn.draw_channel(chn.single_tap_profile(), 10, rng)) == 0.0
    p = chn.etu_profile()
    d64 = np.mean([chn.orthogonality_defect(chn.draw_channel(p, 64, rng)) for _ in range(1000)])
    d256 = np.mean([chn.orthogonality_defect(chn.draw_channel(p, 256, rng)) for _ in range(1000)])
    assert d64 / d256 == pytest.approx(2.0, rel=0.3)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_filter_through_matches_numpy(M, seed):
    rng = np.random.default_rng(seed)
    ch = chn.draw_channel(chn.etu_profile(), M, rng)
    d = chn.discretize(ch, 7.68e6)
    x = chn.complex_normal(rng, 50)
    y = chn.filter_through(d, x)
    for m in range(M):
        np.testing.assert_allclose(y[m], np.convolve(x, d.taps[m]), atol=1e-12)
