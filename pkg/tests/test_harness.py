import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from lsalink import channel as chn
from lsalink import harness
from lsalink.harness import CampaignConfig, ConfigError, LinkConfig, simulate_trial
from lsalink.metrics import CSV_COLUMNS
from lsalink.ofdm import OfdmConfig


@pytest.mark.parametrize("M", [1, 4, 16])
@pytest.mark.parametrize("receiver", ["traditional", "mf"])
def test_noiseless_ofdm_error_free(M, receiver):
    link = LinkConfig(waveform="ofdm", M=M, esn0_db=math.inf, ofdm_receiver=receiver, fidelity="antenna")
    for seed in range(3):
        r = simulate_trial(link, seed)
        assert not r.errors.any()
        assert r.symbol_mse[0] < 1e-18


def test_noiseless_sc_large_array():
    link = LinkConfig(waveform="sc", M=1000, esn0_db=math.inf)
    errors = sum(simulate_trial(link, s).errors.sum() for s in range(100))
    assert errors == 0
    r = simulate_trial(replace(link, fidelity="antenna"), 0)
    assert not r.errors.any()


@pytest.mark.parametrize("waveform", ["ofdm", "sc"])
@pytest.mark.parametrize("fidelity", ["antenna", "combined"])
def test_trial_deterministic(waveform, fidelity):
    link = LinkConfig(waveform=waveform, M=8, K=2, esn0_db=-6.0, fidelity=fidelity)
    a, b = simulate_trial(link, 1234), simulate_trial(link, 1234)
    assert np.array_equal(a.errors, b.errors)
    assert np.array_equal(a.symbol_mse, b.symbol_mse)
    assert np.array_equal(a.interference_variance, b.interference_variance)
    assert a.errors.size == 2


def _users(link, seed):
    return harness._make_users(link, np.random.default_rng(seed))


@pytest.mark.parametrize("waveform", ["ofdm", "sc"])
def test_fidelity_modes_agree_noiseless(waveform):
    link = LinkConfig(waveform=waveform, M=12, K=3, esn0_db=math.inf)
    run = harness._ofdm_trial if waveform == "ofdm" else harness._sc_trial
    users = _users(link, 9)
    full = run(replace(link, fidelity="antenna"), users, np.random.default_rng(0))
    fast = run(replace(link, fidelity="combined"), users, np.random.default_rng(0))
    for (e1, v1, i1), (e2, v2, i2) in zip(full, fast):
        np.testing.assert_allclose(e2, e1, atol=1e-10)
        np.testing.assert_allclose(v2, v1, atol=1e-14)
        assert i2 == pytest.approx(i1, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("waveform", ["ofdm", "sc"])
def test_fidelity_modes_noise_covariance(waveform):
    """Noise-only outputs of both paths share variance and lag-1 covariance."""
    link = LinkConfig(waveform=waveform, M=4, K=1, esn0_db=0.0)
    run = harness._ofdm_trial if waveform == "ofdm" else harness._sc_trial
    user = _users(link, 3)[0]
    user.symbols = np.zeros_like(user.symbols)
    stats = {}
    for fid in ("antenna", "combined"):
        rng = np.random.default_rng(11)
        z = np.array([run(replace(link, fidelity=fid), [user], rng)[0][0] for _ in range(400)])
        stats[fid] = (np.mean(np.abs(z) ** 2, axis=0), np.mean(z[:, 1:] * z[:, :-1].conj(), axis=0))
    v_a, c_a = stats["antenna"]
    v_c, c_c = stats["combined"]
    # averaged over positions the two agree within Monte-Carlo error
    assert np.mean(v_c) == pytest.approx(np.mean(v_a), rel=0.03)
    assert abs(np.mean(c_c) - np.mean(c_a)) < 0.05 * np.mean(v_a)
    # position-resolved variances (OFDM: per-bin N0/A[k])
    assert np.median(np.abs(v_c / v_a - 1)) < 0.1


def test_cp_shorter_than_channel_rejected():
    link = LinkConfig(waveform="ofdm", ofdm=OfdmConfig(cp_length=36))
    with pytest.raises(ConfigError, match="cp_length >= channel memory"):
        simulate_trial(link, 0)
    # SC is unaffected by the OFDM CP
    replace(link, waveform="sc").validate()


@pytest.mark.parametrize(
    "kwargs",
    [{"waveform": "fbmc"}, {"M": 0}, {"K": 0}, {"scheme": "64QAM"}, {"fidelity": "x"}, {"esn0_db": math.nan}],
)
def test_invalid_links(kwargs):
    with pytest.raises(ConfigError):
        replace(LinkConfig(), **kwargs).validate()


def test_derive_seed():
    s = harness.derive_seed(1, 2, 3)
    assert s == harness.derive_seed(1, 2, 3)
    assert len({s, harness.derive_seed(1, 2, 4), harness.derive_seed(1, 3, 3), harness.derive_seed(2, 2, 3)}) == 4


def test_multiuser_iui_grows_with_k():
    mse = {}
    for K in (1, 5):
        link = LinkConfig(waveform="ofdm", M=32, K=K, esn0_db=math.inf)
        mse[K] = np.mean([simulate_trial(link, s).symbol_mse.mean() for s in range(5)])
    assert mse[1] < 1e-18
    # (K - 1) / M of interference power per user
    assert mse[5] == pytest.approx(4 / 32, rel=0.3)


def small_campaign(tmp_path, **kw):
    base = dict(
        waveforms=["ofdm"],
        M=[8],
        K=[1],
        schemes=["QPSK"],
        esn0_db=[-8.0],
        blocks_per_point=10,
        min_block_errors=0,
        max_blocks_per_point=10,
        master_seed=5,
        output=str(tmp_path / "out.csv"),
        batch_size=4,
    )
    base.update(kw)
    return CampaignConfig(**base)


def test_campaign_single_record(tmp_path):
    cfg = small_campaign(tmp_path)
    recs = harness.run_campaign(cfg)
    assert len(recs) == 1 and recs[0].blocks == 10
    rows = list(csv.reader(open(cfg.output)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 2
    for name in ("bler_vs_snr", "se_vs_snr", "ee_vs_snr", "bler_vs_m", "psd"):
        assert (tmp_path / f"out_{name}.csv").exists()


def test_campaign_enumeration(tmp_path):
    cfg = small_campaign(tmp_path, waveforms=["ofdm", "sc"], esn0_db=[-9.0, -8.0, -7.0])
    recs = harness.run_campaign(cfg, emit_plot_data=False)
    assert [(r.waveform, r.esn0_db) for r in recs] == [
        (w, s) for w in ("ofdm", "sc") for s in (-9.0, -8.0, -7.0)
    ]
    assert harness.read_records(cfg.output) == recs


def test_campaign_deterministic_bytes(tmp_path):
    a = small_campaign(tmp_path, output=str(tmp_path / "a.csv"), esn0_db=[-9.0, -7.0], blocks_per_point=8)
    b = replace(a, output=str(tmp_path / "b.csv"))
    harness.run_campaign(a, emit_plot_data=False)
    harness.run_campaign(b, emit_plot_data=False)
    assert open(a.output, "rb").read() == open(b.output, "rb").read()


def test_campaign_parallel_matches_serial(tmp_path):
    a = small_campaign(tmp_path, output=str(tmp_path / "a.csv"), waveforms=["ofdm", "sc"], K=[2],
                       esn0_db=[-9.0], blocks_per_point=12, max_blocks_per_point=40, min_block_errors=3)
    b = replace(a, output=str(tmp_path / "b.csv"))
    harness.run_campaign(a, workers=1, emit_plot_data=False)
    harness.run_campaign(b, workers=2, emit_plot_data=False)
    assert open(a.output, "rb").read() == open(b.output, "rb").read()


def test_stopping_rule_counts_blocks_run():
    link = LinkConfig(waveform="ofdm", M=8, K=3, esn0_db=-30.0)
    blocks, errors = harness.run_point(link, 0, 1, blocks_per_point=5, min_block_errors=0, max_blocks=50, batch_size=1)
    assert blocks == 6 and errors <= blocks
    # errors needed beyond the block target keep the point running, up to the cap
    blocks, errors = harness.run_point(link, 0, 1, 5, 10, 50, batch_size=2)
    assert errors >= 10 and blocks % 3 == 0 and blocks <= 51
    blocks, errors = harness.run_point(replace(link, esn0_db=10.0), 0, 1, 5, 10, 12, batch_size=2)
    assert errors == 0 and blocks == 12


def test_campaign_io_error_preserves_points(tmp_path):
    cfg = small_campaign(tmp_path, output=str(tmp_path / "blocker" / "x.csv"))
    (tmp_path / "blocker").write_text("not a directory")
    with pytest.raises(harness.CampaignIOError) as exc:
        harness.run_campaign(cfg)
    assert len(exc.value.records) == 1


@pytest.mark.parametrize(
    "kwargs",
    [{"M": []}, {"blocks_per_point": 0}, {"esn0_db": [float("nan")]}, {"max_blocks_per_point": 1, "blocks_per_point": 5}],
)
def test_campaign_config_invariants(kwargs):
    with pytest.raises(ConfigError):
        CampaignConfig(**kwargs)


def test_campaign_config_unknown_key():
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"antennas": [4]})


def test_crossing():
    assert harness.crossing([0, 1, 2], [0.5, 0.1, 0.001], 1e-2) == pytest.approx(1.5)
    assert math.isnan(harness.crossing([0, 1], [0.5, 0.4], 1e-2))


def test_make_record_se_ee():
    link = LinkConfig(waveform="ofdm", esn0_db=0.0)
    r_o = harness.make_record(link, 100, 0, 1)
    r_s = harness.make_record(replace(link, waveform="sc"), 100, 0, 1)
    assert r_o.se_bps_hz == pytest.approx(r_s.se_bps_hz)
    assert r_s.ee_relative / r_o.ee_relative == pytest.approx(552 / 512)


def test_two_tap_flat_profile_runs():
    link = LinkConfig(waveform="sc", M=4, profile="flat", esn0_db=0.0)
    assert simulate_trial(link, 0).errors.shape == (1,)
    assert chn.single_tap_profile().num_taps == 1
