"""Seeded Monte-Carlo trials and campaigns over waveform, array size, users, MCS and SNR.

A trial sends one turbo block per user through independently drawn channels,
detects every user with its own matched-filter receiver, decodes, and records
block errors. Trial seeds derive from ``(master_seed, point_index,
trial_index)`` through :class:`numpy.random.SeedSequence`, so results do not
depend on how trials are scheduled across workers.

Two fidelity levels are available:

``antenna``
    Full per-antenna waveforms: superposition of all users at each of the M
    antennas, AWGN per antenna sample, then the receivers in ``ofdm``/``sc``.
``combined``
    The same receivers evaluated after combining. The signal and
    interference terms are identical to the ``antenna`` path; the noise is
    drawn directly with its exact post-combining covariance for each user.
    Noise is therefore independent across users rather than shared, which
    leaves every per-user BLER unchanged. Much faster for large M.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import channel as chn
from .metrics import CSV_COLUMNS, MetricRecord, bler_estimate, psd_welch, relative_energy_efficiency, spectral_efficiency
from .modem import ModScheme, add_awgn, constellation, esn0_to_n0, llr_demap, modulate_bits
from .ofdm import OfdmConfig, ofdm_rx_mf, ofdm_rx_traditional, ofdm_tx
from .sc import ScConfig, _correlate, composite_channel, mf_window, sc_channel_output, sc_rx_mf, sc_tx
from .turbo import PAYLOAD_BITS, TurboConfig, padded_block, turbo_decode, turbo_encode

log = logging.getLogger(__name__)

WAVEFORMS = ("ofdm", "sc")
PROFILES = {"etu": chn.etu_profile, "flat": chn.single_tap_profile}
# keeps LLRs finite when the configured noise is exactly zero
VARIANCE_FLOOR = 1e-12


class ConfigError(ValueError):
    """A link or campaign configuration violates one of its invariants."""


class CampaignIOError(OSError):
    """Writing results failed; ``records`` holds every point completed so far."""

    def __init__(self, message: str, records: list):
        super().__init__(message)
        self.records = records


@dataclass(frozen=True)
class LinkConfig:
    waveform: str = "ofdm"
    M: int = 100
    K: int = 1
    scheme: str = "QPSK"
    esn0_db: float = 0.0  # per receive antenna; +inf means noiseless
    profile: str = "etu"
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    sc: ScConfig = field(default_factory=ScConfig)
    turbo: TurboConfig = field(default_factory=TurboConfig)
    ofdm_receiver: str = "traditional"
    fidelity: str = "combined"
    payload_bits: int = PAYLOAD_BITS

    @property
    def n0(self) -> float:
        return 0.0 if math.isinf(self.esn0_db) and self.esn0_db > 0 else esn0_to_n0(self.esn0_db)

    @property
    def mod(self) -> ModScheme:
        return ModScheme.parse(self.scheme)

    @property
    def channel_profile(self) -> chn.TapDelayProfile:
        return PROFILES[self.profile]()

    def ofdm_memory(self) -> int:
        delays = self.channel_profile.delays
        return int(np.rint(delays[-1] * self.ofdm.sample_rate))

    def validate(self) -> "LinkConfig":
        if self.waveform not in WAVEFORMS:
            raise ConfigError(f"waveform must be one of {WAVEFORMS}, got {self.waveform!r}")
        if self.M < 1 or self.K < 1:
            raise ConfigError("M and K must be >= 1")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown channel profile {self.profile!r}")
        if self.fidelity not in ("antenna", "combined"):
            raise ConfigError(f"fidelity must be 'antenna' or 'combined', got {self.fidelity!r}")
        if self.ofdm_receiver not in ("traditional", "mf"):
            raise ConfigError(f"ofdm_receiver must be 'traditional' or 'mf', got {self.ofdm_receiver!r}")
        if math.isnan(self.esn0_db) or self.esn0_db == -math.inf:
            raise ConfigError("esn0_db must be finite or +inf")
        try:
            self.mod
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 < self.payload_bits <= self.turbo.info_length:
            raise ConfigError("payload must fit the turbo block")
        if self.turbo.codeword_length % self.mod.bits_per_symbol:
            raise ConfigError("codeword length not a multiple of bits per symbol")
        if self.waveform == "ofdm":
            L = self.ofdm_memory()
            if self.ofdm.cp_length < L:
                raise ConfigError(
                    f"cp_length >= channel memory violated: CP {self.ofdm.cp_length} < L {L} samples"
                )
        if self.waveform == "sc" and self.sc.mf_length is not None:
            if self.sc.mf_length < 1:
                raise ConfigError("mf_length must be >= 1")
        return self


@dataclass
class TrialResult:
    errors: np.ndarray  # one flag per user
    seed: int
    symbol_mse: np.ndarray  # per user, data symbols only
    interference_variance: np.ndarray  # modelled residual ISI per user (SC), zeros for OFDM

    def __post_init__(self):
        if not (self.errors.shape == self.symbol_mse.shape == self.interference_variance.shape):
            raise ValueError("per-user arrays must share one length")


def derive_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    """Stable 64-bit seed for one trial of one campaign point."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(point_index), int(trial_index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# --- per-user payload -----------------------------------------------------------


@dataclass
class _UserTx:
    payload: np.ndarray
    symbols: np.ndarray  # coded data symbols, followed by filler in OFDM
    n_data: int
    gains: chn.ChannelRealization


def _make_users(link: LinkConfig, rng: np.random.Generator) -> List[_UserTx]:
    users = []
    profile = link.channel_profile
    N = link.ofdm.used_subcarriers
    pts = constellation(link.mod)
    for _ in range(link.K):
        payload = rng.integers(0, 2, link.payload_bits, dtype=np.int64)
        sym = modulate_bits(turbo_encode(padded_block(payload, link.turbo), link.turbo), link.mod).symbols
        n_data = sym.size
        if link.waveform == "ofdm" and n_data % N:
            filler = pts[rng.integers(0, pts.size, N - n_data % N)]
            sym = np.concatenate([sym, filler])
        ch = chn.draw_channel(profile, link.M, rng)
        users.append(_UserTx(payload, sym, n_data, ch))
    return users


def _decode(link: LinkConfig, user: _UserTx, estimates: np.ndarray, variance) -> tuple:
    est = estimates[: user.n_data]
    var = np.maximum(np.broadcast_to(variance, estimates.shape)[: user.n_data], VARIANCE_FLOOR)
    llr = llr_demap(est, var, link.mod)
    bits, _ = turbo_decode(llr, link.turbo)
    err = bool(np.any(bits[: link.payload_bits] != user.payload))
    mse = float(np.mean(np.abs(est - user.symbols[: user.n_data]) ** 2))
    return err, mse


# --- OFDM ------------------------------------------------------------------------


def _ofdm_trial(link: LinkConfig, users: List[_UserTx], rng: np.random.Generator):
    cfg = link.ofdm
    fs = cfg.sample_rate
    dchans = [chn.discretize(u.gains, fs) for u in users]
    n0 = link.n0
    n_sym = users[0].symbols.size // cfg.used_subcarriers
    out = []
    if link.fidelity == "antenna":
        frames = [ofdm_tx(u.symbols, cfg) for u in users]
        n = frames[0].samples.size
        rx = np.zeros((link.M, n), dtype=complex)
        for f, d in zip(frames, dchans):
            rx += chn.filter_through(d, f.samples)[:, :n]
        rx = add_awgn(rx, n0, rng)
        for u, d in zip(users, dchans):
            if link.ofdm_receiver == "mf":
                det = ofdm_rx_mf(rx, d, cfg, n_sym)
            else:
                cfr = chn.cfr_on_grid(chn.snap_to_grid(u.gains, fs), cfg.bin_frequencies)
                det = ofdm_rx_traditional(rx, cfr, cfg, n_sym)
            var = np.tile(n0 / det.gain, n_sym)
            out.append((det.estimates, var, 0.0))
        return out

    H = [np.fft.fft(d.taps, n=cfg.fft_size, axis=1)[:, cfg.fft_indices] for d in dchans]
    X = [u.symbols.reshape(n_sym, cfg.used_subcarriers) for u in users]
    for i in range(link.K):
        A = np.sum(np.abs(H[i]) ** 2, axis=0)
        Y = np.zeros((n_sym, cfg.used_subcarriers), dtype=complex)
        for j in range(link.K):
            Y += np.sum(H[i].conj() * H[j], axis=0) * X[j]
        if n0 > 0:
            Y += np.sqrt(n0 * A) * chn.complex_normal(rng, Y.shape)
        out.append(((Y / A).ravel(), np.tile(n0 / A, n_sym), 0.0))
    return out


# --- single carrier --------------------------------------------------------------


def _sc_trial(link: LinkConfig, users: List[_UserTx], rng: np.random.Generator):
    cfg = link.sc
    n0 = link.n0
    dchans = [composite_channel(u.gains, cfg) for u in users]
    n = users[0].symbols.size
    out = []
    if link.fidelity == "antenna":
        rx = sum(sc_channel_output(u.symbols, d, cfg) for u, d in zip(users, dchans))
        rx = add_awgn(rx, n0, rng)
        for d in dchans:
            det = sc_rx_mf(rx, d, cfg, n, n0)
            out.append((det.estimates, det.noise_variance, det.isi_variance))
        return out

    alpha = cfg.oversample_factor
    Lg = dchans[0].taps.shape[1]
    W = Lg if cfg.mf_length is None else cfg.mf_length
    nfft = 1 << int(math.ceil(math.log2(n * alpha + W)))
    for i, di in enumerate(dchans):
        a = mf_window(di, W)
        g = di.taps[:, a : a + W]
        gain = float(np.sum(np.abs(g) ** 2))
        lags = np.arange(-(W - 1), Lg) - a
        grid = lags % alpha == 0
        d = lags[grid] // alpha
        z = np.zeros(n, dtype=complex)
        isi = 0.0
        for j, (u, dj) in enumerate(zip(users, dchans)):
            c = _correlate(dj.taps, g)[grid]
            full = np.convolve(u.symbols, c)
            z += full[-d[0] : -d[0] + n]
            if j == i:
                isi = float((np.sum(np.abs(c) ** 2) - gain**2) / gain**2)
        if n0 > 0:
            shape = np.sqrt(np.sum(np.abs(np.fft.fft(g, nfft, axis=1)) ** 2, axis=0))
            w = chn.complex_normal(rng, nfft, n0)
            z += np.fft.ifft(shape * np.fft.fft(w))[: n * alpha : alpha]
        out.append((z / gain, n0 / gain + isi, isi))
    return out


def simulate_trial(link: LinkConfig, trial_seed: int) -> TrialResult:
    """Run one seeded trial: K users, one turbo block each."""
    link.validate()
    rng = np.random.default_rng(trial_seed)
    users = _make_users(link, rng)
    detections = _ofdm_trial(link, users, rng) if link.waveform == "ofdm" else _sc_trial(link, users, rng)
    errors, mses, isis = [], [], []
    for u, (est, var, isi) in zip(users, detections):
        err, mse = _decode(link, u, est, var)
        errors.append(err)
        mses.append(mse)
        isis.append(isi)
    return TrialResult(np.array(errors), int(trial_seed), np.array(mses), np.array(isis))


# --- campaigns -------------------------------------------------------------------


@dataclass
class CampaignConfig:
    waveforms: Sequence[str] = ("ofdm", "sc")
    M: Sequence[int] = (100,)
    K: Sequence[int] = (1,)
    schemes: Sequence[str] = ("QPSK",)
    esn0_db: Sequence[float] = (-21.0,)
    blocks_per_point: int = 100
    min_block_errors: int = 200
    max_blocks_per_point: int = 20000
    master_seed: int = 1
    output: str = "results.csv"
    channel_profile: str = "etu"
    ofdm: dict = field(default_factory=dict)
    sc: dict = field(default_factory=dict)
    turbo: dict = field(default_factory=dict)
    ofdm_receiver: str = "traditional"
    fidelity: str = "combined"
    batch_size: int = 20

    def __post_init__(self):
        for name in ("waveforms", "M", "K", "schemes", "esn0_db"):
            val = getattr(self, name)
            if isinstance(val, (str, int, float)):
                val = [val]
            val = list(val)
            if not val:
                raise ConfigError(f"{name} grid must not be empty")
            setattr(self, name, val)
        if self.blocks_per_point < 1:
            raise ConfigError("blocks_per_point must be >= 1")
        if self.max_blocks_per_point < self.blocks_per_point:
            raise ConfigError("max_blocks_per_point must be >= blocks_per_point")
        if self.min_block_errors < 0:
            raise ConfigError("min_block_errors must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        for snr in self.esn0_db:
            if not math.isfinite(float(snr)) and float(snr) != math.inf:
                raise ConfigError(f"Es/N0 value {snr} is not usable")

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown campaign keys: {sorted(unknown)}")
        return cls(**data)

    def link_template(self) -> LinkConfig:
        ofdm = OfdmConfig(**self.ofdm)
        sc_kwargs = dict(self.sc)
        sc_kwargs.setdefault("symbol_rate", ofdm.net_symbol_rate)
        try:
            return LinkConfig(
                profile=self.channel_profile,
                ofdm=ofdm,
                sc=ScConfig(**sc_kwargs),
                turbo=TurboConfig(**self.turbo),
                ofdm_receiver=self.ofdm_receiver,
                fidelity=self.fidelity,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def points(self) -> List[LinkConfig]:
        base = self.link_template()
        pts = []
        for wf, M, K, scheme, snr in itertools.product(self.waveforms, self.M, self.K, self.schemes, self.esn0_db):
            pts.append(replace(base, waveform=wf, M=int(M), K=int(K), scheme=str(scheme), esn0_db=float(snr)).validate())
        return pts


def _run_one(args):
    link, seed = args
    return simulate_trial(link, seed)


class _Runner:
    """Executes trial batches in-process or on a process pool, always in trial order."""

    def __init__(self, workers: int):
        self.workers = max(1, int(workers))
        self.pool = ProcessPoolExecutor(self.workers) if self.workers > 1 else None

    def map(self, link: LinkConfig, seeds: Sequence[int]) -> List[TrialResult]:
        if self.pool is None:
            return [simulate_trial(link, s) for s in seeds]
        return list(self.pool.map(_run_one, [(link, s) for s in seeds]))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def run_point(
    link: LinkConfig,
    point_index: int,
    master_seed: int,
    blocks_per_point: int,
    min_block_errors: int,
    max_blocks: int,
    batch_size: int = 20,
    runner: Optional[_Runner] = None,
):
    """Trials for one grid point; returns ``(blocks, block_errors)``.

    Runs until at least ``blocks_per_point`` blocks and ``min_block_errors``
    errors are collected, capped at ``max_blocks``. The check happens after
    whole batches, so the count is independent of the worker count.
    """
    own = runner is None
    runner = runner or _Runner(1)
    blocks = errors = trial = 0
    try:
        while True:
            if blocks >= max_blocks or (blocks >= blocks_per_point and errors >= min_block_errors):
                break
            remaining = math.ceil((max_blocks - blocks) / link.K)
            n = min(batch_size, remaining)
            seeds = [derive_seed(master_seed, point_index, trial + t) for t in range(n)]
            for res in runner.map(link, seeds):
                blocks += res.errors.size
                errors += int(res.errors.sum())
            trial += n
    finally:
        if own:
            runner.close()
    return blocks, errors


def make_record(link: LinkConfig, blocks: int, errors: int, seed: int) -> MetricRecord:
    bler, (lo, hi) = bler_estimate(errors, blocks)
    code_rate = 1.0 / 3.0
    bps = link.mod.bits_per_symbol
    net_rate = link.ofdm.net_symbol_rate if link.waveform == "ofdm" else link.sc.symbol_rate
    se = spectral_efficiency(bler, bps, code_rate, net_rate, link.ofdm.occupied_bandwidth)
    overhead = link.ofdm.cp_overhead if link.waveform == "ofdm" else 1.0
    ee = relative_energy_efficiency(se, link.esn0_db, overhead) if math.isfinite(link.esn0_db) else 0.0
    return MetricRecord(
        waveform=link.waveform,
        M=link.M,
        K=link.K,
        scheme=link.mod.value,
        code_rate=code_rate,
        esn0_db=link.esn0_db,
        blocks=blocks,
        block_errors=errors,
        bler=bler,
        bler_lo=lo,
        bler_hi=hi,
        se_bps_hz=se,
        ee_relative=ee,
        seed=int(seed),
    )


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_records(path, records: Iterable[MetricRecord]) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            row = r.row()
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def read_records(path) -> List[MetricRecord]:
    with open(path, newline="") as fh:
        return [MetricRecord.from_row(row) for row in csv.DictReader(fh)]


def _write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_plot_data(records: Sequence[MetricRecord], base: Path, psd: Optional[dict] = None) -> List[Path]:
    """One CSV per figure analog next to ``base``: BLER/SE/EE vs SNR, BLER vs M, PSD."""
    stem = base.with_suffix("")
    key = ("waveform", "M", "K", "scheme")
    paths = []
    ordered = sorted(records, key=lambda r: (r.waveform, r.K, r.scheme, r.M, r.esn0_db))
    for name, cols in (
        ("bler_vs_snr", ("bler", "bler_lo", "bler_hi")),
        ("se_vs_snr", ("se_bps_hz",)),
        ("ee_vs_snr", ("ee_relative",)),
    ):
        p = Path(f"{stem}_{name}.csv")
        _write_table(p, key + ("esn0_db",) + cols, ([getattr(r, c) for c in key + ("esn0_db",) + cols] for r in ordered))
        paths.append(p)
    by_m = sorted(records, key=lambda r: (r.waveform, r.K, r.scheme, r.esn0_db, r.M))
    p = Path(f"{stem}_bler_vs_m.csv")
    cols = ("waveform", "K", "scheme", "esn0_db", "M", "bler", "bler_lo", "bler_hi")
    _write_table(p, cols, ([getattr(r, c) for c in cols] for r in by_m))
    paths.append(p)
    if psd is not None:
        p = Path(f"{stem}_psd.csv")
        _write_table(p, ("frequency_hz", "ofdm_psd_db", "sc_psd_db"), zip(psd["frequency"], psd["ofdm_db"], psd["sc_db"]))
        paths.append(p)
    return paths


def run_campaign(cfg: CampaignConfig, workers: int = 1, emit_plot_data: bool = True, progress=None) -> List[MetricRecord]:
    """Iterate the campaign grid, write the CSV after every point, then the plot-data files."""
    points = cfg.points()
    records: List[MetricRecord] = []
    runner = _Runner(workers)
    out = Path(cfg.output)
    try:
        for idx, link in enumerate(points):
            blocks, errors = run_point(
                link,
                idx,
                cfg.master_seed,
                cfg.blocks_per_point,
                cfg.min_block_errors,
                cfg.max_blocks_per_point,
                cfg.batch_size,
                runner,
            )
            rec = make_record(link, blocks, errors, cfg.master_seed)
            records.append(rec)
            log.info("point %d/%d %s M=%d K=%d %s %.2f dB: %d/%d", idx + 1, len(points),
                     link.waveform, link.M, link.K, link.mod.value, link.esn0_db, errors, blocks)
            if progress is not None:
                progress(rec)
            try:
                write_records(out, records)
            except OSError as exc:
                raise CampaignIOError(f"cannot write {out}: {exc}", list(records)) from exc
    finally:
        runner.close()
    if emit_plot_data:
        try:
            write_plot_data(records, out, transmit_psd(cfg.link_template(), seed=cfg.master_seed))
        except OSError as exc:
            raise CampaignIOError(f"cannot write plot data next to {out}: {exc}", list(records)) from exc
    return records


# --- sweeps and spectra ----------------------------------------------------------


def crossing(xs: Sequence[float], blers: Sequence[float], target: float = 1e-2) -> float:
    """Abscissa where BLER first falls through ``target``, log-linear interpolation.

    ``xs`` must be increasing (SNR or antenna count). Returns nan when the
    curve never brackets the target.
    """
    xs = np.asarray(xs, dtype=float)
    b = np.asarray(blers, dtype=float)
    for k in range(len(xs) - 1):
        if b[k] >= target > b[k + 1]:
            if b[k + 1] <= 0:
                return float(xs[k + 1])
            y0, y1 = math.log10(b[k]), math.log10(b[k + 1])
            return float(xs[k] + (math.log10(target) - y0) * (xs[k + 1] - xs[k]) / (y1 - y0))
    return float("nan")


@dataclass
class SweepPoint:
    x: float
    blocks: int
    errors: int

    @property
    def bler(self) -> float:
        return self.errors / self.blocks


def sweep_snr(
    link: LinkConfig,
    start: float,
    step: float = 0.1,
    target: float = 1e-2,
    upper: float = 0.5,
    min_block_errors: int = 200,
    blocks_per_point: int = 200,
    max_blocks: int = 100000,
    master_seed: int = 1,
    max_points: int = 60,
    runner: Optional[_Runner] = None,
) -> List[SweepPoint]:
    """Es/N0 staircase through the waterfall.

    Steps down from ``start`` until BLER exceeds ``upper``, then up until it
    falls below ``target``. Seeds depend on the grid position only, so two
    waveforms swept on the same grid share payload and channel draws.
    """
    pts = {}

    def run(i):
        if i not in pts:
            snr = round(start + i * step, 6)
            b, e = run_point(replace(link, esn0_db=snr), 100000 + i, master_seed, blocks_per_point,
                             min_block_errors, max_blocks, runner=runner)
            pts[i] = SweepPoint(snr, b, e)
            log.info("%s M=%d %.2f dB: %d/%d", link.waveform, link.M, snr, e, b)
        return pts[i]

    i = 0
    while run(i).bler <= upper and len(pts) < max_points:
        i -= 1
    i = max(pts)
    while run(i).bler >= target and len(pts) < max_points:
        i += 1
    return [pts[k] for k in sorted(pts)]


def sweep_antennas(
    link: LinkConfig,
    start: int,
    step: int = 4,
    target: float = 1e-2,
    min_block_errors: int = 200,
    blocks_per_point: int = 200,
    max_blocks: int = 100000,
    master_seed: int = 1,
    max_points: int = 30,
    runner: Optional[_Runner] = None,
) -> List[SweepPoint]:
    """Array sizes ``start + i * step`` until BLER brackets ``target``."""
    pts = {}

    def run(i):
        if i not in pts:
            M = start + i * step
            if M < 1:
                raise ConfigError("antenna sweep left the valid range")
            b, e = run_point(replace(link, M=M), 200000 + i, master_seed, blocks_per_point,
                             min_block_errors, max_blocks, runner=runner)
            pts[i] = SweepPoint(M, b, e)
            log.info("%s M=%d %.2f dB: %d/%d", link.waveform, M, link.esn0_db, e, b)
        return pts[i]

    i = 0
    if run(0).bler >= target:
        while run(i).bler >= target and len(pts) < max_points:
            i += 1
    else:
        while run(i).bler < target and len(pts) < max_points:
            i -= 1
    return [pts[k] for k in sorted(pts)]


def transmit_psd(link: LinkConfig, n_symbols: int = 400000, oversample: int = 8, seed: int = 0,
                 segment_length: int = 4096) -> dict:
    """Welch PSD of the OFDM and SC transmit signals on a common fine grid.

    OFDM is synthesised with an ``oversample``-times larger IFFT (rectangular
    symbol pulse, CP scaled alike); SC uses the RRC chain at ``oversample``
    samples per symbol. Both are normalized to 0 dB at band centre.
    """
    rng = np.random.default_rng(seed)
    ocfg = link.ofdm
    pts = constellation("QPSK")
    fine = OfdmConfig(
        fft_size=ocfg.fft_size * oversample,
        used_subcarriers=ocfg.used_subcarriers,
        cp_length=ocfg.cp_length * oversample,
        subcarrier_spacing=ocfg.subcarrier_spacing,
    )
    n_ofdm = max(1, n_symbols // ocfg.used_subcarriers)
    x = pts[rng.integers(0, 4, n_ofdm * ocfg.used_subcarriers)]
    ofdm_sig = ofdm_tx(x, fine).samples
    f_o, p_o = psd_welch(ofdm_sig, fine.sample_rate, segment_length)

    scfg = replace(link.sc, oversample_factor=oversample, mf_length=None)
    sc_sig = sc_tx(pts[rng.integers(0, 4, n_symbols)], scfg)
    f_s, p_s = psd_welch(sc_sig, scfg.sample_rate, segment_length)
    p_s_on_o = np.interp(f_o, f_s, p_s, left=np.nan, right=np.nan)

    def db(p, f):
        ref = np.mean(p[np.abs(f) < 0.25 * ocfg.occupied_bandwidth])
        return 10 * np.log10(p / ref)

    return {
        "frequency": f_o,
        "ofdm_db": db(p_o, f_o),
        "sc_db": db(p_s_on_o, f_o),
        "sc_frequency": f_s,
        "sc_native_db": db(p_s, f_s),
        "occupied_bandwidth": ocfg.occupied_bandwidth,
        "sc_symbol_rate": link.sc.symbol_rate,
        "rolloff": link.sc.rolloff,
    }


def config_to_dict(cfg: CampaignConfig) -> dict:
    d = asdict(cfg)
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
