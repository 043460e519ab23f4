"""Command-line entry point: ``complexity``, ``run``, ``psd`` and ``sweep-antennas``.

Exit codes: 0 success, 1 configuration error, 2 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import yaml

from . import harness
from .metrics import RECEIVER_KINDS, complexity_table

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def sci2(value: int) -> str:
    """Two significant figures as ``m.m x 10^e``."""
    if value == 0:
        return "0"
    e = int(math.floor(math.log10(abs(value))))
    m = round(value / 10**e, 1)
    if m >= 10:
        m, e = m / 10, e + 1
    return f"{m:.1f}x10^{e}"


def load_config(path) -> harness.CampaignConfig:
    text = Path(path).read_text()
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise harness.ConfigError("config file must hold a mapping of campaign keys")
    return harness.CampaignConfig.from_dict(data)


def _ints(text: str):
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_complexity(args) -> int:
    table = complexity_table(args.antennas, N_FFT=args.fft_size, N=args.used, L=args.memory, alpha=args.alpha)
    if args.json:
        print(json.dumps({"M": args.antennas, **table}))
        return EXIT_OK
    width = max(len(k) for k in RECEIVER_KINDS)
    print(f"{'receiver':<{width}}  " + "  ".join(f"{'M=' + str(m):>18}" for m in args.antennas))
    for kind in RECEIVER_KINDS:
        cells = "  ".join(f"{v:>8d} ({sci2(v):>8})" for v in table[kind])
        print(f"{kind:<{width}}  {cells}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    records = harness.run_campaign(cfg, workers=args.workers, emit_plot_data=not args.no_plot_data)
    print(f"{len(records)} points written to {cfg.output}")
    return EXIT_OK


def cmd_psd(args) -> int:
    cfg = load_config(args.config) if args.config else harness.CampaignConfig()
    data = harness.transmit_psd(cfg.link_template(), n_symbols=args.symbols, oversample=args.oversample, seed=args.seed)
    out = Path(args.output)
    harness._write_table(out, ("frequency_hz", "ofdm_psd_db", "sc_psd_db"),
                         zip(data["frequency"], data["ofdm_db"], data["sc_db"]))
    print(f"PSD data written to {out}")
    return EXIT_OK


def cmd_sweep_antennas(args) -> int:
    cfg = load_config(args.config) if args.config else harness.CampaignConfig()
    cfg.M = args.antennas
    cfg.esn0_db = [args.esn0]
    if args.waveforms:
        cfg.waveforms = args.waveforms.split(",")
    if args.blocks is not None:
        cfg.blocks_per_point = args.blocks
        cfg.max_blocks_per_point = max(cfg.max_blocks_per_point, args.blocks)
    if args.min_errors is not None:
        cfg.min_block_errors = args.min_errors
    if args.seed is not None:
        cfg.master_seed = args.seed
    cfg.output = args.output
    cfg.__post_init__()
    records = harness.run_campaign(cfg, workers=args.workers)
    for r in records:
        print(f"{r.waveform:>4} M={r.M:<5d} BLER={r.bler:.4g} [{r.bler_lo:.3g}, {r.bler_hi:.3g}] ({r.block_errors}/{r.blocks})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsalink", description="OFDM vs single-carrier massive-MIMO uplink simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("complexity", help="multiplication counts for the three receivers")
    c.add_argument("--antennas", type=_ints, default=[2, 8, 32, 128, 512])
    c.add_argument("--fft-size", type=int, default=512)
    c.add_argument("--used", type=int, default=300)
    c.add_argument("--memory", type=int, default=38, help="channel memory L in samples")
    c.add_argument("--alpha", type=int, default=2)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_complexity)

    r = sub.add_parser("run", help="run a campaign from a YAML or JSON config")
    r.add_argument("config")
    r.add_argument("--output")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--no-plot-data", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("psd", help="transmit PSD of both waveforms")
    s.add_argument("--config")
    s.add_argument("--output", default="psd.csv")
    s.add_argument("--symbols", type=int, default=400000)
    s.add_argument("--oversample", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_psd)

    a = sub.add_parser("sweep-antennas", help="BLER versus M at a fixed Es/N0")
    a.add_argument("--config")
    a.add_argument("--esn0", type=float, required=True)
    a.add_argument("--antennas", type=_ints, default=[60, 80, 100, 120, 140])
    a.add_argument("--waveforms")
    a.add_argument("--blocks", type=int)
    a.add_argument("--min-errors", type=int)
    a.add_argument("--seed", type=int)
    a.add_argument("--output", default="sweep_antennas.csv")
    a.add_argument("--workers", type=int, default=1)
    a.set_defaults(func=cmd_sweep_antennas)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (harness.ConfigError, yaml.YAMLError, json.JSONDecodeError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.CampaignIOError as exc:
        print(f"I/O error after {len(exc.records)} completed points: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
