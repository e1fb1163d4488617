"""Command-line front end.

Subcommands emit data (CSV/JSON) for external plotting:

    pnask ser-curve     analytic (and optionally simulated) SER vs Es/N0
    pnask optimize      weighted-rate optimum over an (M, M_c, d) grid
    pnask detect        amplitude histograms and KS detectability per d
    pnask ofdm-loopback packet/file transfer through the OFDM layer

Any flag can also come from a JSON file given with ``--config`` (keys are the
flag names with dashes replaced by underscores); explicit flags win. The default
seed is read from ``PNASK_SEED``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import covert_ser, energy_per_symbol, primary_ser
from .channel import ChannelKind, ChannelModel, NoiseSpec
from .iq import write_iq
from .modem import ModemError, build_coding_map
from .montecarlo import SimConfig, amplitude_statistics, estimate_ser, scatter_export
from .ofdm import PacketFormat, assemble_subframe, frame_symbols, transfer, MAX_DATA_BYTES, N_DATA
from .optimizer import SearchSpace, optimize

SER_CURVE_SCHEMA = "ser-curve/1"
HISTOGRAM_SCHEMA = "histogram/1"
SCATTER_SCHEMA = "scatter/1"

SER_CURVE_COLUMNS = [
    "es_n0_db",
    "es_n0_linear",
    "ser_covert",
    "ser_primary",
    "sim_ser_covert",
    "sim_sigma_covert",
    "sim_ser_primary",
    "sim_sigma_primary",
    "sim_trials",
]


class CliError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("PNASK_SEED")
    return int(raw) if raw else 0


def manifest(command: str, params: dict, seed: int | None, schema: str | None = None) -> dict:
    return {
        "command": command,
        "schema": schema,
        "parameters": params,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _channel_from_args(args) -> ChannelModel:
    return ChannelModel(
        ChannelKind(args.channel),
        sigma_h=args.sigma_h,
        k_factor=args.k_factor,
        ln_mu=args.ln_mu,
        ln_sigma=args.ln_sigma,
    )


def _params(args) -> dict:
    skip = {"func", "config", "out", "out_dir", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(rows: list[list], header: list[str], out: Path | None, meta: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    if out is None:
        sys.stdout.write(buf.getvalue())
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue(), encoding="utf-8")
    _emit_json(meta, out.with_name(out.name + ".manifest.json"))


def _jsonable(obj):
    # strict JSON has no inf/nan literals
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit_json(obj, out: Path | None) -> None:
    text = json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def _db_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise CliError("--step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise CliError("empty dB range")
    return [round(start + i * step, 10) for i in range(n)]


def cmd_ser_curve(args) -> int:
    cmap = build_coding_map(args.mc, args.d)
    channel = _channel_from_args(args)
    rows = []
    for db in _db_grid(args.from_db, args.to_db, args.step):
        es_n0 = 10.0 ** (db / 10.0)
        row = [db, es_n0, covert_ser(es_n0, cmap, channel), primary_ser(es_n0, args.m, cmap, channel)]
        if args.simulate:
            cfg = SimConfig(
                args.m, args.mc, args.d, channel, db, args.simulate, args.seed, args.displacement
            )
            est = estimate_ser(cfg, workers=args.threads)
            row += [est.ser_covert, est.sigma_covert, est.ser_primary, est.sigma_primary, est.n]
        else:
            row += [None] * 5
        rows.append(row)
    params = _params(args)
    params["channel_metadata"] = channel.metadata()
    params["energy_per_symbol"] = energy_per_symbol(1.0, cmap)
    _write_csv(rows, SER_CURVE_COLUMNS, args.out, manifest("ser-curve", params, args.seed, SER_CURVE_SCHEMA))
    return 0


def _parse_point(text: str) -> tuple[float, float]:
    try:
        db, beta = text.split(":")
        return float(db), float(beta)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected DB:BETA, got {text!r}") from None


def cmd_optimize(args) -> int:
    space = SearchSpace.from_dict(
        {
            "m_values": args.m_values,
            "m_c_values": args.mc_values,
            "d_fractions": args.d_fractions,
            "d_values": args.d_values,
        }
    )
    channel = _channel_from_args(args)
    points = [tuple(p) if not isinstance(p, str) else _parse_point(p) for p in args.point]
    if not points:
        points = [(db, beta) for db in (0.0, 15.0) for beta in (0.1, 0.5, 0.9)]
    results = []
    for db, beta in points:
        res = optimize(db, beta, space, channel if channel.is_fading else None, workers=args.threads)
        results.append(res.to_dict(include_grid=args.dump_grid))
    params = _params(args)
    params["point"] = [list(p) for p in points]
    params["channel_metadata"] = channel.metadata()
    _emit_json({"manifest": manifest("optimize", params, None), "results": results}, args.out)
    return 0


def cmd_detect(args) -> int:
    channel = _channel_from_args(args)
    out_dir = Path(args.out_dir) if args.out_dir else None
    summary = []
    d_list = args.d if args.mc > 1 else [None]
    for d in d_list:
        cfg = SimConfig(args.m, args.mc, d, channel, args.snr, args.n, args.seed, args.displacement)
        report = amplitude_statistics(cfg, bins=args.bins, workers=args.threads)
        entry = {"d": d, "ks_statistic": report.ks_statistic, "n": report.n}
        if out_dir is not None:
            tag = "none" if d is None else f"{d:g}"
            rows = [
                [lo, hi, dens]
                for lo, hi, dens in zip(report.bin_edges[:-1], report.bin_edges[1:], report.density)
            ]
            meta = manifest("detect", {**_params(args), "d": d}, args.seed, HISTOGRAM_SCHEMA)
            hist = out_dir / f"hist_d{tag}.csv"
            _write_csv(rows, ["bin_low", "bin_high", "density"], hist, meta)
            entry["histogram"] = hist.name
            if args.scatter:
                pts = scatter_export(cfg, args.scatter)
                scat = out_dir / f"scatter_d{tag}.csv"
                meta = manifest("detect", {**_params(args), "d": d}, args.seed, SCATTER_SCHEMA)
                _write_csv([[p.real, p.imag] for p in pts], ["re", "im"], scat, meta)
                entry["scatter"] = scat.name
        summary.append(entry)
    params = _params(args)
    params["channel_metadata"] = channel.metadata()
    doc = {"manifest": manifest("detect", params, args.seed), "results": summary}
    _emit_json(doc, out_dir / "ks_summary.json" if out_dir else None)
    if out_dir is not None:
        _emit_json(doc, None)
    return 0


def _sha256(data: bytes | None) -> str | None:
    return None if data is None else hashlib.sha256(data).hexdigest()


def cmd_ofdm_loopback(args) -> int:
    channel = _channel_from_args(args)
    fmt = PacketFormat(args.m, args.mc, args.d if args.mc > 1 else None)
    rng = np.random.default_rng(args.seed)
    try:
        primary = Path(args.primary_file).read_bytes() if args.primary_file else None
        covert = Path(args.covert_file).read_bytes() if args.covert_file else None
    except OSError as exc:
        raise CliError(f"cannot read payload file: {exc}") from exc
    if primary is None:
        primary = rng.bytes(args.packets * MAX_DATA_BYTES)
    if covert is None:
        covert = rng.bytes(args.packets * MAX_DATA_BYTES) if fmt.m_c > 1 else b""
    noise = NoiseSpec(args.snr)
    report = transfer(primary, covert, channel, noise, args.seed, fmt)

    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        try:
            if report.primary_bytes is not None:
                (out_dir / "primary.out").write_bytes(report.primary_bytes)
            if report.covert_bytes is not None:
                (out_dir / "covert.out").write_bytes(report.covert_bytes)
        except OSError as exc:
            raise CliError(f"cannot write decoded file: {exc}") from exc
    if args.iq_out:
        symbols, _, _ = frame_symbols([primary[:MAX_DATA_BYTES]], [covert[:MAX_DATA_BYTES]], fmt)
        block = assemble_subframe(symbols.reshape(-1, N_DATA)).time_block.ravel()
        write_iq(args.iq_out, block, packet_format=asdict(fmt))

    params = _params(args)
    params["channel_metadata"] = channel.metadata()
    doc = {
        "manifest": manifest("ofdm-loopback", params, args.seed),
        "packets": report.packets,
        "primary_success_rate": report.primary_success_rate,
        "covert_success_rate": report.covert_success_rate,
        "primary_symbol_errors": report.primary_symbol_errors,
        "covert_symbol_errors": report.covert_symbol_errors,
        "primary_sha256_in": _sha256(primary),
        "primary_sha256_out": _sha256(report.primary_bytes),
        "covert_sha256_in": _sha256(covert),
        "covert_sha256_out": _sha256(report.covert_bytes),
        "primary_byte_exact": report.primary_bytes == primary,
        "covert_byte_exact": report.covert_bytes == covert,
    }
    _emit_json(doc, args.out)
    return 0


def _add_channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--channel", default="awgn", choices=[k.value for k in ChannelKind])
    p.add_argument("--sigma-h", type=float, default=1.0, help="Rayleigh/Rician RMS gain (E|h|^2 = sigma_h^2)")
    p.add_argument("--k-factor", type=float, default=0.0, help="Rician K (linear)")
    p.add_argument("--ln-mu", type=float, default=0.0)
    p.add_argument("--ln-sigma", type=float, default=0.5)


def _add_common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output file (default: stdout)")
    if seed:
        p.add_argument("--seed", type=int, default=default_seed())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnask", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ser-curve", help="analytic/simulated SER vs Es/N0 as CSV")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--mc", type=int, default=2)
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--from", dest="from_db", type=float, default=0.0)
    p.add_argument("--to", dest="to_db", type=float, default=20.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--simulate", type=int, default=0, metavar="TRIALS")
    p.add_argument("--displacement", action="store_true")
    _add_channel_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_ser_curve)

    p = sub.add_parser("optimize", help="optimal (M, M_c, d) per (Es/N0, beta) as JSON")
    p.add_argument("--point", action="append", type=_parse_point, default=[], metavar="DB:BETA")
    p.add_argument("--m-values", type=int, nargs="+")
    p.add_argument("--mc-values", type=int, nargs="+")
    p.add_argument("--d-fractions", type=float, nargs="+")
    p.add_argument("--d-values", type=float, nargs="+")
    p.add_argument("--dump-grid", action="store_true")
    _add_channel_flags(p)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("detect", help="amplitude pdf and KS detectability per d")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--mc", type=int, default=2)
    p.add_argument("--d", type=float, nargs="+", default=[0.7, 0.4, 0.2])
    p.add_argument("--snr", type=float, default=20.0, help="Es/N0 in dB")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--scatter", type=int, default=0, metavar="N")
    p.add_argument("--displacement", action="store_true")
    p.add_argument("--out-dir")
    _add_channel_flags(p)
    p.set_defaults(channel="rayleigh")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("ofdm-loopback", help="stream payloads through the OFDM layer")
    p.add_argument("--packets", type=int, default=100)
    p.add_argument("--primary-file")
    p.add_argument("--covert-file")
    p.add_argument("--snr", type=float, default=25.0, help="Es/N0 in dB ('inf' for noiseless)")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--mc", type=int, default=2)
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--out-dir", help="directory for reassembled files")
    p.add_argument("--iq-out", help="write the first packet's time-domain samples as cf32 I/Q")
    _add_channel_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_ofdm_loopback)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot load config {args.config}: {exc}") from exc
    sub = parser._subparsers._group_actions[0].choices[args.command]
    # keys may be flag names ("to", "sigma-h") or destinations ("to_db")
    names = {}
    for action in sub._actions:
        names[action.dest] = action.dest
        for opt in action.option_strings:
            names[opt.lstrip("-").replace("-", "_")] = action.dest
    names = {k: v for k, v in names.items() if v not in ("help", "config", "version")}
    keys = {k: k.replace("-", "_") for k in raw}
    unknown = sorted(k for k, norm in keys.items() if norm not in names)
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(unknown)}")
    sub.set_defaults(**{names[keys[k]]: v for k, v in raw.items()})
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (CliError, ModemError, ValueError) as exc:
        print(f"pnask: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
