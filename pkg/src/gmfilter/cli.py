"""Command-line entry point.

Subcommands:
  bench-tricyclist  Monte Carlo benchmark of all configured filters on the
                    park-navigation scenario; writes per-filter summary JSON
                    and per-run trace CSVs.
  sim-radio         Generate a synthetic SNR log on the configured grid, then
                    replay every configured filter over it (--log-only skips
                    the filtering); writes the log, reports, and snapshots.
  replay            Replay an existing SNR log file through the configured
                    filters.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gmfilter.config import ExperimentConfig, load_config
from gmfilter.errors import ConfigError, IngestError
from gmfilter.harness.mc import build_filter, run_mc
from gmfilter.harness.radiolog import generate_radio_log, read_radio_log, write_radio_log
from gmfilter.harness.replay import replay
from gmfilter.rng import RngStream
from gmfilter.scenarios.grid import load_grid
from gmfilter.scenarios.radio import RadioSourceModel

__all__ = ["main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmfilter",
        description="Gaussian mixture filtering benchmarks and radio-source localization runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="experiment YAML file")
        p.add_argument("--seed", type=int, default=None, help="base seed override (u64)")
        p.add_argument("--runs", type=int, default=None, help="Monte Carlo run count override")
        p.add_argument("--samples", type=int, default=None,
                       help="per-filter sample count override")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel workers (0 = all cores); results are jobs-independent")
        p.add_argument("--overwrite", action="store_true",
                       help="allow replacing existing artifacts")

    bench = sub.add_parser("bench-tricyclist",
                           help="Monte Carlo bearings-only benchmark")
    common(bench)

    sim = sub.add_parser("sim-radio", help="synthetic SNR log generation + replay")
    common(sim)
    sim.add_argument("--log-only", action="store_true",
                     help="emit the measurement log and stop")

    rep = sub.add_parser("replay", help="replay a recorded SNR log")
    rep.add_argument("log", help="measurement log CSV")
    common(rep)
    return parser


def _load(args) -> ExperimentConfig:
    overrides = {
        "seed": args.seed,
        "runs": args.runs,
        "out": args.out,
        "jobs": args.jobs,
        "num_samples": args.samples,
    }
    return load_config(args.config, overrides=overrides)


def _prepare_out(config: ExperimentConfig, paths, overwrite: bool) -> Path:
    out_dir = Path(config.out)
    if not out_dir.is_absolute():
        out_dir = Path(config.base_dir) / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    if not overwrite:
        clashes = [p for p in paths if (out_dir / p).exists()]
        if clashes:
            raise ConfigError(
                f"artifacts already exist in {out_dir} (first: {clashes[0]}); "
                "pass --overwrite to replace them")
    return out_dir


def cmd_bench_tricyclist(config: ExperimentConfig, overwrite: bool) -> int:
    artifact_names = [f"{kind}_summary.json" for kind in config.filters]
    out_dir = _prepare_out(config, artifact_names, overwrite)
    for kind in config.filters:
        summary = run_mc(config.tricyclist, kind, config.filter_params,
                         config.runs, config.seed, jobs=config.jobs)
        summary.write_json(out_dir / f"{kind}_summary.json")
        for i, report in enumerate(summary.reports):
            if not report.failed:
                (out_dir / f"{kind}_run{i:03d}_trace.csv").write_text(
                    report.trace_csv(), encoding="utf-8")
        failed = sum(r.failed for r in summary.reports)
        agg = summary.aggregate()
        print(f"{kind}: median terminate_rmse="
              f"{agg['terminate_rmse']['median']:.3f} m, "
              f"median armse={agg['armse']['median']:.3f} m, "
              f"mean iter={agg['avg_iteration_time']['mean'] * 1e3:.2f} ms, "
              f"failed {failed}/{len(summary.reports)}")
        if failed == len(summary.reports):
            return 1
    return 0


def _replay_filters(config: ExperimentConfig, records, out_dir: Path, log_name: str) -> int:
    radio = config.radio
    model = RadioSourceModel(process_variance=radio.process_variance)
    snap_dir = out_dir / "snapshots"
    if radio.snapshot_every:
        snap_dir.mkdir(exist_ok=True)
    for kind in config.filters:
        filt = build_filter(kind, model, radio.prior_mean, radio.prior_cov,
                            config.filter_params)
        rng = RngStream(config.seed).substream("filter", kind)
        report, _ = replay(records, filt, radio.snr_settings(), rng,
                           truth_source=radio.source, seed=config.seed,
                           snapshot_every=radio.snapshot_every,
                           snapshot_dir=snap_dir if radio.snapshot_every else None,
                           snapshot_format=radio.snapshot_format)
        payload = {
            "filter": kind,
            "scenario": "radio",
            "log": log_name,
            "seed": int(config.seed),
            "report": report.to_dict(),
        }
        (out_dir / f"{kind}_report.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n",
            encoding="utf-8")
        (out_dir / f"{kind}_trace.csv").write_text(report.trace_csv(), encoding="utf-8")
        print(f"{kind}: armse={report.armse:.3f} m, final={report.terminate_rmse:.3f} m, "
              f"mean iter={report.avg_iteration_time * 1e3:.2f} ms")
    return 0


def cmd_sim_radio(config: ExperimentConfig, overwrite: bool, log_only: bool) -> int:
    radio = config.radio
    names = ["radio_log.csv"]
    if not log_only:
        names += [f"{kind}_report.json" for kind in config.filters]
    out_dir = _prepare_out(config, names, overwrite)
    grid = load_grid(radio.grid_path(Path(config.base_dir)),
                     cell_size=radio.cell_size, origin=radio.origin)
    rng = RngStream(config.seed).substream("scenario")
    records = generate_radio_log(grid, radio.source, radio.waypoints,
                                 radio.los_params, radio.nlos_params, rng,
                                 speed=radio.robot_speed, rate_hz=radio.rate_hz,
                                 snr_noise_var=radio.snr_noise_var)
    log_path = out_dir / "radio_log.csv"
    write_radio_log(records, log_path)
    print(f"wrote {len(records)} records to {log_path}")
    if log_only:
        return 0
    return _replay_filters(config, records, out_dir, log_path.name)


def cmd_replay(config: ExperimentConfig, log_path: str, overwrite: bool) -> int:
    records = read_radio_log(log_path)
    names = [f"{kind}_report.json" for kind in config.filters]
    out_dir = _prepare_out(config, names, overwrite)
    return _replay_filters(config, records, out_dir, Path(log_path).name)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load(args)
        if args.command == "bench-tricyclist":
            if config.scenario != "tricyclist":
                raise ConfigError("key 'scenario': bench-tricyclist needs scenario: tricyclist")
            return cmd_bench_tricyclist(config, args.overwrite)
        if args.command == "sim-radio":
            if config.scenario != "radio":
                raise ConfigError("key 'scenario': sim-radio needs scenario: radio")
            return cmd_sim_radio(config, args.overwrite, args.log_only)
        if args.command == "replay":
            if config.scenario != "radio":
                raise ConfigError("key 'scenario': replay needs scenario: radio")
            return cmd_replay(config, args.log, args.overwrite)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
