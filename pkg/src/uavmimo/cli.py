"""Command line interface: scenario runs and the swarm split optimizer."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .scenarios import run_decontam_scenario, run_tracking_scenario
from .swarm import optimal_phase_split


def resolve_threads(requested: int | None) -> int:
    """Explicit flag beats the UAVMIMO_THREADS variable beats cpu count."""
    if requested is not None:
        if requested < 1:
            raise ConfigError("--threads must be a positive integer")
        return requested
    env = os.environ.get("UAVMIMO_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"UAVMIMO_THREADS must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigError("UAVMIMO_THREADS must be a positive integer")
        return value
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavmimo",
        description="Multi-cell massive MIMO simulator: pilot decontamination, "
                    "3D beam tracking, and swarm phase scheduling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte Carlo scenario")
    run_p.add_argument("--scenario", required=True, choices=("decontam", "tracking"),
                       help="which experiment to run")
    run_p.add_argument("--config", type=Path, default=None,
                       help="JSON scenario file (defaults used when omitted)")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    run_p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (created if missing)")
    run_p.add_argument("--drops", type=int, default=None,
                       help="override the number of drops / trajectories")
    run_p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: UAVMIMO_THREADS or cpu count)")

    swarm_p = sub.add_parser("swarm", help="optimal two-phase relay split")
    swarm_p.add_argument("--r1", type=float, required=True,
                         help="phase-1 rate, bit/s")
    swarm_p.add_argument("--r2", type=float, required=True,
                         help="phase-2 rate, bit/s")
    swarm_p.add_argument("--total", type=float, required=True,
                         help="total window, seconds")
    swarm_p.add_argument("--json", type=Path, default=None,
                         help="also write the split as JSON to this path")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config is not None else ScenarioConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.drops is not None:
        overrides["n_drops"] = args.drops
    if overrides:
        cfg = cfg.replace(**overrides)
    threads = resolve_threads(args.threads)
    if args.scenario == "decontam":
        summary = run_decontam_scenario(cfg, args.out, threads=threads)
    else:
        summary = run_tracking_scenario(cfg, args.out, threads=threads)
    print(f"wrote {args.out}/run_manifest.json")
    for key in ("gue_p5_gain_db", "uav_p50_gain_db"):
        if key in summary:
            print(f"{key} = {summary[key]:.3f}")
    if "mean_gain" in summary:
        for scheme, value in summary["mean_gain"].items():
            print(f"mean_gain[{scheme}] = {value:.4f}")
    return 0


def _cmd_swarm(args) -> int:
    try:
        split = optimal_phase_split(args.r1, args.r2, args.total)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"t1 = {split.t1_s!r} s")
    print(f"t2 = {split.t2_s!r} s")
    print(f"throughput = {split.throughput_bps!r} bit/s")
    if args.json is not None:
        payload = {
            "t1_s": split.t1_s,
            "t2_s": split.t2_s,
            "rate1_bps": split.rate1_bps,
            "rate2_bps": split.rate2_bps,
            "throughput_bps": split.throughput_bps,
        }
        args.json.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {args.json}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_swarm(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
