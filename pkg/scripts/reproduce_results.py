"""Run both default scenarios and print the headline numbers.

Writes sinr_cdf.csv / tracking.csv plus summaries under --out. The SINR
run takes a few minutes single-threaded; pass --threads to use more
workers (results are byte-identical either way).
"""

import argparse
from pathlib import Path

from uavmimo.cli import resolve_threads
from uavmimo.config import ScenarioConfig
from uavmimo.scenarios import run_decontam_scenario, run_tracking_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--drops", type=int, default=None,
                    help="override the number of Monte Carlo drops")
    args = ap.parse_args()

    cfg = ScenarioConfig()
    if args.drops is not None:
        cfg = cfg.replace(n_drops=args.drops)
    threads = resolve_threads(args.threads)

    sinr = run_decontam_scenario(cfg, args.out / "sinr", threads)
    print(f"SINR CDF over {cfg.n_drops} drops "
          f"({cfg.n_uavs} UAVs / {cfg.n_gues} GUEs per cell):")
    print(f"  GUE p5 gain  {sinr['gue_p5_gain_db']:6.2f} dB "
          "(decontaminated - contaminated)")
    print(f"  GUE p50 gain {sinr['gue_p50_gain_db']:6.2f} dB")
    print(f"  UAV p50 gain {sinr['uav_p50_gain_db']:6.2f} dB")

    track = run_tracking_scenario(cfg, args.out / "tracking", threads)
    print(f"Tracking over {track['n_trajectories']} trajectories:")
    for scheme, mean in track["mean_gain"].items():
        pilots = "/".join(str(c) for c in track["pilot_count"][scheme])
        print(f"  {scheme:13s} mean gain {mean:.3f} ({pilots} pilots per 4 s)")
    print(f"Outputs in {args.out}/")


if __name__ == "__main__":
    main()
