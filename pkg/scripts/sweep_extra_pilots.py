"""Sweep the number of extra resolution rounds and report SINR gains.

With zero extra rounds the common-path protocol never runs and the
decontaminated scheme degenerates to the contaminated one for aerial
users; each added round multiplies the chance that a colliding co-pilot
is drawn apart. Two rounds are the default operating point.
"""

import argparse
from pathlib import Path

from uavmimo.cli import resolve_threads
from uavmimo.config import ScenarioConfig
from uavmimo.scenarios import run_decontam_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results/extra-pilots"))
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--drops", type=int, default=None)
    ap.add_argument("--rounds", type=int, nargs="+", default=[0, 1, 2, 3])
    args = ap.parse_args()

    threads = resolve_threads(args.threads)
    print("rounds  GUE p5 gain  GUE p50 gain  UAV p50 gain  [dB]")
    for n_rounds in args.rounds:
        cfg = ScenarioConfig().replace(n_extra_pilots=n_rounds)
        if args.drops is not None:
            cfg = cfg.replace(n_drops=args.drops)
        summary = run_decontam_scenario(cfg, args.out / f"rounds-{n_rounds}",
                                        threads)
        print(f"{n_rounds:6d}  {summary['gue_p5_gain_db']:11.2f}  "
              f"{summary['gue_p50_gain_db']:12.2f}  "
              f"{summary['uav_p50_gain_db']:12.2f}")


if __name__ == "__main__":
    main()
