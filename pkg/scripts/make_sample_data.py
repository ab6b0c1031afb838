"""Regenerate the sample CSVs shipped with the plotting package.

Small runs (8 drops / 8 trajectories) keep the files a few hundred
kilobytes while exercising every column the plot scripts consume.
"""

import argparse
import shutil
import tempfile
from pathlib import Path

from uavmimo.config import ScenarioConfig
from uavmimo.scenarios import run_decontam_scenario, run_tracking_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parent.parent
                    / "frontend" / "data")
    ap.add_argument("--drops", type=int, default=8)
    ap.add_argument("--trajectories", type=int, default=3)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as td:
        run_decontam_scenario(ScenarioConfig().replace(n_drops=args.drops),
                              Path(td) / "sinr", threads=4)
        run_tracking_scenario(ScenarioConfig().replace(n_drops=args.trajectories),
                              Path(td) / "tracking", threads=4)
        shutil.copy(Path(td) / "sinr" / "sinr_cdf.csv", args.out)
        shutil.copy(Path(td) / "tracking" / "tracking.csv", args.out)
    print(f"wrote {args.out / 'sinr_cdf.csv'}")
    print(f"wrote {args.out / 'tracking.csv'}")


if __name__ == "__main__":
    main()
