"""End-to-end Monte Carlo scenarios and their output files.

Every random quantity comes from a substream keyed by (seed, purpose,
drop index), so a drop's results do not depend on execution order and
runs are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .channel import build_link, realize_channel
from .config import ScenarioConfig, dbm_to_mw, derive_substream
from .decontam import (detect_directions, decontaminate_uav, match_directions,
                       merge_path_estimates, reconstruct_single_path,
                       decontaminate_gue, select_interferer_dirs)
from .geometry import GUE, UAV, ArrayGeometry, build_layout
from .link import SinrRecord, associate, downlink_sinr, mrt_precoder, percentile
from .pilot import assign_pilots, draw_extra_shifts, extra_pilot_pool, \
    ls_estimate, network_pilots, uplink_rx, zc_sequence
from .tracking import SCHEMES as TRACKING_SCHEMES
from .tracking import run_tracking

IDEAL = "ideal"
CONTAMINATED = "contaminated"
DECONTAMINATED = "decontaminated"
SINR_SCHEMES = (IDEAL, CONTAMINATED, DECONTAMINATED)

SINR_CSV_HEADER = "drop,user_id,kind,scheme,sinr_db"
TRACKING_CSV_HEADER = ("time_s,scheme,normalized_gain,true_az_deg,true_el_deg,"
                       "est_az_deg,est_el_deg,trajectory_id")


def sector_arrays(cfg: ScenarioConfig, layout) -> dict[int, ArrayGeometry]:
    return {
        sector.sector_id: ArrayGeometry(
            rows=cfg.array_rows, cols=cfg.array_cols,
            spacing_wavelengths=cfg.element_spacing_wavelengths,
            boresight_az_deg=sector.boresight_az_deg)
        for sector in layout.sectors
    }


def run_drop(cfg: ScenarioConfig, drop: int) -> list[SinrRecord]:
    """Simulate one drop: uplink training, three estimate qualities,
    downlink SINR for every user under each.

    Training is contamination-limited: pilots ride the full array gain
    and the least-squares correlation averages thermal noise down by the
    pilot length, so co-pilot interference dominates by orders of
    magnitude and receiver noise is left out of the training blocks.
    """
    layout_rng = derive_substream(cfg.seed, "layout", drop)
    channel_rng = derive_substream(cfg.seed, "channel", drop)
    pilot_rng = derive_substream(cfg.seed, "pilot-assign", drop)
    extra_rng = derive_substream(cfg.seed, "extra-pilots", drop)

    layout = build_layout(cfg, layout_rng)
    arrays = sector_arrays(cfg, layout)
    links = {}
    chans = {}
    for sector in layout.sectors:
        for user in layout.users:
            key = (sector.sector_id, user.user_id)
            links[key] = build_link(sector, user, cfg, channel_rng)
            chans[key] = realize_channel(links[key], arrays[sector.sector_id],
                                         channel_rng)
    serving = associate(layout, chans, cfg.gbs_tx_power_dbm)
    pilot_map = assign_pilots(layout, cfg.pilot_reuse, pilot_rng, serving)
    pilots = network_pilots(cfg)
    p_mw = dbm_to_mw(cfg.ue_tx_power_dbm)
    sqrt_p = p_mw**0.5

    # regular round: every user sends its network pilot, every sector listens
    blocks0 = {}
    for sector in layout.sectors:
        transmissions = [
            (chans[(sector.sector_id, u.user_id)], pilots[pilot_map[u.user_id]], p_mw)
            for u in layout.users
        ]
        blocks0[sector.sector_id] = uplink_rx(sector.sector_id, transmissions)

    # extra rounds: aerial users redraw shifts from the reserved pool,
    # without replacement inside each serving sector, independent across
    # sectors and rounds. Ground users stay silent here, so these blocks
    # expose the aerial directions alone.
    pool = extra_pilot_pool(cfg)
    uav_users = [u for u in layout.users if u.kind == UAV]
    served_uavs: dict[int, list[int]] = {}
    for u in uav_users:
        served_uavs.setdefault(serving[u.user_id], []).append(u.user_id)
    n_rounds = cfg.n_extra_pilots if (pool and uav_users) else 0
    extra_shift = draw_extra_shifts(pool, served_uavs, n_rounds, extra_rng)
    blocks_extra = {}
    for r in range(1, n_rounds + 1):
        for sector in layout.sectors:
            transmissions = [
                (chans[(sector.sector_id, u.user_id)],
                 zc_sequence(cfg.zc_root, extra_shift[(r, u.user_id)], cfg.pilot_len),
                 p_mw)
                for u in uav_users
            ]
            blocks_extra[(r, sector.sector_id)] = uplink_rx(
                sector.sector_id, transmissions)

    # per-(round, sector, shift) detections, shared between the aerial
    # protocol and the ground nulling below
    peak_cache: dict[tuple, list] = {}
    drawn_shifts: dict[int, set[int]] = {r: set() for r in range(1, n_rounds + 1)}
    for (r, _uid), s in extra_shift.items():
        drawn_shifts[r].add(s)

    def peaks_for(round_idx: int, sector_id: int, shift: int):
        key = (round_idx, sector_id, shift)
        if key not in peak_cache:
            block = blocks0[sector_id] if round_idx == 0 \
                else blocks_extra[(round_idx, sector_id)]
            est = ls_estimate(block, zc_sequence(cfg.zc_root, shift, cfg.pilot_len))
            peak_cache[key] = detect_directions(est, arrays[sector_id], cfg)
        return peak_cache[key]

    # aerial directions visible at a sector, from the aerial-only extra
    # rounds; with no aerial users these are empty by construction and the
    # ground projection degenerates to the identity
    sector_dirs: dict[int, list] = {}

    def uav_dirs_at(sector_id: int):
        if sector_id not in sector_dirs:
            found = []
            for r in range(1, n_rounds + 1):
                for shift in sorted(drawn_shifts[r]):
                    found.extend(peaks_for(r, sector_id, shift))
            sector_dirs[sector_id] = merge_path_estimates(
                found, cfg.peak_min_separation_deg)
        return sector_dirs[sector_id]

    # channel estimates per user at the serving sector, in units of the
    # true channel (the sqrt(P) training scale is divided out)
    est_cont = {}
    est_dec = {}
    for user in layout.users:
        uid = user.user_id
        sid = serving[uid]
        array = arrays[sid]
        shift0 = pilot_map[uid]
        raw = ls_estimate(blocks0[sid], pilots[shift0])
        est_cont[uid] = raw / sqrt_p
        link = links[(sid, uid)]
        if user.kind == GUE:
            # null only components that are (a) actually present in this
            # user's estimate and (b) confirmed aerial by the extra rounds;
            # anything else would spend signal power on empty directions
            cands = match_directions(peaks_for(0, sid, shift0), uav_dirs_at(sid),
                                     cfg.common_path_tol_deg)
            dirs = select_interferer_dirs(cands, link.az_deg, link.el_deg, array)
            est_dec[uid] = decontaminate_gue(raw, dirs[:cfg.max_peaks],
                                             array) / sqrt_p
        else:
            peaks0 = peaks_for(0, sid, shift0)
            if not peaks0:
                est_dec[uid] = est_cont[uid]
            elif len(peaks0) == 1 or n_rounds == 0:
                # no contamination resolved or resolvable: trust the one peak
                best = max(peaks0, key=lambda p: p.power)
                est_dec[uid] = reconstruct_single_path(best, array) / sqrt_p
            else:
                rounds = [peaks0]
                for r in range(1, n_rounds + 1):
                    rounds.append(peaks_for(r, sid, extra_shift[(r, uid)]))
                rec, ambiguous = decontaminate_uav(rounds, array,
                                                   cfg.common_path_tol_deg)
                if ambiguous:
                    # protocol failed to isolate the served path; keep the
                    # regular estimate rather than beam at a guess
                    est_dec[uid] = est_cont[uid]
                else:
                    est_dec[uid] = rec / sqrt_p

    records: list[SinrRecord] = []
    estimates = {
        IDEAL: {uid: chans[(serving[uid], uid)] for uid in serving},
        CONTAMINATED: est_cont,
        DECONTAMINATED: est_dec,
    }
    for scheme in SINR_SCHEMES:
        precoders = {uid: mrt_precoder(h) for uid, h in estimates[scheme].items()}
        records.extend(downlink_sinr(layout, serving, chans, precoders, cfg,
                                     scheme=scheme, drop=drop))
    return records


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sinr_csv(path: Path, records: list[SinrRecord]):
    order = {s: i for i, s in enumerate(SINR_SCHEMES)}
    rows = sorted(records, key=lambda r: (r.drop, r.user_id, order[r.scheme]))
    with open(path, "w", newline="") as f:
        f.write(SINR_CSV_HEADER + "\n")
        for r in rows:
            f.write(f"{r.drop},{r.user_id},{r.kind},{r.scheme},{_fmt(r.sinr_db)}\n")


def sinr_summary(cfg: ScenarioConfig, records: list[SinrRecord]) -> dict:
    by_group: dict[tuple[str, str], list[float]] = {}
    for r in records:
        by_group.setdefault((r.kind, r.scheme), []).append(r.sinr_db)
    percentiles = {}
    for (kind, scheme), vals in sorted(by_group.items()):
        percentiles.setdefault(kind, {})[scheme] = {
            "p5": percentile(vals, 5.0),
            "p50": percentile(vals, 50.0),
            "p95": percentile(vals, 95.0),
        }
    summary = {
        "scenario": "decontam",
        "seed": cfg.seed,
        "n_drops": cfg.n_drops,
        "n_users": cfg.n_users,
        "percentiles": percentiles,
    }
    gue = percentiles.get(GUE)
    if gue and DECONTAMINATED in gue and CONTAMINATED in gue:
        summary["gue_p5_gain_db"] = gue[DECONTAMINATED]["p5"] - gue[CONTAMINATED]["p5"]
        summary["gue_p50_gain_db"] = gue[DECONTAMINATED]["p50"] - gue[CONTAMINATED]["p50"]
    uav = percentiles.get(UAV)
    if uav and DECONTAMINATED in uav and CONTAMINATED in uav:
        summary["uav_p5_gain_db"] = uav[DECONTAMINATED]["p5"] - uav[CONTAMINATED]["p5"]
        summary["uav_p50_gain_db"] = uav[DECONTAMINATED]["p50"] - uav[CONTAMINATED]["p50"]
    return summary


def _parallel_map(fn, indices, threads: int):
    if threads <= 1:
        return [fn(i) for i in indices]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, indices, chunksize=1))


def run_decontam_scenario(cfg: ScenarioConfig, out_dir: Path, threads: int = 1) -> dict:
    """Run the full multi-cell Monte Carlo and write sinr_cdf.csv,
    summary.json and run_manifest.json into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    per_drop = _parallel_map(partial(run_drop, cfg), range(cfg.n_drops), threads)
    records = [rec for drop in per_drop for rec in drop]
    write_sinr_csv(out_dir / "sinr_cdf.csv", records)
    summary = sinr_summary(cfg, records)
    _write_json(out_dir / "summary.json", summary)
    duration = time.perf_counter() - start
    _write_manifest(out_dir, "decontam", cfg, duration,
                    ["sinr_cdf.csv", "summary.json"])
    return summary


def run_trajectory_set(cfg: ScenarioConfig, trajectory_index: int):
    return [run_tracking(cfg, scheme, cfg.seed, trajectory_index)
            for scheme in TRACKING_SCHEMES]


def write_tracking_csv(path: Path, runs: list):
    order = {s: i for i, s in enumerate(TRACKING_SCHEMES)}
    rows = []
    for run in runs:
        for s in run.samples:
            rows.append((run.trajectory_index, s.time_s, order[s.scheme], s))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(path, "w", newline="") as f:
        f.write(TRACKING_CSV_HEADER + "\n")
        for traj, _, _, s in rows:
            f.write(f"{_fmt(s.time_s)},{s.scheme},{_fmt(s.normalized_gain)},"
                    f"{_fmt(s.true_az_deg)},{_fmt(s.true_el_deg)},"
                    f"{_fmt(s.est_az_deg)},{_fmt(s.est_el_deg)},{traj}\n")


def tracking_summary(cfg: ScenarioConfig, runs: list) -> dict:
    by_scheme: dict[str, list[float]] = {s: [] for s in TRACKING_SCHEMES}
    counts: dict[str, set[int]] = {s: set() for s in TRACKING_SCHEMES}
    for run in runs:
        by_scheme[run.scheme].extend(s.normalized_gain for s in run.samples)
        counts[run.scheme].add(run.pilot_count)
    return {
        "scenario": "tracking",
        "seed": cfg.seed,
        "n_trajectories": cfg.n_drops,
        "mean_gain": {s: float(np.mean(v)) for s, v in by_scheme.items()},
        "median_gain": {s: float(np.median(v)) for s, v in by_scheme.items()},
        "pilot_count": {s: sorted(counts[s]) for s in TRACKING_SCHEMES},
    }


def run_tracking_scenario(cfg: ScenarioConfig, out_dir: Path, threads: int = 1) -> dict:
    """Run all schemes over cfg.n_drops shared trajectories and write
    tracking.csv, summary.json and run_manifest.json into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    per_traj = _parallel_map(partial(run_trajectory_set, cfg), range(cfg.n_drops),
                             threads)
    runs = [run for triple in per_traj for run in triple]
    write_tracking_csv(out_dir / "tracking.csv", runs)
    summary = tracking_summary(cfg, runs)
    _write_json(out_dir / "summary.json", summary)
    duration = time.perf_counter() - start
    _write_manifest(out_dir, "tracking", cfg, duration,
                    ["tracking.csv", "summary.json"])
    return summary


@dataclass(frozen=True)
class RunManifest:
    scenario: str
    seed: int
    version: str
    duration_s: float
    config: dict
    outputs: list[str]


def _write_json(path: Path, payload: dict):
    with open(path, "w", newline="") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_manifest(out_dir: Path, scenario: str, cfg: ScenarioConfig,
                    duration_s: float, outputs: list[str]):
    manifest = RunManifest(scenario=scenario, seed=cfg.seed, version=__version__,
                           duration_s=duration_s, config=cfg.to_dict(),
                           outputs=outputs)
    _write_json(out_dir / "run_manifest.json", {
        "scenario": manifest.scenario,
        "seed": manifest.seed,
        "version": manifest.version,
        "duration_s": manifest.duration_s,
        "config": manifest.config,
        "outputs": manifest.outputs,
    })
