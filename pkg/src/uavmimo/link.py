"""Cell association, beamforming, downlink SINR, and distribution helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import dbm_to_mw
from .geometry import NetworkLayout


@dataclass(frozen=True)
class SinrRecord:
    drop: int
    user_id: int
    kind: str
    scheme: str
    sinr_db: float


def rsrp_dbm(h: np.ndarray, gbs_tx_power_dbm: float) -> float:
    """Received power over the whole array from an isotropic transmission."""
    gain = float(np.sum(np.abs(h) ** 2))
    if gain <= 0.0:
        return -math.inf
    return gbs_tx_power_dbm + 10.0 * math.log10(gain)


def associate(layout: NetworkLayout, channels: dict[tuple[int, int], np.ndarray],
              gbs_tx_power_dbm: float) -> dict[int, int]:
    """Serve each user from the sector with the highest received power.

    channels maps (sector_id, user_id) to the realized channel vector.
    Ties (co-located sectors see identical channel norms only by
    coincidence) break toward the lowest sector id.
    """
    serving: dict[int, int] = {}
    for user in layout.users:
        best_id = -1
        best_rsrp = -math.inf
        for sector in layout.sectors:
            r = rsrp_dbm(channels[(sector.sector_id, user.user_id)], gbs_tx_power_dbm)
            if r > best_rsrp + 1e-12:
                best_rsrp = r
                best_id = sector.sector_id
        if best_id < 0:
            raise ValueError(f"user {user.user_id} has no usable channel")
        serving[user.user_id] = best_id
    return serving


def mrt_precoder(h_est: np.ndarray) -> np.ndarray:
    """Maximum-ratio transmission weights: conj(h)/|h|, unit norm."""
    norm = float(np.linalg.norm(h_est))
    if norm == 0.0:
        raise ValueError("cannot precode on an all-zero estimate")
    return np.conj(h_est) / norm


def downlink_sinr(layout: NetworkLayout, serving: dict[int, int],
                  true_channels: dict[tuple[int, int], np.ndarray],
                  precoders: dict[int, np.ndarray], cfg,
                  scheme: str, drop: int) -> list[SinrRecord]:
    """Evaluate every user's downlink SINR under one set of beams.

    Each sector splits its transmit power equally across its served
    users. User k hears its own beam through the true channel h and all
    other beams as interference:

        SINR_k = P_k |h^T w_k|^2 / (sum_{j != k} P_j |h_j->k^T w_j|^2 + N0)

    with N0 the downlink thermal noise power.
    """
    sector_power_mw = dbm_to_mw(cfg.gbs_tx_power_dbm)
    noise_mw = cfg.downlink_noise_mw()
    load: dict[int, int] = {}
    for uid, sid in serving.items():
        load[sid] = load.get(sid, 0) + 1
    power_per_user = {uid: sector_power_mw / load[sid] for uid, sid in serving.items()}
    kind_of = {u.user_id: u.kind for u in layout.users}
    records = []
    for user in layout.users:
        uid = user.user_id
        own = 0.0
        interference = 0.0
        for vid, sid in serving.items():
            h = true_channels[(sid, uid)]
            coupling = power_per_user[vid] * abs(np.dot(h, precoders[vid])) ** 2
            if vid == uid:
                own = coupling
            else:
                interference += coupling
        sinr = own / (interference + noise_mw)
        sinr_db = 10.0 * math.log10(sinr) if sinr > 0.0 else -math.inf
        records.append(SinrRecord(drop=drop, user_id=uid, kind=kind_of[uid],
                                  scheme=scheme, sinr_db=sinr_db))
    return records


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted sample values and cumulative probabilities (i+1)/n."""
    x = np.sort(np.asarray(values, dtype=float))
    if len(x) == 0:
        raise ValueError("empirical_cdf needs at least one value")
    p = np.arange(1, len(x) + 1) / len(x)
    return x, p


def percentile(values, q: float) -> float:
    """Linear-interpolation percentile, q in [0, 100]."""
    if not 0.0 <= q <= 100.0:
        raise ValueError("q must lie in [0, 100]")
    return float(np.percentile(np.asarray(values, dtype=float), q))
