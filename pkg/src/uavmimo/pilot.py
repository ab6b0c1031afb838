"""Constant-amplitude pilot sequences, reuse assignment, and uplink reception.

Pilots are cyclic shifts of a single Zadoff-Chu base sequence. Distinct
shifts of the same root are exactly orthogonal, so a cell cluster can
hand out ``pilot_reuse`` shifts as network pilots and keep the remaining
shifts as an on-demand pool for contamination resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import NetworkLayout


@dataclass(frozen=True)
class PilotSequence:
    root: int
    shift: int
    symbols: np.ndarray  # (pilot_len,) unit-modulus complex

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class ReceivedPilotBlock:
    sector_id: int
    samples: np.ndarray  # (n_elements, pilot_len)
    noise_power_mw: float


def zc_sequence(root: int, shift: int, length: int) -> PilotSequence:
    """Cyclically shifted Zadoff-Chu sequence.

    x(k) = exp(-j*pi*root*k^2/N) for even N, exp(-j*pi*root*k*(k+1)/N)
    for odd N; the shift is applied in the time domain. Requires
    gcd(root, N) = 1 so all N shifts stay mutually orthogonal.
    """
    if length < 1:
        raise ValueError("length must be positive")
    if not 0 < root < length:
        raise ValueError("root must lie in (0, length)")
    if math.gcd(root, length) != 1:
        raise ValueError("root must be coprime with length")
    if not 0 <= shift < length:
        raise ValueError("shift must lie in [0, length)")
    k = np.arange(length)
    if length % 2 == 0:
        base = np.exp(-1j * np.pi * root * k * k / length)
    else:
        base = np.exp(-1j * np.pi * root * k * (k + 1) / length)
    return PilotSequence(root=root, shift=shift, symbols=np.roll(base, shift))


def network_pilots(cfg) -> list[PilotSequence]:
    """The ``pilot_reuse`` shifts handed out as regular network pilots."""
    return [zc_sequence(cfg.zc_root, s, cfg.pilot_len) for s in range(cfg.pilot_reuse)]


def extra_pilot_pool(cfg) -> list[int]:
    """Shift indices reserved for on-demand contamination resolution."""
    return list(range(cfg.pilot_reuse, cfg.pilot_len))


def assign_pilots(layout: NetworkLayout, pilot_reuse: int, rng: np.random.Generator,
                  serving: dict[int, int]) -> dict[int, int]:
    """Map each user to a pilot shift index in [0, pilot_reuse).

    Users served by the same sector must not share a pilot while unused
    shifts remain there; across the network each shift is spread as evenly
    as possible so a 21-sector cluster with reuse 7 serves every shift
    from three sectors. Assignment walks users grouped by serving sector
    (sector order, then user id) and greedily picks the least-used shift
    not already taken in that sector, breaking ties with a per-call
    random preference order.

    serving maps user_id -> sector_id.
    """
    if pilot_reuse < 1:
        raise ValueError("pilot_reuse must be positive")
    use_count = np.zeros(pilot_reuse, dtype=int)
    preference = rng.permutation(pilot_reuse)
    assignment: dict[int, int] = {}
    by_sector: dict[int, list[int]] = {}
    for uid, sid in serving.items():
        by_sector.setdefault(sid, []).append(uid)
    for sector in layout.sectors:
        uids = sorted(by_sector.get(sector.sector_id, []))
        taken: set[int] = set()
        for uid in uids:
            candidates = [p for p in range(pilot_reuse) if p not in taken]
            if not candidates:  # sector oversubscribed, reuse is unavoidable
                candidates = list(range(pilot_reuse))
            best = min(candidates, key=lambda p: (use_count[p], int(np.argmax(preference == p))))
            assignment[uid] = best
            taken.add(best)
            use_count[best] += 1
    return assignment


def draw_extra_shifts(pool: list[int], served_uavs: dict[int, list[int]],
                      n_rounds: int, rng: np.random.Generator) -> dict[tuple[int, int], int]:
    """Random pool shifts for each aerial user and resolution round.

    Within one serving sector and round the draw is without replacement
    (a fresh permutation of the pool), so co-served users never collide;
    draws are independent across sectors and across rounds, which is what
    makes a persistent collision between users of different sectors
    improbable. Returns {(round, user_id): shift} with rounds 1..n_rounds.
    """
    out: dict[tuple[int, int], int] = {}
    for r in range(1, n_rounds + 1):
        for sid in sorted(served_uavs):
            uids = sorted(served_uavs[sid])
            if not uids:
                continue
            perm = rng.permutation(len(pool))
            for i, uid in enumerate(uids):
                out[(r, uid)] = pool[perm[i % len(pool)]]
    return out


def uplink_rx(sector_id: int, transmissions: list[tuple[np.ndarray, PilotSequence, float]],
              noise_power_mw: float = 0.0,
              rng: np.random.Generator | None = None) -> ReceivedPilotBlock:
    """Superpose pilot transmissions at one sector and add receiver noise.

    transmissions holds (channel vector, pilot, tx power in mW) per active
    user. Received block: sum_u sqrt(P_u) * h_u * s_u^H + W with W i.i.d.
    circular complex Gaussian of total power noise_power_mw per antenna.
    """
    if noise_power_mw < 0.0:
        raise ValueError("noise_power_mw must be non-negative")
    if noise_power_mw > 0.0 and rng is None:
        raise ValueError("rng is required when noise_power_mw > 0")
    if not transmissions:
        raise ValueError("at least one transmission required to size the block")
    n_elements = len(transmissions[0][0])
    pilot_len = len(transmissions[0][1])
    samples = np.zeros((n_elements, pilot_len), dtype=complex)
    for h, pilot, power_mw in transmissions:
        if len(h) != n_elements or len(pilot) != pilot_len:
            raise ValueError("mismatched channel or pilot length")
        samples += math.sqrt(power_mw) * np.outer(h, np.conj(pilot.symbols))
    if noise_power_mw > 0.0:
        w = rng.standard_normal((2, n_elements, pilot_len))
        samples += math.sqrt(noise_power_mw / 2.0) * (w[0] + 1j * w[1])
    return ReceivedPilotBlock(sector_id=sector_id, samples=samples,
                              noise_power_mw=noise_power_mw)


def ls_estimate(block: ReceivedPilotBlock, pilot: PilotSequence) -> np.ndarray:
    """Least-squares channel estimate by correlating against one pilot.

    For y = sqrt(P) h s^H + W this returns sqrt(P) h plus noise of
    per-antenna power noise_power_mw / pilot_len; contributions from
    orthogonal shifts cancel exactly.
    """
    s = pilot.symbols
    return block.samples @ s / float(np.vdot(s, s).real)
