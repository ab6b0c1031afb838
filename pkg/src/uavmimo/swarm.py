"""Two-phase transmission scheduling for relayed swarm traffic.

A data unit first travels from the source cluster to a relay at rate r1
for t1 seconds, then from the relay to the destination at rate r2 for
t2 = total - t1 seconds. End-to-end delivered volume is limited by the
smaller of the two phase volumes, so the optimum balances them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhaseSplit:
    t1_s: float
    t2_s: float
    rate1_bps: float
    rate2_bps: float
    throughput_bps: float

    @property
    def delivered_bits(self) -> float:
        return self.throughput_bps * (self.t1_s + self.t2_s)


def delivered_throughput(rate1_bps: float, rate2_bps: float, t1_s: float,
                         total_s: float) -> float:
    """End-to-end throughput of the two-phase relay for a given split.

    min(r1*t1, r2*(total-t1)) bits delivered over the whole window.
    """
    if not 0.0 <= t1_s <= total_s:
        raise ValueError("t1_s must lie in [0, total_s]")
    return min(rate1_bps * t1_s, rate2_bps * (total_s - t1_s)) / total_s


def optimal_phase_split(rate1_bps: float, rate2_bps: float,
                        total_s: float) -> PhaseSplit:
    """Closed-form optimum of the two-phase split.

    Balancing r1*t1 = r2*t2 with t1 + t2 = total gives
    t1 = total*r2/(r1 + r2) and throughput r1*r2/(r1 + r2).
    """
    if rate1_bps <= 0.0 or rate2_bps <= 0.0:
        raise ValueError("phase rates must be positive")
    if total_s <= 0.0:
        raise ValueError("total_s must be positive")
    t1 = total_s * rate2_bps / (rate1_bps + rate2_bps)
    t2 = total_s - t1
    throughput = rate1_bps * rate2_bps / (rate1_bps + rate2_bps)
    return PhaseSplit(t1_s=t1, t2_s=t2, rate1_bps=rate1_bps, rate2_bps=rate2_bps,
                      throughput_bps=throughput)
