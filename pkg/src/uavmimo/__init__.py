"""Multi-cell massive MIMO simulator for aerial and ground users.

Deterministic, seedable Monte Carlo pipeline covering uplink pilot
transmission, channel estimation, pilot decontamination, downlink SINR
evaluation, 3D beam tracking for fast-moving aerial users, and a
two-phase transmission optimizer for relayed swarm traffic.
"""

__version__ = "0.1.0"
