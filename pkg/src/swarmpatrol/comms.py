"""Proximity-triggered pairwise belief exchange with a per-pair cooldown.

Two robots within straight-line communication range exchange belief vectors:
both end up holding the elementwise fusion of the two. A pair that has
exchanged must wait out a cooldown before exchanging again. Within a tick,
eligible pairs run sequentially in ascending (i, j) order, so later pairs see
the results of earlier fusions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .beliefs import fuse_vectors
from .world import RobotState

__all__ = [
    "CommConfig",
    "ContactLog",
    "CommState",
    "eligible_pairs",
    "exchange",
    "tick_comms",
]


@dataclass(frozen=True)
class CommConfig:
    """Exchange gating parameters."""

    range_m: float = 5.0
    timeout_s: float = 30.0

    def __post_init__(self):
        if not (self.range_m > 0.0):
            raise ValueError(f"range_m must be positive, got {self.range_m}")
        if self.timeout_s < 0.0:
            raise ValueError(f"timeout_s must be non-negative, got {self.timeout_s}")


@dataclass
class ContactLog:
    """Time-ordered record of executed exchanges as (t, i, j) with i < j."""

    events: list[tuple[float, int, int]] = field(default_factory=list)

    def append(self, t: float, i: int, j: int) -> None:
        self.events.append((t, i, j))

    def __len__(self) -> int:
        return len(self.events)


class CommState:
    """Per-pair last exchange times plus the contact log for one run."""

    __slots__ = ("last_exchange", "log")

    def __init__(self, n_robots: int):
        self.last_exchange: dict[tuple[int, int], float] = {
            (i, j): -math.inf
            for i in range(n_robots)
            for j in range(i + 1, n_robots)
        }
        self.log = ContactLog()


def eligible_pairs(
    positions: Sequence[tuple[float, float]],
    last_exchange: dict[tuple[int, int], float],
    t: float,
    cfg: CommConfig,
) -> list[tuple[int, int]]:
    """Pairs allowed to exchange at time t, in ascending (i, j) order.

    A pair qualifies when its straight-line separation is within range and
    at least the cooldown has elapsed since its previous exchange (a gap of
    exactly the cooldown is eligible).
    """
    range_sq = cfg.range_m * cfg.range_m
    # tiny slack so a gap of exactly the cooldown stays eligible under the
    # accumulated float error of tick-grid timestamps
    horizon = t - cfg.timeout_s + 1e-9
    out: list[tuple[int, int]] = []
    n = len(positions)
    for i in range(n):
        xi, yi = positions[i]
        for j in range(i + 1, n):
            if last_exchange[(i, j)] > horizon:
                continue
            xj, yj = positions[j]
            dx = xi - xj
            dy = yi - yj
            if dx * dx + dy * dy <= range_sq:
                out.append((i, j))
    return out


def exchange(ri: RobotState, rj: RobotState, t: float, state: CommState) -> None:
    """Fuse the two belief vectors and hand each robot its own copy."""
    fused = fuse_vectors(ri.beliefs, rj.beliefs)
    ri.beliefs = fused
    rj.beliefs = fused.copy()
    i, j = (ri.id, rj.id) if ri.id < rj.id else (rj.id, ri.id)
    state.last_exchange[(i, j)] = t
    state.log.append(t, i, j)


def tick_comms(
    robots: Sequence[RobotState],
    state: CommState,
    t: float,
    cfg: CommConfig,
) -> list[tuple[int, int]]:
    """Run all eligible exchanges for this tick; returns the executed pairs.

    Eligibility is evaluated once against positions at time t, then the
    exchanges apply sequentially in ascending pair order.
    """
    positions = [(r.x, r.y) for r in robots]
    pairs = eligible_pairs(positions, state.last_exchange, t, cfg)
    for i, j in pairs:
        exchange(robots[i], robots[j], t, state)
    return pairs
