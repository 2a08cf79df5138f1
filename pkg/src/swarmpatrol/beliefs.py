"""Ternary belief algebra with conflict-absorbing pairwise fusion.

A belief about one node is one of three states: certain-false, uncertain,
certain-true. States are stored in half-units (ints 0, 1, 2) so every
operation is exact integer arithmetic; the float values 0.0/0.5/1.0 appear
only at serialization and metric boundaries.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, Sequence

__all__ = [
    "Belief",
    "fuse",
    "fuse_vectors",
    "measurement_update",
    "new_belief_vector",
    "belief_to_float",
    "belief_from_float",
    "format_belief",
    "digest",
]


class Belief(IntEnum):
    """One robot's opinion about one node, in half-units of truth."""

    FALSE = 0
    UNCERTAIN = 1
    TRUE = 2


def _clamped_sum(a: int, b: int) -> int:
    # closed form of the fusion rule in half-units: clamp(a + b - 1, 0, 2)
    s = a + b - 1
    if s < 0:
        return 0
    if s > 2:
        return 2
    return s


# Precomputed 3x3 table so fuse() is two tuple lookups in the hot path.
_FUSION: tuple[tuple[Belief, ...], ...] = tuple(
    tuple(Belief(_clamped_sum(a, b)) for b in range(3)) for a in range(3)
)

_FLOAT_OF = (0.0, 0.5, 1.0)
_STR_OF = ("0", "0.5", "1")
_DIGEST_OF = ("0", "u", "1")


def fuse(a: int, b: int) -> Belief:
    """Combine two opinions symmetrically.

    Agreement keeps the shared value, the uncertain state is the identity,
    and opposing certainties cancel to uncertain. Equivalent closed form on
    the unit scale: clamp(a + b - 1/2, 0, 1).
    """
    return _FUSION[a][b]


def fuse_vectors(u: Sequence[int], v: Sequence[int]) -> list[Belief]:
    """Elementwise fusion of two equal-length belief vectors."""
    if len(u) != len(v):
        raise ValueError(f"belief vector length mismatch: {len(u)} != {len(v)}")
    table = _FUSION
    return [table[a][b] for a, b in zip(u, v)]


def measurement_update(prior: int, observation: bool) -> Belief:
    """Fold a boolean sensor reading into a prior belief.

    The reading is treated as a certain opinion (true -> 2, false -> 0) and
    fused with the prior, so a fresh reading always overrides uncertainty
    and a contradicting reading demotes certainty back to uncertain.
    """
    return _FUSION[prior][2 if observation else 0]


def new_belief_vector(m: int) -> list[Belief]:
    """Initial all-uncertain vector over m nodes."""
    if m <= 0:
        raise ValueError(f"node count must be positive, got {m}")
    return [Belief.UNCERTAIN] * m


def belief_to_float(b: int) -> float:
    return _FLOAT_OF[b]


def belief_from_float(x: float) -> Belief:
    """Inverse of belief_to_float; rejects anything but 0, 0.5, 1."""
    if x == 0.0:
        return Belief.FALSE
    if x == 0.5:
        return Belief.UNCERTAIN
    if x == 1.0:
        return Belief.TRUE
    raise ValueError(f"not a belief value: {x!r}")


def format_belief(b: int) -> str:
    """Render a belief for event logs: '0', '0.5' or '1'."""
    return _STR_OF[b]


def digest(vector: Iterable[int]) -> str:
    """Compact one-char-per-node rendering ('0', 'u', '1') for log lines."""
    table = _DIGEST_OF
    return "".join(table[b] for b in vector)
