"""Ten patrol policies behind one arrival-time decision interface.

A policy picks the next goal node whenever a robot reaches its current goal.
Policies differ in what they may read: the reactive family (RAND, CR, HCR,
HPCC, GBS) sees only the graph and per-node idleness; the coordinated family
additionally shares a board carrying travel intentions (SEBS, CBLS), a fixed
cyclic route (CGG), or a claim table (DTAG, DTAP). No policy ever reads
another robot's beliefs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .graph import PatrolGraph, Route, build_cyclic_route
from .world import RngStream, RobotState

__all__ = [
    "StrategyKind",
    "StrategyParams",
    "SharedBoard",
    "DecisionContext",
    "BOARD_KINDS",
    "init_strategy",
    "decide_next",
    "notify_visit",
    "dtap_auction",
    "retarget",
    "travel_distance",
]


class StrategyKind(Enum):
    """The ten available patrol policies."""

    CBLS = "CBLS"
    CGG = "CGG"
    CR = "CR"
    DTAG = "DTAG"
    DTAP = "DTAP"
    GBS = "GBS"
    HCR = "HCR"
    HPCC = "HPCC"
    RAND = "RAND"
    SEBS = "SEBS"


# Policies that receive the shared board (the rest run on local state plus
# the environmental idleness signal only).
BOARD_KINDS = frozenset(
    {
        StrategyKind.CBLS,
        StrategyKind.CGG,
        StrategyKind.DTAG,
        StrategyKind.DTAP,
        StrategyKind.GBS,
        StrategyKind.SEBS,
    }
)


@dataclass(frozen=True)
class StrategyParams:
    """Tunables shared by the learning and auction policies."""

    cbls_alpha: float = 0.3
    cbls_epsilon: float = 0.2
    dtap_period_s: float = 20.0
    task_distance_weight: float = 7.0

    def __post_init__(self):
        if not (0.0 < self.cbls_alpha <= 1.0):
            raise ValueError(f"cbls_alpha must be in (0, 1], got {self.cbls_alpha}")
        if not (0.0 <= self.cbls_epsilon <= 1.0):
            raise ValueError(f"cbls_epsilon must be in [0, 1], got {self.cbls_epsilon}")
        if not (self.dtap_period_s > 0.0):
            raise ValueError(f"dtap_period_s must be positive, got {self.dtap_period_s}")
        if not (self.task_distance_weight > 0.0):
            raise ValueError(
                f"task_distance_weight must be positive, got {self.task_distance_weight}"
            )


@dataclass
class SharedBoard:
    """Run-wide shared state for the coordinated policies.

    intentions[r] is robot r's currently announced goal (None before its
    first decision); claims maps node -> claiming robot; route/entry_index
    carry the fixed cyclic tour and each robot's entry position on it.
    """

    intentions: list[Optional[int]]
    claims: dict[int, int] = field(default_factory=dict)
    route: Optional[Route] = None
    entry_index: Optional[list[int]] = None


@dataclass
class DecisionContext:
    """Everything one goal decision may look at."""

    robot_id: int
    node: int
    idleness: Sequence[float]
    graph: PatrolGraph
    board: Optional[SharedBoard]
    memory: dict
    rng: RngStream
    n_robots: int
    params: StrategyParams


def init_strategy(
    kind: StrategyKind,
    g: PatrolGraph,
    n_robots: int,
    params: StrategyParams,
) -> tuple[Optional[SharedBoard], list[dict]]:
    """Build the shared board (if the policy uses one) and per-robot memory."""
    memories: list[dict] = [{} for _ in range(n_robots)]
    if kind not in BOARD_KINDS:
        return None, memories
    board = SharedBoard(intentions=[None] * n_robots)
    if kind is StrategyKind.CGG:
        route = build_cyclic_route(g)
        board.route = route
        board.entry_index = _entry_indices(route, g, n_robots)
    if kind is StrategyKind.CBLS:
        for mem in memories:
            mem["learned"] = [0.0] * g.node_count
    if kind in (StrategyKind.DTAG, StrategyKind.DTAP):
        for mem in memories:
            mem["claim"] = None
    return board, memories


def _entry_indices(route: Route, g: PatrolGraph, n_robots: int) -> list[int]:
    """Evenly spaced route entry positions, floor(length / n) meters apart.

    Robot k enters at the first route index whose cumulative walk distance
    reaches k * floor(length / n); spacing stays below one lap, so the scan
    never wraps.
    """
    spacing = float(math.floor(route.length / n_robots))
    cum = [0.0]
    for idx in range(len(route.nodes) - 1):
        cum.append(cum[-1] + g.edge_length(route.nodes[idx], route.nodes[idx + 1]))
    last = len(cum) - 1
    indices: list[int] = []
    for k in range(n_robots):
        target = k * spacing
        idx = 0
        # clamp to the final index when the target falls inside the wrap hop
        while idx < last and cum[idx] < target:
            idx += 1
        indices.append(idx)
    return indices


# ---------------------------------------------------------------------------
# per-policy decision rules
# ---------------------------------------------------------------------------


def _decide_rand(ctx: DecisionContext) -> int:
    nbrs = ctx.graph.neighbors(ctx.node)
    return nbrs[ctx.rng.index(len(nbrs))][0]


def _decide_cr(ctx: DecisionContext) -> int:
    # most idle neighbor, ties to the lowest node id
    idleness = ctx.idleness
    best_v = -1
    best = -math.inf
    for v, _ in ctx.graph.neighbors(ctx.node):
        idl = idleness[v]
        if idl > best:
            best = idl
            best_v = v
    return best_v


def _decide_hcr(ctx: DecisionContext) -> int:
    idleness = ctx.idleness
    nbrs = ctx.graph.neighbors(ctx.node)
    max_idl = max(idleness[v] for v, _ in nbrs)
    max_d = max(d for _, d in nbrs)
    best_v = -1
    best = -math.inf
    for v, d in nbrs:
        gain = idleness[v] / max_idl if max_idl > 0.0 else 1.0
        score = 0.5 * gain + 0.5 * (1.0 - d / max_d)
        if score > best:
            best = score
            best_v = v
    return best_v


def _decide_hpcc(ctx: DecisionContext) -> int:
    # HCR scoring widened to every node, over shortest-path distances
    idleness = ctx.idleness
    g = ctx.graph
    here = ctx.node
    candidates = [v for v in range(g.node_count) if v != here]
    max_idl = max(idleness[v] for v in candidates)
    max_d = max(g.shortest_distance(here, v) for v in candidates)
    best_v = -1
    best = -math.inf
    for v in candidates:
        gain = idleness[v] / max_idl if max_idl > 0.0 else 1.0
        score = 0.5 * gain + 0.5 * (1.0 - g.shortest_distance(here, v) / max_d)
        if score > best:
            best = score
            best_v = v
    return best_v


def _decide_cgg(ctx: DecisionContext) -> int:
    board = ctx.board
    route = board.route
    mem = ctx.memory
    idx = mem.get("route_idx")
    if idx is None:
        entry_idx = board.entry_index[ctx.robot_id]
        entry_node = route.nodes[entry_idx]
        if ctx.node != entry_node:
            return entry_node
        mem["route_idx"] = entry_idx
        idx = entry_idx
    nxt = (idx + 1) % len(route.nodes)
    mem["route_idx"] = nxt
    return route.nodes[nxt]


def _gbs_scores(ctx: DecisionContext) -> list[tuple[int, float]]:
    idleness = ctx.idleness
    mean_edge = ctx.graph.mean_edge_length
    return [
        (v, idleness[v] * 2.0 ** (-d / mean_edge))
        for v, d in ctx.graph.neighbors(ctx.node)
    ]


def _decide_gbs(ctx: DecisionContext) -> int:
    best_v = -1
    best = -math.inf
    for v, score in _gbs_scores(ctx):
        if score > best:
            best = score
            best_v = v
    return best_v


def _intention_count(board: SharedBoard, robot_id: int, v: int) -> int:
    return sum(1 for r, goal in enumerate(board.intentions) if r != robot_id and goal == v)


def _decide_sebs(ctx: DecisionContext) -> int:
    board = ctx.board
    best_v = -1
    best = -math.inf
    for v, score in _gbs_scores(ctx):
        score /= 2.0 ** _intention_count(board, ctx.robot_id, v)
        if score > best:
            best = score
            best_v = v
    board.intentions[ctx.robot_id] = best_v
    return best_v


def _decide_cbls(ctx: DecisionContext) -> int:
    board = ctx.board
    nbrs = ctx.graph.neighbors(ctx.node)
    if ctx.rng.random() < ctx.params.cbls_epsilon:
        choice = nbrs[ctx.rng.index(len(nbrs))][0]
        board.intentions[ctx.robot_id] = choice
        return choice
    learned = ctx.memory["learned"]
    idleness = ctx.idleness
    mean_edge = ctx.graph.mean_edge_length
    best_v = -1
    best = -math.inf
    for v, d in nbrs:
        # the learned estimate is a floor, not a replacement: an overdue
        # neighbor must still win, and a flat learned 0 prior would trap
        # the robot inside its already-visited pocket
        expected = max(idleness[v], learned[v])
        score = expected * 2.0 ** (-d / mean_edge)
        score /= 2.0 ** _intention_count(board, ctx.robot_id, v)
        if score > best:
            best = score
            best_v = v
    board.intentions[ctx.robot_id] = best_v
    return best_v


def _decide_dtag(ctx: DecisionContext) -> int:
    board = ctx.board
    mem = ctx.memory
    claims = board.claims
    if mem.get("claim") == ctx.node:
        del claims[ctx.node]
        mem["claim"] = None
    idleness = ctx.idleness
    w = ctx.params.task_distance_weight
    g = ctx.graph
    here = ctx.node
    best_v = -1
    best = -math.inf
    for v in range(g.node_count):
        if v == here or v in claims:
            continue
        utility = idleness[v] - w * g.shortest_distance(here, v)
        if utility > best:
            best = utility
            best_v = v
    if best_v < 0:
        # every other node claimed; fall back to the most idle neighbor
        return _decide_cr(ctx)
    claims[best_v] = ctx.robot_id
    mem["claim"] = best_v
    return best_v


def _decide_dtap(ctx: DecisionContext) -> int:
    board = ctx.board
    mem = ctx.memory
    if mem.get("claim") == ctx.node:
        del board.claims[ctx.node]
        mem["claim"] = None
    return _decide_cr(ctx)


_RULES: dict[StrategyKind, Callable[[DecisionContext], int]] = {
    StrategyKind.RAND: _decide_rand,
    StrategyKind.CR: _decide_cr,
    StrategyKind.HCR: _decide_hcr,
    StrategyKind.HPCC: _decide_hpcc,
    StrategyKind.CGG: _decide_cgg,
    StrategyKind.GBS: _decide_gbs,
    StrategyKind.SEBS: _decide_sebs,
    StrategyKind.CBLS: _decide_cbls,
    StrategyKind.DTAG: _decide_dtag,
    StrategyKind.DTAP: _decide_dtap,
}


def decide_next(kind: StrategyKind, ctx: DecisionContext) -> int:
    """Pick the next goal; always a valid node different from the current one."""
    goal = _RULES[kind](ctx)
    if not (0 <= goal < ctx.graph.node_count) or goal == ctx.node:
        raise AssertionError(f"{kind.value} chose invalid goal {goal} from node {ctx.node}")
    return goal


def notify_visit(
    kind: StrategyKind,
    memory: dict,
    node: int,
    idleness_before: float,
    params: StrategyParams,
) -> None:
    """Per-visit learning hook; only CBLS maintains visit statistics."""
    if kind is StrategyKind.CBLS:
        learned = memory["learned"]
        a = params.cbls_alpha
        learned[node] = (1.0 - a) * learned[node] + a * idleness_before


# ---------------------------------------------------------------------------
# DTAP periodic auction
# ---------------------------------------------------------------------------


def travel_distance(robot: RobotState, g: PatrolGraph, v: int) -> float:
    """Shortest travel distance from the robot's current pose to node v."""
    if robot.edge is None:
        return g.shortest_distance(robot.node, v)
    a, b = robot.edge
    via_b = (robot._edge_len - robot.offset) + g.shortest_distance(b, v)
    via_a = robot.offset + g.shortest_distance(a, v)
    return min(via_a, via_b)


def retarget(robot: RobotState, g: PatrolGraph, goal: int) -> None:
    """Redirect a robot to a new goal from wherever it is.

    Mid-edge the robot continues to the nearer completion of its travel
    (reversing only when strictly shorter); the leftover path is replanned
    from the end node it will reach.
    """
    robot.goal = goal
    if robot.edge is None:
        robot.path = g.shortest_path(robot.node, goal)[0][1:]
        return
    a, b = robot.edge
    via_b = (robot._edge_len - robot.offset) + g.shortest_distance(b, goal)
    via_a = robot.offset + g.shortest_distance(a, goal)
    if via_a < via_b:
        robot.reverse_edge(g)
        robot.path = [a] + g.shortest_path(a, goal)[0][1:]
    else:
        robot.path = [b] + g.shortest_path(b, goal)[0][1:]


def dtap_auction(
    robots: Sequence[RobotState],
    g: PatrolGraph,
    idleness: Sequence[float],
    board: SharedBoard,
    memories: Sequence[dict],
    comm_range: float,
    params: StrategyParams,
    group_round: bool = True,
) -> list[tuple[int, int]]:
    """One task-award pass; returns (robot_id, awarded node) pairs.

    Claimless robots value node v at idleness(v) minus weighted travel
    distance. Robots out of communication range of everyone self-award
    their best node as soon as they are claimless; robots within range of
    at least one other robot wait for a group round (the periodic auction):
    each proposes its best unclaimed node, collisions go to the lowest
    travel distance (ties to the lowest robot id), and losers re-propose
    against the shrunken pool. Robots holding an award sit out.
    """
    claims = board.claims
    bidders = [r for r in robots if memories[r.id].get("claim") is None]
    if not bidders:
        return []
    unclaimed = [v for v in range(g.node_count) if v not in claims]
    if not unclaimed:
        return []
    w = params.task_distance_weight
    range_sq = comm_range * comm_range
    connected = [False] * len(robots)
    for i in range(len(robots)):
        xi, yi = robots[i].x, robots[i].y
        for j in range(i + 1, len(robots)):
            dx = xi - robots[j].x
            dy = yi - robots[j].y
            if dx * dx + dy * dy <= range_sq:
                connected[i] = True
                connected[j] = True
    awards: list[tuple[int, int]] = []

    if group_round:
        group = [r for r in bidders if connected[r.id]]
        while group and unclaimed:
            proposals: dict[int, list[RobotState]] = {}
            for r in group:
                pool = [v for v in unclaimed if v != r.node]
                if not pool:
                    continue
                best_v = max(
                    pool,
                    key=lambda v: (idleness[v] - w * travel_distance(r, g, v), -v),
                )
                proposals.setdefault(best_v, []).append(r)
            if not proposals:
                break
            group = []
            for v, rs in sorted(proposals.items()):
                winner = min(rs, key=lambda r: (travel_distance(r, g, v), r.id))
                claims[v] = winner.id
                memories[winner.id]["claim"] = v
                awards.append((winner.id, v))
                unclaimed.remove(v)
                group.extend(r for r in rs if r is not winner)

    for r in bidders:
        if connected[r.id] or not unclaimed:
            continue
        pool = [v for v in unclaimed if v != r.node]
        if not pool:
            continue
        best_v = max(
            pool,
            key=lambda v: (idleness[v] - w * travel_distance(r, g, v), -v),
        )
        claims[best_v] = r.id
        memories[r.id]["claim"] = best_v
        awards.append((r.id, best_v))
        unclaimed.remove(best_v)
    return awards
