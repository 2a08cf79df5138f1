"""Experiment orchestration: config, seeded runs, aggregation, CSV output.

One run simulates a fixed-duration patrol of one strategy at one noise level
and reduces it to scalar metrics; a matrix sweeps strategies x noise levels
x replicates with per-cell seeds derived from a single master seed, so every
number in the output is reproducible from the config alone.
"""

from __future__ import annotations

import csv
import hashlib
import math
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .beliefs import digest, format_belief
from .comms import CommConfig, CommState, tick_comms
from .graph import PatrolGraph, generate_default_map, parse_map
from .metrics import (
    CommGraph,
    algebraic_connectivity,
    classify,
    f_score,
    pearson,
    scan_run,
    system_error,
)
from .strategies import (
    BOARD_KINDS,
    DecisionContext,
    StrategyKind,
    StrategyParams,
    decide_next,
    dtap_auction,
    init_strategy,
    notify_visit,
    retarget,
)
from .world import IdlenessTracker, RobotState, RngStream, WorldState, advance, visit

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "RunRecord",
    "SummaryRow",
    "cell_seed",
    "load_map",
    "run_one",
    "run_matrix",
    "summarize",
    "write_runs_csv",
    "read_runs_csv",
    "write_summary_csv",
    "analyze_runs",
    "RUN_COLUMNS",
]

ALL_STRATEGIES: tuple[StrategyKind, ...] = tuple(StrategyKind)

RUN_COLUMNS = (
    "strategy",
    "noise",
    "seed",
    "avg_graph_idleness",
    "final_error",
    "f_score",
    "lambda2",
    "t_consensus",
    "tp_consensus",
    "fp_consensus_count",
)

SUMMARY_COLUMNS = (
    "strategy",
    "noise",
    "runs",
    "idleness_mean",
    "idleness_std",
    "error_mean",
    "fscore_mean",
    "fscore_std",
    "consensus_rate",
    "t_consensus_mean",
    "tp_consensus_rate",
    "fp_consensus_mean",
    "lambda2_mean",
    "lambda2_median",
    "note",
)


class ConfigError(ValueError):
    """Raised on unreadable or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment matrix."""

    map_file: Optional[str] = None
    map_seed: Optional[int] = None
    n_robots: int = 8
    speed: float = 1.0
    dt: float = 0.1
    duration: float = 3600.0
    comm_range: float = 5.0
    comm_timeout: float = 30.0
    anomaly_node: int = 30
    quorum: float = 0.85
    start_node: int = 0
    noise_levels: tuple[float, ...] = (0.0, 0.05, 0.2)
    strategies: tuple[StrategyKind, ...] = ALL_STRATEGIES
    reps: int = 20
    master_seed: int = 0
    params: StrategyParams = field(default_factory=StrategyParams)

    def __post_init__(self):
        if self.map_file is not None and self.map_seed is not None:
            raise ConfigError("give either map_file or map_seed, not both")
        if self.n_robots < 1:
            raise ConfigError(f"n_robots must be >= 1, got {self.n_robots}")
        if not (self.speed > 0.0):
            raise ConfigError(f"speed must be positive, got {self.speed}")
        if not (self.dt > 0.0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.duration < 0.0:
            raise ConfigError(f"duration must be >= 0, got {self.duration}")
        if not (0.0 < self.quorum <= 1.0):
            raise ConfigError(f"quorum must be in (0, 1], got {self.quorum}")
        for p in self.noise_levels:
            if not (0.0 <= p <= 1.0):
                raise ConfigError(f"noise level must be in [0, 1], got {p}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if not self.strategies:
            raise ConfigError("strategies must not be empty")
        if not self.noise_levels:
            raise ConfigError("noise_levels must not be empty")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        """Load a line-oriented 'key = value' config file.

        '#' starts a comment, blank lines are skipped, unknown keys are an
        error. List values (noises, strategies) are comma separated;
        strategies also accepts 'all'.
        """
        kwargs: dict = {}
        params_kwargs: dict = {}
        text = Path(path).read_text()
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            try:
                _apply_config_key(kwargs, params_kwargs, key, value)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{line_no}: bad value for {key}: {exc}") from None
        if params_kwargs:
            kwargs["params"] = StrategyParams(**params_kwargs)
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc}") from None


def _parse_strategies(value: str) -> tuple[StrategyKind, ...]:
    if value.strip().lower() == "all":
        return ALL_STRATEGIES
    kinds = []
    for token in value.split(","):
        name = token.strip().upper()
        if not name:
            continue
        try:
            kinds.append(StrategyKind[name])
        except KeyError:
            known = ", ".join(k.value for k in ALL_STRATEGIES)
            raise ConfigError(f"unknown strategy {token.strip()!r} (known: {known})") from None
    return tuple(kinds)


def _apply_config_key(kwargs: dict, params_kwargs: dict, key: str, value: str) -> None:
    if key == "map":
        kwargs["map_file"] = value
    elif key == "map_seed":
        kwargs["map_seed"] = int(value)
    elif key == "robots":
        kwargs["n_robots"] = int(value)
    elif key == "speed":
        kwargs["speed"] = float(value)
    elif key == "dt":
        kwargs["dt"] = float(value)
    elif key == "duration":
        kwargs["duration"] = float(value)
    elif key == "comm_range":
        kwargs["comm_range"] = float(value)
    elif key == "comm_timeout":
        kwargs["comm_timeout"] = float(value)
    elif key == "anomaly":
        kwargs["anomaly_node"] = int(value)
    elif key == "quorum":
        kwargs["quorum"] = float(value)
    elif key == "start_node":
        kwargs["start_node"] = int(value)
    elif key == "noises":
        kwargs["noise_levels"] = tuple(float(tok) for tok in value.split(",") if tok.strip())
    elif key == "strategies":
        kwargs["strategies"] = _parse_strategies(value)
    elif key == "reps":
        kwargs["reps"] = int(value)
    elif key == "seed":
        kwargs["master_seed"] = int(value)
    elif key == "cbls_alpha":
        params_kwargs["cbls_alpha"] = float(value)
    elif key == "cbls_epsilon":
        params_kwargs["cbls_epsilon"] = float(value)
    elif key == "dtap_period":
        params_kwargs["dtap_period_s"] = float(value)
    elif key == "task_weight":
        params_kwargs["task_distance_weight"] = float(value)
    else:
        raise ConfigError(f"unknown config key {key!r}")


def load_map(cfg: ExperimentConfig) -> PatrolGraph:
    """Resolve the configured map: explicit file, generator seed, or bundled."""
    if cfg.map_file is not None:
        return parse_map(Path(cfg.map_file).read_text())
    if cfg.map_seed is not None:
        return generate_default_map(cfg.map_seed)
    text = resources.files("swarmpatrol").joinpath("data/default_map.txt").read_text()
    return parse_map(text)


def cell_seed(master_seed: int, strategy: str, noise: float, rep: int) -> int:
    """Derive a 64-bit run seed from the cell coordinates."""
    label = f"{master_seed}|{strategy}|{noise!r}|{rep}".encode()
    return int.from_bytes(hashlib.blake2b(label, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class RunRecord:
    """Scalar outcome of one run; exactly what lands in the per-run CSV."""

    strategy: str
    noise: float
    seed: int
    avg_graph_idleness: float
    final_error: float
    f_score: float  # already rounded to 4 decimals
    lambda2: float
    t_consensus: Optional[float]
    tp_consensus: bool
    fp_consensus_count: int
    rep: int = -1
    misinformed: Optional[bool] = None
    n_exchanges: int = 0


@dataclass(frozen=True)
class SummaryRow:
    """Aggregate over the replicates of one (strategy, noise) cell."""

    strategy: str
    noise: float
    runs: int
    idleness_mean: float
    idleness_std: float
    error_mean: float
    fscore_mean: float
    fscore_std: float
    consensus_rate: float
    t_consensus_mean: Optional[float]
    tp_consensus_rate: float
    fp_consensus_mean: float
    lambda2_mean: float
    lambda2_median: float
    note: str


def _noise_token(noise: float) -> str:
    return repr(float(noise)).replace(".", "p").replace("-", "m")


def run_one(
    cfg: ExperimentConfig,
    g: PatrolGraph,
    kind: StrategyKind,
    noise: float,
    rep: int,
    out_dir: Optional[Path] = None,
) -> RunRecord:
    """Simulate one run and reduce it to a RunRecord.

    When out_dir is given, the per-event log is written there as
    <strategy>_<noise>_r<rep>.log with byte-stable lines.
    """
    run_seed = cell_seed(cfg.master_seed, kind.value, noise, rep)
    m = g.node_count
    n = cfg.n_robots
    if not (0 <= cfg.start_node < m):
        raise ConfigError(f"start_node {cfg.start_node} outside 0..{m - 1}")
    world = WorldState.single_anomaly(m, cfg.anomaly_node)
    tracker = IdlenessTracker(m)
    board, memories = init_strategy(kind, g, n, cfg.params)
    robots = []
    for i in range(n):
        r = RobotState.at_node(i, g, cfg.start_node, cfg.speed)
        r.memory = memories[i]
        robots.append(r)
    comm_cfg = CommConfig(range_m=cfg.comm_range, timeout_s=cfg.comm_timeout)
    comm = CommState(n)
    sense_rngs = [RngStream(run_seed, "sense", i) for i in range(n)]
    strat_rngs = [RngStream(run_seed, "strategy", i) for i in range(n)]
    board_arg = board if kind in BOARD_KINDS else None
    params = cfg.params
    history: list[tuple] = []
    log_lines: Optional[list[str]] = [] if out_dir is not None else None

    dt = cfg.dt
    ticks = int(round(cfg.duration / dt))
    sample_every = max(1, int(round(1.0 / dt)))
    auction_every = (
        int(round(params.dtap_period_s / dt)) if kind is StrategyKind.DTAP else 0
    )
    last_visit = tracker.last_visit
    is_cbls = kind is StrategyKind.CBLS

    for k in range(1, ticks + 1):
        t = k * dt
        world.clock = t
        if auction_every and any(mem.get("claim") is None for mem in memories):
            idl = [t - lv for lv in last_visit]
            group_round = k % auction_every == 0
            for rid, v in dtap_auction(
                robots, g, idl, board, memories, cfg.comm_range, params, group_round
            ):
                retarget(robots[rid], g, v)
                if log_lines is not None:
                    log_lines.append(f"{t:.3f} goal robot={rid} node={v}")
        for r in robots:
            arrived = advance(r, g, dt)
            if arrived is None:
                continue
            idleness_before = t - last_visit[arrived]
            b = visit(r, tracker, world, arrived, noise, sense_rngs[r.id])
            history.append(("v", t, r.id, arrived, int(b)))
            if log_lines is not None:
                log_lines.append(
                    f"{t:.3f} visit robot={r.id} node={arrived} belief={format_belief(b)}"
                )
            if is_cbls:
                notify_visit(kind, r.memory, arrived, idleness_before, params)
            if arrived == r.goal:
                ctx = DecisionContext(
                    robot_id=r.id,
                    node=arrived,
                    idleness=[t - lv for lv in last_visit],
                    graph=g,
                    board=board_arg,
                    memory=r.memory,
                    rng=strat_rngs[r.id],
                    n_robots=n,
                    params=params,
                )
                goal = decide_next(kind, ctx)
                r.goal = goal
                r.path = g.shortest_path(arrived, goal)[0][1:]
                if log_lines is not None:
                    log_lines.append(f"{t:.3f} goal robot={r.id} node={goal}")
        for i, j in tick_comms(robots, comm, t, comm_cfg):
            history.append(("x", t, i, j))
            if log_lines is not None:
                log_lines.append(
                    f"{t:.3f} comm robot={i} peer={j} beliefs={digest(robots[i].beliefs)}"
                )
        if k % sample_every == 0:
            tracker.sample(t)

    vectors = [r.beliefs for r in robots]
    error = system_error(vectors, world.truth)
    score = f_score(classify(vectors, world.truth))
    report, misinformed = scan_run(m, n, world.truth, history, cfg.quorum)
    lam2 = algebraic_connectivity(CommGraph.from_contacts(n, comm.log.events))
    record = RunRecord(
        strategy=kind.value,
        noise=float(noise),
        seed=run_seed,
        avg_graph_idleness=tracker.average(),
        final_error=float(error),
        f_score=round(float(score), 4),
        lambda2=lam2,
        t_consensus=report.t_full_consensus,
        tp_consensus=report.tp_consensus,
        fp_consensus_count=report.fp_consensus_count,
        rep=rep,
        misinformed=misinformed,
        n_exchanges=len(comm.log),
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        name = f"{kind.value}_{_noise_token(noise)}_r{rep}.log"
        (out_dir / name).write_text("\n".join(log_lines) + ("\n" if log_lines else ""))
    return record


def run_matrix(
    cfg: ExperimentConfig,
    out_dir: Optional[Path] = None,
    g: Optional[PatrolGraph] = None,
    progress: bool = False,
) -> tuple[list[RunRecord], list[SummaryRow]]:
    """Run the full strategy x noise x replicate matrix in canonical order.

    Canonical order is strategies as configured, noise levels as configured,
    replicates ascending; the per-run CSV rows follow it, so repeated
    executions of the same config are byte-identical.
    """
    if g is None:
        g = load_map(cfg)
    cells = [
        (kind, noise, rep)
        for kind in cfg.strategies
        for noise in cfg.noise_levels
        for rep in range(cfg.reps)
    ]
    seeds = [cell_seed(cfg.master_seed, kind.value, noise, rep) for kind, noise, rep in cells]
    if len(set(seeds)) != len(seeds):
        raise RuntimeError("cell seed collision; change the master seed")
    records: list[RunRecord] = []
    for idx, (kind, noise, rep) in enumerate(cells):
        records.append(run_one(cfg, g, kind, noise, rep, out_dir=out_dir))
        if progress:
            print(f"[{idx + 1}/{len(cells)}] {kind.value} noise={noise} rep={rep}", flush=True)
    summaries = summarize(records)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_runs_csv(out_dir / "runs.csv", records)
        write_summary_csv(out_dir / "summary.csv", summaries)
    return records, summaries


def summarize(records: Sequence[RunRecord]) -> list[SummaryRow]:
    """Aggregate records into per-(strategy, noise) rows, in input order.

    Standard deviations are population deviations (divide by n), so a single
    replicate reports 0; such rows carry a note.
    """
    groups: dict[tuple[str, float], list[RunRecord]] = {}
    for rec in records:
        groups.setdefault((rec.strategy, rec.noise), []).append(rec)
    rows: list[SummaryRow] = []
    for (strategy, noise), recs in groups.items():
        n = len(recs)
        idleness = [r.avg_graph_idleness for r in recs]
        errors = [r.final_error for r in recs]
        scores = [r.f_score for r in recs]
        lambdas = [r.lambda2 for r in recs]
        reached = [r.t_consensus for r in recs if r.t_consensus is not None]
        rows.append(
            SummaryRow(
                strategy=strategy,
                noise=noise,
                runs=n,
                idleness_mean=_mean(idleness),
                idleness_std=_pstd(idleness),
                error_mean=_mean(errors),
                fscore_mean=_mean(scores),
                fscore_std=_pstd(scores),
                consensus_rate=len(reached) / n,
                t_consensus_mean=_mean(reached) if reached else None,
                tp_consensus_rate=sum(1 for r in recs if r.tp_consensus) / n,
                fp_consensus_mean=_mean([float(r.fp_consensus_count) for r in recs]),
                lambda2_mean=_mean(lambdas),
                lambda2_median=float(statistics.median(lambdas)),
                note="std is 0 by definition for a single run" if n == 1 else "",
            )
        )
    return rows


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _pstd(xs: Sequence[float]) -> float:
    mu = _mean(xs)
    return math.sqrt(sum((x - mu) ** 2 for x in xs) / len(xs))


# ---------------------------------------------------------------------------
# CSV serialization; floats use repr so reading back is lossless
# ---------------------------------------------------------------------------


def _fmt_opt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def write_runs_csv(path: Path, records: Sequence[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.strategy,
                    repr(r.noise),
                    r.seed,
                    repr(r.avg_graph_idleness),
                    repr(r.final_error),
                    f"{r.f_score:.4f}",
                    repr(r.lambda2),
                    _fmt_opt(r.t_consensus),
                    int(r.tp_consensus),
                    r.fp_consensus_count,
                ]
            )


def read_runs_csv(path: Path) -> list[RunRecord]:
    records: list[RunRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RUN_COLUMNS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            records.append(
                RunRecord(
                    strategy=row["strategy"],
                    noise=float(row["noise"]),
                    seed=int(row["seed"]),
                    avg_graph_idleness=float(row["avg_graph_idleness"]),
                    final_error=float(row["final_error"]),
                    f_score=float(row["f_score"]),
                    lambda2=float(row["lambda2"]),
                    t_consensus=float(row["t_consensus"]) if row["t_consensus"] else None,
                    tp_consensus=bool(int(row["tp_consensus"])),
                    fp_consensus_count=int(row["fp_consensus_count"]),
                )
            )
    return records


def write_summary_csv(path: Path, rows: Sequence[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for s in rows:
            writer.writerow(
                [
                    s.strategy,
                    repr(s.noise),
                    s.runs,
                    repr(s.idleness_mean),
                    repr(s.idleness_std),
                    repr(s.error_mean),
                    repr(s.fscore_mean),
                    repr(s.fscore_std),
                    repr(s.consensus_rate),
                    _fmt_opt(s.t_consensus_mean),
                    repr(s.tp_consensus_rate),
                    repr(s.fp_consensus_mean),
                    repr(s.lambda2_mean),
                    repr(s.lambda2_median),
                    s.note,
                ]
            )


# ---------------------------------------------------------------------------
# post-hoc analysis over a runs directory
# ---------------------------------------------------------------------------


def analyze_runs(runs_dir: Path) -> list[Path]:
    """Build analysis CSVs from a directory produced by run_matrix.

    Emits correlations.csv (per-noise Pearson between lambda2 and
    consensus time), connectivity_by_strategy.csv (per-cell lambda2 stats),
    consensus_vs_connectivity.csv (per-run scatter points),
    consensus_outcomes.csv (true/false positive consensus rates), and
    social_edges.csv (pairwise exchange counts parsed from the event logs,
    when logs are present).
    """
    runs_dir = Path(runs_dir)
    records = read_runs_csv(runs_dir / "runs.csv")
    written: list[Path] = []

    noises = sorted({r.noise for r in records})
    strategies = list(dict.fromkeys(r.strategy for r in records))

    path = runs_dir / "correlations.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["noise", "n_points", "pearson_r", "p_value", "note"])
        for noise in noises:
            points = [
                (r.lambda2, r.t_consensus)
                for r in records
                if r.noise == noise and r.t_consensus is not None
            ]
            xs = [p[0] for p in points]
            ys = [p[1] for p in points]
            note = ""
            r_val = p_val = None
            if len(points) < 3:
                note = "fewer than 3 consensus runs"
            elif len(set(xs)) == 1 or len(set(ys)) == 1:
                note = "degenerate variance"
            else:
                r_val, p_val = pearson(xs, ys)
            writer.writerow(
                [repr(noise), len(points), _fmt_opt(r_val), _fmt_opt(p_val), note]
            )
    written.append(path)

    summaries = summarize(records)
    by_cell = {(s.strategy, s.noise): s for s in summaries}

    path = runs_dir / "connectivity_by_strategy.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "noise", "lambda2_median", "lambda2_mean"])
        for strategy in strategies:
            for noise in noises:
                s = by_cell.get((strategy, noise))
                if s is None:
                    continue
                writer.writerow(
                    [strategy, repr(noise), repr(s.lambda2_median), repr(s.lambda2_mean)]
                )
    written.append(path)

    path = runs_dir / "consensus_vs_connectivity.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "noise", "seed", "lambda2", "t_consensus"])
        for r in records:
            writer.writerow(
                [r.strategy, repr(r.noise), r.seed, repr(r.lambda2), _fmt_opt(r.t_consensus)]
            )
    written.append(path)

    path = runs_dir / "consensus_outcomes.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "noise", "tp_consensus_rate", "fp_consensus_mean"])
        for strategy in strategies:
            for noise in noises:
                s = by_cell.get((strategy, noise))
                if s is None:
                    continue
                writer.writerow(
                    [strategy, repr(noise), repr(s.tp_consensus_rate), repr(s.fp_consensus_mean)]
                )
    written.append(path)

    social = _social_edges_from_logs(runs_dir)
    if social is not None:
        path = runs_dir / "social_edges.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["strategy", "noise", "robot_i", "robot_j", "exchanges"])
            for (strategy, noise, i, j), count in social:
                writer.writerow([strategy, noise, i, j, count])
        written.append(path)
    return written


def _social_edges_from_logs(runs_dir: Path) -> Optional[list[tuple[tuple, int]]]:
    logs = sorted(runs_dir.glob("*.log"))
    if not logs:
        return None
    counts: dict[tuple, int] = {}
    for log_path in logs:
        stem = log_path.stem
        try:
            strategy, noise_token, _rep = stem.rsplit("_", 2)
            noise = noise_token.replace("m", "-").replace("p", ".", 1)
            float(noise)
        except ValueError:
            continue
        for line in log_path.read_text().splitlines():
            parts = line.split()
            if len(parts) >= 4 and parts[1] == "comm":
                i = int(parts[2].removeprefix("robot="))
                j = int(parts[3].removeprefix("peer="))
                key = (strategy, noise, i, j)
                counts[key] = counts.get(key, 0) + 1
    return sorted(counts.items())
