"""System-level measurements over belief states and contact histories.

Covers the mean absolute belief error, the confusion-count score with an
uncertainty penalty (both in exact rational arithmetic), quorum consensus
extracted by replaying the belief-change history, the communication graph
spectrum (hand-rolled cyclic Jacobi), and Pearson correlation with a
two-sided p-value computed from the t distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .beliefs import Belief, fuse_vectors

__all__ = [
    "ConfusionCounts",
    "classify",
    "system_error",
    "f_score",
    "CommGraph",
    "jacobi_eigenvalues",
    "algebraic_connectivity",
    "required_quorum",
    "ConsensusReport",
    "consensus_report",
    "misinformation_ever",
    "scan_run",
    "pearson",
]


# ---------------------------------------------------------------------------
# belief accuracy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts over every (robot, node) belief entry."""

    tp: int
    tn: int
    fp: int
    fn: int
    u: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn + self.u


def classify(vectors: Sequence[Sequence[int]], truth: Sequence[bool]) -> ConfusionCounts:
    """Bucket every belief entry against the ground truth.

    Certain-true at a true node counts tp, at a false node fp; certain-false
    at a false node tn, at a true node fn; uncertain always u. Entries total
    n_robots * n_nodes.
    """
    tp = tn = fp = fn = u = 0
    for beliefs in vectors:
        if len(beliefs) != len(truth):
            raise ValueError("belief vector length does not match truth")
        for b, is_true in zip(beliefs, truth):
            if b == 1:
                u += 1
            elif b == 2:
                if is_true:
                    tp += 1
                else:
                    fp += 1
            else:
                if is_true:
                    fn += 1
                else:
                    tn += 1
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn, u=u)


def system_error(vectors: Sequence[Sequence[int]], truth: Sequence[bool]) -> Fraction:
    """Mean absolute difference between beliefs and truth, exact.

    Each entry contributes |belief - truth| on the unit scale, so certain
    agreement adds 0, uncertainty adds 1/2 and certain disagreement adds 1.
    """
    total_half_units = 0
    entries = 0
    for beliefs in vectors:
        if len(beliefs) != len(truth):
            raise ValueError("belief vector length does not match truth")
        for b, is_true in zip(beliefs, truth):
            total_half_units += abs(int(b) - (2 if is_true else 0))
        entries += len(beliefs)
    return Fraction(total_half_units, 2 * entries)


def f_score(counts: ConfusionCounts) -> Fraction:
    """Correct-classification score with a half-weight uncertainty penalty.

    2(tp+tn) / (2(tp+tn) + fp + fn + u/2), exact; 0 when the numerator is 0
    (e.g. every entry uncertain).
    """
    good = counts.tp + counts.tn
    if good == 0:
        return Fraction(0)
    return Fraction(2 * good) / (2 * good + counts.fp + counts.fn + Fraction(counts.u, 2))


# ---------------------------------------------------------------------------
# communication graph spectrum
# ---------------------------------------------------------------------------


@dataclass
class CommGraph:
    """Weighted contact graph over robots; weight = number of exchanges."""

    weights: np.ndarray  # symmetric (n, n), zero diagonal

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("weights must have a zero diagonal")
        if np.any(w < 0.0):
            raise ValueError("weights must be non-negative")
        self.weights = w

    @classmethod
    def from_contacts(cls, n_robots: int, events: Iterable[tuple[float, int, int]]) -> "CommGraph":
        w = np.zeros((n_robots, n_robots))
        for _, i, j in events:
            w[i, j] += 1.0
            w[j, i] += 1.0
        return cls(weights=w)

    def laplacian(self) -> np.ndarray:
        """Weighted Laplacian: degree matrix minus weights."""
        return np.diag(self.weights.sum(axis=1)) - self.weights


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps annihilate each off-diagonal entry in turn until every |a_pq|
    falls below tol; returns the eigenvalues in ascending order.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise ValueError("matrix must be symmetric")
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0]])
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol:
                    continue
                off = max(off, abs(apq))
                # classical 2x2 rotation angle
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :] = rot_p
                a[q, :] = rot_q
                a[:, p] = rot_p
                a[:, q] = rot_q
                a[p, p] = c * rot_p[p] - s * rot_p[q]
                a[q, q] = s * rot_q[p] + c * rot_q[q]
                a[p, q] = 0.0
                a[q, p] = 0.0
        if off <= tol:
            break
    else:
        raise RuntimeError(f"jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a).copy())


def algebraic_connectivity(graph: CommGraph) -> float:
    """Second-smallest Laplacian eigenvalue; 0 for a disconnected graph."""
    lam = jacobi_eigenvalues(graph.laplacian())
    if len(lam) < 2:
        return 0.0
    value = float(lam[1])
    # the Laplacian is PSD; clip the tiny negative noise Jacobi can leave
    return value if value > 0.0 else 0.0


# ---------------------------------------------------------------------------
# consensus over the belief-change history
# ---------------------------------------------------------------------------
#
# History events are tuples, in execution order:
#   ("v", t, robot, node, belief_half_units)   belief change from a visit
#   ("x", t, i, j)                             pairwise exchange (i < j)
# Replaying them through the same fusion op reproduces every robot's belief
# trajectory, so consensus milestones are a pure function of the history.


def required_quorum(n_robots: int, quorum: float) -> int:
    """Robots needed for a quorum; round(., 9) absorbs float artifacts."""
    if not (0.0 < quorum <= 1.0):
        raise ValueError(f"quorum must be in (0, 1], got {quorum}")
    return math.ceil(round(quorum * n_robots, 9))


@dataclass(frozen=True)
class ConsensusReport:
    """Quorum consensus milestones for one run."""

    required: int
    t_full_consensus: Optional[float]
    tp_consensus: bool
    fp_consensus_nodes: tuple[int, ...]

    @property
    def fp_consensus_count(self) -> int:
        return len(self.fp_consensus_nodes)


def _scan_history(
    m: int,
    n_robots: int,
    truth: Sequence[bool],
    history: Iterable[tuple],
    required: int,
) -> tuple[Optional[float], list[list[int]], bool]:
    """Replay every event once; return (t at quorum, final vectors, misinfo).

    Tracks each robot's mismatch count against the truth incrementally:
    visit events change one entry, exchange events rebuild two rows from one
    shared fused vector. misinfo reports whether any robot ever held a
    certain belief contradicting the truth; beliefs only change through
    events, so checking touched entries catches every such state.
    """
    truth_vec = [2 if v else 0 for v in truth]
    vectors: list[list[int]] = [[int(Belief.UNCERTAIN)] * m for _ in range(n_robots)]
    mismatches = [m] * n_robots  # all-uncertain differs from truth everywhere
    exact = 0
    t_full: Optional[float] = None
    misinformed = False
    for event in history:
        tag = event[0]
        if tag == "v":
            _, t, robot, node, value = event
            row = vectors[robot]
            tv = truth_vec[node]
            old = row[node]
            row[node] = value
            if value != 1 and value != tv:
                misinformed = True
            delta = (1 if value != tv else 0) - (1 if old != tv else 0)
            if delta:
                was_exact = mismatches[robot] == 0
                mismatches[robot] += delta
                if mismatches[robot] == 0:
                    exact += 1
                elif was_exact:
                    exact -= 1
        elif tag == "x":
            _, t, i, j = event
            fused = fuse_vectors(vectors[i], vectors[j])
            mism = 0
            for b, tv in zip(fused, truth_vec):
                if b != tv:
                    mism += 1
                    if b != 1:
                        misinformed = True
            fused_ints = [int(b) for b in fused]
            for r in (i, j):
                was_exact = mismatches[r] == 0
                mismatches[r] = mism
                if mism == 0 and not was_exact:
                    exact += 1
                elif mism != 0 and was_exact:
                    exact -= 1
            vectors[i] = fused_ints
            vectors[j] = fused_ints.copy()
        else:
            raise ValueError(f"unknown history event tag {tag!r}")
        if t_full is None and exact >= required:
            t_full = t
    return t_full, vectors, misinformed


def scan_run(
    m: int,
    n_robots: int,
    truth: Sequence[bool],
    history: Iterable[tuple],
    quorum: float,
) -> tuple[ConsensusReport, bool]:
    """Consensus report plus the misinformation flag in a single replay."""
    required = required_quorum(n_robots, quorum)
    t_full, final, misinformed = _scan_history(m, n_robots, truth, history, required)
    certain_true_counts = [0] * m
    for row in final:
        for node, b in enumerate(row):
            if b == 2:
                certain_true_counts[node] += 1
    fp_nodes = tuple(
        node
        for node, count in enumerate(certain_true_counts)
        if count >= required and not truth[node]
    )
    anomaly_nodes = [node for node, v in enumerate(truth) if v]
    tp = bool(anomaly_nodes) and all(
        certain_true_counts[node] >= required for node in anomaly_nodes
    )
    report = ConsensusReport(
        required=required,
        t_full_consensus=t_full,
        tp_consensus=tp,
        fp_consensus_nodes=fp_nodes,
    )
    return report, misinformed


def consensus_report(
    m: int,
    n_robots: int,
    truth: Sequence[bool],
    history: Iterable[tuple],
    quorum: float,
) -> ConsensusReport:
    """Replay the history and extract quorum consensus milestones.

    t_full_consensus is the time of the first event after which at least the
    required number of robots hold a belief vector exactly equal to the
    truth; None if that never happens. tp/fp consensus are judged on the
    final vectors: nodes where at least the required number of robots hold
    certain-true, split by whether the node is actually true.
    """
    return scan_run(m, n_robots, truth, history, quorum)[0]


def misinformation_ever(
    m: int,
    n_robots: int,
    truth: Sequence[bool],
    history: Iterable[tuple],
) -> bool:
    """Whether any robot ever held a certain belief contradicting the truth."""
    return scan_run(m, n_robots, truth, history, 1.0)[1]


# ---------------------------------------------------------------------------
# correlation
# ---------------------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    # continued fraction for the regularized incomplete beta (Lentz's method)
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m_it in range(1, 300):
        m2 = 2 * m_it
        aa = m_it * (b - m_it) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m_it) * (qab + m_it) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # symmetry pick for fastest convergence
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _t_two_sided_p(t_stat: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if math.isinf(t_stat):
        return 0.0
    x = df / (df + t_stat * t_stat)
    return _betainc(df / 2.0, 0.5, x)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Pearson correlation and its two-sided p-value.

    Requires at least 3 points and non-degenerate variance in both inputs.
    The p-value comes from the exact t transform r * sqrt(df / (1 - r^2))
    with df = n - 2.
    """
    n = len(xs)
    if n != len(ys):
        raise ValueError(f"length mismatch: {n} != {len(ys)}")
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("zero variance input")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        return r, 0.0
    t_stat = r * math.sqrt(df / (1.0 - r * r))
    return r, _t_two_sided_p(t_stat, df)
