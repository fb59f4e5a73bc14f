"""Ranking metrics: tie-aware AUC per batch, fractional ranks and
mean-average-rank time series.

AUC uses the rank-statistic estimator (tied pairs get half credit), which
matches exhaustive pair counting exactly and stays meaningful for binary
scorers where ties are pervasive. Ranks within one event's comparison group
(its positive plus all sampled negatives) are fractional: rank 1 is the
highest score and ties receive the average of the positions they occupy.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .core import _open_for_write
from .scorelog import POSITIVE_ROLE, ScoredEventLog


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int


def _ascending_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, lowest value first, ties averaged."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    is_new = np.empty(len(values), dtype=bool)
    is_new[0] = True
    is_new[1:] = sorted_vals[1:] != sorted_vals[:-1]
    group = np.cumsum(is_new) - 1
    starts = np.flatnonzero(is_new)
    ends = np.append(starts[1:], len(values))
    avg = (starts + ends + 1) / 2.0  # mean of the 1-based positions in the tie
    ranks = np.empty(len(values))
    ranks[order] = avg[group]
    return ranks


def fractional_ranks(scores: Sequence[float]) -> np.ndarray:
    """Descending fractional ranks: rank 1 for the highest score, ties averaged."""
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) == 0:
        return np.empty(0)
    return len(scores) + 1 - _ascending_ranks(scores)


def rank_within_group(scores: Sequence[float]) -> np.ndarray:
    """Fractional ranks of one comparison group (positive plus negatives)."""
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) < 2:
        raise ValueError("a comparison group needs at least 2 members")
    return fractional_ranks(scores)


def batch_auc(positive_scores: Sequence[float], negative_scores: Sequence[float]) -> float:
    """Rank-statistic ROC AUC with half credit for tied pairs.

    Equals (#{(p, n): p > n} + 0.5 * #{p = n}) / (|P| * |N|).
    """
    pos = np.asarray(positive_scores, dtype=np.float64)
    neg = np.asarray(negative_scores, dtype=np.float64)
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AUC is undefined when either class is empty")
    ranks = _ascending_ranks(np.concatenate([pos, neg]))
    u = ranks[: len(pos)].sum() - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def confusion_at_threshold(
    log: ScoredEventLog, strategy: str, threshold: float
) -> ConfusionMatrix:
    """Confusion counts treating score >= threshold as a positive prediction."""
    if strategy not in set(np.unique(log.role)):
        raise ValueError(f"strategy {strategy!r} not present in log")
    pos = log.score[log.role == POSITIVE_ROLE]
    neg = log.score[log.role == strategy]
    tp = int(np.count_nonzero(pos >= threshold))
    fp = int(np.count_nonzero(neg >= threshold))
    return ConfusionMatrix(tp, fp, len(pos) - tp, len(neg) - fp)


@dataclass(frozen=True)
class BatchAUCEntry:
    batch: int
    t_start: float
    t_end: float
    auc: float


@dataclass(frozen=True)
class BatchAUCReport:
    strategy: str
    period: str
    entries: tuple[BatchAUCEntry, ...]
    mean_auc: float
    skipped_batches: int

    @property
    def batch_aucs(self) -> np.ndarray:
        return np.asarray([e.auc for e in self.entries])


def mean_auc_over_batches(
    log: ScoredEventLog,
    strategy: str,
    period: str = "test",
    t_split: float | None = None,
) -> BatchAUCReport:
    """Unweighted mean of per-batch AUCs for one strategy.

    ``period`` restricts records by timestamp: test keeps t >= t_split,
    train keeps t < t_split, all keeps everything. Batches lacking either
    class inside the period are excluded and counted as skipped.
    """
    if strategy not in set(np.unique(log.role)):
        raise ValueError(f"strategy {strategy!r} not present in log")
    if period not in ("train", "test", "all"):
        raise ValueError(f"unknown period {period!r}")
    keep = (log.role == POSITIVE_ROLE) | (log.role == strategy)
    if period != "all":
        if t_split is None:
            raise ValueError(f"period {period!r} requires t_split")
        in_period = log.timestamp >= t_split if period == "test" else log.timestamp < t_split
        keep &= in_period
    sub = log.mask(keep)

    entries = []
    skipped = 0
    for batch in np.unique(sub.batch):
        sel = sub.batch == batch
        pos = sub.score[sel & (sub.role == POSITIVE_ROLE)]
        neg = sub.score[sel & (sub.role == strategy)]
        if len(pos) == 0 or len(neg) == 0:
            skipped += 1
            continue
        times = sub.timestamp[sel]
        entries.append(
            BatchAUCEntry(int(batch), float(times.min()), float(times.max()),
                          batch_auc(pos, neg))
        )
    if not entries:
        raise ValueError(
            f"no batch in period {period!r} has both positives and "
            f"{strategy} negatives"
        )
    mean = float(np.mean([e.auc for e in entries]))
    return BatchAUCReport(strategy, period, tuple(entries), mean, skipped)


@dataclass(frozen=True)
class MARSeries:
    """Per-role mean fractional rank over equal-width time bins.

    ``mar`` is (roles x bins) with NaN marking bins that saw no event;
    ``counts`` holds the number of rank contributions per cell.
    """

    bin_edges: np.ndarray
    roles: tuple[str, ...]
    mar: np.ndarray
    counts: np.ndarray

    @property
    def bins(self) -> int:
        return len(self.bin_edges) - 1


def mar_time_series(log: ScoredEventLog, bins: int = 50) -> MARSeries:
    """Mean average rank per role per time bin over the log's time span.

    Bins are equal-width over [first event, last event], closed on the
    left, with the last bin closed on both ends. Every record of one event
    shares the event's timestamp and therefore its bin.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if len(log) == 0:
        raise ValueError("cannot bin an empty log")
    roles = (POSITIVE_ROLE,) + tuple(log.strategies)
    role_index = {role: i for i, role in enumerate(roles)}

    t0, t1 = float(log.timestamp.min()), float(log.timestamp.max())
    edges = np.linspace(t0, t1, bins + 1)
    span = t1 - t0

    sums = np.zeros((len(roles), bins))
    counts = np.zeros((len(roles), bins), dtype=np.int64)

    order = np.argsort(log.event_ordinal, kind="stable")
    ordinals = log.event_ordinal[order]
    starts = np.flatnonzero(np.r_[True, ordinals[1:] != ordinals[:-1]])
    bounds = np.append(starts, len(order))
    for g in range(len(starts)):
        sel = order[starts[g]:bounds[g + 1]]
        scores = log.score[sel]
        ranks = fractional_ranks(scores)
        t = float(log.timestamp[sel[0]])
        b = min(int((t - t0) / span * bins), bins - 1) if span > 0 else 0
        for rec, rank in zip(sel, ranks):
            r = role_index.get(str(log.role[rec]))
            if r is None:
                continue
            sums[r, b] += rank
            counts[r, b] += 1

    with np.errstate(invalid="ignore"):
        mar = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return MARSeries(edges, roles, mar, counts)


def write_auc_csv(reports: Iterable[BatchAUCReport], dest: str | Path | TextIO) -> None:
    """CSV export: ``strategy,batch,t_start,t_end,auc``."""
    with _open_for_write(dest) as fh:
        fh.write("strategy,batch,t_start,t_end,auc\n")
        for report in reports:
            for e in report.entries:
                fh.write(
                    f"{report.strategy},{e.batch},{e.t_start!r},{e.t_end!r},{e.auc!r}\n"
                )


def write_mar_csv(series: MARSeries, dest: str | Path | TextIO) -> None:
    """CSV export: ``bin,t_start,t_end,role,mar,count``."""
    with _open_for_write(dest) as fh:
        fh.write("bin,t_start,t_end,role,mar,count\n")
        for b in range(series.bins):
            lo = float(series.bin_edges[b])
            hi = float(series.bin_edges[b + 1])
            for r, role in enumerate(series.roles):
                count = int(series.counts[r, b])
                mar = "" if count == 0 else repr(float(series.mar[r, b]))
                fh.write(f"{b},{lo!r},{hi!r},{role},{mar},{count}\n")
