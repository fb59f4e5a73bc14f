"""Time-based splitting, lifetimes, key categorization and surprise indices.

All functions are pure over an immutable History. A key (node or edge) is
categorized against a cutoff by its lifetime over the *full* stream:
historical keys die before the cutoff, inductive keys are born at or after
it, overlap keys straddle it. The surprise index of a key population is the
fraction of test-active keys (death >= cutoff) that are inductive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, TextIO

import numpy as np

from .core import History, _open_for_write
from .errors import DegenerateSplitError


class TemporalCategory(enum.Enum):
    HISTORICAL = "historical"
    OVERLAP = "overlap"
    INDUCTIVE = "inductive"


class KeyKind(enum.Enum):
    NODE = "node"
    EDGE = "edge"
    SOURCE_NODE = "source-role-node"
    DESTINATION_NODE = "destination-role-node"


class Lifetime(NamedTuple):
    birth: float
    death: float


class SweepPoint(NamedTuple):
    ratio: float
    node_surprise: float | None
    edge_surprise: float | None


def compute_cutoff(h: History, test_ratio: float) -> float:
    """Cutoff timestamp placing the last ``test_ratio`` share of events in test.

    The cutoff is the timestamp of the (floor((1 - test_ratio) * N) + 1)-th
    event in chronological order; events with t >= cutoff are test. Ties at
    the cutoff all land in test, so a stream where that pushes every event
    into test (e.g. a single shared timestamp) is rejected.
    """
    n = len(h)
    if n == 0:
        raise DegenerateSplitError("cannot split an empty history")
    if not (0.0 < test_ratio < 1.0):
        raise ValueError(f"test_ratio must be in (0, 1), got {test_ratio}")
    k = int(math.floor((1.0 - test_ratio) * n + 1e-9))
    k = min(k, n - 1)
    t_split = float(h.t[k])
    if t_split <= float(h.t[0]):
        raise DegenerateSplitError(
            "degenerate split: every event would land in the test set "
            "(timestamp ties at the cutoff)"
        )
    return t_split


def split(h: History, t_split: float) -> tuple[History, History]:
    """Partition events into (train, test): t < t_split versus t >= t_split."""
    return h.slice_until(t_split), h.slice_from(t_split)


def categorize(lifetime: Lifetime, t_split: float) -> TemporalCategory:
    """Category of a key with the given lifetime relative to a cutoff."""
    if lifetime.death < t_split:
        return TemporalCategory.HISTORICAL
    if lifetime.birth >= t_split:
        return TemporalCategory.INDUCTIVE
    return TemporalCategory.OVERLAP


def node_lifetime_arrays(
    h: History, kind: KeyKind = KeyKind.NODE
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(node ids, births, deaths) for nodes with at least one event.

    Role-restricted kinds only count events where the node appears in that
    role; they are rejected on undirected streams, where roles carry no
    meaning.
    """
    if kind in (KeyKind.SOURCE_NODE, KeyKind.DESTINATION_NODE) and not h.kind.directed:
        raise ValueError(f"{kind.value} lifetimes are undefined on undirected streams")
    birth = np.full(h.num_nodes, np.inf)
    death = np.full(h.num_nodes, -np.inf)
    if kind in (KeyKind.NODE, KeyKind.SOURCE_NODE):
        np.minimum.at(birth, h.src, h.t)
        np.maximum.at(death, h.src, h.t)
    if kind in (KeyKind.NODE, KeyKind.DESTINATION_NODE):
        np.minimum.at(birth, h.dst, h.t)
        np.maximum.at(death, h.dst, h.t)
    ids = np.flatnonzero(np.isfinite(birth))
    return ids, birth[ids], death[ids]


def edge_lifetime_arrays(h: History) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(canonical edge keys, births, deaths) for every observed edge."""
    keys = h.event_edge_keys()
    uniq, inverse = np.unique(keys, return_inverse=True)
    birth = np.full(len(uniq), np.inf)
    death = np.full(len(uniq), -np.inf)
    np.minimum.at(birth, inverse, h.t)
    np.maximum.at(death, inverse, h.t)
    return uniq, birth, death


def lifetimes(h: History, kind: KeyKind = KeyKind.NODE) -> dict:
    """Birth/death per key: node ids map for node kinds, canonical (a, b)
    pairs for KeyKind.EDGE."""
    if len(h) == 0:
        raise ValueError("lifetimes of an empty history")
    if kind is KeyKind.EDGE:
        keys, births, deaths = edge_lifetime_arrays(h)
        # bulk tolist() keeps this cheap at millions of keys
        heads = (keys // h.num_nodes).tolist()
        tails = (keys % h.num_nodes).tolist()
        return {
            (a, b): Lifetime(lo, hi)
            for a, b, lo, hi in zip(heads, tails, births.tolist(), deaths.tolist())
        }
    ids, births, deaths = node_lifetime_arrays(h, kind)
    return {
        i: Lifetime(lo, hi)
        for i, lo, hi in zip(ids.tolist(), births.tolist(), deaths.tolist())
    }


@dataclass(frozen=True)
class CategoryCounts:
    total: int
    historical: int
    overlap: int
    inductive: int

    @property
    def surprise(self) -> float | None:
        """inductive / (inductive + overlap); None when no key is test-active."""
        denom = self.inductive + self.overlap
        if denom == 0:
            return None
        return self.inductive / denom


@dataclass(frozen=True)
class PartitionReport:
    t_split: float
    counts: dict[KeyKind, CategoryCounts]


def _count_categories(births: np.ndarray, deaths: np.ndarray, t_split: float) -> CategoryCounts:
    historical = int(np.count_nonzero(deaths < t_split))
    inductive = int(np.count_nonzero(births >= t_split))
    total = len(births)
    return CategoryCounts(total, historical, total - historical - inductive, inductive)


def partition_report(
    h: History,
    t_split: float,
    kinds: Iterable[KeyKind] = (KeyKind.NODE, KeyKind.EDGE),
) -> PartitionReport:
    """Per-kind category counts and surprise indices at a cutoff."""
    counts: dict[KeyKind, CategoryCounts] = {}
    for kind in kinds:
        if kind is KeyKind.EDGE:
            _, births, deaths = edge_lifetime_arrays(h)
        else:
            _, births, deaths = node_lifetime_arrays(h, kind)
        counts[kind] = _count_categories(births, deaths, t_split)
    return PartitionReport(t_split, counts)


def surprise_sweep(h: History, ratios: Iterable[float]) -> list[SweepPoint]:
    """Node and edge surprise at each test ratio, in the given order."""
    points = []
    for ratio in ratios:
        t_split = compute_cutoff(h, ratio)
        report = partition_report(h, t_split)
        points.append(
            SweepPoint(
                ratio,
                report.counts[KeyKind.NODE].surprise,
                report.counts[KeyKind.EDGE].surprise,
            )
        )
    return points


def write_partition_csv(report: PartitionReport, dest: str | Path | TextIO) -> None:
    """CSV export: ``kind,total,historical,overlap,inductive,surprise``."""
    with _open_for_write(dest) as fh:
        fh.write("kind,total,historical,overlap,inductive,surprise\n")
        for kind, c in report.counts.items():
            surprise = "" if c.surprise is None else repr(c.surprise)
            fh.write(
                f"{kind.value},{c.total},{c.historical},{c.overlap},"
                f"{c.inductive},{surprise}\n"
            )


def write_sweep_csv(points: Iterable[SweepPoint], dest: str | Path | TextIO) -> None:
    """CSV export: ``ratio,node_surprise,edge_surprise``."""
    with _open_for_write(dest) as fh:
        fh.write("ratio,node_surprise,edge_surprise\n")
        for p in points:
            ns = "" if p.node_surprise is None else repr(p.node_surprise)
            es = "" if p.edge_surprise is None else repr(p.edge_surprise)
            fh.write(f"{p.ratio!r},{ns},{es}\n")
