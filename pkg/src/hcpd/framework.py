"""Hierarchical change point detection: local scores per community, global scores on
the contracted network, and a bootstrap threshold for every scope.

The scan visits each snapshot once.  For every time step the snapshot is contracted
and cut into per-community induced subgraphs, and each scope's streaming scanner is
fed its piece.  Thresholds are computed afterwards, independently per scope.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .community import PartitionResult, assignment_partition, louvain_partition
from .detectors import DetectorConfig, ScoreSeries, make_scan
from .graph import (
    CommunityAssignment,
    DynamicNetwork,
    _Splitter,
    contract,
    symmetrize_sequence,
)
from .thresholding import bootstrap_threshold

GLOBAL = "global"
ORIGINAL = "original"


def _scope_code(scope) -> int:
    if scope == GLOBAL:
        return 0
    if scope == ORIGINAL:
        return 1
    return 2 + int(scope)


def scope_seed(seed: int, scope) -> np.random.SeedSequence:
    """Independent, order-free random stream for one scope."""
    return np.random.SeedSequence([int(seed), _scope_code(scope)])


def scope_key(scope) -> str:
    return scope if isinstance(scope, str) else f"community/{scope}"


def parse_scope_key(key: str):
    if key in (GLOBAL, ORIGINAL):
        return key
    prefix, _, num = key.partition("/")
    if prefix != "community" or not num.isdigit():
        raise ValueError(f"bad scope key {key!r}")
    return int(num)


@dataclass(eq=False)
class ChangeReport:
    """Result of a hierarchical scan.

    ``global_series`` is scored on contracted snapshots, ``local_series`` maps each
    community id to the series of its induced subgraph.  ``timings`` holds
    wall-clock seconds and is the only non-deterministic part.
    """

    global_series: ScoreSeries
    local_series: dict[int, ScoreSeries]
    partition: PartitionResult
    config: dict
    original_series: ScoreSeries | None = None
    timings: dict = field(default_factory=dict)
    segments: list = field(default_factory=list)

    @property
    def global_changes(self) -> tuple[int, ...]:
        return self.global_series.changes

    def local_changes(self, community: int) -> tuple[int, ...]:
        return self.local_series[community].changes

    def series(self) -> dict:
        out = {GLOBAL: self.global_series}
        if self.original_series is not None:
            out[ORIGINAL] = self.original_series
        out.update(self.local_series)
        return out

    # ---------------------------------------------------------------- serialization

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "config": self.config,
            "partition": {
                "method": self.partition.method,
                "k": self.partition.assignment.k,
                "modularity": _num(self.partition.modularity),
                "levels": self.partition.levels,
                "assignment": self.partition.assignment.labels.tolist(),
            },
            "scopes": {scope_key(s): _series_dict(ser) for s, ser in self.series().items()},
        }
        if self.segments:
            d["segments"] = [
                {"start": seg["start"], "end": seg["end"],
                 "partition": seg["partition"].assignment.labels.tolist(),
                 "scopes": {scope_key(c): _series_dict(s) for c, s in seg["local_series"].items()}}
                for seg in self.segments
            ]
        if include_timings:
            d["timings"] = self.timings
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "ChangeReport":
        p = d["partition"]
        partition = PartitionResult(CommunityAssignment(p["assignment"]),
                                    float("nan") if p["modularity"] is None else p["modularity"],
                                    p["levels"], p["method"])
        series = {parse_scope_key(k): _series_from(parse_scope_key(k), v) for k, v in d["scopes"].items()}
        local = {s: ser for s, ser in series.items() if isinstance(s, int)}
        return cls(series[GLOBAL], dict(sorted(local.items())), partition, d["config"],
                   series.get(ORIGINAL), d.get("timings", {}))

    @classmethod
    def load(cls, path) -> "ChangeReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_csv(self) -> str:
        """Plot-ready rows ``scope,t,score,threshold,is_change``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scope", "t", "score", "threshold", "is_change"])
        for scope, ser in self.series().items():
            changes = set(ser.changes)
            for t, s in zip(ser.times.tolist(), ser.scores.tolist()):
                w.writerow([scope_key(scope), t, repr(s), repr(ser.threshold), int(t in changes)])
        return buf.getvalue()


def _num(x):
    return None if x is None or (isinstance(x, float) and np.isnan(x)) else float(x)


def _series_dict(s: ScoreSeries) -> dict:
    return {
        "scores": [{"t": t, "score": v} for t, v in zip(s.times.tolist(), s.scores.tolist())],
        "threshold": _num(s.threshold),
        "changes": list(s.changes),
    }


def _series_from(scope, d: dict) -> ScoreSeries:
    times = [r["t"] for r in d["scores"]]
    scores = [r["score"] for r in d["scores"]]
    thr = float("nan") if d["threshold"] is None else d["threshold"]
    return ScoreSeries(scope, times, scores, thr, tuple(d["changes"]))


# --------------------------------------------------------------------------- the scan


def _n_scores(T: int, window: int) -> int:
    return T - 2 * window + 1


def scan_scopes(seq: DynamicNetwork, detector: DetectorConfig, assignment: CommunityAssignment,
                include_original: bool = False, include_local: bool = True,
                include_global: bool = True, t_range=None, threads: int = 1):
    """Run the detector over every requested scope in one pass.

    Returns:
        ``(raw, timings)`` where ``raw`` maps scope -> (times, scores) and
        ``timings`` maps scope keys (plus ``"contract"`` and ``"split"``) to seconds.
    """
    start, end = t_range or (1, seq.T)
    splitter = _Splitter(assignment) if include_local else None
    scans = {}
    if include_global:
        scans[GLOBAL] = make_scan(detector, assignment.k, scope_seed(detector.seed, GLOBAL))
    if include_original:
        scans[ORIGINAL] = make_scan(detector, seq.n_nodes, scope_seed(detector.seed, ORIGINAL))
    if include_local:
        for c in range(assignment.k):
            scans[c] = make_scan(detector, int(assignment.sizes[c]), scope_seed(detector.seed, c))
    out = {s: ([], []) for s in scans}
    timings = {scope_key(s): 0.0 for s in scans}
    timings.update(contract=0.0, split=0.0)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def feed(scope, g):
        t0 = time.perf_counter()
        res = scans[scope].push(g)
        return scope, res, time.perf_counter() - t0

    try:
        for t in range(start, end + 1):
            g = seq.at(t)
            jobs = []
            if include_global:
                t0 = time.perf_counter()
                gc = contract(g, assignment)
                timings["contract"] += time.perf_counter() - t0
                jobs.append((GLOBAL, gc))
            if include_original:
                jobs.append((ORIGINAL, g))
            if include_local:
                t0 = time.perf_counter()
                parts = splitter(g)
                timings["split"] += time.perf_counter() - t0
                jobs.extend(enumerate(parts))
            results = pool.map(lambda j: feed(*j), jobs) if pool else [feed(*j) for j in jobs]
            for scope, res, dt in results:
                timings[scope_key(scope)] += dt
                if res is not None:
                    out[scope][0].append(res[0])
                    out[scope][1].append(res[1])
    finally:
        if pool:
            pool.shutdown()
    return out, timings


def _threshold(scope, times, scores, level, n_bootstrap, seed) -> ScoreSeries:
    ser = ScoreSeries(scope, times, scores)
    thr = bootstrap_threshold(ser.scores, level, n_bootstrap, scope_seed(seed, scope))
    return ser.with_threshold(thr)


def resolve_partition(seq: DynamicNetwork, assignment=None, louvain_seed=None) -> PartitionResult:
    g1 = seq.at(1)
    if assignment is None:
        return louvain_partition(g1, seed=louvain_seed)
    if isinstance(assignment, PartitionResult):
        return assignment
    return assignment_partition(g1, assignment)


def run_hierarchical(seq: DynamicNetwork, detector: DetectorConfig, *, assignment=None,
                     level: float = 0.95, n_bootstrap: int = 1000, seed: int = 0,
                     include_original: bool = False, repartition: bool = False,
                     louvain_seed=None, threads: int = 1) -> ChangeReport:
    """Score every community and the contracted network, then threshold each scope.

    Args:
        seq: snapshot sequence; directed sequences are symmetrized first.
        detector: detector configuration.
        assignment: fixed :class:`CommunityAssignment` (e.g. planted communities) or
            ``None`` to partition the first snapshot with Louvain.
        level: bootstrap percentile level.
        n_bootstrap: bootstrap resamples per scope.
        seed: master seed for the bootstrap.
        include_original: also score the uncontracted network (for NDCG / speedup).
        repartition: after the scan, re-partition at every flagged global change and
            rescan the local scopes of each segment with the new communities.
        threads: worker threads for the per-scope loop; results do not depend on it.
    """
    seq = symmetrize_sequence(seq)
    w = detector.effective_window
    if _n_scores(seq.T, w) < 2:
        raise ValueError(f"sequence of length {seq.T} too short for window {w}: "
                         f"need at least {2 * w + 1} snapshots")
    t0 = time.perf_counter()
    partition = resolve_partition(seq, assignment, louvain_seed)
    t_partition = time.perf_counter() - t0
    a = partition.assignment
    if a.n_nodes != seq.n_nodes:
        raise ValueError(f"assignment covers {a.n_nodes} nodes, sequence has {seq.n_nodes}")

    raw, timings = scan_scopes(seq, detector, a, include_original=include_original, threads=threads)
    timings["partition"] = t_partition
    t0 = time.perf_counter()
    series = {s: _threshold(s, ts, vs, level, n_bootstrap, seed) for s, (ts, vs) in raw.items()}
    timings["threshold"] = time.perf_counter() - t0

    config = {
        "detector": detector.to_dict(),
        "level": level,
        "n_bootstrap": n_bootstrap,
        "seed": seed,
        "include_original": include_original,
        "repartition": repartition,
        "T": seq.T,
        "n_nodes": seq.n_nodes,
    }
    report = ChangeReport(
        global_series=series[GLOBAL],
        local_series={c: series[c] for c in range(a.k)},
        partition=partition,
        config=config,
        original_series=series.get(ORIGINAL),
        timings={k: round(v, 6) for k, v in timings.items()},
    )
    if repartition:
        report.segments = _segment_scans(seq, detector, report, level, n_bootstrap, seed,
                                         louvain_seed, threads)
    return report


# --------------------------------------------------------------------------- repartitioning


@dataclass(frozen=True)
class RepartitionPoint:
    t: int
    partition: PartitionResult


def repartition_on_global_change(seq: DynamicNetwork, report: ChangeReport,
                                 louvain_seed=None) -> list[RepartitionPoint]:
    """Partition schedule: the initial partition at t=1, then a fresh Louvain partition
    of ``G_t`` at every flagged global change ``t``, in time order."""
    seq = symmetrize_sequence(seq)
    schedule = [RepartitionPoint(1, report.partition)]
    for t in sorted(report.global_changes):
        if t > 1:
            schedule.append(RepartitionPoint(t, louvain_partition(seq.at(t), seed=louvain_seed)))
    return schedule


def _segment_scans(seq, detector, report, level, n_bootstrap, seed, louvain_seed, threads):
    schedule = repartition_on_global_change(seq, report, louvain_seed)
    w = detector.effective_window
    segments = []
    for i, point in enumerate(schedule[1:], start=1):
        end = schedule[i + 1].t - 1 if i + 1 < len(schedule) else seq.T
        entry = {"start": point.t, "end": end, "partition": point.partition, "local_series": {}}
        if _n_scores(end - point.t + 1, w) >= 2:
            raw, _ = scan_scopes(seq, detector, point.partition.assignment, include_global=False,
                                 t_range=(point.t, end), threads=threads)
            entry["local_series"] = {c: _threshold(c, ts, vs, level, n_bootstrap, seed)
                                     for c, (ts, vs) in raw.items()}
        segments.append(entry)
    return segments
