"""Ranking agreement, detection accuracy and timing helpers."""

from __future__ import annotations

import statistics
import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from .detectors import DetectorConfig, ScoreSeries, make_scan
from .framework import GLOBAL, ORIGINAL, scope_seed
from .graph import CommunityAssignment, DynamicNetwork, contract, symmetrize_sequence


def ranking(series: ScoreSeries) -> np.ndarray:
    """Time indices by descending score; ties go to the earlier time."""
    order = np.lexsort((series.times, -series.scores))
    return series.times[order]


def prefix_matches(target: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """``r[i-1] = |target[:i] & reference[:i]|`` for ``i = 1..len``."""
    seen_t, seen_r = set(), set()
    r, common = [], 0
    for a, b in zip(target.tolist(), reference.tolist()):
        if a == b:
            common += 1
        else:
            common += (a in seen_r) + (b in seen_t)
        seen_t.add(a)
        seen_r.add(b)
        r.append(common)
    return np.array(r, dtype=np.int64)


def ndcg(target: ScoreSeries, reference: ScoreSeries) -> float:
    """Prefix-overlap NDCG of ``target``'s ranking against ``reference``'s.

    ``DCG = sum_i (2^{r_i} - 1) / log2(i + 1)`` where ``r_i`` counts the time indices
    shared by the top-``i`` prefixes of both rankings; ``IDCG`` is the same sum with
    ``r_i = i``.  Gains grow as ``2^i``, so the value is driven mostly by how well the
    tails of the two rankings agree.

    Raises:
        ValueError: if the two series are not scored on the same time indices.
    """
    if len(target) == 0 or set(target.times.tolist()) != set(reference.times.tolist()) \
            or len(target) != len(reference):
        raise ValueError("ndcg needs two series over the same non-empty time domain")
    r = prefix_matches(ranking(target), ranking(reference))
    i = np.arange(1, len(r) + 1)
    disc = np.log2(i + 1.0)
    # exp2 of large ints overflows past ~1024 entries; scale both sums by 2^-n
    n = len(r)
    dcg = np.sum((np.exp2(r - n) - np.exp2(-n)) / disc)
    idcg = np.sum((np.exp2(i - n) - np.exp2(-n)) / disc)
    return float(dcg / idcg)


def detection_metrics(detected, truth, slack: int = 0) -> tuple[float, float]:
    """Precision and recall under a one-to-one matching with tolerance ``slack``.

    Args:
        detected: iterable of flagged time indices.
        truth: iterable of event times (or an :class:`~hcpd.generators.EventSchedule`).
        slack: a detection matches an event when ``|t_d - t_e| <= slack``.

    Returns:
        ``(precision, recall)``.  Precision is 1 when nothing was flagged and recall
        is 1 when there is nothing to find.
    """
    if slack < 0:
        raise ValueError("slack must be >= 0")
    d = sorted(set(int(x) for x in detected))
    e = sorted(set(int(x) for x in getattr(truth, "times", truth)))
    if not d or not e:
        return 1.0 if not d else 0.0, 1.0 if not e else 0.0
    dist = np.abs(np.subtract.outer(d, e))
    cost = np.where(dist <= slack, 0, 1)
    rows, cols = linear_sum_assignment(cost)
    hits = int(np.sum(cost[rows, cols] == 0))
    return hits / len(d), hits / len(e)


def time_scan(seq, detector: DetectorConfig) -> float:
    """Seconds spent pushing every snapshot of ``seq`` through a fresh scanner."""
    scan = make_scan(detector, seq.n_nodes, scope_seed(detector.seed, ORIGINAL))
    t0 = time.perf_counter()
    for g in seq:
        scan.push(g)
    return time.perf_counter() - t0


def bench(seq: DynamicNetwork, detector: DetectorConfig, assignment: CommunityAssignment,
          scopes=(ORIGINAL, GLOBAL), repeats: int = 3) -> dict:
    """Median wall time of the detector on each scope.

    Snapshots (and their contractions) are built once up front so the timed region
    covers only the detector.  Contraction time is reported separately.

    Returns:
        dict with ``times`` (scope -> median seconds), ``runs`` (all repetitions),
        ``contract`` (seconds to contract the whole sequence) and ``speedup``
        (original / global, when both scopes were timed).
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    seq = symmetrize_sequence(seq)
    snaps = [seq.at(t) for t in range(1, seq.T + 1)]
    t0 = time.perf_counter()
    contracted = [contract(g, assignment) for g in snaps]
    t_contract = time.perf_counter() - t0
    inputs = {GLOBAL: DynamicNetwork(contracted, assignment.k),
              ORIGINAL: DynamicNetwork(snaps, seq.n_nodes)}
    runs = {}
    for scope in scopes:
        data = inputs[scope]
        time_scan(DynamicNetwork(data.snapshots[:2], data.n_nodes), detector)  # warm-up
        runs[scope] = [time_scan(data, detector) for _ in range(repeats)]
    times = {s: statistics.median(v) for s, v in runs.items()}
    out = {"times": times, "runs": runs, "contract": t_contract}
    if GLOBAL in times and ORIGINAL in times and times[GLOBAL] > 0:
        out["speedup"] = times[ORIGINAL] / times[GLOBAL]
    return out
