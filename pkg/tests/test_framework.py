import csv
import io
import json
import math

import numpy as np
import pytest

from hcpd.community import louvain_partition
from hcpd.detectors import DetectorConfig, ScoreSeries
from hcpd.framework import (
    ChangeReport,
    RepartitionPoint,
    repartition_on_global_change,
    run_hierarchical,
)
from hcpd.generators import Event, EventSchedule, SbmConfig, sbm_generate
from hcpd.graph import CommunityAssignment

EM = DetectorConfig(window=2)
DC = DetectorConfig(kind="deltacon")


def sbm(T=30, events=(), seed=0):
    B = np.array([[0.7, 0.2, 0.1], [0.2, 0.6, 0.3], [0.1, 0.3, 0.5]])
    return sbm_generate(SbmConfig((20, 15, 10), B, 10), T, EventSchedule(tuple(events)), seed)


def drop_inter(seq, labels):
    def f(g):
        keep = labels[g.src] == labels[g.dst]
        return g.replace(src=g.src[keep], dst=g.dst[keep], weight=g.weight[keep])
    return seq.map(f)


@pytest.mark.parametrize("cfg", [DetectorConfig(), DC], ids=["em", "deltacon"])
def test_stationary_false_positive_budget(cfg):
    # At level 0.95 a stationary scope flags about 5% of its points.  The budget
    # ceil(0.05 (T-1)) + 1 is exceeded only occasionally (about 1 scope in 100).
    T = 30
    budget = math.ceil(0.05 * (T - 1)) + 1
    counts = []
    for seed in range(20):
        seq, truth = sbm(T, seed=seed)
        r = run_hierarchical(seq, cfg, assignment=truth.assignment, seed=seed, n_bootstrap=300)
        counts += [len(s.changes) for s in r.series().values()]
    assert sum(c > budget for c in counts) <= 2
    assert np.mean(counts) < budget


def test_report_structure():
    seq, truth = sbm(12)
    r = run_hierarchical(seq, EM, assignment=truth.assignment, include_original=True)
    assert sorted(r.local_series) == [0, 1, 2]
    assert r.original_series is not None
    for s in r.series().values():
        assert s.times.tolist() == list(range(3, 12))  # w+1 .. T-w+1
        assert s.changes == tuple(s.times[s.scores > s.threshold].tolist())
    assert r.partition.method == "given"
    assert {"global", "community/0", "contract", "threshold"} <= set(r.timings)


def test_default_partition_is_louvain_on_first_snapshot():
    seq, _ = sbm(8)
    r = run_hierarchical(seq, DC)
    assert r.partition.method == "louvain"
    assert r.partition.assignment == louvain_partition(seq.at(1)).assignment


def test_window_longer_than_sequence():
    seq, truth = sbm(6)
    with pytest.raises(ValueError, match="too short"):
        run_hierarchical(seq, DetectorConfig(window=3), assignment=truth.assignment)


def test_assignment_size_mismatch():
    seq, _ = sbm(6)
    with pytest.raises(ValueError):
        run_hierarchical(seq, DC, assignment=CommunityAssignment([0, 1]))


@pytest.mark.parametrize("cfg", [EM, DC], ids=["em", "deltacon"])
def test_scope_independence(cfg):
    seq, truth = sbm(10)
    labels = truth.assignment.labels
    a = run_hierarchical(seq, cfg, assignment=truth.assignment)
    b = run_hierarchical(drop_inter(seq, labels), cfg, assignment=truth.assignment)
    for c in a.local_series:
        assert np.array_equal(a.local_series[c].scores, b.local_series[c].scores)
    assert not np.array_equal(a.global_series.scores, b.global_series.scores)


@pytest.mark.parametrize("cfg", [DetectorConfig(window=1), DC], ids=["em", "deltacon"])
def test_scale_separation(cfg):
    quiet, truth = sbm(12, seed=4)
    loud, _ = sbm(12, events=[Event(7, "rate-scale", (1,), False, 0.3)], seed=4)
    a = run_hierarchical(quiet, cfg, assignment=truth.assignment)
    b = run_hierarchical(loud, cfg, assignment=truth.assignment)
    assert b.local_series[1].as_dict()[7] > a.local_series[1].as_dict()[7]
    assert np.array_equal(a.global_series.scores, b.global_series.scores)
    for c in (0, 2):
        assert np.array_equal(a.local_series[c].scores, b.local_series[c].scores)


def test_determinism_and_thread_independence():
    seq, truth = sbm(12)
    args = dict(assignment=truth.assignment, include_original=True, seed=3)
    one = run_hierarchical(seq, EM, **args).to_json(include_timings=False)
    two = run_hierarchical(seq, EM, **args).to_json(include_timings=False)
    four = run_hierarchical(seq, EM, threads=4, **args).to_json(include_timings=False)
    assert one == two == four


def test_json_round_trip(tmp_path):
    seq, truth = sbm(12)
    r = run_hierarchical(seq, DC, assignment=truth.assignment, include_original=True)
    r.save(tmp_path / "r.json")
    back = ChangeReport.load(tmp_path / "r.json")
    assert back.to_json() == r.to_json()
    doc = json.loads(r.to_json())
    assert set(doc) == {"config", "partition", "scopes", "timings"}
    assert set(doc["scopes"]) == {"global", "original", "community/0", "community/1", "community/2"}
    assert doc["scopes"]["global"]["scores"][0].keys() == {"t", "score"}


def test_csv_rows():
    seq, truth = sbm(10)
    r = run_hierarchical(seq, DC, assignment=truth.assignment)
    rows = list(csv.DictReader(io.StringIO(r.to_csv())))
    assert len(rows) == 4 * 9
    g = [row for row in rows if row["scope"] == "global"]
    assert [int(row["t"]) for row in g] == list(range(2, 11))
    flagged = [int(row["t"]) for row in g if row["is_change"] == "1"]
    assert flagged == list(r.global_changes)


class TestRepartition:
    def test_no_global_change_keeps_schedule(self):
        seq, truth = sbm(10)
        r = run_hierarchical(seq, DC, assignment=truth.assignment)
        r.global_series = r.global_series.with_threshold(np.inf)
        sched = repartition_on_global_change(seq, r)
        assert sched == [RepartitionPoint(1, r.partition)]

    def test_points_in_time_order_on_the_changed_snapshot(self):
        seq, truth = sbm(20, events=[Event(8, "rate-scale", (0, 1), True, 0.2),
                                     Event(14, "rate-scale", (0, 2), True, 0.2)])
        r = run_hierarchical(seq, DC, assignment=truth.assignment)
        g = r.global_series
        r.global_series = ScoreSeries("global", g.times, g.scores, g.threshold, (14, 8))
        sched = repartition_on_global_change(seq, r)
        assert [p.t for p in sched] == [1, 8, 14]
        assert sched[1].partition.assignment == louvain_partition(seq.at(8)).assignment

    def test_segments_rescan_locals(self):
        seq, truth = sbm(40, events=[Event(20, "rate-scale", (0, 1, 2), True, 0.1)])
        r = run_hierarchical(seq, DC, assignment=truth.assignment, repartition=True)
        assert 20 in r.global_changes
        seg = [s for s in r.segments if s["start"] == 20][0]
        assert seg["local_series"]
        for s in seg["local_series"].values():
            assert s.times.min() >= 21 and s.times.max() <= seg["end"]
        assert "segments" in json.loads(r.to_json())
