import pytest

from hcpd.fileio import (
    FormatError,
    ingest_csv,
    read_assignment,
    read_manifest,
    read_sequence,
    write_assignment,
    write_sequence,
)
from hcpd.graph import CommunityAssignment, DynamicNetwork, Snapshot, ValidationError, validate


def test_sequence_round_trip_is_exact(tmp_path):
    snaps = [Snapshot.from_edges(t, 5, [(0, 1, 0.1 * t), (2, 4, 1 / 3)]) for t in (1, 2, 3)]
    write_sequence(DynamicNetwork(snaps, 5), tmp_path / "seq")
    back = read_sequence(tmp_path / "seq")
    assert back.T == 3 and back.n_nodes == 5 and not back.directed
    for a, b in zip(snaps, back):
        assert a.t == b.t and list(a.edges()) == list(b.edges())
    assert read_manifest(tmp_path / "seq" / "manifest.txt") == {"T": 3, "directed": False, "nodes": 5}


def test_missing_snapshot_file_surfaces_as_gap(tmp_path):
    snaps = [Snapshot.from_edges(t, 3, [(0, 1, 1.0)]) for t in (1, 2, 3)]
    write_sequence(DynamicNetwork(snaps, 3), tmp_path)
    (tmp_path / "snapshot_0002.tsv").unlink()
    with pytest.raises(ValidationError, match="gap"):
        validate(read_sequence(tmp_path))


def test_bad_line_reports_file_and_line(tmp_path):
    write_sequence(DynamicNetwork([Snapshot.from_edges(1, 3, [(0, 1, 1.0)])], 3), tmp_path)
    (tmp_path / "snapshot_0001.tsv").write_text("0\t1\t1.0\n0\t2\n")
    with pytest.raises(FormatError, match=r"snapshot_0001.tsv:2"):
        list(read_sequence(tmp_path))


def test_missing_manifest(tmp_path):
    with pytest.raises(FormatError):
        read_sequence(tmp_path)


def test_assignment_round_trip(tmp_path):
    a = CommunityAssignment([0, 1, 1, 0, 2])
    write_assignment(a, tmp_path / "a.tsv")
    assert read_assignment(tmp_path / "a.tsv") == a
    assert (tmp_path / "a.tsv").read_text().splitlines()[1] == "1\t1"


def test_ingest_maps_labels_and_symmetrizes(tmp_path):
    path = tmp_path / "trade.csv"
    path.write_text("t,u,v,w\n2001,USA,CAN,3\n2001,CAN,USA,2\n2002,MEX,USA,1\n2002,MEX,USA,4\n")
    seq = ingest_csv(path)
    assert seq.labels == ["CAN", "MEX", "USA"]
    assert seq.time_labels == ["2001", "2002"]
    assert not seq.directed
    assert list(seq.at(1).edges()) == [(0, 2, 5.0)]
    assert list(seq.at(2).edges()) == [(1, 2, 5.0)]
    validate(seq)


def test_ingest_numeric_labels_sort_numerically(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("t,u,v,w\n10,2,10,1\n9,1,2,1\n")
    seq = ingest_csv(path, symmetrize_directed=False)
    assert seq.time_labels == ["9", "10"] and seq.labels == ["1", "2", "10"]
    assert seq.directed


def test_ingest_rejects_bad_header(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("time,u,v,w\n1,a,b,1\n")
    with pytest.raises(FormatError, match="header"):
        ingest_csv(path)
