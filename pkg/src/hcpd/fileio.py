"""Plain-text storage for snapshot sequences and community assignments.

Directory layout written by :func:`write_sequence`::

    DIR/manifest.txt         T<TAB>100 / directed<TAB>0 / nodes<TAB>1000
    DIR/snapshot_0001.tsv    u<TAB>v<TAB>w, one edge per line
    ...

Files are UTF-8 with LF line endings and node ids are non-negative integers.
"""

from __future__ import annotations

import csv
import re
from collections import defaultdict
from pathlib import Path

import numpy as np

from .graph import (
    CommunityAssignment,
    DynamicNetwork,
    LazySnapshots,
    Snapshot,
    symmetrize,
)

MANIFEST = "manifest.txt"
SNAPSHOT_RE = re.compile(r"^snapshot_(\d+)\.tsv$")


class FormatError(ValueError):
    """Malformed file on disk."""


def snapshot_name(t: int) -> str:
    return f"snapshot_{t:04d}.tsv"


def write_snapshot(g: Snapshot, path) -> None:
    lines = [f"{u}\t{v}\t{w!r}\n" for u, v, w in g.edges()]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(lines)


def read_snapshot(path, t: int, n_nodes: int, directed: bool) -> Snapshot:
    path = Path(path)
    src, dst, wts = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"{path.name}:{lineno}: expected 'u<TAB>v<TAB>w', got {line!r}")
            try:
                src.append(int(parts[0]))
                dst.append(int(parts[1]))
                wts.append(float(parts[2]))
            except ValueError as exc:
                raise FormatError(f"{path.name}:{lineno}: {exc}") from None
    return Snapshot(t, n_nodes, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                    np.array(wts, dtype=np.float64), directed)


def write_manifest(path, T: int, directed: bool, n_nodes: int) -> None:
    Path(path).write_text(f"T\t{T}\ndirected\t{int(directed)}\nnodes\t{n_nodes}\n", encoding="utf-8")


def read_manifest(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        key, _, value = line.partition("\t")
        if not _:
            raise FormatError(f"{MANIFEST}:{lineno}: expected 'key<TAB>value'")
        out[key.strip()] = value.strip()
    try:
        return {"T": int(out["T"]), "directed": bool(int(out["directed"])), "nodes": int(out["nodes"])}
    except KeyError as exc:
        raise FormatError(f"{MANIFEST}: missing key {exc}") from None
    except ValueError as exc:
        raise FormatError(f"{MANIFEST}: {exc}") from None


def write_sequence(seq: DynamicNetwork, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for g in seq:
        write_snapshot(g, directory / snapshot_name(g.t))
    write_manifest(directory / MANIFEST, seq.T, seq.directed, seq.n_nodes)
    return directory


def read_sequence(directory) -> DynamicNetwork:
    """Open a sequence directory.  Snapshots are parsed lazily, on first access.

    The time index of each snapshot comes from its file name, so a missing file
    shows up as a gap when the result is passed to :func:`~hcpd.graph.validate`.
    """
    directory = Path(directory)
    if not (directory / MANIFEST).is_file():
        raise FormatError(f"{directory}: no {MANIFEST}")
    man = read_manifest(directory / MANIFEST)
    files = []
    for p in directory.iterdir():
        m = SNAPSHOT_RE.match(p.name)
        if m:
            files.append((int(m.group(1)), p))
    files.sort()
    n, directed = man["nodes"], man["directed"]
    return DynamicNetwork(
        LazySnapshots(len(files), lambda i: read_snapshot(files[i][1], files[i][0], n, directed)),
        n, directed, meta={"source": str(directory), "declared_T": man["T"]},
    )


def write_assignment(a: CommunityAssignment, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{u}\t{c}\n" for u, c in enumerate(a.labels.tolist()))


def read_assignment(path, n_nodes: int | None = None) -> CommunityAssignment:
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise FormatError(f"{Path(path).name}:{lineno}: expected 'node<TAB>community'")
            try:
                mapping[int(parts[0])] = int(parts[1])
            except ValueError as exc:
                raise FormatError(f"{Path(path).name}:{lineno}: {exc}") from None
    n = n_nodes if n_nodes is not None else (max(mapping) + 1 if mapping else 0)
    return CommunityAssignment.from_mapping(mapping, n)


def ingest_csv(path, symmetrize_directed: bool = True, directed: bool = True) -> DynamicNetwork:
    """Read a long-format edge table with header ``t,u,v,w``.

    Time stamps and node ids may be arbitrary strings; both are sorted (numerically
    when every value parses as a number) and mapped to ``1..T`` and ``0..n-1``.  The
    original values are kept in ``time_labels`` / ``labels``.  Repeated ``(t, u, v)``
    rows are summed.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "u", "v", "w"]:
            raise FormatError(f"{path.name}: header must be exactly 't,u,v,w'")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 4:
                raise FormatError(f"{path.name}:{lineno}: expected 4 columns")
            t, u, v, w = (c.strip() for c in rec)
            try:
                w = float(w)
            except ValueError:
                raise FormatError(f"{path.name}:{lineno}: bad weight {w!r}") from None
            rows.append((t, u, v, w))

    def ordered(values):
        values = set(values)
        try:
            return sorted(values, key=float)
        except ValueError:
            return sorted(values)

    times = ordered(r[0] for r in rows)
    nodes = ordered([r[1] for r in rows] + [r[2] for r in rows])
    t_index = {x: i + 1 for i, x in enumerate(times)}
    n_index = {x: i for i, x in enumerate(nodes)}
    per_t = defaultdict(lambda: defaultdict(float))
    for t, u, v, w in rows:
        per_t[t_index[t]][(n_index[u], n_index[v])] += w
    n = len(nodes)
    snaps = []
    for t in range(1, len(times) + 1):
        edges = [(u, v, w) for (u, v), w in sorted(per_t[t].items())]
        g = Snapshot.from_edges(t, n, edges, directed=directed)
        if directed and symmetrize_directed:
            g = symmetrize(g)
        snaps.append(g)
    is_directed = directed and not symmetrize_directed
    return DynamicNetwork(snaps, n, is_directed, labels=nodes, time_labels=times,
                          meta={"source": str(path)})
