"""
From an edge table to a change report
=====================================

A long-format CSV with columns t,u,v,w (here a made-up trade table between
twelve countries over ten years) is turned into a snapshot sequence.  Both trade
directions are summed into one undirected edge.
"""

import csv
import io
import tempfile
from pathlib import Path

import numpy as np

from hcpd import DetectorConfig, louvain_partition, run_hierarchical
from hcpd.fileio import ingest_csv

rng = np.random.default_rng(1)
blocs = {"A": ["AR", "BR", "CL", "UY"], "B": ["DE", "FR", "IT", "ES"], "C": ["JP", "KR", "CN", "VN"]}
country_bloc = {c: b for b, cs in blocs.items() for c in cs}

buf = io.StringIO()
w = csv.writer(buf)
w.writerow(["t", "u", "v", "w"])
for year in range(2001, 2011):
    for u in country_bloc:
        for v in country_bloc:
            if u == v:
                continue
            same = country_bloc[u] == country_bloc[v]
            rate = 5.0 if same else 1.0
            # from 2007 on, blocs B and C trade much more
            if year >= 2007 and {country_bloc[u], country_bloc[v]} == {"B", "C"}:
                rate = 4.0
            w.writerow([year, u, v, rng.gamma(rate, 1.0)])

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "trade.csv"
    path.write_text(buf.getvalue())
    seq = ingest_csv(path)
print(f"{seq.T} snapshots, {seq.n_nodes} nodes, years {seq.time_labels[0]}..{seq.time_labels[-1]}")

###############################################################################
# Communities come from Louvain on the first year.

part = louvain_partition(seq.at(1))
for c in range(part.assignment.k):
    print("community", c, [seq.labels[i] for i in part.assignment.members(c)])

report = run_hierarchical(seq, DetectorConfig(kind="deltacon"), assignment=part, seed=0)
print("global changes at years:", [seq.time_labels[t - 1] for t in report.global_changes])
