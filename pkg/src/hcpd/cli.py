"""Command line entry point: ``hcpd {generate,partition,detect,eval,bench,ingest}``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import shutil
import sys
from pathlib import Path

from . import __version__
from .community import louvain_partition
from .detectors import KINDS, DetectorConfig, ScoreSeries
from .evaluation import bench, detection_metrics, ndcg
from .fileio import FormatError, ingest_csv, read_assignment, read_sequence, write_assignment, write_sequence
from .framework import ChangeReport, run_hierarchical
from .generators import PRESETS, GroundTruth
from .graph import DynamicNetwork, ValidationError, unweight_sequence, validate


class CliError(Exception):
    pass


@contextlib.contextmanager
def _output_file(path):
    """Write to ``path.tmp`` and move into place only on success."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        yield tmp
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)


@contextlib.contextmanager
def _output_dir(path):
    path = Path(path)
    existed = path.exists()
    try:
        yield path
    except BaseException:
        if not existed:
            shutil.rmtree(path, ignore_errors=True)
        raise


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _load_sequence(path, unweight_seed=None) -> DynamicNetwork:
    seq = read_sequence(path)
    validate(seq)
    if unweight_seed is not None:
        seq = unweight_sequence(seq, unweight_seed)
    return seq


def _detector_config(args) -> tuple[DetectorConfig, dict]:
    conf = read_config(args.config) if args.config else {}
    for key in ("detector", "window", "epsilon", "smoothing", "pair_budget", "seed",
                "level", "bootstrap"):
        val = getattr(args, key, None)
        if val is not None:
            conf[key] = val
    run = {"level": float(conf.pop("level", 0.95)), "bootstrap": int(conf.pop("bootstrap", 1000)),
           "seed": int(conf.get("seed", 0))}
    if "detector" in conf:
        conf["kind"] = conf.pop("detector")
    return DetectorConfig.from_dict(conf), run


# --------------------------------------------------------------------------- commands


def cmd_generate(args) -> int:
    factory = PRESETS[(args.model, args.preset)]
    seq, truth = factory(args.seed, T=args.T)
    with _output_dir(args.out) as out:
        write_sequence(seq, out)
        truth.write(out)
    print(f"wrote {seq.T} snapshots ({seq.n_nodes} nodes, {truth.assignment.k} communities) to {args.out}")
    return 0


def cmd_partition(args) -> int:
    seq = _load_sequence(args.input)
    res = louvain_partition(seq.at(args.t), seed=args.seed)
    with _output_file(args.out) as tmp:
        write_assignment(res.assignment, tmp)
    print(f"k={res.assignment.k} modularity={res.modularity:.6f} -> {args.out}")
    return 0


def cmd_detect(args) -> int:
    detector, run = _detector_config(args)
    seq = _load_sequence(args.input, args.unweight)
    assignment = read_assignment(args.assignment, seq.n_nodes) if args.assignment else None
    report = run_hierarchical(seq, detector, assignment=assignment, level=run["level"],
                              n_bootstrap=run["bootstrap"], seed=run["seed"],
                              include_original=args.include_original,
                              repartition=args.repartition, threads=args.threads)
    report.config["unweight_seed"] = args.unweight
    with _output_file(args.out) as tmp:
        tmp.write_text(report.to_json(), encoding="utf-8")
    if args.csv:
        with _output_file(args.csv) as tmp:
            tmp.write_text(report.to_csv(), encoding="utf-8")
    print(f"global changes: {list(report.global_changes)}")
    for c, s in report.local_series.items():
        print(f"community {c} changes: {list(s.changes)}")
    return 0


def evaluate_report(report: ChangeReport, truth: GroundTruth | None, slack=None) -> list[dict]:
    rows = []
    if slack is None:
        slack = report_window(report) - 1
    if truth is not None:
        sched = truth.schedule
        rows.append(_metric_row("global", report.global_changes, sched.global_times, slack))
        for c, s in report.local_series.items():
            if c < truth.assignment.k:
                rows.append(_metric_row(f"community/{c}", s.changes, sched.local_times_for(c), slack))
    if report.original_series is not None:
        rows.append({"scope": "global-vs-original", "metric": "ndcg",
                     "value": ndcg(report.global_series, report.original_series)})
    return rows


def report_window(report: ChangeReport) -> int:
    return DetectorConfig.from_dict(report.config["detector"]).effective_window


def _metric_row(scope, detected, truth_times, slack):
    p, r = detection_metrics(detected, truth_times, slack)
    return {"scope": scope, "metric": "precision/recall", "value": f"{p:.4f}/{r:.4f}",
            "detected": " ".join(map(str, detected)), "truth": " ".join(map(str, truth_times))}


def cmd_eval(args) -> int:
    try:
        report = ChangeReport.load(args.report)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise CliError(f"{args.report}: not a change report ({exc})") from None
    truth = GroundTruth.read(args.truth) if args.truth else None
    rows = evaluate_report(report, truth, args.slack)
    fields = ["scope", "metric", "value", "detected", "truth"]
    w = csv.DictWriter(sys.stdout, fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    if args.out:
        with _output_file(args.out) as tmp, open(tmp, "w", encoding="utf-8", newline="") as fh:
            out = csv.DictWriter(fh, fields, lineterminator="\n")
            out.writeheader()
            out.writerows(rows)
    if args.append:
        doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
        doc["metrics"] = rows
        with _output_file(args.report) as tmp:
            tmp.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_bench(args) -> int:
    detector, _ = _detector_config(args)
    if args.input:
        seq = _load_sequence(args.input)
        if not args.assignment:
            raise CliError("bench --in needs --assignment")
        assignment = read_assignment(args.assignment, seq.n_nodes)
    else:
        seq, truth = PRESETS[(args.model, "table1")](args.seed, T=args.T)
        assignment = truth.assignment
    res = bench(seq, detector, assignment, repeats=args.repeats)
    print("scope\tmedian_s\truns")
    for scope, t in res["times"].items():
        print(f"{scope}\t{t:.6f}\t{' '.join(f'{x:.6f}' for x in res['runs'][scope])}")
    print(f"contract\t{res['contract']:.6f}\t")
    print(f"speedup\t{res['speedup']:.1f}x\t")
    return 0


def cmd_ingest(args) -> int:
    seq = ingest_csv(args.csv, symmetrize_directed=args.symmetrize, directed=not args.undirected)
    validate(seq)
    with _output_dir(args.out) as out:
        write_sequence(seq, out)
        (out / "labels.json").write_text(json.dumps({"nodes": seq.labels, "times": seq.time_labels},
                                                    indent=2) + "\n", encoding="utf-8")
    print(f"wrote {seq.T} snapshots over {seq.n_nodes} nodes to {args.out}")
    return 0


# --------------------------------------------------------------------------- parser


def _add_detector_args(p, required=False):
    p.add_argument("--detector", choices=KINDS, required=required)
    p.add_argument("--window", type=int, help="edge-monitoring window (default 4)")
    p.add_argument("--smoothing", type=float, help="KL clamping (default 1e-6)")
    p.add_argument("--epsilon", type=float, help="deltacon affinity epsilon (default: auto)")
    p.add_argument("--pair-budget", dest="pair_budget", type=int,
                   help="track a seeded sample of this many pairs per scope")
    p.add_argument("--config", help="key = value file with detector settings; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcpd", description="Hierarchical change point detection "
                                     "on snapshot sequences.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic sequence with ground truth")
    p.add_argument("--model", choices=sorted({m for m, _ in PRESETS}), required=True)
    p.add_argument("--preset", choices=["table1"], default="table1")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("partition", help="Louvain partition of one snapshot")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="shuffle node visit order")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("detect", help="run the hierarchical scan and write a report")
    p.add_argument("--in", dest="input", required=True)
    _add_detector_args(p)
    p.add_argument("--level", type=float)
    p.add_argument("--bootstrap", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--assignment", help="node<TAB>community file; default is Louvain on t=1")
    p.add_argument("--unweight", type=int, metavar="SEED",
                   help="keep each edge with probability equal to its weight first")
    p.add_argument("--include-original", action="store_true",
                   help="also score the uncontracted network")
    p.add_argument("--repartition", action="store_true",
                   help="re-partition at flagged global changes")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write scope,t,score,threshold,is_change rows")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="precision/recall against ground truth and NDCG")
    p.add_argument("--report", required=True)
    p.add_argument("--truth", help="directory written by generate")
    p.add_argument("--slack", type=int, help="default: window - 1")
    p.add_argument("--out", help="write the metrics CSV here as well")
    p.add_argument("--append", action="store_true", help="add the metrics to the report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time the detector on original vs contracted scopes")
    p.add_argument("--in", dest="input")
    p.add_argument("--assignment")
    p.add_argument("--model", choices=sorted({m for m, _ in PRESETS}), default="sbm")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=int, default=30)
    p.add_argument("--repeats", type=int, default=3)
    _add_detector_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ingest", help="convert a t,u,v,w CSV into a sequence directory")
    p.add_argument("--csv", required=True)
    p.add_argument("--symmetrize", action=argparse.BooleanOptionalAction, default=True,
                   help="merge u->v and v->u into one undirected edge (default on)")
    p.add_argument("--undirected", action="store_true", help="rows are already undirected")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, FormatError, ValidationError, ValueError, OSError) as exc:
        print(f"hcpd {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
