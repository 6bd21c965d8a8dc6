"""
CoreMotif — CLI Entry Point
Usage:
    python cli.py cluster <edges.txt> --clusters 10 [--algorithm kcoremotif] [--k auto] --labels-out labels.tsv
    python cli.py inspect <edges.txt>
    python cli.py eval <edges.txt> <labels.tsv>
    python cli.py sweep <edges.txt> --clusters 10 --k-min 2 --k-max 12
    python cli.py bench <edges.txt> --clusters 10
"""

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

import concurrency
from config import (
    ALGORITHMS, DEFAULT_MOTIF, DEFAULT_SEED, DEFAULT_THRESHOLD, MOTIF_TAGS, SHARE_BASES,
    setup_logging, validate_config,
)
from errors import (ConfigError, CoreMotifError, CoverageError, DataError, DegenerateDistributionError, ParseError,
                    UsageError)
from graph_core import MAX_NODE_ID, IdMap, decode_line, load_graph, write_id_map
from kcore import coreness, write_coreness
from kselect import classify_distribution, coreness_histogram, select_k
from motif import motif_adjacency, write_motif_matrix
from quality import PipelineConfig, PipelineFailure, modularity, timed_pipeline, with_total
from spectral import Labeling

logger = logging.getLogger("coremotif")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; usage errors here exit 1."""

    def error(self, message):
        raise UsageError(message)


def _k_value(text: str) -> Union[int, str]:
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--k takes 'auto' or a positive integer, got {!r}".format(text))
    if value < 1:
        raise argparse.ArgumentTypeError("--k must be positive, got {}".format(value))
    return value


# ── Run configuration ──

@dataclass(frozen=True)
class RunConfig:
    input: str
    algorithm: str = "kcoremotif"
    motif: str = DEFAULT_MOTIF
    k: Union[int, str, None] = "auto"
    retain: Optional[float] = None
    n_clusters: int = 2
    threshold: float = DEFAULT_THRESHOLD
    share_base: str = "labeled"
    seed: int = DEFAULT_SEED
    workers: int = 1
    labels_out: Optional[str] = None
    report_out: Optional[str] = None
    map_out: Optional[str] = None
    coreness_out: Optional[str] = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """Validate flags before any computation, rejecting conflicting combinations."""
        if args.algorithm == "conventional" and args.motif is not None:
            raise ConfigError("--motif has no meaning with --algorithm conventional")
        if args.algorithm != "kcoremotif" and (args.k is not None or args.retain is not None):
            raise ConfigError("--k/--retain apply only to --algorithm kcoremotif")
        if args.k is not None and args.retain is not None:
            raise ConfigError("--k and --retain are mutually exclusive")
        k = args.k if args.k is not None else (None if args.retain is not None else "auto")
        cfg = cls(
            input=args.input, algorithm=args.algorithm, motif=args.motif or DEFAULT_MOTIF, k=k,
            retain=args.retain, n_clusters=args.clusters, threshold=args.threshold,
            share_base=args.share_base, seed=args.seed, workers=args.workers,
            labels_out=args.labels_out, report_out=args.report_out,
            map_out=args.map_out, coreness_out=args.coreness_out,
        )
        cfg.pipeline()
        return cfg

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            algorithm=self.algorithm, n_clusters=self.n_clusters, motif=self.motif, k=self.k,
            retain=self.retain, threshold=self.threshold, share_base=self.share_base,
            seed=self.seed, workers=self.workers, dataset=_dataset_name(self.input),
        )


def _dataset_name(path: str) -> str:
    name = os.path.basename(path)
    for suffix in (".gz", ".txt", ".tsv", ".edges"):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
    return name or path


# ── Output helpers ──

def _write_atomic(path: str, write, written: List[str]):
    """Write through a temp file, then rename; the final path is recorded for cleanup."""
    tmp = path + ".partial"
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            write(f)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
    written.append(path)


def write_labels(labeling: Labeling, id_map: IdMap, stream):
    """external_id<TAB>cluster_id, ascending external id."""
    for external, label in zip(id_map.to_external.tolist(), labeling.label.tolist()):
        stream.write("{}\t{}\n".format(external, label))


def read_labels(stream, id_map: IdMap) -> Labeling:
    externals = []  # type: List[int]
    labels = []  # type: List[int]
    for line_no, line in enumerate(stream, start=1):
        try:
            text = decode_line(line, line_no).strip()
        except ParseError as exc:
            raise DataError("labels {}".format(exc)) from None
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            raise DataError("labels line {}: expected 'external_id<TAB>cluster_id'".format(line_no))
        try:
            external, label = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError("labels line {}: non-integer field".format(line_no))
        if not (0 <= external <= MAX_NODE_ID and 0 <= label <= MAX_NODE_ID):
            raise DataError("labels line {}: value out of range".format(line_no))
        externals.append(external)
        labels.append(label)

    labeling = Labeling.empty(len(id_map))
    internal = id_map.to_internal_many(np.asarray(externals, dtype=np.int64))
    known = internal >= 0
    labeling.label[internal[known]] = np.asarray(labels, dtype=np.int64)[known]
    unknown = int((~known).sum())
    if unknown:
        logger.warning("%d labeled ids are not nodes of the cleaned graph and were ignored", unknown)
    missing = labeling.unlabeled
    if len(missing):
        first = int(id_map.to_external[missing[0]])
        raise CoverageError(first, "labels missing for {} nodes; first missing external id {}".format(
            len(missing), first))
    return labeling


# ── Commands ──

def cmd_cluster(cfg: RunConfig) -> int:
    started = time.perf_counter()
    written = []  # type: List[str]
    print("CoreMotif — {} on {}".format(cfg.algorithm, cfg.input), file=sys.stderr)
    try:
        # Step 1: Ingest and clean
        graph, id_map = load_graph(cfg.input)
        if cfg.map_out:
            _write_atomic(cfg.map_out, lambda f: write_id_map(id_map, f), written)
        if cfg.coreness_out:
            _write_atomic(cfg.coreness_out, lambda f: write_coreness(coreness(graph), f), written)

        # Step 2: Cluster
        try:
            labeling, report = timed_pipeline(graph, cfg.pipeline())
        except PipelineFailure as failure:
            r = failure.report
            logger.error("Stage failure after %.3fs (decomposition %.3fs, clustering %.3fs, recovery %.3fs)",
                         r.total_s, r.decomposition_s, r.clustering_s, r.recovery_s)
            raise failure.cause from None

        # Step 3: Outputs
        if cfg.labels_out:
            _write_atomic(cfg.labels_out, lambda f: write_labels(labeling, id_map, f), written)
        else:
            write_labels(labeling, id_map, sys.stdout)
        report = with_total(report, time.perf_counter() - started)
        if cfg.report_out:
            _write_atomic(cfg.report_out, lambda f: f.write(report.to_text()), written)
        else:
            sys.stderr.write(report.to_text())
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return 0


def cmd_inspect(path: str, map_out: str = None, coreness_out: str = None,
                motif_out: str = None, motif: str = DEFAULT_MOTIF) -> int:
    graph, id_map = load_graph(path)
    cmap = coreness(graph)
    hist = coreness_histogram(cmap)
    print("n\t{}".format(graph.n))
    print("m\t{}".format(graph.m))
    print("max_coreness\t{}".format(cmap.max_core))
    print("# coreness\tcount")
    for value, count in zip(hist.values.tolist(), hist.counts.tolist()):
        print("{}\t{}".format(value, count))
    try:
        cls = classify_distribution(hist)
    except DegenerateDistributionError as exc:
        print("# {}".format(exc))
    else:
        k = select_k(cmap, cls)
        print("class\t{}".format(cls.kind))
        print("fit_score_normal\t{!r}".format(cls.fit_score_normal))
        print("fit_score_powerlaw\t{!r}".format(cls.fit_score_powerlaw))
        print("auto_k\t{}".format(k))
        print("auto_k_retained\t{:.4f}".format(cmap.retained_fraction(k)))

    written = []  # type: List[str]
    if map_out:
        _write_atomic(map_out, lambda f: write_id_map(id_map, f), written)
    if coreness_out:
        _write_atomic(coreness_out, lambda f: write_coreness(cmap, f), written)
    if motif_out:
        mm = motif_adjacency(graph, motif)
        _write_atomic(motif_out, lambda f: write_motif_matrix(mm, f), written)
    return 0


def cmd_eval(graph_path: str, labels_path: str) -> int:
    graph, id_map = load_graph(graph_path)
    with open(labels_path, "rb") as f:
        labeling = read_labels(f, id_map)
    print("modularity\t{!r}".format(modularity(graph, labeling)))
    print("clusters\t{}".format(labeling.n_clusters))
    return 0


def cmd_sweep(cfg: RunConfig, k_min: int, k_max: Optional[int]) -> int:
    """Run KCoreMotif over a range of k: the accuracy/efficiency trade-off of the core size."""
    graph, _ = load_graph(cfg.input)
    max_core = coreness(graph).max_core
    k_max = max_core if k_max is None else min(k_max, max_core)
    print("k\tretained\tmodularity\tclusters\tclustering_s\ttotal_s")
    for k in range(max(1, k_min), k_max + 1):
        pcfg = PipelineConfig(algorithm="kcoremotif", n_clusters=cfg.n_clusters, motif=cfg.motif, k=k,
                              threshold=cfg.threshold, share_base=cfg.share_base, seed=cfg.seed,
                              workers=cfg.workers, dataset=_dataset_name(cfg.input))
        try:
            _, report = timed_pipeline(graph, pcfg)
        except PipelineFailure as failure:
            print("{}\t-\t-\t-\t-\t-\t# {}".format(k, failure.cause))
            continue
        print("{}\t{:.4f}\t{:.4f}\t{}\t{:.3f}\t{:.3f}".format(
            k, report.retained_fraction, report.modularity, report.n_clusters,
            report.clustering_s, report.total_s))
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    """Three-algorithm comparison on this machine; timings are informative, not targets."""
    graph, _ = load_graph(cfg.input)
    print("algorithm\tk\tretained\tmodularity\tdecomposition_s\tclustering_s\trecovery_s\ttotal_s\tworkload")
    for algorithm in ALGORITHMS:
        pcfg = PipelineConfig(
            algorithm=algorithm, n_clusters=cfg.n_clusters, motif=cfg.motif,
            k=cfg.k if algorithm == "kcoremotif" else "auto",
            retain=cfg.retain if algorithm == "kcoremotif" else None,
            threshold=cfg.threshold, share_base=cfg.share_base, seed=cfg.seed,
            workers=cfg.workers, dataset=_dataset_name(cfg.input))
        try:
            _, r = timed_pipeline(graph, pcfg)
        except PipelineFailure as failure:
            print("{}\tfailed after {:.3f}s: {}".format(algorithm, failure.report.total_s, failure.cause))
            continue
        shares = "/".join("{:.0f}%".format(100 * s) for s in r.workload_shares())
        print("{}\t{}\t{:.4f}\t{:.4f}\t{:.3f}\t{:.3f}\t{:.3f}\t{:.3f}\t{}".format(
            algorithm, "-" if r.k is None else r.k, r.retained_fraction, r.modularity,
            r.decomposition_s, r.clustering_s, r.recovery_s, r.total_s, shares))
    return 0


# ── Argument parsing ──

def _add_clustering_flags(p: argparse.ArgumentParser, require_clusters: bool = True):
    p.add_argument("--clusters", type=int, required=require_clusters, default=None,
                   help="Number of clusters for the spectral stage")
    p.add_argument("--motif", type=str.upper, choices=MOTIF_TAGS, default=None,
                   help="Motif type (default: {})".format(DEFAULT_MOTIF))
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="Recovery share threshold in [0, 1] (default: 0.5)")
    p.add_argument("--share-base", choices=SHARE_BASES, default="labeled",
                   help="Recovery share denominator: labeled neighbors or all neighbors")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="k-means++ seed (default: 0)")
    p.add_argument("--workers", type=int, default=1, help="Worker threads (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="coremotif",
        description="CoreMotif — motif-based spectral clustering on k-core subgraphs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python cli.py inspect data/facebook_combined.txt
  python cli.py cluster data/facebook_combined.txt --clusters 10 --k auto --labels-out fb.labels --report-out fb.report
  python cli.py cluster data/amazon0302.txt --clusters 10 --k 7 --labels-out amazon.labels
  python cli.py eval data/facebook_combined.txt fb.labels
        """,
    )
    parser.add_argument("--log-level", default=None, help="Logging level (default: COREMOTIF_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="Cluster a graph and write labels plus a report")
    p.add_argument("input", help="SNAP edge list (plain or .gz)")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="kcoremotif")
    p.add_argument("--k", type=_k_value, default=None, help="'auto' (default) or a positive integer")
    p.add_argument("--retain", type=float, default=None,
                   help="Pick the largest k whose core keeps at least this fraction of nodes")
    _add_clustering_flags(p)
    p.add_argument("--labels-out", default=None, help="Labels file (default: stdout)")
    p.add_argument("--report-out", default=None, help="Report file (default: stderr)")
    p.add_argument("--map-out", default=None, help="Id map sidecar: external_id<TAB>internal_index")
    p.add_argument("--coreness-out", default=None, help="Coreness dump: internal_index<TAB>coreness")

    p = sub.add_parser("inspect", help="Print sizes, coreness histogram, distribution class and auto k")
    p.add_argument("input")
    p.add_argument("--map-out", default=None)
    p.add_argument("--coreness-out", default=None)
    p.add_argument("--motif-out", default=None, help="Motif matrix as i<TAB>j<TAB>weight")
    p.add_argument("--motif", type=str.upper, choices=MOTIF_TAGS, default=DEFAULT_MOTIF)

    p = sub.add_parser("eval", help="Modularity of a labels file")
    p.add_argument("input")
    p.add_argument("labels")

    p = sub.add_parser("sweep", help="KCoreMotif over a range of k")
    p.add_argument("input")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=None)
    _add_clustering_flags(p)

    p = sub.add_parser("bench", help="Compare the three algorithms on this machine")
    p.add_argument("input")
    p.add_argument("--k", type=_k_value, default=None)
    p.add_argument("--retain", type=float, default=None)
    _add_clustering_flags(p)
    return parser


def _run_config(args, algorithm: str) -> RunConfig:
    ns = argparse.Namespace(**vars(args))
    ns.algorithm = algorithm
    for name in ("k", "retain", "labels_out", "report_out", "map_out", "coreness_out"):
        if not hasattr(ns, name):
            setattr(ns, name, None)
    return RunConfig.from_args(ns)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        validate_config()
        if args.command == "cluster":
            return cmd_cluster(RunConfig.from_args(args))
        if args.command == "inspect":
            return cmd_inspect(args.input, args.map_out, args.coreness_out, args.motif_out, args.motif)
        if args.command == "eval":
            return cmd_eval(args.input, args.labels)
        if args.command == "sweep":
            return cmd_sweep(_run_config(args, "kcoremotif"), args.k_min, args.k_max)
        if args.command == "bench":
            return cmd_bench(_run_config(args, "kcoremotif"))
        raise UsageError("unknown command {!r}".format(args.command))
    except CoreMotifError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return DataError.exit_code
    finally:
        logger.debug("Pools at exit: %s", concurrency.get_pool_status())
        concurrency.shutdown_pools()


if __name__ == "__main__":
    sys.exit(main())
