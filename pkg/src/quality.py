"""
CoreMotif — Clustering quality and run reports: modularity, ClusterReport, timed pipelines.
"""

import logging
import time
from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple, Union

import numpy as np

from config import ALGORITHMS, DEFAULT_MOTIF, DEFAULT_SEED, DEFAULT_THRESHOLD
from errors import ConfigError, DataError, ModularityError
from graph_core import Graph
from kcore import coreness, induced_subgraph, k_core_nodes
from kselect import classify_distribution, coreness_histogram, k_for_fraction, select_k
from motif import motif_adjacency, motif_type
from recovery import RecoveryConfig, recover_labels
from spectral import UNLABELED, Labeling, spectral_cluster

logger = logging.getLogger("coremotif")

MISSING = "-"


# ── Modularity ──

def modularity(g: Graph, labels: Union[Labeling, np.ndarray]) -> float:
    """Newman Q on the undirected simplification: sum over clusters of e_c - a_c^2."""
    lab = np.asarray(getattr(labels, "label", labels), dtype=np.int64)
    if len(lab) != g.n:
        raise DataError("labeling covers {} nodes, graph has {}".format(len(lab), g.n))
    if np.any(lab == UNLABELED):
        raise DataError("modularity needs a total labeling; {} nodes unlabeled".format(int((lab == UNLABELED).sum())))
    two_m = len(g.und_idx)
    if two_m == 0:
        raise ModularityError("modularity undefined: graph has no undirected edges")

    _, dense = np.unique(lab, return_inverse=True)
    rows = np.repeat(np.arange(g.n), np.diff(g.und_ptr))
    same = dense[rows] == dense[g.und_idx]
    inside = np.bincount(dense[rows[same]], minlength=dense.max() + 1)
    volume = np.bincount(dense, weights=g.degrees(), minlength=dense.max() + 1)
    e = inside / float(two_m)
    a = volume / float(two_m)
    return float(np.sum(e - a * a))


def dense_labels(labeling: Labeling) -> Labeling:
    """Renumber cluster ids to 0..C-1 in order of first appearance by node index."""
    _, first, inverse = np.unique(labeling.label, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return Labeling(rank[inverse.ravel()])


# ── Report ──

@dataclass
class ClusterReport:
    dataset: str
    n: int
    m: int
    algorithm: str
    motif: Optional[str] = None
    k: Optional[int] = None
    k_mode: Optional[str] = None
    distribution: Optional[str] = None
    fit_score_normal: Optional[float] = None
    fit_score_powerlaw: Optional[float] = None
    retained_fraction: float = 1.0
    n_clusters: int = 0
    motif_instances: Optional[int] = None
    spectral_unlabeled: int = 0
    modularity: Optional[float] = None
    modularity_variant: str = "undirected"
    seed: int = DEFAULT_SEED
    threshold: float = DEFAULT_THRESHOLD
    decomposition_s: float = 0.0
    clustering_s: float = 0.0
    recovery_s: float = 0.0
    total_s: float = 0.0

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = MISSING
            elif isinstance(value, float):
                value = repr(value)
            lines.append("{}: {}".format(f.name, value))
        return "\n".join(lines) + "\n"

    def workload_shares(self) -> Tuple[float, float, float]:
        """(decomposition, clustering, recovery) as fractions of the total."""
        if self.total_s <= 0:
            return 0.0, 0.0, 0.0
        return (self.decomposition_s / self.total_s, self.clustering_s / self.total_s,
                self.recovery_s / self.total_s)


_FIELD_CASTS = {
    "n": int, "m": int, "k": int, "n_clusters": int, "motif_instances": int,
    "spectral_unlabeled": int, "seed": int,
    "fit_score_normal": float, "fit_score_powerlaw": float, "retained_fraction": float,
    "modularity": float, "threshold": float,
    "decomposition_s": float, "clustering_s": float, "recovery_s": float, "total_s": float,
}


_OPTIONAL = {f.name for f in fields(ClusterReport) if f.default is None}


def parse_report(text: str) -> ClusterReport:
    """Inverse of ClusterReport.to_text."""
    values = {}
    known = {f.name for f in fields(ClusterReport)}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, raw = line.partition(": ")
        if not sep or key not in known:
            raise DataError("report line {}: unrecognised entry {!r}".format(line_no, line))
        values[key] = None if raw == MISSING and key in _OPTIONAL else _FIELD_CASTS.get(key, str)(raw)
    return ClusterReport(**values)


# ── Pipelines ──

@dataclass(frozen=True)
class PipelineConfig:
    algorithm: str = "kcoremotif"
    n_clusters: int = 2
    motif: str = DEFAULT_MOTIF
    k: Union[int, str, None] = "auto"   # "auto", a positive int, or None when retain is set
    retain: Optional[float] = None
    threshold: float = DEFAULT_THRESHOLD
    share_base: str = "labeled"
    seed: int = DEFAULT_SEED
    workers: Optional[int] = None
    dataset: str = MISSING

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm must be one of {}, got {!r}".format(", ".join(ALGORITHMS), self.algorithm))
        if self.n_clusters < 1:
            raise ConfigError("n_clusters must be a positive integer")
        motif_type(self.motif)
        if self.algorithm == "kcoremotif" and self.retain is None:
            if not (self.k == "auto" or (isinstance(self.k, int) and self.k >= 1)):
                raise ConfigError("k must be 'auto' or a positive integer, got {!r}".format(self.k))
        RecoveryConfig(self.threshold, self.share_base)


class PipelineFailure(Exception):
    """Wraps a stage failure together with the timings gathered so far."""

    def __init__(self, cause: Exception, report: ClusterReport):
        self.cause = cause
        self.report = report
        super().__init__(str(cause))


def _choose_k(cmap, cfg: PipelineConfig, report: ClusterReport) -> int:
    if cfg.retain is not None:
        report.k_mode = "retain"
        return k_for_fraction(cmap, cfg.retain)
    if cfg.k == "auto":
        report.k_mode = "auto"
        cls = classify_distribution(coreness_histogram(cmap))
        report.distribution = cls.kind
        report.fit_score_normal = cls.fit_score_normal
        report.fit_score_powerlaw = cls.fit_score_powerlaw
        return select_k(cmap, cls)
    report.k_mode = "manual"
    if cfg.k > cmap.max_core:
        raise ConfigError("k={} exceeds the maximum coreness {}".format(cfg.k, cmap.max_core))
    return int(cfg.k)


def timed_pipeline(g: Graph, cfg: PipelineConfig) -> Tuple[Labeling, ClusterReport]:
    """Run one algorithm end to end, stamping monotonic-clock stage durations."""
    report = ClusterReport(dataset=cfg.dataset, n=g.n, m=g.m, algorithm=cfg.algorithm,
                           motif=None if cfg.algorithm == "conventional" else motif_type(cfg.motif),
                           seed=cfg.seed, threshold=cfg.threshold)
    recovery_cfg = RecoveryConfig(cfg.threshold, cfg.share_base)
    start = time.perf_counter()
    try:
        if cfg.algorithm == "kcoremotif":
            t0 = time.perf_counter()
            cmap = coreness(g)
            k = _choose_k(cmap, cfg, report)
            sub = induced_subgraph(g, k_core_nodes(cmap, k))
            report.k = k
            report.retained_fraction = len(sub.parent_index) / float(g.n)
            t1 = time.perf_counter()
            report.decomposition_s = t1 - t0
            logger.info("Top %d-core: %d of %d nodes (%.2f%%), %d edges",
                        k, len(sub.parent_index), g.n, 100 * report.retained_fraction, sub.graph.m)

            mm = motif_adjacency(sub.graph, cfg.motif, workers=cfg.workers)
            report.motif_instances = mm.instances
            local = spectral_cluster(mm, cfg.n_clusters, seed=cfg.seed, workers=cfg.workers)
            partial = Labeling.empty(g.n)
            partial.label[sub.parent_index] = local.label
            report.spectral_unlabeled = len(partial.unlabeled)
            t2 = time.perf_counter()
            report.clustering_s = t2 - t1

            labeling = recover_labels(g, cmap, partial, recovery_cfg)
            report.recovery_s = time.perf_counter() - t2
        else:
            t1 = time.perf_counter()
            if cfg.algorithm == "motif":
                mm = motif_adjacency(g, cfg.motif, workers=cfg.workers)
                report.motif_instances = mm.instances
                W = mm
            else:
                W = g.undirected_adjacency()
            labeling = spectral_cluster(W, cfg.n_clusters, seed=cfg.seed, workers=cfg.workers)
            report.spectral_unlabeled = len(labeling.unlabeled)
            if report.spectral_unlabeled:
                # baselines fold their fallback recovery into the clustering stage
                labeling = recover_labels(g, coreness(g), labeling, recovery_cfg)
            report.clustering_s = time.perf_counter() - t1

        labeling = dense_labels(labeling)
        report.n_clusters = labeling.n_clusters
        report.modularity = modularity(g, labeling)
    except Exception as exc:
        report.total_s = time.perf_counter() - start
        raise PipelineFailure(exc, report) from exc
    report.total_s = time.perf_counter() - start
    logger.info("%s: %d clusters, Q=%.4f, total %.3fs", cfg.algorithm, report.n_clusters,
                report.modularity, report.total_s)
    return labeling, report


def with_total(report: ClusterReport, total_s: float) -> ClusterReport:
    return replace(report, total_s=total_s)
