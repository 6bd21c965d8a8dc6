"""
CoreMotif — Label recovery: group unlabeled nodes into existing clusters shell by shell.

Single ordered pass, highest coreness first (ties by node index). A node joins the
most common label among its labeled neighbors when that label's share reaches the
threshold; otherwise it opens a new cluster. Earlier assignments are visible to
later nodes, so the pass is inherently sequential.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from config import DEFAULT_THRESHOLD, SHARE_BASES
from errors import ConfigError, RecoveryError
from graph_core import Graph
from kcore import CorenessMap
from spectral import UNLABELED, Labeling

logger = logging.getLogger("coremotif")

# trace(node, assigned_label, opened_new_cluster)
TraceFn = Callable[[int, int, bool], None]


@dataclass(frozen=True)
class RecoveryConfig:
    threshold: float = DEFAULT_THRESHOLD
    share_base: str = "labeled"  # "labeled": share of labeled neighbors; "all": share of all neighbors

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must be in [0, 1], got {}".format(self.threshold))
        if self.share_base not in SHARE_BASES:
            raise ConfigError("share_base must be one of {}, got {!r}".format(SHARE_BASES, self.share_base))


def recovery_order(c: CorenessMap, labels: np.ndarray) -> np.ndarray:
    """Unlabeled nodes by coreness descending, then node index ascending."""
    pending = np.flatnonzero(labels == UNLABELED)
    return pending[np.lexsort((pending, -c.core[pending]))]


def recover_labels(g: Graph, c: CorenessMap, partial: Labeling, cfg: RecoveryConfig = None,
                   trace: Optional[TraceFn] = None) -> Labeling:
    cfg = cfg or RecoveryConfig()
    labels = partial.label.copy()
    if not np.any(labels != UNLABELED):
        raise RecoveryError("nothing to propagate from: no labeled node in the partial labeling")

    order = recovery_order(c, labels)
    next_label = partial.next_label
    ptr = g.und_ptr.tolist()
    nbrs = g.und_idx.tolist()
    current = labels.tolist()
    by_all = cfg.share_base == "all"
    joined = opened = 0

    for v in order.tolist():
        counts = {}
        for u in nbrs[ptr[v]:ptr[v + 1]]:
            lab = current[u]
            if lab != UNLABELED:
                counts[lab] = counts.get(lab, 0) + 1

        assigned = None
        if counts:
            best = min(counts, key=lambda lab: (-counts[lab], lab))
            base = (ptr[v + 1] - ptr[v]) if by_all else sum(counts.values())
            if counts[best] / base >= cfg.threshold:
                assigned = best

        fresh = assigned is None
        if fresh:
            assigned = next_label
            next_label += 1
            opened += 1
        else:
            joined += 1
        current[v] = assigned
        if trace is not None:
            trace(v, assigned, fresh)

    logger.info("Recovered %d nodes: %d joined existing clusters, %d new clusters",
                len(order), joined, opened)
    return Labeling(np.asarray(current, dtype=np.int64))
