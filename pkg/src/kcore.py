"""
CoreMotif — k-core decomposition: bucket peeling, core/crust/shell sets, induced subgraphs.
Coreness is computed on the undirected simplification (a reciprocal pair counts once).
"""

import logging
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from errors import EmptySubgraphError, NodeIndexError
from graph_core import Graph

logger = logging.getLogger("coremotif")


@dataclass(frozen=True, eq=False)
class CorenessMap:
    core: np.ndarray

    @property
    def n(self) -> int:
        return len(self.core)

    @property
    def max_core(self) -> int:
        return int(self.core.max()) if len(self.core) else 0

    def retained_fraction(self, k: int) -> float:
        """|k-core| / n."""
        if not len(self.core):
            return 0.0
        return float(np.count_nonzero(self.core >= k)) / len(self.core)


@dataclass(frozen=True, eq=False)
class Subgraph:
    parent_index: np.ndarray
    graph: Graph


def coreness(g: Graph) -> CorenessMap:
    """O(m) bucket peeling. Equal-degree nodes are peeled lowest index first."""
    n = g.n
    deg = g.degrees().tolist()
    ptr = g.und_ptr.tolist()
    nbrs = g.und_idx.tolist()
    max_deg = max(deg) if deg else 0

    # bin[d] = first position of degree-d nodes in vert
    counts = [0] * (max_deg + 1)
    for d in deg:
        counts[d] += 1
    bins = [0] * (max_deg + 1)
    start = 0
    for d in range(max_deg + 1):
        bins[d] = start
        start += counts[d]

    pos = [0] * n
    vert = [0] * n
    fill = list(bins)
    for v in range(n):
        d = deg[v]
        pos[v] = fill[d]
        vert[fill[d]] = v
        fill[d] += 1

    for i in range(n):
        v = vert[i]
        dv = deg[v]
        for e in range(ptr[v], ptr[v + 1]):
            u = nbrs[e]
            du = deg[u]
            if du > dv:
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bins[du] += 1
                deg[u] = du - 1

    core = np.asarray(deg, dtype=np.int64)
    logger.debug("Coreness computed: n=%d max=%d", n, int(core.max()) if n else 0)
    return CorenessMap(core)


def k_core_nodes(c: CorenessMap, k: int) -> np.ndarray:
    return np.flatnonzero(c.core >= k)


def k_crust_nodes(c: CorenessMap, k: int) -> np.ndarray:
    return np.flatnonzero(c.core < k)


def shell_nodes(c: CorenessMap, k: int) -> np.ndarray:
    return np.flatnonzero(c.core == k)


def induced_subgraph(g: Graph, nodes) -> Subgraph:
    """Edges of g with both ends in nodes; local ids follow ascending parent order."""
    parent = np.unique(np.asarray(nodes, dtype=np.int64))
    if len(parent) == 0:
        raise EmptySubgraphError("empty subgraph: no nodes selected")
    if parent[0] < 0 or parent[-1] >= g.n:
        raise NodeIndexError("subgraph node out of range [0, {})".format(g.n))

    local = np.full(g.n, -1, dtype=np.int64)
    local[parent] = np.arange(len(parent), dtype=np.int64)
    src, dst = g.edges()
    ls, ld = local[src], local[dst]
    keep = (ls >= 0) & (ld >= 0)
    sub = Graph.from_edges(len(parent), ls[keep], ld[keep])
    return Subgraph(parent_index=parent, graph=sub)


def write_coreness(c: CorenessMap, stream: TextIO):
    """One line per node: internal_index<TAB>coreness."""
    for i, k in enumerate(c.core.tolist()):
        stream.write("{}\t{}\n".format(i, k))
