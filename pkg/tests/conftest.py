import numpy as np
import pytest

from graph_core import Graph, RawEdgeList, clean


def graph_from_pairs(pairs, n=None):
    """Internal-index graph; n pads isolated trailing nodes when given."""
    pairs = sorted(set((a, b) for a, b in pairs if a != b))
    src = np.asarray([a for a, _ in pairs], dtype=np.int64)
    dst = np.asarray([b for _, b in pairs], dtype=np.int64)
    if n is None:
        n = int(max(src.max(), dst.max())) + 1 if len(pairs) else 0
    return Graph.from_edges(n, src, dst)


def random_digraph(n, p, seed, reciprocity=0.3):
    """Erdos-Renyi style digraph with a share of reciprocated edges."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    back = (rng.random((n, n)) < reciprocity) & mask
    mask = mask | back.T
    src, dst = np.nonzero(mask)
    return Graph.from_edges(n, src.astype(np.int64), dst.astype(np.int64))


def clique_pairs(nodes, directed_both=True):
    pairs = []
    for a in nodes:
        for b in nodes:
            if a != b and (directed_both or a < b):
                pairs.append((a, b))
    return pairs


@pytest.fixture
def triangle():
    return graph_from_pairs([(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def path3():
    return graph_from_pairs([(0, 1), (1, 2)])


@pytest.fixture
def two_cliques():
    """Two disjoint 5-cliques with every pair reciprocated."""
    return graph_from_pairs(clique_pairs(range(5)) + clique_pairs(range(5, 10)))


@pytest.fixture
def cleaned():
    """A small messy edge list: loops, duplicates, sparse external ids."""
    raw = RawEdgeList.from_pairs([(10, 20), (20, 10), (10, 20), (30, 30), (20, 40), (40, 10)])
    return clean(raw)


def write_edges(path, pairs, header=True):
    with open(path, "w", encoding="utf-8") as f:
        if header:
            f.write("# Directed graph\n# FromNodeId\tToNodeId\n")
        for a, b in pairs:
            f.write("{}\t{}\n".format(a, b))
    return str(path)
