"""
CoreMotif — Motif adjacency: bidirectional/unidirectional edge split and weighted
co-occurrence matrices for the seven triangle motifs, plus an enumeration oracle.

W[i, j] counts the induced instances of the chosen motif that contain both i and j.
Each motif is a sum of masked sparse products over B (reciprocated pairs) and U
(one-way edges); the construction is checked against brute-force enumeration.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, TextIO, Tuple

import numpy as np
import scipy.sparse as sp

from concurrency import map_blocks, row_blocks
from config import DEFAULT_MOTIF, MOTIF_TAGS, ORACLE_MAX_NODES, effective_workers
from errors import ConfigError, OracleLimitError
from graph_core import Graph

logger = logging.getLogger("coremotif.motif")


@dataclass(frozen=True, eq=False)
class EdgeSplit:
    bidir: sp.csr_matrix
    unidir: sp.csr_matrix


@dataclass(frozen=True, eq=False)
class MotifMatrix:
    W: sp.csr_matrix
    motif: str

    @property
    def instances(self) -> int:
        """Each instance touches 3 pairs, stored symmetrically."""
        return int(self.W.sum()) // 6


# ── Motif templates ──
# Edges over nodes {0, 1, 2}. The oracle classifies triples against these.
MOTIF_EDGES = {
    "M1": [(0, 1), (1, 2), (2, 0)],                                   # pure cycle
    "M2": [(0, 1), (1, 0), (1, 2), (2, 0)],                           # one reciprocal, cycle orientation
    "M3": [(0, 1), (1, 0), (1, 2), (2, 1), (2, 0)],                   # two reciprocal
    "M4": [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)],           # all reciprocal
    "M5": [(0, 1), (1, 2), (0, 2)],                                   # feed-forward
    "M6": [(0, 1), (0, 2), (1, 2), (2, 1)],                           # source into reciprocal pair
    "M7": [(1, 0), (2, 0), (1, 2), (2, 1)],                           # reciprocal pair into sink
}  # type: Dict[str, List[Tuple[int, int]]]

# (left, right, mask) terms: C = sum (left @ right) * mask.
# Symmetric motifs give W directly; the others use W = C + C^T.
MOTIF_TERMS = {
    "M1": ([("U", "U", "Ut")], False),
    "M2": ([("B", "U", "Ut"), ("U", "B", "Ut"), ("U", "U", "B")], False),
    "M3": ([("B", "B", "U"), ("B", "U", "B"), ("U", "B", "B")], False),
    "M4": ([("B", "B", "B")], True),
    "M5": ([("U", "U", "U"), ("U", "Ut", "U"), ("Ut", "U", "U")], False),
    "M6": ([("U", "B", "U"), ("B", "Ut", "Ut"), ("Ut", "U", "B")], True),
    "M7": ([("Ut", "B", "Ut"), ("B", "U", "U"), ("U", "Ut", "B")], True),
}

# Bit layout for an ordered triple (x, y, z).
_PAIR_BITS = {(0, 1): 1, (1, 0): 2, (0, 2): 4, (2, 0): 8, (1, 2): 16, (2, 1): 32}


def _code(edges) -> int:
    return sum(_PAIR_BITS[e] for e in edges)


def _decode(code: int) -> List[Tuple[int, int]]:
    return [e for e, bit in _PAIR_BITS.items() if code & bit]


def canonical_code(code: int) -> int:
    """Smallest code over all relabelings of the three nodes."""
    best = code
    for perm in itertools.permutations(range(3)):
        permuted = _code((perm[a], perm[b]) for a, b in _decode(code))
        best = min(best, permuted)
    return best


def _connected(code: int) -> bool:
    touched = set()
    for a, b in _decode(code):
        touched.add(frozenset((a, b)))
    return len(touched) >= 2


# canonical code -> class id, for the 13 connected three-node digraphs
TRIAD_CLASSES = sorted({canonical_code(c) for c in range(64) if _connected(c)})
_MOTIF_CANON = {tag: canonical_code(_code(edges)) for tag, edges in MOTIF_EDGES.items()}


def _build_code_table() -> np.ndarray:
    table = np.zeros(64, dtype=np.int8)
    by_canon = {canon: int(tag[1:]) for tag, canon in _MOTIF_CANON.items()}
    for c in range(64):
        table[c] = by_canon.get(canonical_code(c), 0)
    return table


MOTIF_OF_CODE = _build_code_table()


def motif_type(tag: str) -> str:
    """Normalise a motif tag ('m6' -> 'M6'); unknown tags are configuration errors."""
    norm = str(tag).strip().upper()
    if norm not in MOTIF_TAGS:
        raise ConfigError("unsupported motif {!r}; expected one of {}".format(tag, ", ".join(MOTIF_TAGS)))
    return norm


# ── Edge split ──

def split_edges(g: Graph) -> EdgeSplit:
    """B = min(A, A^T), U = A - B."""
    A = g.adjacency()
    B = A.minimum(A.T).tocsr()
    B.eliminate_zeros()
    U = (A - B).tocsr()
    U.eliminate_zeros()
    return EdgeSplit(bidir=B, unidir=U)


# ── Fast construction ──

def motif_adjacency(g: Graph, m: str = DEFAULT_MOTIF, workers: int = None) -> MotifMatrix:
    """Motif co-occurrence matrix via masked sparse products, row blocks in parallel."""
    tag = motif_type(m)
    split = split_edges(g)
    mats = {"B": split.bidir, "U": split.unidir, "Ut": split.unidir.T.tocsr()}
    terms, symmetric = MOTIF_TERMS[tag]

    def block(start, stop):
        acc = sp.csr_matrix((stop - start, g.n), dtype=np.int64)
        for left, right, mask in terms:
            prod = mats[left][start:stop] @ mats[right]
            acc = acc + prod.multiply(mats[mask][start:stop]).tocsr()
        return acc

    blocks = map_blocks(block, row_blocks(g.n, effective_workers(workers)), workers)
    C = sp.vstack(blocks, format="csr") if blocks else sp.csr_matrix((g.n, g.n), dtype=np.int64)
    W = C if symmetric else (C + C.T).tocsr()
    W = W.astype(np.int64).tocsr()
    W.eliminate_zeros()
    W.sort_indices()
    result = MotifMatrix(W=W, motif=tag)
    logger.info("Motif %s adjacency: %d instances, %d nonzeros", tag, result.instances, W.nnz)
    return result


# ── Enumeration oracle ──

def brute_force_motif_count(g: Graph, m: str = DEFAULT_MOTIF, max_nodes: int = None) -> MotifMatrix:
    """Classify every node triple's induced sub-digraph; O(n^3), guarded by a size bound."""
    tag = motif_type(m)
    bound = ORACLE_MAX_NODES if max_nodes is None else max_nodes
    if g.n > bound:
        raise OracleLimitError("enumeration oracle refuses n={} (bound {})".format(g.n, bound))

    n = g.n
    target = int(tag[1:])
    A = g.adjacency().toarray().astype(np.int64)
    W = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 2):
        rest = n - i - 1
        jj, kk = np.triu_indices(rest, k=1)
        J = jj + i + 1
        K = kk + i + 1
        code = (A[i, J] * 1 + A[J, i] * 2 + A[i, K] * 4 + A[K, i] * 8
                + A[J, K] * 16 + A[K, J] * 32)
        hit = MOTIF_OF_CODE[code] == target
        if not hit.any():
            continue
        J, K = J[hit], K[hit]
        I = np.full(len(J), i)
        for a, b in ((I, J), (I, K), (J, K)):
            np.add.at(W, (a, b), 1)
            np.add.at(W, (b, a), 1)
    return MotifMatrix(W=sp.csr_matrix(W), motif=tag)


def write_motif_matrix(mm: MotifMatrix, stream: TextIO):
    """Coordinate text: i<TAB>j<TAB>weight for every stored nonzero."""
    coo = mm.W.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for i, j, w in zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist()):
        stream.write("{}\t{}\t{}\n".format(i, j, w))
