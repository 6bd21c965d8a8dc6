"""
CoreMotif — Graph ingestion: SNAP edge-list parsing, cleanup, compressed directed graph.
Cleanup drops self-loops, merges duplicate directed edges and renumbers ids densely.
"""

import gzip
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import BinaryIO, Iterable, List, TextIO, Tuple, Union

import numpy as np
import scipy.sparse as sp

from errors import EmptyGraphError, NodeIndexError, ParseError

logger = logging.getLogger("coremotif.graph")

MAX_NODE_ID = 2 ** 63 - 1
COMMENT_PREFIX = "#"


@dataclass(frozen=True, eq=False)
class RawEdgeList:
    """Edges as read from disk, external ids, self-loops and duplicates included."""
    sources: np.ndarray
    targets: np.ndarray

    def __len__(self):
        return len(self.sources)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "RawEdgeList":
        pairs = list(pairs)
        if not pairs:
            return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0].copy(), arr[:, 1].copy())

    def pairs(self) -> List[Tuple[int, int]]:
        return list(zip(self.sources.tolist(), self.targets.tolist()))


@dataclass(frozen=True, eq=False)
class IdMap:
    """External id <-> internal index. to_external is sorted ascending."""
    to_external: np.ndarray

    def __len__(self):
        return len(self.to_external)

    def to_internal(self, external_id: int) -> int:
        pos = int(np.searchsorted(self.to_external, external_id))
        if pos >= len(self.to_external) or int(self.to_external[pos]) != external_id:
            raise KeyError(external_id)
        return pos

    def to_internal_many(self, external_ids: np.ndarray) -> np.ndarray:
        """Vectorised lookup; unknown ids map to -1."""
        external_ids = np.asarray(external_ids, dtype=np.int64)
        pos = np.searchsorted(self.to_external, external_ids)
        pos = np.minimum(pos, max(len(self.to_external) - 1, 0))
        found = len(self.to_external) > 0
        ok = (self.to_external[pos] == external_ids) if found else np.zeros(len(external_ids), dtype=bool)
        return np.where(ok, pos, -1)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph in CSR form, with the transpose kept alongside."""
    n: int
    m: int
    out_ptr: np.ndarray
    out_idx: np.ndarray
    in_ptr: np.ndarray
    in_idx: np.ndarray

    @classmethod
    def from_edges(cls, n: int, sources: np.ndarray, targets: np.ndarray) -> "Graph":
        """Build from internal-index edges. Callers guarantee no loops or duplicates."""
        sources = np.asarray(sources, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        out_ptr, out_idx = _csr(n, sources, targets)
        in_ptr, in_idx = _csr(n, targets, sources)
        return cls(n=n, m=len(sources), out_ptr=out_ptr, out_idx=out_idx, in_ptr=in_ptr, in_idx=in_idx)

    def _check(self, i: int):
        if not 0 <= i < self.n:
            raise NodeIndexError("node {} out of range [0, {})".format(i, self.n))

    def out_neighbors(self, i: int) -> np.ndarray:
        self._check(i)
        return self.out_idx[self.out_ptr[i]:self.out_ptr[i + 1]]

    def in_neighbors(self, i: int) -> np.ndarray:
        self._check(i)
        return self.in_idx[self.in_ptr[i]:self.in_ptr[i + 1]]

    def all_neighbors(self, i: int) -> np.ndarray:
        self._check(i)
        return self.und_idx[self.und_ptr[i]:self.und_ptr[i + 1]]

    def undirected_degree(self, i: int) -> int:
        self._check(i)
        return int(self.und_ptr[i + 1] - self.und_ptr[i])

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """(sources, targets) sorted by source then target."""
        sources = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.out_ptr))
        return sources, self.out_idx.copy()

    # ── Derived views ──

    @cached_property
    def _undirected(self) -> Tuple[np.ndarray, np.ndarray]:
        src, dst = self.edges()
        both_src = np.concatenate([src, dst])
        both_dst = np.concatenate([dst, src])
        if len(both_src):
            keys = np.unique(both_src * max(self.n, 1) + both_dst)
            both_src, both_dst = keys // max(self.n, 1), keys % max(self.n, 1)
        return _csr(self.n, both_src, both_dst)

    @property
    def und_ptr(self) -> np.ndarray:
        return self._undirected[0]

    @property
    def und_idx(self) -> np.ndarray:
        return self._undirected[1]

    def degrees(self) -> np.ndarray:
        """Undirected degree of every node."""
        return np.diff(self.und_ptr)

    def adjacency(self) -> sp.csr_matrix:
        """0/1 directed adjacency A, A[i, j] = 1 iff i -> j."""
        data = np.ones(self.m, dtype=np.int64)
        return sp.csr_matrix((data, self.out_idx, self.out_ptr), shape=(self.n, self.n))

    def undirected_adjacency(self) -> sp.csr_matrix:
        """max(A, A^T) with unit weights."""
        data = np.ones(len(self.und_idx), dtype=np.int64)
        return sp.csr_matrix((data, self.und_idx, self.und_ptr), shape=(self.n, self.n))


def _csr(n: int, rows: np.ndarray, cols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=ptr[1:])
    return ptr, cols.astype(np.int64)


# ── Parsing ──

def decode_line(line: Union[str, bytes], line_no: int) -> str:
    """Lines read from binary streams must be UTF-8."""
    if isinstance(line, str):
        return line
    try:
        return line.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(line_no, "not valid UTF-8 (byte 0x{:02x} at column {})".format(
            line[exc.start], exc.start + 1)) from None


def parse_edge_list(stream: Union[TextIO, BinaryIO]) -> RawEdgeList:
    """Read a SNAP-style edge list. '#' lines and blank lines are skipped."""
    sources = []  # type: List[int]
    targets = []  # type: List[int]
    for line_no, line in enumerate(stream, start=1):
        text = decode_line(line, line_no).strip()
        if not text or text.startswith(COMMENT_PREFIX):
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(line_no, "expected 2 tokens, got {}".format(len(tokens)))
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(line_no, "non-integer token in {!r}".format(text))
        if a < 0 or b < 0 or a > MAX_NODE_ID or b > MAX_NODE_ID:
            raise ParseError(line_no, "node id out of range in {!r}".format(text))
        sources.append(a)
        targets.append(b)
    return RawEdgeList(np.asarray(sources, dtype=np.int64), np.asarray(targets, dtype=np.int64))


def open_edge_file(path: str) -> BinaryIO:
    """Open plain or gzip-compressed edge lists; parse_edge_list decodes each line."""
    if path.endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


# ── Cleanup ──

def clean(raw: RawEdgeList) -> Tuple[Graph, IdMap]:
    """Drop self-loops, merge duplicate edges, renumber by ascending external id."""
    keep = raw.sources != raw.targets
    src_ext = raw.sources[keep]
    dst_ext = raw.targets[keep]
    if len(src_ext) == 0:
        raise EmptyGraphError("empty graph: no edges left after removing self-loops")

    ids = np.unique(np.concatenate([src_ext, dst_ext]))
    n = len(ids)
    src = np.searchsorted(ids, src_ext).astype(np.int64)
    dst = np.searchsorted(ids, dst_ext).astype(np.int64)

    keys = np.unique(src * n + dst)
    src, dst = keys // n, keys % n

    graph = Graph.from_edges(n, src, dst)
    logger.info("Cleaned graph: %d raw edges -> n=%d m=%d (%d self-loops, %d duplicates dropped)",
                len(raw), graph.n, graph.m, int((~keep).sum()), int(keep.sum()) - graph.m)
    return graph, IdMap(ids)


def load_graph(path: str) -> Tuple[Graph, IdMap]:
    with open_edge_file(path) as f:
        raw = parse_edge_list(f)
    return clean(raw)


# ── Sidecars ──

def write_id_map(id_map: IdMap, stream: TextIO):
    """One line per node: external_id<TAB>internal_index, by internal index."""
    for internal, external in enumerate(id_map.to_external.tolist()):
        stream.write("{}\t{}\n".format(external, internal))
