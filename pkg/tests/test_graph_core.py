import gzip
import io

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
import hypothesis.strategies as st

from errors import EmptyGraphError, NodeIndexError, ParseError
from graph_core import RawEdgeList, clean, load_graph, parse_edge_list, write_id_map

from conftest import graph_from_pairs, random_digraph, write_edges


# ── Parsing ──

def test_parse_skips_comments_and_blank_lines():
    raw = parse_edge_list(io.StringIO("# header\n\n1 2\n  # indented comment\n2\t3\n"))
    assert raw.pairs() == [(1, 2), (2, 3)]


def test_parse_wrong_token_count_reports_line():
    with pytest.raises(ParseError) as exc:
        parse_edge_list(io.StringIO("1 2\n3 4 5\n"))
    assert exc.value.line_no == 2


@pytest.mark.parametrize("line", ["a b", "1 -2", "1 9223372036854775808", "1.5 2"])
def test_parse_rejects_bad_ids(line):
    with pytest.raises(ParseError):
        parse_edge_list(io.StringIO(line + "\n"))


def test_parse_bytes_stream():
    assert parse_edge_list(io.BytesIO(b"# c\n1 2\n")).pairs() == [(1, 2)]
    with pytest.raises(ParseError) as exc:
        parse_edge_list(io.BytesIO(b"1 2\n\xff\xfe 3\n"))
    assert exc.value.line_no == 2


def test_parse_accepts_max_id():
    raw = parse_edge_list(io.StringIO("0 9223372036854775807\n"))
    assert raw.pairs() == [(0, 2 ** 63 - 1)]


# ── Cleanup ──

def test_clean_drops_loops_and_duplicates(cleaned):
    graph, id_map = cleaned
    assert graph.n == 3
    assert graph.m == 4
    assert id_map.to_external.tolist() == [10, 20, 40]
    src, dst = graph.edges()
    assert list(zip(src.tolist(), dst.tolist())) == [(0, 1), (1, 0), (1, 2), (2, 0)]


def test_clean_only_loops_is_empty():
    with pytest.raises(EmptyGraphError):
        clean(RawEdgeList.from_pairs([(1, 1), (2, 2)]))


def test_clean_no_edges_is_empty():
    with pytest.raises(EmptyGraphError):
        clean(RawEdgeList.from_pairs([]))


def test_id_map_lookup(cleaned):
    _, id_map = cleaned
    assert id_map.to_internal(40) == 2
    with pytest.raises(KeyError):
        id_map.to_internal(30)
    assert id_map.to_internal_many(np.array([20, 30, 10])).tolist() == [1, -1, 0]


def test_renumbering_is_relabel_invariant():
    pairs = [(5, 9), (9, 7), (7, 5), (5, 7)]
    shifted = [(a * 1000 + 3, b * 1000 + 3) for a, b in pairs]
    g1, _ = clean(RawEdgeList.from_pairs(pairs))
    g2, _ = clean(RawEdgeList.from_pairs(shifted))
    assert np.array_equal(g1.out_ptr, g2.out_ptr)
    assert np.array_equal(g1.out_idx, g2.out_idx)


# ── Graph queries ──

def test_neighbors(cleaned):
    graph, _ = cleaned
    assert graph.out_neighbors(1).tolist() == [0, 2]
    assert graph.in_neighbors(0).tolist() == [1, 2]
    assert graph.all_neighbors(0).tolist() == [1, 2]
    # reciprocal pair 0 <-> 1 counts once
    assert graph.undirected_degree(0) == 2
    assert graph.degrees().tolist() == [2, 2, 2]


def test_neighbor_index_out_of_range(triangle):
    with pytest.raises(NodeIndexError):
        triangle.out_neighbors(3)
    with pytest.raises(IndexError):
        triangle.all_neighbors(-1)


def test_adjacency_views():
    g = graph_from_pairs([(0, 1), (1, 0), (1, 2)])
    A = g.adjacency().toarray()
    assert A.tolist() == [[0, 1, 0], [1, 0, 1], [0, 0, 0]]
    S = g.undirected_adjacency().toarray()
    assert np.array_equal(S, S.T)
    assert S.sum() == 4


# ── Files ──

def test_load_graph_plain_and_gzip(tmp_path):
    pairs = [(1, 2), (2, 3), (3, 1), (3, 3)]
    plain = write_edges(tmp_path / "g.txt", pairs)
    packed = tmp_path / "g.txt.gz"
    with open(plain, "rb") as src, gzip.open(str(packed), "wb") as dst:
        dst.write(src.read())
    g1, m1 = load_graph(plain)
    g2, m2 = load_graph(str(packed))
    assert g1.m == g2.m == 3
    assert np.array_equal(m1.to_external, m2.to_external)


def test_write_id_map(cleaned):
    _, id_map = cleaned
    out = io.StringIO()
    write_id_map(id_map, out)
    assert out.getvalue() == "10\t0\n20\t1\n40\t2\n"


# ── Structural invariants ──

def external_edges(graph, id_map):
    src, dst = graph.edges()
    return RawEdgeList(id_map.to_external[src], id_map.to_external[dst])


@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=2, max_value=40))
@settings(max_examples=40, deadline=None)
def test_neighbor_queries_match_brute_force(seed, n):
    g = random_digraph(n, 0.15, seed)
    A = g.adjacency().toarray()
    assert g.out_ptr[-1] == g.in_ptr[-1] == g.m == int(A.sum())
    assert np.array_equal(sp.csr_matrix((np.ones(g.m), g.in_idx, g.in_ptr), shape=(n, n)).toarray(), A.T)
    for i in range(n):
        out = set(g.out_neighbors(i).tolist())
        inn = set(g.in_neighbors(i).tolist())
        assert out == set(np.flatnonzero(A[i]).tolist())
        assert inn == set(np.flatnonzero(A[:, i]).tolist())
        assert g.all_neighbors(i).tolist() == sorted(out | inn)
        assert g.undirected_degree(i) == sum(1 for j in range(n) if A[i, j] or A[j, i])


@pytest.mark.parametrize("seed", range(10))
def test_clean_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    ids = rng.permutation(np.unique(rng.integers(0, 10 ** 12, size=30)))
    pairs = [(int(ids[a]), int(ids[b])) for a, b in rng.integers(0, len(ids), size=(120, 2))]
    g1, map1 = clean(RawEdgeList.from_pairs(pairs))
    g2, map2 = clean(external_edges(g1, map1))
    assert np.array_equal(map1.to_external, map2.to_external)
    for name in ("out_ptr", "out_idx", "in_ptr", "in_idx"):
        assert np.array_equal(getattr(g1, name), getattr(g2, name))
    assert (g1.n, g1.m) == (g2.n, g2.m)


@pytest.mark.parametrize("seed", range(10))
def test_id_map_round_trip(seed):
    rng = np.random.default_rng(seed)
    ids = rng.permutation(np.unique(rng.integers(0, 2 ** 62, size=50)))
    pairs = list(zip(ids[:-1].tolist(), ids[1:].tolist()))
    _, id_map = clean(RawEdgeList.from_pairs(pairs))
    assert np.array_equal(id_map.to_external, np.sort(ids))
    for i, external in enumerate(id_map.to_external.tolist()):
        assert id_map.to_internal(external) == i
    assert np.array_equal(id_map.to_internal_many(ids), np.searchsorted(id_map.to_external, ids))
