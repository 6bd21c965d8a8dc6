import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp

from errors import DegenerateClusteringError, NoEmbeddableNodesError
from spectral import (
    UNLABELED, Embedding, Labeling, build_laplacian, kmeans_objective, kmeans_pp, row_normalize,
    smallest_eigenvectors, spectral_cluster,
)

from conftest import clique_pairs, graph_from_pairs


def random_symmetric(n, density, seed, max_weight=5):
    rng = np.random.default_rng(seed)
    upper = np.triu((rng.random((n, n)) < density) * rng.integers(1, max_weight + 1, (n, n)), k=1)
    return sp.csr_matrix(upper + upper.T)


def embedding_of(points):
    points = np.asarray(points, dtype=np.float64)
    return Embedding(vectors=points, values=np.zeros(points.shape[1]),
                     row_of=np.arange(len(points)), n_nodes=len(points))


# ── Laplacian ──

def test_two_node_laplacian():
    lp = build_laplacian(sp.csr_matrix(np.array([[0, 1], [1, 0]])))
    assert np.allclose(lp.L_sym.toarray(), [[1, -1], [-1, 1]])
    assert np.allclose(la.eigvalsh(lp.L_sym.toarray()), [0, 2])


def test_isolated_node_is_excluded():
    W = np.array([[0, 2, 0], [2, 0, 0], [0, 0, 0]])
    lp = build_laplacian(W)
    assert lp.nodes.tolist() == [0, 1]
    assert lp.excluded.tolist() == [2]
    assert np.allclose(lp.L_sym.toarray(), build_laplacian(W[:2, :2]).L_sym.toarray())


def test_all_zero_weights():
    with pytest.raises(NoEmbeddableNodesError):
        build_laplacian(sp.csr_matrix((4, 4)))


@pytest.mark.parametrize("seed", range(10))
def test_spectrum_in_unit_range(seed):
    lp = build_laplacian(random_symmetric(40, 0.2, seed))
    L = lp.L_sym.toarray()
    assert np.max(np.abs(L - L.T)) <= 1e-12
    values = la.eigvalsh(L)
    assert values.min() >= -1e-8
    assert values.max() <= 2 + 1e-8


def test_scale_invariance_of_laplacian():
    W = random_symmetric(30, 0.3, 4)
    assert np.array_equal(build_laplacian(W).L_sym.toarray(), build_laplacian(4 * W).L_sym.toarray())


# ── Eigenpairs ──

def test_null_vector_is_sqrt_degree():
    W = random_symmetric(20, 0.5, 1)
    lp = build_laplacian(W)
    e = smallest_eigenvectors(lp, 1)
    assert e.values[0] == pytest.approx(0.0, abs=1e-8)
    root = np.sqrt(lp.degree[lp.nodes])
    expected = root / np.linalg.norm(root)
    assert np.allclose(np.abs(e.vectors[:, 0]), expected, atol=1e-8)


def test_components_give_zero_multiplicity(two_cliques):
    lp = build_laplacian(two_cliques.undirected_adjacency())
    e = smallest_eigenvectors(lp, 3)
    assert np.allclose(e.values[:2], 0.0, atol=1e-8)
    assert e.values[2] > 0.5


@pytest.mark.parametrize("k_eig", [1, 2, 3])
def test_split_graph_embedding_has_no_zero_rows(two_cliques, k_eig):
    # a three-way split: two 5-cliques and a weighted path
    W = two_cliques.undirected_adjacency().toarray().astype(np.float64)
    W = np.pad(W, (0, 3))
    W[10, 11] = W[11, 10] = 2.0
    W[11, 12] = W[12, 11] = 1.0
    lp = build_laplacian(W)
    e = smallest_eigenvectors(lp, k_eig)
    root = np.sqrt(lp.degree[lp.nodes])
    assert np.allclose(e.vectors[:, 0], root / np.linalg.norm(root), atol=1e-12)
    assert np.allclose(e.values, 0.0, atol=1e-8)
    assert np.allclose(e.vectors.T @ e.vectors, np.eye(k_eig), atol=1e-8)
    assert not row_normalize(e).flagged.any()


def test_one_cluster_on_split_graph_labels_every_node(two_cliques):
    labels = spectral_cluster(two_cliques.undirected_adjacency(), 1).label
    assert labels.tolist() == [0] * 10


@pytest.mark.parametrize("dense_max", [0, 10_000])
def test_lanczos_matches_dense(dense_max):
    lp = build_laplacian(random_symmetric(200, 0.05, 9))
    e = smallest_eigenvectors(lp, 6, dense_max=dense_max)
    full = la.eigvalsh(lp.L_sym.toarray())
    assert np.allclose(e.values, full[:6], atol=1e-8)
    assert np.all(np.diff(e.values) >= 0)
    res = lp.L_sym @ e.vectors - e.vectors * e.values
    assert np.all(np.linalg.norm(res, axis=0) <= 1e-8 * np.linalg.norm(e.vectors, axis=0))


def test_k_eig_must_leave_room():
    lp = build_laplacian(np.array([[0, 1], [1, 0]]))
    with pytest.raises(DegenerateClusteringError):
        smallest_eigenvectors(lp, 2)


# ── Row normalization ──

def test_row_normalize():
    e = row_normalize(embedding_of([[3, 4], [0, 0], [1, 1]]))
    assert np.allclose(e.vectors[0], [0.6, 0.8])
    assert e.vectors[1].tolist() == [0.0, 0.0]
    assert e.flagged.tolist() == [False, True, False]


def test_row_norms_are_unit():
    e = row_normalize(embedding_of(np.random.default_rng(2).normal(size=(50, 4))))
    assert np.allclose(np.linalg.norm(e.vectors, axis=1), 1.0, atol=1e-12)


# ── k-means ──

def test_kmeans_separated_groups():
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(0, 0.01, (20, 2)), rng.normal(5, 0.01, (20, 2))])
    labels = kmeans_pp(embedding_of(pts), 2, seed=0).label
    assert len(set(labels[:20])) == 1
    assert len(set(labels[20:])) == 1
    assert labels[0] != labels[20]


def test_kmeans_single_cluster():
    pts = np.random.default_rng(1).normal(size=(15, 3))
    assert kmeans_pp(embedding_of(pts), 1).label.tolist() == [0] * 15


def test_kmeans_too_many_clusters():
    with pytest.raises(DegenerateClusteringError):
        kmeans_pp(embedding_of([[1, 0], [1, 0], [0, 1]]), 3)


def test_kmeans_beats_random_assignments():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(60, 3))
    labels = kmeans_pp(embedding_of(pts), 4, seed=3).label
    found = kmeans_objective(pts, labels)
    for _ in range(100):
        assert found <= kmeans_objective(pts, rng.integers(0, 4, len(pts)))


def test_kmeans_is_deterministic_per_seed():
    pts = np.random.default_rng(4).normal(size=(80, 3))
    a = kmeans_pp(embedding_of(pts), 5, seed=7).label
    b = kmeans_pp(embedding_of(pts), 5, seed=7, workers=3).label
    assert np.array_equal(a, b)


def test_flagged_rows_stay_unlabeled():
    e = row_normalize(embedding_of([[1, 0], [0, 0], [0, 1], [1, 0.1]]))
    labels = kmeans_pp(e, 2).label
    assert labels[1] == UNLABELED
    assert labels[0] == labels[3] != labels[2]


# ── Pipeline ──

def test_two_cliques_split(two_cliques):
    labels = spectral_cluster(two_cliques.undirected_adjacency(), 2).label
    assert len(set(labels[:5])) == 1
    assert len(set(labels[5:])) == 1
    assert labels[0] != labels[5]


def test_twins_share_a_label():
    # nodes 0 and 1 have identical neighborhoods
    g = graph_from_pairs(clique_pairs(range(2, 7), directed_both=False)
                         + [(0, 2), (0, 3), (1, 2), (1, 3), (7, 8), (8, 9), (9, 7), (7, 4)])
    labels = spectral_cluster(g.undirected_adjacency(), 3).label
    assert labels[0] == labels[1]


def test_zero_degree_nodes_unlabeled():
    W = np.zeros((6, 6))
    W[0, 1] = W[1, 0] = W[2, 3] = W[3, 2] = 1
    labels = spectral_cluster(W, 2).label
    assert labels[4] == labels[5] == UNLABELED
    assert Labeling(labels).n_clusters == 2


def test_scaled_weights_give_same_partition(two_cliques):
    W = two_cliques.undirected_adjacency()
    assert np.array_equal(spectral_cluster(W, 2).label, spectral_cluster(4 * W, 2).label)


def test_labeling_helpers():
    lab = Labeling(np.array([UNLABELED, 2, 0, UNLABELED]))
    assert lab.next_label == 3
    assert lab.unlabeled.tolist() == [0, 3]
    assert lab.n_clusters == 2
    assert Labeling.empty(3).next_label == 0
