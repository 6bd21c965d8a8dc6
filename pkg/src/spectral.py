"""
CoreMotif — Spectral clustering over a symmetric weighted adjacency.
Normalized Laplacian -> smallest eigenvectors -> row normalization -> k-means++.

Works the same for the edge adjacency (conventional baseline) and motif matrices.
Nodes with zero weighted degree are left UNLABELED for the recovery pass.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from concurrency import map_blocks, row_blocks
from config import (
    DENSE_EIG_MAX, EIG_ACCEPT, EIG_RESTARTS, EIG_TOL, KMEANS_MAX_ITER, effective_workers,
)
from errors import ConvergenceError, DegenerateClusteringError, NoEmbeddableNodesError

logger = logging.getLogger("coremotif.spectral")

UNLABELED = -1


@dataclass(frozen=True, eq=False)
class Labeling:
    """Per-node cluster id; UNLABELED marks nodes with no assignment yet."""
    label: np.ndarray

    @property
    def n(self) -> int:
        return len(self.label)

    @property
    def next_label(self) -> int:
        return int(self.label.max()) + 1 if len(self.label) and self.label.max() >= 0 else 0

    @property
    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(self.label == UNLABELED)

    @property
    def n_clusters(self) -> int:
        return len(np.unique(self.label[self.label != UNLABELED]))

    @classmethod
    def empty(cls, n: int) -> "Labeling":
        return cls(np.full(n, UNLABELED, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class LaplacianPair:
    L_sym: sp.csr_matrix
    degree: np.ndarray  # weighted degree of every node of W
    nodes: np.ndarray   # W indices with positive degree, in L_sym row order

    @property
    def excluded(self) -> np.ndarray:
        return np.flatnonzero(self.degree <= 0)


@dataclass(frozen=True, eq=False)
class Embedding:
    vectors: np.ndarray   # rows = embedded nodes, columns = eigenvectors
    values: np.ndarray    # eigenvalues, nondecreasing
    row_of: np.ndarray    # row -> node of W
    n_nodes: int
    flagged: Optional[np.ndarray] = None  # rows that were all zero before normalization


def _as_csr(W) -> sp.csr_matrix:
    mat = getattr(W, "W", W)  # MotifMatrix or plain matrix
    if not sp.issparse(mat):
        mat = sp.csr_matrix(np.asarray(mat))
    return sp.csr_matrix(mat, dtype=np.float64)


# ── Laplacian ──

def build_laplacian(W) -> LaplacianPair:
    """L_sym = I - D^-1/2 W D^-1/2 over the nodes with positive weighted degree."""
    mat = _as_csr(W)
    degree = np.asarray(mat.sum(axis=1)).ravel()
    nodes = np.flatnonzero(degree > 0)
    if len(nodes) == 0:
        raise NoEmbeddableNodesError("no embeddable nodes: every weighted degree is zero")

    sub = mat[nodes][:, nodes]
    d_inv_sqrt = sp.diags(1.0 / np.sqrt(degree[nodes]))
    norm_adj = (d_inv_sqrt @ sub @ d_inv_sqrt).tocsr()
    L = (sp.identity(len(nodes), format="csr") - norm_adj).tocsr()
    L = ((L + L.T) * 0.5).tocsr()
    L.sort_indices()
    if len(nodes) < mat.shape[0]:
        logger.debug("Laplacian: %d of %d nodes have zero degree and are excluded",
                     mat.shape[0] - len(nodes), mat.shape[0])
    return LaplacianPair(L_sym=L, degree=degree, nodes=nodes)


# ── Eigenvectors ──

def _residuals(L: sp.csr_matrix, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    res = L @ vectors - vectors * values
    return np.linalg.norm(res, axis=0) / np.maximum(np.linalg.norm(vectors, axis=0), 1e-300)


def _pin_null_vector(lp: LaplacianPair, values: np.ndarray, vectors: np.ndarray):
    """Column 0 becomes sqrt(d)/||sqrt(d)||; the rest are re-fitted in its complement.

    With several components the null space is repeated and a solver may return
    a basis vector that vanishes on a whole component. sqrt(d) has no zero
    entries, so no embedding row is ever all-zero.
    """
    null = np.sqrt(lp.degree[lp.nodes])
    null /= np.linalg.norm(null)
    k_eig = vectors.shape[1]
    if k_eig == 1:
        return np.zeros(1), null[:, None]
    rest = vectors - np.outer(null, null @ vectors)
    basis, _, _ = np.linalg.svd(rest, full_matrices=False)
    basis = basis[:, :k_eig - 1]
    ritz_values, rotation = np.linalg.eigh(basis.T @ (lp.L_sym @ basis))
    return (np.concatenate([[0.0], ritz_values]),
            np.column_stack([null, basis @ rotation]))


def smallest_eigenvectors(lp: LaplacianPair, k_eig: int, dense_max: int = None) -> Embedding:
    """Eigenpairs for the k_eig smallest eigenvalues of L_sym.

    Large problems run Lanczos (ARPACK) on 2I - L_sym, which is positive
    semidefinite and has the wanted pairs at the top of its spectrum.
    """
    size = lp.L_sym.shape[0]
    if not 1 <= k_eig < size:
        raise DegenerateClusteringError(
            "need 1 <= k_eig < embeddable nodes, got k_eig={} with {} nodes".format(k_eig, size))
    dense_max = DENSE_EIG_MAX if dense_max is None else dense_max

    if size <= dense_max:
        values, vectors = la.eigh(lp.L_sym.toarray(), subset_by_index=[0, k_eig - 1])
    else:
        shifted = (2.0 * sp.identity(size, format="csr") - lp.L_sym).tocsr()
        v0 = np.random.default_rng(0).uniform(-1.0, 1.0, size)
        ncv = min(size, max(4 * k_eig + 1, 40))
        try:
            mu, vectors = spla.eigsh(shifted, k=k_eig, which="LA", tol=EIG_TOL,
                                     maxiter=EIG_RESTARTS * k_eig * ncv, ncv=ncv, v0=v0)
        except spla.ArpackNoConvergence as exc:
            residual = float("inf")
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                residual = float(_residuals(lp.L_sym, 2.0 - exc.eigenvalues, exc.eigenvectors).max())
            raise ConvergenceError(residual)
        values = 2.0 - mu

    order = np.argsort(values, kind="stable")
    values, vectors = _pin_null_vector(lp, values[order], vectors[:, order])

    residual = _residuals(lp.L_sym, values, vectors)
    worst = float(residual.max())
    logger.debug("Eigenpairs: k=%d size=%d worst residual %.3e", k_eig, size, worst)
    if worst > EIG_ACCEPT:
        raise ConvergenceError(worst)
    return Embedding(vectors=vectors, values=values, row_of=lp.nodes, n_nodes=len(lp.degree))


def row_normalize(e: Embedding) -> Embedding:
    """Scale every row to unit length; all-zero rows are flagged and left alone."""
    norms = np.linalg.norm(e.vectors, axis=1)
    flagged = norms == 0.0
    scale = np.where(flagged, 1.0, norms)
    if flagged.any():
        logger.warning("%d embedding rows are identically zero and stay unlabeled", int(flagged.sum()))
    return replace(e, vectors=e.vectors / scale[:, None], flagged=flagged)


# ── k-means++ ──

def _sq_distances(points: np.ndarray, centers: np.ndarray, workers: int) -> np.ndarray:
    def block(start, stop):
        diff = points[start:stop, None, :] - centers[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)

    parts = map_blocks(block, row_blocks(len(points), effective_workers(workers), min_block=4096), workers)
    return np.vstack(parts)


def _seed_centers(points: np.ndarray, n_clusters: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((n_clusters, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, n_clusters):
        probs = closest / closest.sum()
        centers[c] = points[rng.choice(n, p=probs)]
        closest = np.minimum(closest, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def kmeans_pp(e: Embedding, n_clusters: int, seed: int = 0, max_iter: int = None,
              workers: int = None) -> Labeling:
    """k-means++ seeding then Lloyd iterations until no assignment changes."""
    max_iter = max(1, KMEANS_MAX_ITER if max_iter is None else max_iter)
    usable = np.ones(len(e.row_of), dtype=bool) if e.flagged is None else ~e.flagged
    points = e.vectors[usable]
    nodes = e.row_of[usable]
    if n_clusters < 1:
        raise DegenerateClusteringError("n_clusters must be positive")
    distinct = len(np.unique(points, axis=0)) if len(points) else 0
    if n_clusters > distinct:
        raise DegenerateClusteringError(
            "n_clusters={} exceeds the {} distinct embedded rows".format(n_clusters, distinct))

    rng = np.random.default_rng(seed)
    centers = _seed_centers(points, n_clusters, rng)
    assign = np.full(len(points), -1, dtype=np.int64)
    for iteration in range(max_iter):
        dist = _sq_distances(points, centers, workers)
        new_assign = np.argmin(dist, axis=1)
        counts = np.bincount(new_assign, minlength=n_clusters)
        for c in np.flatnonzero(counts == 0):
            own = dist[np.arange(len(points)), new_assign]
            far = int(np.argmax(own))
            logger.warning("k-means cluster %d emptied at iteration %d; re-seeding with row %d",
                           int(c), iteration, far)
            new_assign[far] = c
            centers[c] = points[far]
            counts = np.bincount(new_assign, minlength=n_clusters)
            dist[far] = np.inf
            dist[far, c] = 0.0
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(n_clusters):
            centers[c] = points[assign == c].mean(axis=0)
    logger.debug("k-means: %d clusters, %d iterations", n_clusters, iteration + 1)

    labeling = Labeling.empty(e.n_nodes)
    labeling.label[nodes] = assign
    return labeling


def kmeans_objective(points: np.ndarray, labels: np.ndarray) -> float:
    """Sum of squared distances to cluster centroids."""
    total = 0.0
    for c in np.unique(labels):
        members = points[labels == c]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


# ── Pipeline ──

def spectral_cluster(W, n_clusters: int, seed: int = 0, workers: int = None,
                     dense_max: int = None) -> Labeling:
    """build_laplacian -> smallest_eigenvectors -> row_normalize -> kmeans_pp."""
    lp = build_laplacian(W)
    embedding = row_normalize(smallest_eigenvectors(lp, n_clusters, dense_max=dense_max))
    labeling = kmeans_pp(embedding, n_clusters, seed=seed, workers=workers)
    logger.info("Spectral clustering: %d nodes embedded, %d clusters, %d unlabeled",
                len(lp.nodes), labeling.n_clusters, len(labeling.unlabeled))
    return labeling
