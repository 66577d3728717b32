"""2D reducers for box abstractions: first-two-coordinates, PCA and ISOMAP.

Every reducer projects one vector at a time through :meth:`project`; box
fitting goes through the same method so a training vector always lands on
exactly the coordinates it had during fitting.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ..errors import ParameterError


def _fix_signs(vectors):
    """Flip each row so its largest-magnitude component is positive."""
    out = np.array(vectors, dtype=np.float64)
    for i, v in enumerate(out):
        if v.any() and v[np.argmax(np.abs(v))] < 0:
            out[i] = -v
    return out


class SimpleReducer:
    kind = "simple"

    def __init__(self, dim=None):
        self.dim = dim

    def project(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] >= 2:
            return np.array([v[0], v[1]])
        return np.array([v[0], 0.0])

    def state(self):
        return {}, []

    @classmethod
    def from_state(cls, header, arrays, prefix=""):
        return cls()


class PCAReducer:
    kind = "pca"

    def __init__(self, mean, axes, explained_variance):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.axes = np.asarray(axes, dtype=np.float64)
        self.explained_variance = np.asarray(explained_variance, dtype=np.float64)

    def project(self, v):
        return self.axes @ (np.asarray(v, dtype=np.float64) - self.mean)

    def state(self, prefix=""):
        return {}, [(prefix + "mean", self.mean), (prefix + "axes", self.axes), (prefix + "var", self.explained_variance)]

    @classmethod
    def from_state(cls, header, arrays, prefix=""):
        return cls(arrays[prefix + "mean"], arrays[prefix + "axes"], arrays[prefix + "var"])


def pca2(train_vectors, rel_tol=1e-12) -> PCAReducer:
    """Top-2 principal axes of the sample covariance."""
    x = np.asarray(train_vectors, dtype=np.float64)
    if x.ndim != 2 or len(x) < 2 or x.shape[1] < 2:
        raise ParameterError("PCA needs at least two vectors of dimension >= 2")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / (len(x) - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:2]
    evals = np.clip(evals[order], 0.0, None)
    axes = _fix_signs(evecs[:, order].T)
    if evals[0] <= 0 or evals[1] <= rel_tol * evals[0]:
        warnings.warn("covariance is rank deficient; second PCA axis set to zero", UserWarning)
        axes[1] = 0.0
        evals[1] = 0.0
        if evals[0] <= 0:
            axes[0] = 0.0
    return PCAReducer(mean, axes, evals)


def project(reducer, v):
    return reducer.project(v)


class IsomapReducer:
    """ISOMAP embedding of the training set with a nearest-neighbour out-of-sample rule.

    A new vector maps to the embedding of its nearest training vector plus a
    local linear correction fitted on that training vector's graph neighbours.
    """

    kind = "isomap"

    def __init__(self, train, embedding, jacobians, n_neighbors):
        self.train = np.asarray(train, dtype=np.float64)
        self.embedding = np.asarray(embedding, dtype=np.float64)
        self.jacobians = np.asarray(jacobians, dtype=np.float64)
        self.n_neighbors = int(n_neighbors)

    def project(self, v):
        v = np.asarray(v, dtype=np.float64)
        diff = self.train - v
        nearest = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
        offset = v - self.train[nearest]
        if not offset.any():
            return self.embedding[nearest].copy()
        return self.embedding[nearest] + self.jacobians[nearest] @ offset

    def state(self, prefix=""):
        return {prefix + "n_neighbors": self.n_neighbors}, [
            (prefix + "train", self.train),
            (prefix + "embedding", self.embedding),
            (prefix + "jacobians", self.jacobians),
        ]

    @classmethod
    def from_state(cls, header, arrays, prefix=""):
        return cls(
            arrays[prefix + "train"], arrays[prefix + "embedding"], arrays[prefix + "jacobians"], header[prefix + "n_neighbors"]
        )


def _knn_graph(x, n_neighbors):
    n = len(x)
    sq = np.einsum("ij,ij->i", x, x)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * x @ x.T, 0.0)
    np.fill_diagonal(d2, 0.0)
    dist = np.sqrt(d2)
    order = np.argsort(dist, axis=1, kind="stable")
    neighbors = np.empty((n, n_neighbors), dtype=np.int64)
    rows, cols, vals = [], [], []
    for i in range(n):
        nb = [j for j in order[i] if j != i][:n_neighbors]
        neighbors[i] = nb
        rows.extend([i] * len(nb))
        cols.extend(nb)
        vals.extend(dist[i, nb])
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    # zero-length edges would vanish from a sparse matrix
    graph.data = np.maximum(graph.data, 1e-12)
    return graph, neighbors


def classical_mds(dist, dims=2):
    """Embed a distance matrix by double centering and the top eigenpairs."""
    n = len(dist)
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (dist**2) @ j
    evals, evecs = np.linalg.eigh((b + b.T) / 2.0)
    order = np.argsort(evals)[::-1][:dims]
    lam = np.clip(evals[order], 0.0, None)
    vecs = _fix_signs(evecs[:, order].T).T
    emb = vecs * np.sqrt(lam)
    if emb.shape[1] < dims:
        emb = np.hstack([emb, np.zeros((n, dims - emb.shape[1]))])
    return emb


def isomap2(train_vectors, n_neighbors: int = 10) -> IsomapReducer:
    x = np.asarray(train_vectors, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ParameterError("ISOMAP needs at least two vectors")
    k = min(int(n_neighbors), n - 1)
    if k < 1:
        raise ParameterError("n_neighbors must be >= 1")
    graph, neighbors = _knn_graph(x, k)
    n_comp, comp = connected_components(graph, directed=False)
    keep = np.arange(n)
    if n_comp > 1:
        largest = np.bincount(comp).argmax()
        keep = np.flatnonzero(comp == largest)
        warnings.warn(
            f"k-NN graph has {n_comp} components; embedding the largest ({len(keep)} of {n} points)", UserWarning
        )
        if len(keep) < 2:
            raise ParameterError("largest k-NN component has fewer than two points")
        x = x[keep]
        graph, neighbors = _knn_graph(x, min(k, len(keep) - 1))
    geo = shortest_path(graph, method="D", directed=False)
    emb = classical_mds(geo, 2)
    jac = np.zeros((len(x), 2, x.shape[1]))
    for i in range(len(x)):
        dx = x[neighbors[i]] - x[i]
        dy = emb[neighbors[i]] - emb[i]
        sol, *_ = np.linalg.lstsq(dx, dy, rcond=None)
        jac[i] = sol.T
    return IsomapReducer(x, emb, jac, k)


REDUCERS = {"simple": SimpleReducer, "pca": PCAReducer, "isomap": IsomapReducer}


def fit_reducer(kind: str, vectors, n_neighbors: int = 10):
    if kind == "simple":
        return SimpleReducer(np.asarray(vectors).shape[1])
    if kind == "pca":
        return pca2(vectors)
    if kind == "isomap":
        return isomap2(vectors, n_neighbors)
    raise ParameterError(f"unknown reducer {kind!r} (expected simple, pca or isomap)")
