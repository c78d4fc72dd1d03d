"""Sparse weighted graphs, k-NN construction, and the discrete operators shared by all solvers.

Label functions are plain numpy arrays of shape (n, k): row i holds the k
class scores of node i.  Every operator also accepts a 1-D array as the
k = 1 case and returns a matching shape.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .errors import FormatError, InvalidInputError, InvalidParameterError

__all__ = [
    "Graph",
    "LabelSet",
    "build_knn_graph",
    "graph_from_edges",
    "laplacian_apply",
    "weighted_mean",
    "variance",
    "objective_value",
    "read_edgelist",
    "write_edgelist",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected weighted graph in CSR form.

    ``adjacency`` has sorted indices, an exactly symmetric value pattern and
    a zero diagonal.  ``degrees[i]`` is the row sum of ``adjacency`` and
    ``degree_weights`` are the degrees normalized to sum to one.  Instances
    are safe to share between concurrent solver runs; treat every field as
    read-only.
    """

    n: int
    adjacency: sparse.csr_matrix
    degrees: np.ndarray
    degree_weights: np.ndarray

    @property
    def edge_count(self) -> int:
        return self.adjacency.nnz // 2

    def laplacian_matrix(self) -> sparse.csr_matrix:
        """Combinatorial Laplacian D - W as CSR."""
        return (sparse.diags(self.degrees) - self.adjacency).tocsr()

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        """Validate a symmetric nonnegative weight matrix and wrap it.

        Raises InvalidInputError on asymmetry, negative or non-finite
        weights, self-loops, or isolated nodes.
        """
        W = sparse.csr_matrix(matrix, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise InvalidInputError(f"adjacency must be square, got shape {W.shape}")
        if W.data.size and not np.all(np.isfinite(W.data)):
            raise InvalidInputError("adjacency contains non-finite weights")
        if W.data.size and W.data.min() < 0:
            raise InvalidInputError("edge weights must be nonnegative")
        if np.any(W.diagonal() != 0):
            raise InvalidInputError("self-loops are not allowed (nonzero diagonal)")
        if (W != W.T).nnz:
            raise InvalidInputError("adjacency must be symmetric")
        return _finalize(W.shape[0], W)


def _finalize(n: int, adjacency) -> Graph:
    adjacency = adjacency.tocsr()
    adjacency.eliminate_zeros()
    adjacency.sort_indices()
    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    if np.any(degrees == 0):
        isolated = np.flatnonzero(degrees == 0)
        raise InvalidInputError(
            f"graph has {isolated.size} isolated node(s), e.g. node {isolated[0]}; "
            "degree weights vanish there and propagation is ill-posed"
        )
    return Graph(
        n=n,
        adjacency=adjacency,
        degrees=degrees,
        degree_weights=degrees / degrees.sum(),
    )


@dataclass(frozen=True)
class LabelSet:
    """Labeled nodes with one-hot targets.

    ``entries`` are (node index, class index) pairs; node indices must be
    unique and class indices below ``k``.
    """

    k: int
    entries: tuple

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameterError("class count k must be >= 1")
        pairs = tuple((int(i), int(c)) for i, c in self.entries)
        if not pairs:
            raise InvalidInputError("at least one labeled node is required")
        nodes = [i for i, _ in pairs]
        if len(set(nodes)) != len(nodes):
            raise InvalidInputError("labeled node indices must be unique")
        if min(nodes) < 0:
            raise InvalidInputError("node indices must be nonnegative")
        if any(c < 0 or c >= self.k for _, c in pairs):
            raise InvalidInputError(f"class indices must lie in [0, {self.k})")
        object.__setattr__(self, "entries", pairs)

    @property
    def l(self) -> int:
        return len(self.entries)

    @property
    def nodes(self) -> np.ndarray:
        return np.array([i for i, _ in self.entries], dtype=np.int64)

    @property
    def classes(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=np.int64)

    def one_hot(self, node: int) -> np.ndarray:
        """Unit target vector e_c for a labeled node."""
        for i, c in self.entries:
            if i == node:
                e = np.zeros(self.k)
                e[c] = 1.0
                return e
        raise InvalidInputError(f"node {node} is not labeled")

    def onehot_matrix(self) -> np.ndarray:
        """(l, k) matrix with one row per entry, aligned with ``nodes``."""
        y = np.zeros((len(self.entries), self.k))
        y[np.arange(len(self.entries)), self.classes] = 1.0
        return y


def graph_from_edges(n, src, dst, weight=None) -> Graph:
    """Build a Graph from undirected edge arrays.

    Each edge may be listed in either orientation; exact duplicates are
    merged by taking the maximum weight.  Self-loops are rejected.
    """
    src = np.asarray(src, dtype=np.int64).ravel()
    dst = np.asarray(dst, dtype=np.int64).ravel()
    if weight is None:
        weight = np.ones(src.size)
    weight = np.asarray(weight, dtype=np.float64).ravel()
    if not (src.size == dst.size == weight.size):
        raise InvalidInputError("src, dst and weight arrays must have equal length")
    if n < 1:
        raise InvalidParameterError("node count must be >= 1")
    if src.size == 0:
        raise InvalidInputError("at least one edge is required")
    if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
        raise InvalidInputError(f"edge endpoints must lie in [0, {n})")
    if not np.all(np.isfinite(weight)):
        raise InvalidInputError("edge weights must be finite")
    if weight.min() < 0:
        raise InvalidInputError("edge weights must be nonnegative")
    if np.any(src == dst):
        raise InvalidInputError("self-loops are not allowed")

    keep = weight > 0
    src, dst, weight = src[keep], dst[keep], weight[keep]
    if src.size == 0:
        raise InvalidInputError("all edges have zero weight")

    a = np.minimum(src, dst)
    b = np.maximum(src, dst)
    keys = a * np.int64(n) + b
    order = np.argsort(keys, kind="stable")
    keys, a, b, weight = keys[order], a[order], b[order], weight[order]
    first = np.flatnonzero(np.r_[True, np.diff(keys) != 0])
    merged = np.maximum.reduceat(weight, first)
    ua, ub = a[first], b[first]

    rows = np.concatenate([ua, ub])
    cols = np.concatenate([ub, ua])
    vals = np.concatenate([merged, merged])
    W = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
    return _finalize(n, W)


def build_knn_graph(features, k_neighbors) -> Graph:
    """Build a k-nearest-neighbor similarity graph with self-tuning Gaussian weights.

    Each node connects to its ``k_neighbors`` Euclidean nearest neighbors
    with weight exp(-|x_i - x_j|^2 / (sigma_i sigma_j)), where sigma_i is
    the distance from x_i to its k_neighbors-th nearest neighbor.  Nodes
    with sigma_i = 0 (exact duplicates) fall back to the smallest positive
    sigma over all nodes, or 1 if every sigma vanishes.  The result is
    symmetrized with max(w_ij, w_ji), so every directed k-NN edge survives.

    Parameters
    ----------
    features : (n, d) array
        One row per point; must be finite.
    k_neighbors : int
        Neighborhood size, 1 <= k_neighbors < n.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidInputError("features must be a 2-D matrix")
    n = X.shape[0]
    if n < 2:
        raise InvalidParameterError("need at least 2 points to build a graph")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("features contain NaN or Inf")
    k = int(k_neighbors)
    if k < 1 or k >= n:
        raise InvalidParameterError(
            f"k_neighbors must satisfy 1 <= k < n, got k={k_neighbors} with n={n}"
        )

    dist, idx = cKDTree(X).query(X, k=k + 1)
    rows = np.arange(n)
    # drop the self match per row; with duplicate points it need not come first
    self_pos = np.argmax(idx == rows[:, None], axis=1)
    found = idx[rows, self_pos] == rows
    self_pos = np.where(found, self_pos, k)
    keep = np.ones((n, k + 1), dtype=bool)
    keep[rows, self_pos] = False
    nbr = idx[keep].reshape(n, k)
    nbr_dist = dist[keep].reshape(n, k)

    sigma = nbr_dist[:, -1].copy()
    if np.any(sigma == 0):
        positive = sigma[sigma > 0]
        sigma[sigma == 0] = positive.min() if positive.size else 1.0

    w = np.exp(-(nbr_dist**2) / (sigma[:, None] * sigma[nbr]))
    W = sparse.coo_matrix(
        (w.ravel(), (np.repeat(rows, k), nbr.ravel())), shape=(n, n)
    ).tocsr()
    W = W.maximum(W.T)
    return _finalize(n, W)


def _label_matrix(g: Graph, u):
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
        was_1d = True
    elif arr.ndim == 2:
        was_1d = False
    else:
        raise InvalidInputError("label function must be 1-D or 2-D")
    if arr.shape[0] != g.n:
        raise InvalidInputError(
            f"label function has {arr.shape[0]} rows for a graph with {g.n} nodes"
        )
    return arr, was_1d


def laplacian_apply(g: Graph, u):
    """Apply the combinatorial Laplacian: row i of the result is sum_j w_ij (u_i - u_j)."""
    mat, was_1d = _label_matrix(g, u)
    out = g.degrees[:, None] * mat - g.adjacency @ mat
    return out[:, 0] if was_1d else out


def weighted_mean(g: Graph, u):
    """Degree-weighted average sum_i q_i u_i; a scalar for 1-D input, else a k-vector."""
    mat, was_1d = _label_matrix(g, u)
    out = g.degree_weights @ mat
    return float(out[0]) if was_1d else out


def variance(g: Graph, u) -> float:
    """Degree-weighted spread sum_i q_i |u_i - mean|^2 around the weighted mean."""
    mat, _ = _label_matrix(g, u)
    dev = mat - g.degree_weights @ mat
    return float(g.degree_weights @ np.einsum("ij,ij->i", dev, dev))


def objective_value(g: Graph, u, lam: float) -> float:
    """Smoothness-minus-variance objective value.

    Computes the sum over ordered pairs (i, j) of w_ij * 0.5 * |u_i - u_j|^2
    minus ``lam`` times ``variance(g, u)``.  The pair sum equals
    trace(u^T L u), which is how it is evaluated.
    """
    if lam < 0:
        raise InvalidParameterError("lam must be >= 0")
    mat, _ = _label_matrix(g, u)
    smooth = float(np.sum(mat * (g.degrees[:, None] * mat - g.adjacency @ mat)))
    return smooth - float(lam) * variance(g, mat)


def read_edgelist(path, n=None) -> Graph:
    """Read an undirected edge-list text file.

    One edge per line as ``src dst weight`` with the weight optional
    (default 1.0), 0-indexed, each edge listed once in either orientation;
    lines starting with ``#`` and blank lines are ignored.  Self-loops are
    dropped with a warning and duplicate edges merge by maximum weight.
    When ``n`` is given, any endpoint >= n is a FormatError; otherwise n is
    inferred as the largest endpoint + 1.
    """
    src, dst, wgt = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise FormatError(
                    f"{path}: line {lineno}: expected 'src dst [weight]', found {len(parts)} fields"
                )
            try:
                i = int(parts[0])
                j = int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric field") from None
            if i < 0 or j < 0:
                raise FormatError(f"{path}: line {lineno}: negative node index")
            if not np.isfinite(w) or w < 0:
                raise FormatError(f"{path}: line {lineno}: weight must be finite and nonnegative")
            if n is not None and (i >= n or j >= n):
                raise FormatError(
                    f"{path}: line {lineno}: node index {max(i, j)} exceeds node count {n}"
                )
            if i == j:
                warnings.warn(f"{path}: line {lineno}: self-loop on node {i} dropped")
                continue
            src.append(i)
            dst.append(j)
            wgt.append(w)
    if not src:
        raise FormatError(f"{path}: no edges found")
    count = n if n is not None else max(max(src), max(dst)) + 1
    return graph_from_edges(count, src, dst, wgt)


def write_edgelist(g: Graph, path) -> None:
    """Write the graph in the edge-list format read by :func:`read_edgelist`.

    Each undirected edge appears once as ``i j weight`` with i < j, sorted,
    and weights printed with full float64 precision.
    """
    coo = sparse.triu(g.adjacency, k=1).tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, w in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{i} {j} {w:.17g}\n")
