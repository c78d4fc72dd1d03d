"""The four label-propagation solvers and their dense reference counterpart.

All solvers take a Graph, a LabelSet and a SolverConfig and return a
SolveResult whose ``u`` is the (n, k) label-score matrix.

``laplace``    clamps labeled nodes to their one-hot targets and makes u
               harmonic (Lu = 0) at every unlabeled node.
``poisson``    replaces clamping with point sources: Lu_i = y_i - ybar at
               labeled nodes and 0 elsewhere, where ybar is the mean of
               the labeled one-hot vectors, under the degree-weighted
               zero-mean constraint sum_i q_i u_i = 0.
``v_laplace``  keeps the clamping but changes the unlabeled stationarity
               to Lu_i = lam * q_i * (u_i - ubar), with ubar the degree
               weighted mean of u over all nodes.  Rewarding spread this
               way counteracts the near-constant collapse of clamped
               propagation at very low label rates.
``v_poisson``  adds the same variance term to the poisson system, giving
               (L - lam * diag(q)) u = source under the zero-mean
               constraint (the constraint makes ubar vanish).

The variance term is maximized, so both v_* systems lose positive
definiteness once ``lam`` passes a graph-dependent stability bound; the
solvers estimate that bound, warn near it, and raise DivergenceError when
the iteration actually breaks down.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import (
    DivergenceError,
    IllPosedError,
    InvalidInputError,
    InvalidParameterError,
    OracleSizeError,
)
from .graph import Graph, LabelSet, laplacian_apply

__all__ = [
    "METHODS",
    "SolverConfig",
    "SolveResult",
    "solve",
    "laplace_solve",
    "poisson_solve",
    "v_laplace_solve",
    "v_poisson_solve",
    "dense_oracle_solve",
    "predict",
    "estimate_stability_limit",
]

METHODS = ("laplace", "poisson", "v_laplace", "v_poisson")

_ORACLE_MAX_NODES = 500
_DIVERGENCE_STREAK = 50
_OUTER_CAP = 500


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters: variance weight ``lam``, relative residual
    tolerance, iteration cap and method selector.

    ``variance_on_labeled`` only affects ``v_poisson``: when False the
    diagonal variance shift is applied at unlabeled nodes only.
    """

    lam: float = 0.1
    tol: float = 1e-8
    max_iter: int = 10000
    method: str = "laplace"
    variance_on_labeled: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidParameterError("lam must be >= 0")
        if self.tol <= 0:
            raise InvalidParameterError("tol must be > 0")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")
        if self.method not in METHODS:
            raise InvalidParameterError(
                f"unknown method {self.method!r}; choose one of {METHODS}"
            )


@dataclass(frozen=True)
class SolveResult:
    u: np.ndarray
    iterations: int
    final_residual: float
    converged: bool


def _check_labels(g: Graph, labels: LabelSet) -> None:
    if labels.nodes.max() >= g.n:
        raise InvalidInputError(
            f"labeled node {labels.nodes.max()} does not exist in a {g.n}-node graph"
        )


def _component_coverage(g: Graph, labels: LabelSet) -> None:
    ncomp, comp = csgraph.connected_components(g.adjacency, directed=False)
    covered = np.unique(comp[labels.nodes])
    if covered.size != ncomp:
        missing = ncomp - covered.size
        raise IllPosedError(
            f"{missing} connected component(s) contain no labeled node; "
            "propagation cannot reach them"
        )


def _require_connected(g: Graph, what: str) -> None:
    ncomp, _ = csgraph.connected_components(g.adjacency, directed=False)
    if ncomp != 1:
        raise IllPosedError(f"{what} requires a connected graph, found {ncomp} components")


def _pcg(matvec, b, diag, tol, max_iter, project=None, raise_divergence=False):
    """Jacobi-preconditioned conjugate gradients on the columns of ``b``.

    Returns ``(x, iterations, relative_residual, converged)`` with the
    residual measured in the Frobenius norm relative to ``|b|``.  When
    ``project`` is given it is applied to every preconditioned direction so
    the iterates stay inside the constraint subspace.  With
    ``raise_divergence`` the solver raises DivergenceError on negative
    curvature or on 50 consecutive residual increases; otherwise it returns
    its best iterate with ``converged=False``.
    """
    bnorm = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0, 0.0, True
    r = b.copy()
    z = r / diag[:, None]
    if project is not None:
        z = project(z)
    p = z.copy()
    rz = np.einsum("ij,ij->j", r, z)
    best_x = x.copy()
    best_rel = 1.0
    prev_rel = 1.0
    streak = 0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        Ap = matvec(p)
        pAp = np.einsum("ij,ij->j", p, Ap)
        scale = np.einsum("ij,ij->j", np.abs(p), np.abs(Ap))
        if np.any(pAp < -1e-10 * scale):
            if raise_divergence:
                raise DivergenceError(
                    "negative curvature encountered: the variance weight exceeds "
                    "the stability bound of this graph"
                )
            break
        alpha = np.divide(rz, pAp, out=np.zeros_like(rz), where=pAp > 0)
        x += alpha * p
        r -= alpha * Ap
        rel = float(np.linalg.norm(r)) / bnorm
        if rel < best_rel:
            best_rel = rel
            best_x = x.copy()
        if rel <= tol:
            return x, iterations, rel, True
        if rel > prev_rel:
            streak += 1
            if streak >= _DIVERGENCE_STREAK and raise_divergence:
                raise DivergenceError(
                    f"residual grew for {streak} consecutive iterations; the "
                    "variance weight is past the stability bound"
                )
        else:
            streak = 0
        prev_rel = rel
        z = r / diag[:, None]
        if project is not None:
            z = project(z)
        rz_new = np.einsum("ij,ij->j", r, z)
        beta = np.divide(rz_new, rz, out=np.zeros_like(rz), where=np.abs(rz) > 0)
        p = z + beta * p
        rz = rz_new
    return best_x, iterations, best_rel, False


def estimate_stability_limit(g: Graph) -> float:
    """Crude power-iteration estimate of the largest stable variance weight.

    Approximates lambda_2(L) / max_i q_i with 20 power steps for the top
    eigenvalue of L and 20 deflated shifted steps for lambda_2.  Intended
    only for the near-instability warning, not as a sharp bound.
    """
    L = g.laplacian_matrix()
    n = g.n
    v = np.cos(0.7 * np.arange(n) + 0.3)
    v /= np.linalg.norm(v)
    for _ in range(20):
        w = L @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
    lmax = float(v @ (L @ v))
    if lmax <= 0:
        return 0.0
    x = np.cos(1.3 * np.arange(n) + 0.9)
    x -= x.mean()
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0
    x /= nx
    for _ in range(20):
        w = lmax * x - L @ x
        w -= w.mean()
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        x = w / nw
    lam2 = max(float(x @ (L @ x)), 0.0)
    return lam2 / float(g.degree_weights.max())


def _warn_if_unstable(g: Graph, lam: float) -> None:
    limit = estimate_stability_limit(g)
    if lam >= 0.9 * limit:
        warnings.warn(
            f"variance weight lam={lam:g} is at or above 0.9x the estimated "
            f"stability bound {limit:.4g}; the solve may diverge",
            RuntimeWarning,
            stacklevel=3,
        )


def _clamped_setup(g: Graph, labels: LabelSet):
    il = labels.nodes
    y = labels.onehot_matrix()
    mask = np.ones(g.n, dtype=bool)
    mask[il] = False
    iu = np.flatnonzero(mask)
    u = np.zeros((g.n, labels.k))
    u[il] = y
    return il, iu, y, u


def laplace_solve(g: Graph, labels: LabelSet, cfg: SolverConfig = None) -> SolveResult:
    """Harmonic interpolation with labeled nodes clamped to their one-hot targets."""
    cfg = cfg or SolverConfig(method="laplace")
    _check_labels(g, labels)
    _component_coverage(g, labels)
    il, iu, y, u = _clamped_setup(g, labels)
    if iu.size == 0:
        return SolveResult(u=u, iterations=0, final_residual=0.0, converged=True)
    L = g.laplacian_matrix()
    A = L[iu][:, iu].tocsr()
    b = -(L[iu][:, il] @ y)
    x, iters, rel, conv = _pcg(lambda v: A @ v, b, A.diagonal(), cfg.tol, cfg.max_iter)
    u[iu] = x
    return SolveResult(u=u, iterations=iters, final_residual=rel, converged=conv)


def _poisson_family_solve(g: Graph, labels: LabelSet, cfg: SolverConfig, lam: float) -> SolveResult:
    _check_labels(g, labels)
    _require_connected(g, "poisson-type learning")
    il = labels.nodes
    y = labels.onehot_matrix()
    ybar = y.mean(axis=0)
    source = np.zeros((g.n, labels.k))
    source[il] = y - ybar
    if not source.any():
        warnings.warn(
            "poisson source vanished (single labeled node or a single represented "
            "class); returning the zero solution",
            RuntimeWarning,
            stacklevel=3,
        )
        return SolveResult(u=source, iterations=0, final_residual=0.0, converged=True)
    q = g.degree_weights
    qmask = q.copy()
    if not cfg.variance_on_labeled:
        qmask[il] = 0.0
    L = g.laplacian_matrix()
    if lam > 0:
        _warn_if_unstable(g, lam)
        A = (L - lam * sparse.diags(qmask)).tocsr()
    else:
        A = L
    diag = A.diagonal()
    if diag.min() <= 0:
        raise DivergenceError(
            f"variance weight lam={lam:g} drives the shifted diagonal nonpositive; "
            "it is past the stability bound"
        )

    def project(v):
        # keep iterates in the zero q-mean subspace
        return v - q @ v

    def matvec(v):
        Av = A @ v
        # remove the constraint-multiplier direction from the range side
        return Av - q[:, None] * Av.sum(axis=0)

    x, iters, rel, conv = _pcg(
        matvec, source, diag, cfg.tol, cfg.max_iter,
        project=project, raise_divergence=lam > 0,
    )
    return SolveResult(u=x, iterations=iters, final_residual=rel, converged=conv)


def poisson_solve(g: Graph, labels: LabelSet, cfg: SolverConfig = None) -> SolveResult:
    """Source-term propagation: Lu = y_i - ybar at labeled nodes, zero-mean constrained."""
    cfg = cfg or SolverConfig(method="poisson")
    return _poisson_family_solve(g, labels, cfg, lam=0.0)


def v_poisson_solve(g: Graph, labels: LabelSet, cfg: SolverConfig = None) -> SolveResult:
    """Poisson propagation with the variance term: (L - lam diag(q)) u = source.

    The zero-mean constraint sum_i q_i u_i = 0 is enforced throughout, so
    the weighted mean of the solution vanishes.  With
    ``cfg.variance_on_labeled=False`` the diagonal shift applies at
    unlabeled nodes only.
    """
    cfg = cfg or SolverConfig(method="v_poisson")
    return _poisson_family_solve(g, labels, cfg, lam=cfg.lam)


def v_laplace_solve(g: Graph, labels: LabelSet, cfg: SolverConfig = None) -> SolveResult:
    """Clamped propagation whose unlabeled stationarity is Lu_i = lam q_i (u_i - ubar).

    Solved with an outer fixed point on the weighted mean: each outer step
    re-solves the shifted clamped system at inner tolerance tol/10 and then
    refreshes ubar from the new iterate.  Converges when the ubar update
    and the full equation residual both drop below tol.
    """
    cfg = cfg or SolverConfig(method="v_laplace")
    lam = cfg.lam
    _check_labels(g, labels)
    _component_coverage(g, labels)
    il, iu, y, u = _clamped_setup(g, labels)
    if iu.size == 0:
        return SolveResult(u=u, iterations=0, final_residual=0.0, converged=True)
    if lam > 0:
        _warn_if_unstable(g, lam)
    L = g.laplacian_matrix()
    q = g.degree_weights
    qu = q[iu]
    A = (L[iu][:, iu] - lam * sparse.diags(qu)).tocsr()
    diag = A.diagonal()
    if diag.min() <= 0:
        raise DivergenceError(
            f"variance weight lam={lam:g} drives the shifted diagonal nonpositive; "
            "it is past the stability bound"
        )
    b0 = -(L[iu][:, il] @ y)
    scale = float(np.linalg.norm(b0))
    ubar = q @ u
    total_iters = 0
    rel = np.inf
    prev_delta = np.inf
    streak = 0
    converged = False
    for _ in range(_OUTER_CAP):
        rhs = b0 - lam * np.outer(qu, ubar)
        x, it, _, inner_conv = _pcg(
            lambda v: A @ v, rhs, diag, cfg.tol / 10, cfg.max_iter,
            raise_divergence=lam > 0,
        )
        total_iters += it
        u[iu] = x
        new_ubar = q @ u
        delta = float(np.linalg.norm(new_ubar - ubar))
        ubar = new_ubar
        resid = laplacian_apply(g, u)[iu] - lam * qu[:, None] * (u[iu] - ubar)
        rel = float(np.linalg.norm(resid)) / scale
        if delta <= cfg.tol and rel <= cfg.tol and inner_conv:
            converged = True
            break
        if delta > prev_delta:
            streak += 1
            if streak >= _DIVERGENCE_STREAK:
                raise DivergenceError(
                    f"weighted-mean fixed point diverged for {streak} consecutive "
                    f"outer steps; lam={lam:g} is past the stability bound"
                )
        else:
            streak = 0
        prev_delta = delta
    return SolveResult(u=u, iterations=total_iters, final_residual=rel, converged=converged)


_SOLVERS = {
    "laplace": laplace_solve,
    "poisson": poisson_solve,
    "v_laplace": v_laplace_solve,
    "v_poisson": v_poisson_solve,
}


def solve(g: Graph, labels: LabelSet, cfg: SolverConfig) -> SolveResult:
    """Run the solver selected by ``cfg.method``."""
    return _SOLVERS[cfg.method](g, labels, cfg)


def predict(u) -> np.ndarray:
    """Argmax class decoding; ties resolve to the lowest class index."""
    arr = np.asarray(u)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError("need a nonempty (n, k) score matrix")
    return np.argmax(arr, axis=1)


def dense_oracle_solve(g: Graph, labels: LabelSet, cfg: SolverConfig) -> SolveResult:
    """Dense-factorization reference solver for tests and verification.

    Solves the same linear systems as the iterative methods with
    numpy.linalg.solve: the clamped harmonic system for laplace, the
    mean-coupled clamped system (with the rank-one ubar coupling folded in
    exactly) for v_laplace, and a bordered system that enforces the
    zero-mean constraint for the poisson family.  Capped at 500 nodes.
    """
    if g.n > _ORACLE_MAX_NODES:
        raise OracleSizeError(
            f"dense oracle is capped at {_ORACLE_MAX_NODES} nodes, got {g.n}"
        )
    _check_labels(g, labels)
    method = cfg.method
    L = g.laplacian_matrix().toarray()
    q = g.degree_weights
    il = labels.nodes
    y = labels.onehot_matrix()

    if method in ("laplace", "v_laplace"):
        _component_coverage(g, labels)
        lam = cfg.lam if method == "v_laplace" else 0.0
        _, iu, _, u = _clamped_setup(g, labels)
        if iu.size == 0:
            return SolveResult(u=u, iterations=0, final_residual=0.0, converged=True)
        qu = q[iu]
        ql = q[il]
        M = L[np.ix_(iu, iu)] - lam * np.diag(qu) + lam * np.outer(qu, qu)
        rhs = -L[np.ix_(iu, il)] @ y - lam * np.outer(qu, ql @ y)
        try:
            u[iu] = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise IllPosedError(f"clamped system is singular: {exc}") from exc
        ubar = q @ u
        resid = laplacian_apply(g, u)[iu] - lam * qu[:, None] * (u[iu] - ubar)
        rel = float(np.linalg.norm(resid)) / float(np.linalg.norm(rhs))
        return SolveResult(u=u, iterations=0, final_residual=rel, converged=True)

    _require_connected(g, "poisson-type learning")
    lam = cfg.lam if method == "v_poisson" else 0.0
    ybar = y.mean(axis=0)
    source = np.zeros((g.n, labels.k))
    source[il] = y - ybar
    if not source.any():
        warnings.warn(
            "poisson source vanished (single labeled node or a single represented "
            "class); returning the zero solution",
            RuntimeWarning,
            stacklevel=2,
        )
        return SolveResult(u=source, iterations=0, final_residual=0.0, converged=True)
    qmask = q.copy()
    if not cfg.variance_on_labeled:
        qmask[il] = 0.0
    A = L - lam * np.diag(qmask)
    n = g.n
    bordered = np.zeros((n + 1, n + 1))
    bordered[:n, :n] = A
    bordered[:n, n] = q
    bordered[n, :n] = q
    rhs = np.vstack([source, np.zeros((1, labels.k))])
    try:
        full = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError as exc:
        raise IllPosedError(f"constrained system is singular: {exc}") from exc
    u = full[:n]
    raw = source - A @ u
    resid = raw - q[:, None] * raw.sum(axis=0)
    rel = float(np.linalg.norm(resid)) / float(np.linalg.norm(source))
    return SolveResult(u=u, iterations=0, final_residual=rel, converged=True)
