"""Reconstruction-weight and similarity learning.

Three learners share the kernel-trick objective
``||phi(x_i) - sum_j W_ij phi(x_j)||^2``:

* :func:`lle_weights_knn` - classical sum-to-one weights on a kNN support,
* :func:`nonneg_lle_weights_knn` - nonnegative weights on a kNN support,
* :func:`learn_sparse_similarity` - dense nonnegative, L1/L2 regularized
  similarity learned with a multiplicative update.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .exceptions import ShapeError
from .kernel import validate_kernel
from .validation import (
    check_array,
    check_choice,
    check_int_range,
    check_nonnegative,
    check_positive,
    check_square,
)

KINDS = ("knn_affine", "knn_nonneg", "sparse_learned")
DENOMINATOR_FLOOR = 1e-12


@dataclass
class SimilarityMatrix:
    """Learned ``(n, n)`` weights; row ``i`` reconstructs point ``i``.

    ``support[i]`` lists the neighbor indices of row ``i`` for the kNN kinds
    and is ``None`` for ``sparse_learned``.
    """

    values: np.ndarray
    kind: str
    support: list = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        check_choice(self.kind, "kind", KINDS)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def n(self):
        return self.values.shape[0]


@dataclass
class SolveReport:
    iterations: int
    objective_trace: list
    final_kkt_residual: float
    converged: bool

    def to_dict(self):
        return asdict(self)


def _kernel_distances(K):
    diag = np.diag(K)
    d2 = diag[:, None] + diag[None, :] - 2 * K
    return np.maximum(d2, 0.0)


def knn_support(K, k_nn):
    """Indices of the ``k_nn`` nearest neighbors of every point.

    Distances are kernel-induced, ``K_ii + K_jj - 2 K_ij``. The point itself
    is excluded and ties at equal distance go to the lower index.
    """
    K = check_square(K, name="K")
    n = K.shape[0]
    k_nn = check_int_range(k_nn, "k_nn", 1, n - 1)
    d2 = _kernel_distances(K)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    return [np.sort(order[i, :k_nn]) for i in range(n)]


def lle_weights_knn(K, k_nn, reg=1e-3):
    """Classical LLE weights computed through the kernel.

    Row ``i`` solves ``min ||phi_i - sum_j w_j phi_j||^2`` subject to
    ``sum_j w_j = 1`` over its kNN support. The local Gram
    ``C_jl = <phi_i - phi_j, phi_i - phi_l>`` gets ``reg * trace(C) / k_nn``
    added to its diagonal so duplicate or collinear neighbors never make
    the solve singular.
    """
    K = validate_kernel(K)
    support = knn_support(K, k_nn)
    n = K.shape[0]
    W = np.zeros((n, n))
    for i, nbrs in enumerate(support):
        C = local_gram(K, i, nbrs)
        trace = np.trace(C)
        C[np.diag_indices_from(C)] += reg * trace / len(nbrs) if trace > 0 else reg
        w = linalg.solve(C, np.ones(len(nbrs)), assume_a="pos")
        W[i, nbrs] = w / w.sum()
    return SimilarityMatrix(W, "knn_affine", support, {"k_nn": k_nn, "reg": reg})


def local_gram(K, i, nbrs):
    """``C_jl = K_ii - K_ij - K_il + K_jl`` for ``j, l`` in ``nbrs``."""
    k_i = K[i, nbrs]
    return K[i, i] - k_i[:, None] - k_i[None, :] + K[np.ix_(nbrs, nbrs)]


def nnls_gram(G, b, max_outer=None):
    """Minimize ``w @ G @ w - 2 b @ w`` over ``w >= 0`` for PSD ``G``.

    Lawson-Hanson active set working directly on the normal equations.
    Variables whose gradients tie for the largest descent are freed
    together and the passive subproblem is solved in the minimum-norm
    sense, so fully degenerate problems (identical neighbors) return the
    uniform minimizer.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    m = b.shape[0]
    scale = max(np.abs(G).max(initial=0.0), np.abs(b).max(initial=0.0))
    if scale == 0:
        return np.zeros(m)
    tie = 1e-12 * scale
    w = np.zeros(m)
    passive = np.zeros(m, dtype=bool)
    max_outer = 3 * m + 10 if max_outer is None else max_outer

    def solve_passive(P):
        z = np.zeros(m)
        idx = np.flatnonzero(P)
        z[idx] = linalg.lstsq(G[np.ix_(idx, idx)], b[idx], cond=1e-12)[0]
        return z

    for _ in range(max_outer):
        descent = b - G @ w
        free = ~passive & (descent > tie)
        if not free.any():
            break
        best = descent[free].max()
        passive |= free & (descent >= best - tie)
        for _ in range(m + 1):
            z = solve_passive(passive)
            bad = passive & (z <= 0)
            if not bad.any():
                w = z
                break
            step = np.min(w[bad] / (w[bad] - z[bad]))
            w = w + step * (z - w)
            passive &= w > 1e-14 * max(1.0, w.max())
            w[~passive] = 0.0
        else:
            w = np.where(passive, np.maximum(z, 0.0), 0.0)
    return w


def nnls_kkt_residual(G, b, w):
    """Largest violation of dual feasibility or complementarity for :func:`nnls_gram`."""
    g = 2 * (G @ w - b)
    return float(max(np.maximum(-g, 0.0).max(initial=0.0), np.abs(g * w).max(initial=0.0)))


def nonneg_lle_weights_knn(K, k_nn):
    """Nonnegative reconstruction weights on the kNN support.

    Row ``i`` minimizes ``K_ii - 2 k^T w + w^T K_NN w`` over ``w >= 0`` with
    ``N`` the neighbors of ``i`` and ``k = K[N, i]``.
    """
    K = validate_kernel(K)
    support = knn_support(K, k_nn)
    n = K.shape[0]
    W = np.zeros((n, n))
    for i, nbrs in enumerate(support):
        W[i, nbrs] = nnls_gram(K[np.ix_(nbrs, nbrs)], K[nbrs, i])
    return SimilarityMatrix(W, "knn_nonneg", support, {"k_nn": k_nn})


def objective_sparse(K, S, alpha, beta):
    """``Tr(K - 2KS + S^T K S) + alpha Tr(S^T S) + beta sum(S)`` for ``S >= 0``."""
    K = check_square(K, name="K")
    S = check_array(np.asarray(S), name="S")
    if S.shape != K.shape:
        raise ShapeError(f"S has shape {S.shape}, expected {K.shape}")
    return _objective(K, S, K @ S, alpha, beta)


def _objective(K, S, KS, alpha, beta, trace_K=None):
    # Tr(KS) = <K^T, S>, Tr(S^T K S) = <S, KS>
    trace_K = np.trace(K) if trace_K is None else trace_K
    return float(
        trace_K - 2 * np.vdot(K.T, S) + np.vdot(S, KS) + alpha * np.vdot(S, S) + beta * S.sum()
    )


def kkt_residual(K, S, alpha, beta):
    """Normalized complementarity residual of the nonnegativity constraint.

    ``max_ij |(-2K + 2KS + 2 alpha S + beta)_ij S_ij| / max(1, max|K|)``.
    """
    K = check_square(K, name="K")
    S = check_array(np.asarray(S), name="S")
    if S.shape != K.shape:
        raise ShapeError(f"S has shape {S.shape}, expected {K.shape}")
    grad = -2 * K + 2 * (K @ S) + 2 * alpha * S + beta
    return float(np.abs(grad * S).max() / max(1.0, np.abs(K).max()))


def multiplicative_update(K, S, alpha, beta, KS=None):
    """One sweep of ``S_ij <- S_ij K_ij / ((KS + alpha S)_ij + beta / 2)``.

    The denominator is floored at 1e-12; at a zero denominator the
    numerator vanishes as well, so fixed points are unchanged.
    """
    if KS is None:
        KS = K @ S
    return S * K / np.maximum(KS + alpha * S + beta / 2, DENOMINATOR_FLOOR)


def learn_sparse_similarity(
    K,
    alpha=0.1,
    beta=0.1,
    tol=1e-8,
    max_iter=1000,
    init=None,
    stop="iterate",
    zero_diagonal=False,
):
    """Learn a nonnegative sparse similarity ``S`` from a nonnegative kernel.

    Minimizes ``Tr(K - 2KS + S^T K S) + alpha ||S||_F^2 + beta ||S||_1``
    over ``S >= 0`` by multiplicative updates started from the all-ones
    matrix. Each sweep never increases the objective when ``K >= 0``.

    Parameters
    ----------
    K : ndarray of shape (n, n)
        Symmetric PSD kernel with nonnegative entries.
    alpha : float
        Ridge weight (>= 0; > 0 keeps ``K + alpha I`` well conditioned).
    beta : float
        L1 weight (>= 0). Larger values give sparser ``S``.
    tol : float
        Convergence tolerance, see ``stop``.
    max_iter : int
        Maximum number of sweeps.
    init : ndarray, optional
        Positive starting point; defaults to all ones.
    stop : {'iterate', 'objective'}
        ``'iterate'`` stops once ``max|S_new - S| / max(1, max S_new) < tol``;
        this quantity is proportional to the KKT residual, so a small
        ``tol`` certifies stationarity. ``'objective'`` stops once the
        relative objective decrease falls below ``tol``, which is cheaper
        but only bounds the residual to roughly ``sqrt(tol)``.
    zero_diagonal : bool
        Zero ``diag(S)`` after convergence (self-similarity removal).

    Returns
    -------
    similarity : SimilarityMatrix
        ``kind='sparse_learned'``.
    report : SolveReport
        ``objective_trace[0]`` is the objective at the starting point,
        followed by one value per sweep.
    """
    K = validate_kernel(K)
    check_nonnegative(
        K,
        name="K",
        reason="the multiplicative update only decreases the objective for entrywise nonnegative kernels",
    )
    alpha = check_positive(alpha, "alpha", strict=False)
    beta = check_positive(beta, "beta", strict=False)
    tol = check_positive(tol, "tol")
    max_iter = check_int_range(max_iter, "max_iter", 1)
    check_choice(stop, "stop", ("iterate", "objective"))
    n = K.shape[0]
    if init is None:
        S = np.ones((n, n))
    else:
        S = check_array(init, name="init").copy()
        if S.shape != (n, n):
            raise ShapeError(f"init has shape {S.shape}, expected {(n, n)}")
        check_nonnegative(S, name="init")

    KS = K @ S
    trace_K = np.trace(K)
    trace = [_objective(K, S, KS, alpha, beta, trace_K)]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        S_new = multiplicative_update(K, S, alpha, beta, KS)
        KS = K @ S_new
        trace.append(_objective(K, S_new, KS, alpha, beta, trace_K))
        if stop == "iterate":
            change = np.abs(S_new - S).max() / max(1.0, S_new.max())
        else:
            change = abs(trace[-2] - trace[-1]) / max(abs(trace[-2]), np.finfo(float).tiny)
        S = S_new
        if change < tol:
            converged = True
            break

    residual = kkt_residual(K, S, alpha, beta)
    if zero_diagonal:
        S = S.copy()
        np.fill_diagonal(S, 0.0)
    params = {"alpha": alpha, "beta": beta, "tol": tol, "max_iter": max_iter, "stop": stop}
    report = SolveReport(iterations, trace, residual, converged)
    return SimilarityMatrix(S, "sparse_learned", None, params), report


def symmetrize(W):
    """Graph edge weights ``Z = (W + W^T) / 2``.

    Negative entries are rejected for the nonnegative kinds; a bare array
    is treated as nonnegative.
    """
    kind = getattr(W, "kind", None)
    values = check_square(np.asarray(W), name="W")
    if kind != "knn_affine":
        check_nonnegative(values, name="W")
    Z = (values + values.T) / 2
    return Z


__all__ = [
    "SimilarityMatrix",
    "SolveReport",
    "kkt_residual",
    "knn_support",
    "learn_sparse_similarity",
    "lle_weights_knn",
    "local_gram",
    "multiplicative_update",
    "nnls_gram",
    "nnls_kkt_residual",
    "nonneg_lle_weights_knn",
    "objective_sparse",
    "symmetrize",
]
