"""The iterative LLE loop and its scikit-learn style estimators.

Each round learns weights from the current kernel, symmetrizes them into a
graph, embeds the graph, and folds a kernel built on the embedding back
into the kernel for the next round.
"""

from dataclasses import asdict, dataclass, field, fields

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin, clone

from . import kernel as kernels
from .embedding import build_graph, embed
from .evaluation import kmeans, spectral_normalize
from .exceptions import IlleError, ParameterError
from .similarity import learn_sparse_similarity, nonneg_lle_weights_knn, symmetrize
from .validation import check_array, check_choice, check_int_range, check_positive

W_METHODS = ("sparse", "knn")
INPUT_KERNELS = ("gaussian", "linear", "precomputed")


@dataclass
class IlleConfig:
    """Parameters of one iterative LLE run.

    ``w_method='sparse'`` learns a dense sparse-regularized similarity
    every round; ``'knn'`` uses nonnegative kNN reconstruction weights
    instead (and then only needs a PSD kernel, not a nonnegative one).
    """

    T: int = 4
    w_method: str = "sparse"
    k_nn: int = 5
    alpha: float = 0.1
    beta: float = 0.1
    tol: float = 1e-8
    max_iter: int = 1000
    stop: str = "iterate"
    zero_diagonal: bool = False
    embed_k: int = 2
    drop_trivial: bool = False
    kernel_method: str = "gaussian"
    combine_mode: str = "multiplicative"
    gamma: float = None
    seed: int = 0

    def validate(self):
        check_int_range(self.T, "T", 1)
        check_choice(self.w_method, "w_method", W_METHODS)
        check_int_range(self.k_nn, "k_nn", 1)
        check_positive(self.alpha, "alpha", strict=False)
        check_positive(self.beta, "beta", strict=False)
        check_positive(self.tol, "tol")
        check_int_range(self.max_iter, "max_iter", 1)
        check_choice(self.stop, "stop", ("iterate", "objective"))
        check_int_range(self.embed_k, "embed_k", 1)
        check_choice(self.kernel_method, "kernel_method", kernels.EMBEDDING_KERNELS)
        check_choice(self.combine_mode, "combine_mode", kernels.COMBINE_MODES)
        if self.gamma is not None:
            check_positive(self.gamma, "gamma")
        return self

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


def _summary(M):
    return {
        "min": float(M.min()),
        "max": float(M.max()),
        "mean": float(M.mean()),
        "nnz": int(np.count_nonzero(np.abs(M) > 1e-6)),
    }


@dataclass
class IterationRecord:
    t: int
    similarity: dict
    degrees: np.ndarray
    Y: np.ndarray
    eigenvalues: np.ndarray
    kernel_gamma: float
    next_kernel: dict
    solver: dict = None

    def to_dict(self):
        return {
            "t": self.t,
            "similarity": self.similarity,
            "degrees": self.degrees.tolist(),
            "Y": self.Y.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "kernel_gamma": self.kernel_gamma,
            "next_kernel": self.next_kernel,
            "solver": self.solver,
        }


@dataclass
class IlleHistory:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __iter__(self):
        return iter(self.records)

    def to_dict(self):
        return {"iterations": len(self.records), "records": [r.to_dict() for r in self.records]}


@dataclass
class IlleResult:
    """Outputs of :func:`iterative_lle`.

    ``kernel`` is the refined kernel after the last round, which the
    algorithm reports as the final pairwise similarity. ``similarity`` and
    ``graph`` are the learned weights of the last round and their
    symmetrized graph; ``graphs`` and ``kernels`` keep every round's graph
    and input kernel (plus the final refined kernel).
    """

    kernel: np.ndarray
    embedding: object
    similarity: object
    graph: object
    history: IlleHistory
    kernels: list
    graphs: list


def learn_weights(K, cfg):
    """Weights for one round; returns ``(SimilarityMatrix, SolveReport or None)``."""
    if cfg.w_method == "sparse":
        return learn_sparse_similarity(
            K,
            alpha=cfg.alpha,
            beta=cfg.beta,
            tol=cfg.tol,
            max_iter=cfg.max_iter,
            stop=cfg.stop,
            zero_diagonal=cfg.zero_diagonal,
        )
    return nonneg_lle_weights_knn(K, cfg.k_nn), None


def iterative_lle(K1, cfg=None):
    """Run ``cfg.T`` rounds of weight learning, embedding and kernel refinement.

    Errors raised inside a round keep their type; their message is prefixed
    with the round number and the ``iteration`` attribute is set.
    """
    cfg = (cfg or IlleConfig()).validate()
    sparse = cfg.w_method == "sparse"
    K = np.asarray(K1, dtype=float)
    if not sparse and K.ndim == 2:
        check_int_range(cfg.k_nn, "k_nn", 1, K.shape[0] - 1)
    history = IlleHistory()
    kernel_seq = []
    graphs = []
    W = G = Y = None
    for t in range(1, cfg.T + 1):
        try:
            K = kernels.validate_kernel(
                K,
                name=f"K^{t}",
                require_nonnegative=sparse,
                reason="the sparse similarity learner requires an entrywise nonnegative kernel",
            )
            kernel_seq.append(K)
            W, report = learn_weights(K, cfg)
            G = build_graph(symmetrize(W))
            graphs.append(G)
            Y = embed(G, cfg.embed_k, drop_trivial=cfg.drop_trivial)
            gamma = None
            if cfg.kernel_method == "gaussian":
                gamma = cfg.gamma if cfg.gamma is not None else kernels.median_gamma(Y.points)
            K_Y = kernels.kernel_from_embedding(Y, cfg.kernel_method, gamma)
            K_next = kernels.combine_kernels(K, K_Y, cfg.combine_mode)
        except IlleError as exc:
            exc.iteration = t
            exc.args = (f"iteration {t}: {exc}",) + exc.args[1:]
            raise
        history.records.append(
            IterationRecord(
                t=t,
                similarity={"kind": W.kind, **_summary(W.values)},
                degrees=G.d.copy(),
                Y=Y.Y.copy(),
                eigenvalues=Y.eigenvalues.copy(),
                kernel_gamma=None if gamma is None else float(gamma),
                next_kernel=_summary(K_next),
                solver=None if report is None else report.to_dict(),
            )
        )
        K = K_next
    try:
        K = kernels.validate_kernel(K, name=f"K^{cfg.T + 1}")
    except IlleError as exc:
        exc.iteration = cfg.T
        exc.args = (f"iteration {cfg.T}: {exc}",) + exc.args[1:]
        raise
    kernel_seq.append(K)
    return IlleResult(K, Y, W, G, history, kernel_seq, graphs)


def input_kernel(X, kernel="gaussian", gamma=None):
    """Starting kernel for raw data ``X`` (rows are points)."""
    check_choice(kernel, "kernel", INPUT_KERNELS)
    if kernel == "precomputed":
        return kernels.validate_kernel(X)
    if kernel == "linear":
        return kernels.linear_kernel(X)
    if gamma is None:
        gamma = kernels.median_gamma(X)
    return kernels.gaussian_kernel(X, gamma)


class IterativeLLE(TransformerMixin, BaseEstimator):
    """Iterative locally linear embedding.

    Parameters
    ----------
    n_components : int, default=2
        Embedding dimension.
    n_iter : int, default=4
        Number of weight/embedding/kernel rounds.
    kernel : {'gaussian', 'linear', 'precomputed'}, default='gaussian'
        Starting kernel on ``X``. With ``'precomputed'``, ``X`` is the kernel.
    gamma : float, optional
        Bandwidth of the starting Gaussian kernel; median heuristic if None.
    w_method : {'sparse', 'knn'}, default='sparse'
        Sparse nonnegative similarity learning, or nonnegative kNN weights.
    n_neighbors : int, default=5
        Neighborhood size for ``'knn'``.
    alpha, beta : float, default=0.1
        Ridge and L1 weights of the sparse learner.
    tol : float, default=1e-8
    max_iter : int, default=1000
        Convergence controls of the sparse learner.
    embedding_kernel : {'gaussian', 'linear'}, default='gaussian'
        Kernel built on each round's embedding.
    embedding_gamma : float, optional
        Bandwidth of that kernel; median heuristic per round if None.
    combine : {'multiplicative', 'additive', 'replace'}, default='multiplicative'
    drop_trivial : bool, default=False
        Drop the constant bottom eigenvector from the embedding.
    zero_diagonal : bool, default=False
        Remove self-similarity from learned weights.
    shift_nonnegative : bool, default=False
        Shift a starting kernel with negative entries to be nonnegative
        (required by the sparse learner, e.g. for linear kernels).

    Attributes
    ----------
    embedding_ : ndarray of shape (n_samples, n_components)
    eigenvalues_ : ndarray of shape (n_components,)
    kernel_ : ndarray of shape (n_samples, n_samples)
        Refined kernel after the last round.
    similarity_ : ndarray of shape (n_samples, n_samples)
        Learned weights of the last round.
    affinity_ : ndarray of shape (n_samples, n_samples)
        Symmetrized graph of the last round.
    history_ : IlleHistory
    """

    def __init__(
        self,
        n_components=2,
        n_iter=4,
        kernel="gaussian",
        gamma=None,
        w_method="sparse",
        n_neighbors=5,
        alpha=0.1,
        beta=0.1,
        tol=1e-8,
        max_iter=1000,
        embedding_kernel="gaussian",
        embedding_gamma=None,
        combine="multiplicative",
        drop_trivial=False,
        zero_diagonal=False,
        shift_nonnegative=False,
    ):
        self.n_components = n_components
        self.n_iter = n_iter
        self.kernel = kernel
        self.gamma = gamma
        self.w_method = w_method
        self.n_neighbors = n_neighbors
        self.alpha = alpha
        self.beta = beta
        self.tol = tol
        self.max_iter = max_iter
        self.embedding_kernel = embedding_kernel
        self.embedding_gamma = embedding_gamma
        self.combine = combine
        self.drop_trivial = drop_trivial
        self.zero_diagonal = zero_diagonal
        self.shift_nonnegative = shift_nonnegative

    def _config(self):
        return IlleConfig(
            T=self.n_iter,
            w_method=self.w_method,
            k_nn=self.n_neighbors,
            alpha=self.alpha,
            beta=self.beta,
            tol=self.tol,
            max_iter=self.max_iter,
            zero_diagonal=self.zero_diagonal,
            embed_k=self.n_components,
            drop_trivial=self.drop_trivial,
            kernel_method=self.embedding_kernel,
            combine_mode=self.combine,
            gamma=self.embedding_gamma,
        )

    def fit(self, X, y=None):
        X = check_array(X, name="X")
        K1 = input_kernel(X, self.kernel, self.gamma)
        if self.shift_nonnegative:
            K1 = kernels.shift_nonnegative(K1)
        result = iterative_lle(K1, self._config())
        self.n_features_in_ = X.shape[1]
        self.input_kernel_ = K1
        self.result_ = result
        self.embedding_ = result.embedding.points.copy()
        self.eigenvalues_ = result.embedding.eigenvalues.copy()
        self.kernel_ = result.kernel
        self.similarity_ = result.similarity.values
        self.affinity_ = result.graph.Z
        self.history_ = result.history
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X, y).embedding_


class IterativeLLEClustering(ClusterMixin, BaseEstimator):
    """K-means on an iterative LLE embedding.

    Parameters
    ----------
    n_clusters : int, default=2
        Number of clusters; also used as the embedding dimension.
    lle : IterativeLLE, optional
        Template embedding estimator (cloned; its ``n_components`` is
        overridden). Defaults to ``IterativeLLE()``.
    assign : {'ncut', 'spectral'}, default='ncut'
        ``'ncut'`` clusters the embedding as is; ``'spectral'`` first
        projects every point onto the unit sphere.
    n_init : int, default=10
    random_state : int, default=0
    """

    def __init__(self, n_clusters=2, lle=None, assign="ncut", n_init=10, random_state=0):
        self.n_clusters = n_clusters
        self.lle = lle
        self.assign = assign
        self.n_init = n_init
        self.random_state = random_state

    def fit(self, X, y=None):
        check_choice(self.assign, "assign", ("ncut", "spectral"))
        template = IterativeLLE() if self.lle is None else clone(self.lle)
        self.lle_ = template.set_params(n_components=self.n_clusters).fit(X)
        Y = self.lle_.result_.embedding.Y
        if self.assign == "spectral":
            Y = spectral_normalize(Y)
        self.kmeans_ = kmeans(Y.T, self.n_clusters, n_init=self.n_init, seed=self.random_state)
        self.labels_ = self.kmeans_.labels
        self.embedding_ = self.lle_.embedding_
        return self


__all__ = [
    "IlleConfig",
    "IlleHistory",
    "IlleResult",
    "IterationRecord",
    "IterativeLLE",
    "IterativeLLEClustering",
    "input_kernel",
    "iterative_lle",
    "learn_weights",
]
