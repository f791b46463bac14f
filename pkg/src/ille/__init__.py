"""Iterative locally linear embedding.

Sparse nonnegative similarity learning, degree-weighted spectral embedding
(identical to relaxed normalized-cut indicators), and an iterative loop
that refines the kernel from each round's embedding.
"""

from .embedding import (
    CutIndicators,
    Embedding,
    GraphWeights,
    build_graph,
    embed,
    lle_objective,
    normalized_cut_indicators,
)
from .evaluation import (
    MetricsReport,
    accuracy,
    clustering_metrics,
    harmonic_label_prop,
    kmeans,
    lg_consistency,
    nmi,
    purity,
    spectral_normalize,
)
from .exceptions import (
    IlleError,
    NumericError,
    ParameterError,
    ParseError,
    ShapeError,
    ValidationError,
)
from .kernel import check_psd, combine_kernels, gaussian_kernel, kernel_from_embedding, linear_kernel
from .pipeline import IlleConfig, IterativeLLE, IterativeLLEClustering, iterative_lle
from .similarity import (
    SimilarityMatrix,
    SolveReport,
    kkt_residual,
    learn_sparse_similarity,
    lle_weights_knn,
    nonneg_lle_weights_knn,
    objective_sparse,
    symmetrize,
)

__version__ = "0.1.0"
