"""Kernel construction, validation and combination.

A kernel here is a dense symmetric positive semidefinite ``(n, n)`` ndarray.
Data matrices follow the scikit-learn convention of one point per row;
embeddings are stored ``(k, n)`` with one point per column.
"""

from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .exceptions import ShapeError, ValidationError
from .validation import (
    PSD_RTOL,
    check_array,
    check_choice,
    check_positive,
    check_square,
)

COMBINE_MODES = ("replace", "additive", "multiplicative")
EMBEDDING_KERNELS = ("gaussian", "linear")


class PSDCheck(NamedTuple):
    is_psd: bool
    min_eigenvalue: float

    def __bool__(self):
        return bool(self.is_psd)


def squared_distances(X):
    """Pairwise squared Euclidean distances between the rows of ``X``.

    The result is exactly symmetric with an exactly zero diagonal.
    """
    X = check_array(X, name="X")
    if X.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(X, metric="sqeuclidean"))


def median_gamma(X):
    """Scale-adaptive bandwidth ``1 / (2 * median(d)^2)`` over distinct pairs.

    Distances below ``1e-10 * max|X|`` are roundoff and count as
    coincident. Falls back to the mean of the remaining distances when more
    than half of the pairs coincide, and to 1.0 when all points do.
    """
    X = check_array(X, name="X")
    if X.shape[0] < 2:
        return 1.0
    d = pdist(X)
    d[d <= 1e-10 * np.abs(X).max()] = 0.0
    med = np.median(d)
    if med <= 0:
        positive = d[d > 0]
        if positive.size == 0:
            return 1.0
        med = positive.mean()
    return 1.0 / (2.0 * med**2)


def gaussian_kernel(X, gamma):
    """``K_ij = exp(-gamma * ||x_i - x_j||^2)`` over the rows of ``X``."""
    X = check_array(X, name="X")
    gamma = check_positive(gamma, "gamma")
    K = np.exp(-gamma * squared_distances(X))
    np.fill_diagonal(K, 1.0)
    return K


def linear_kernel(X):
    """Gram matrix of the rows of ``X``."""
    X = check_array(X, name="X")
    K = X @ X.T
    return (K + K.T) / 2


def kernel_from_embedding(Y, method="gaussian", gamma=None):
    """Build the kernel of the n embedded points (the columns of ``Y``).

    Parameters
    ----------
    Y : Embedding or ndarray of shape (k, n)
    method : {'gaussian', 'linear'}
    gamma : float, optional
        Gaussian bandwidth. ``None`` selects :func:`median_gamma` on the
        embedded points.
    """
    Y = getattr(Y, "Y", Y)
    Y = check_array(Y, name="Y")
    check_choice(method, "method", EMBEDDING_KERNELS)
    points = Y.T
    if method == "linear":
        return linear_kernel(points)
    if gamma is None:
        gamma = median_gamma(points)
    return gaussian_kernel(points, gamma)


def combine_kernels(K_prev, K_Y, mode="multiplicative"):
    """Form the next-round kernel from the previous one and the embedding kernel.

    ``replace`` returns ``K_Y``; ``additive`` the elementwise sum;
    ``multiplicative`` the Hadamard product. Both combinations keep PSD
    inputs PSD.
    """
    check_choice(mode, "mode", COMBINE_MODES)
    K_prev = check_square(K_prev, name="K_prev")
    K_Y = check_square(K_Y, name="K_Y")
    if K_prev.shape != K_Y.shape:
        raise ShapeError(f"kernel sizes differ: {K_prev.shape} vs {K_Y.shape}")
    if mode == "replace":
        return K_Y.copy()
    if mode == "additive":
        return K_prev + K_Y
    return K_prev * K_Y


def check_psd(K, tol=PSD_RTOL):
    """Test ``lambda_min(K) >= -tol * max|K|``.

    ``K`` is re-symmetrized as ``(K + K.T) / 2`` before the eigenvalue
    computation; inputs that are not symmetric to begin with are rejected.
    """
    K = check_square(K, name="K")
    tol = check_positive(tol, "tol", strict=False)
    scale = np.abs(K).max()
    if np.abs(K - K.T).max() > 1e-10 * max(scale, 1e-300):
        raise ShapeError("K is not symmetric")
    lam_min = float(np.linalg.eigvalsh((K + K.T) / 2)[0])
    return PSDCheck(lam_min >= -tol * scale, lam_min)


def validate_kernel(K, name="K", require_nonnegative=False, reason=None):
    """Check the kernel invariants and return a symmetrized float copy.

    Raises :class:`ValidationError` when ``K`` is not finite, not symmetric
    within ``1e-12 * max|K|``, not PSD within ``1e-8 * max|K|`` or, when
    requested, has negative entries.
    """
    K = check_square(K, name=name)
    scale = np.abs(K).max()
    if np.abs(K - K.T).max() > 1e-12 * max(scale, 1e-300):
        raise ValidationError(f"{name} is not symmetric")
    K = (K + K.T) / 2
    report = check_psd(K)
    if not report.is_psd:
        raise ValidationError(
            f"{name} is not positive semidefinite (smallest eigenvalue {report.min_eigenvalue:.3e})"
        )
    if require_nonnegative and np.any(K < 0):
        i, j = np.unravel_index(np.argmin(K), K.shape)
        msg = f"{name} has negative entry {K[i, j]:.3g} at ({i},{j})"
        raise ValidationError(msg + (f"; {reason}" if reason else ""))
    return K


def shift_nonnegative(K):
    """Subtract ``min(K)`` when it is negative so every entry is >= 0.

    Adding a constant to every entry adds a rank-one PSD term ``c * 11^T``
    (``c = -min K > 0``), so PSD is preserved.
    """
    K = check_square(K, name="K")
    low = K.min()
    return K - low if low < 0 else K.copy()


__all__ = [
    "COMBINE_MODES",
    "EMBEDDING_KERNELS",
    "PSDCheck",
    "check_psd",
    "combine_kernels",
    "gaussian_kernel",
    "kernel_from_embedding",
    "linear_kernel",
    "median_gamma",
    "shift_nonnegative",
    "squared_distances",
    "validate_kernel",
]
