"""Degree-weighted LLE embedding and normalized-cut indicators.

For a symmetric nonnegative affinity ``Z`` with degrees ``d = Z 1`` the
embedding minimizes ``sum_i d_i ||y_i - sum_j (D^-1 Z)_ij y_j||^2`` under
``Y D Y^T = I``. Its solution is ``Y = F^T D^-1/2`` with ``F`` the bottom
eigenvectors of ``(I - Z~)^2``, ``Z~ = D^-1/2 Z D^-1/2``; these are the
bottom eigenvectors of ``I - Z~`` itself, which is what is decomposed here.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import NumericError, ShapeError, ValidationError
from .validation import check_array, check_int_range, check_nonnegative, check_square

EIGEN_RESIDUAL_TOL = 1e-8


@dataclass
class GraphWeights:
    Z: np.ndarray
    d: np.ndarray
    Z_tilde: np.ndarray

    @property
    def n(self):
        return self.Z.shape[0]

    def laplacian(self):
        """Symmetric normalized Laplacian ``I - Z~``."""
        L = np.eye(self.n) - self.Z_tilde
        return (L + L.T) / 2


@dataclass
class Embedding:
    """``Y`` is ``(k, n)``: one embedded point per column.

    ``eigenvalues`` are the squared Laplacian eigenvalues ``mu**2``, which
    are the eigenvalues of ``(I - Z~)^2`` belonging to the columns of ``F``.
    """

    Y: np.ndarray
    eigenvalues: np.ndarray
    mu: np.ndarray
    F: np.ndarray

    @property
    def k(self):
        return self.Y.shape[0]

    @property
    def points(self):
        """Embedding with one point per row, shape ``(n, k)``."""
        return self.Y.T


@dataclass
class CutIndicators:
    H: np.ndarray
    G: np.ndarray
    mu: np.ndarray


def build_graph(Z_raw, isolated_weight=1e-10):
    """Degrees and normalized affinity of a symmetric nonnegative ``Z``.

    Nodes with zero degree receive a self-loop of weight
    ``isolated_weight * max(Z)`` (a warning is emitted) so that
    ``D^-1/2`` exists.
    """
    Z = check_square(Z_raw, name="Z")
    scale = np.abs(Z).max()
    if np.abs(Z - Z.T).max() > 1e-10 * max(scale, 1e-300):
        raise ValidationError("Z is not symmetric")
    check_nonnegative(Z, name="Z")
    Z = (Z + Z.T) / 2
    d = Z.sum(axis=1)
    isolated = np.flatnonzero(d <= 0)
    if isolated.size:
        eps = isolated_weight * (scale if scale > 0 else 1.0)
        warnings.warn(
            f"{isolated.size} isolated node(s) {isolated[:10].tolist()} given self-loops of weight {eps:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
        Z = Z.copy()
        Z[isolated, isolated] = eps
        d = Z.sum(axis=1)
    s = 1.0 / np.sqrt(d)
    Z_tilde = Z * s[:, None] * s[None, :]
    Z_tilde = (Z_tilde + Z_tilde.T) / 2
    return GraphWeights(Z, d, Z_tilde)


def _as_graph(G):
    return G if isinstance(G, GraphWeights) else build_graph(G)


def fix_signs(V):
    """Flip columns so the entry of largest magnitude is positive.

    Ties go to the lowest index.
    """
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _bottom_eigenpairs(L, count):
    n = L.shape[0]
    try:
        mu, V = linalg.eigh(L, subset_by_index=[0, count - 1])
    except linalg.LinAlgError as exc:
        raise NumericError(f"symmetric eigensolver failed on a {n}x{n} Laplacian: {exc}") from exc
    return mu, V


def embed(G, k, drop_trivial=False):
    """Degree-weighted LLE embedding ``Y = F^T D^-1/2``.

    Parameters
    ----------
    G : GraphWeights or array of shape (n, n)
        Symmetric nonnegative affinity (arrays go through :func:`build_graph`).
    k : int
        Embedding dimension, ``1 <= k <= n`` (``n - 1`` with ``drop_trivial``).
    drop_trivial : bool
        Skip the bottom eigenvector (the constant ``D^1/2 1`` direction of a
        connected graph) and return eigenvectors 2..k+1.

    Returns
    -------
    Embedding
        Satisfies ``Y D Y^T = I_k``.
    """
    G = _as_graph(G)
    n = G.n
    offset = 1 if drop_trivial else 0
    k = check_int_range(k, "k", 1, n - offset)
    L = G.laplacian()
    mu, F = _bottom_eigenpairs(L, k + offset)
    mu, F = mu[offset:], F[:, offset:]
    F = fix_signs(F)

    lam = mu**2
    L2F = L @ (L @ F)
    residual = np.linalg.norm(L2F - F * lam, axis=0).max()
    if residual > EIGEN_RESIDUAL_TOL:
        raise NumericError(
            f"eigenpair residual {residual:.3e} exceeds {EIGEN_RESIDUAL_TOL:g} (n={n}, k={k})"
        )
    Y = (F / np.sqrt(G.d)[:, None]).T
    return Embedding(Y, lam, mu, F)


def normalized_cut_indicators(G, k):
    """Relaxed normalized-cut indicators ``H = D^-1/2 G``.

    ``H`` is obtained from the generalized problem ``(D - Z) h = mu D h``
    with ``H^T D H = I``; ``G = D^1/2 H`` then holds orthonormal bottom
    eigenvectors of ``I - Z~``.
    """
    G = _as_graph(G)
    n = G.n
    k = check_int_range(k, "k", 1, n)
    Lu = np.diag(G.d) - G.Z
    Lu = (Lu + Lu.T) / 2
    try:
        mu, H = linalg.eigh(Lu, np.diag(G.d), subset_by_index=[0, k - 1])
    except linalg.LinAlgError as exc:
        raise NumericError(f"generalized eigensolver failed (n={n}): {exc}") from exc
    sqrt_d = np.sqrt(G.d)[:, None]
    Gmat = fix_signs(H * sqrt_d)
    H = Gmat / sqrt_d
    return CutIndicators(H, Gmat, mu)


def lle_objective(Y, G):
    """``sum_i d_i ||y_i - sum_j (D^-1 Z)_ij y_j||^2`` for ``Y`` of shape (k, n)."""
    G = _as_graph(G)
    Y = getattr(Y, "Y", Y)
    Y = check_array(Y, name="Y")
    if Y.shape[1] != G.n:
        raise ShapeError(f"Y has {Y.shape[1]} points but the graph has {G.n} nodes")
    residuals = Y - (Y @ G.Z.T) / G.d[None, :]
    return float(np.sum(G.d[None, :] * residuals**2))


__all__ = [
    "CutIndicators",
    "Embedding",
    "GraphWeights",
    "build_graph",
    "embed",
    "fix_signs",
    "lle_objective",
    "normalized_cut_indicators",
]
