"""Clustering and semi-supervised evaluation.

K-means with seeded random restarts, unit-sphere normalization of
embeddings, ACC / NMI / purity, and two graph label propagators (harmonic
function and local-global consistency).

Point sets passed to :func:`kmeans` follow the scikit-learn layout
``(n_samples, n_features)``; pass ``embedding.points`` for an
:class:`~ille.embedding.Embedding`.
"""

import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from .embedding import GraphWeights, build_graph
from .exceptions import NumericError, ParameterError, ShapeError, ValidationError
from .validation import check_array, check_int_range, check_labels


@dataclass
class MetricsReport:
    acc: float
    nmi: float
    pur: float

    def to_dict(self):
        return asdict(self)


@dataclass
class KMeansResult:
    labels: np.ndarray
    inertia: float
    centers: np.ndarray
    run_labels: list
    run_inertia: list
    inertia_traces: list


def _lloyd(X, c, rng, max_iter):
    n = X.shape[0]
    centers = X[rng.choice(n, size=c, replace=False)].copy()
    labels = None
    trace = []
    for _ in range(max_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dist, axis=1)
        trace.append(float(dist[np.arange(n), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        point_cost = dist[np.arange(n), labels]
        for j in range(c):
            members = labels == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
            else:
                far = int(np.argmax(point_cost))
                centers[j] = X[far]
                point_cost[far] = 0.0
    inertia = float(((X - centers[labels]) ** 2).sum())
    return labels, inertia, centers, trace


def kmeans(X, c, n_init=10, seed=0, max_iter=300):
    """Lloyd's K-means with ``n_init`` seeded restarts.

    Each restart seeds its centers with ``c`` distinct random points and
    iterates until the assignment stops changing or ``max_iter`` rounds.
    Empty clusters are re-seeded at the currently worst-fit point. The
    lowest-inertia run is returned (earliest on ties); all runs are kept
    for protocols that average metrics over restarts.
    """
    X = check_array(X, name="X")
    n = X.shape[0]
    c = check_int_range(c, "c", 1)
    if c > n:
        raise ParameterError(f"c={c} exceeds the number of points n={n}")
    n_init = check_int_range(n_init, "n_init", 1)
    children = np.random.SeedSequence(seed).spawn(n_init)
    runs = [_lloyd(X, c, np.random.default_rng(s), max_iter) for s in children]
    best = min(range(n_init), key=lambda r: runs[r][1])
    labels, inertia, centers, _ = runs[best]
    return KMeansResult(
        labels=labels,
        inertia=inertia,
        centers=centers,
        run_labels=[r[0] for r in runs],
        run_inertia=[r[1] for r in runs],
        inertia_traces=[r[3] for r in runs],
    )


def spectral_normalize(Y):
    """Scale every embedded point (column of ``Y``) to unit Euclidean norm.

    Zero points cannot be normalized; they are left at zero with a warning.
    """
    Y = getattr(Y, "Y", Y)
    Y = check_array(Y, name="Y")
    norms = np.linalg.norm(Y, axis=0)
    zero = norms == 0
    if zero.any():
        warnings.warn(f"{zero.sum()} zero-norm point(s) left unnormalized", RuntimeWarning, stacklevel=2)
    return Y / np.where(zero, 1.0, norms)[None, :]


def _contingency(pred, truth):
    pred = check_labels(pred, "pred")
    truth = check_labels(truth, "truth")
    if pred.shape != truth.shape:
        raise ShapeError(f"pred has {pred.size} labels but truth has {truth.size}")
    if pred.size == 0:
        raise ValidationError("label vectors are empty")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def accuracy(pred, truth):
    """Fraction correct under the best one-to-one cluster/class matching."""
    table = _contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum() / table.sum())


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth):
    """Mutual information normalized by ``sqrt(H(pred) H(truth))``.

    When either partition has zero entropy the score is 1 if the two
    partitions coincide and 0 otherwise.
    """
    table = _contingency(pred, truth)
    n = table.sum()
    h_pred = _entropy(table.sum(axis=1))
    h_truth = _entropy(table.sum(axis=0))
    if h_pred == 0 or h_truth == 0:
        return 1.0 if table.shape == (1, 1) else 0.0
    pij = table / n
    pi = pij.sum(axis=1, keepdims=True)
    pj = pij.sum(axis=0, keepdims=True)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / (pi @ pj)[nz])).sum())
    return float(np.clip(mi / np.sqrt(h_pred * h_truth), 0.0, 1.0))


def purity(pred, truth):
    """Share of points belonging to the majority class of their cluster."""
    table = _contingency(pred, truth)
    return float(table.max(axis=1).sum() / table.sum())


def clustering_metrics(pred, truth):
    return MetricsReport(accuracy(pred, truth), nmi(pred, truth), purity(pred, truth))


def mean_restart_metrics(result, truth):
    """Average ACC/NMI/PUR over every restart of a :class:`KMeansResult`."""
    reports = [clustering_metrics(labels, truth) for labels in result.run_labels]
    return MetricsReport(
        float(np.mean([r.acc for r in reports])),
        float(np.mean([r.nmi for r in reports])),
        float(np.mean([r.pur for r in reports])),
    )


def _seed_matrix(labels, mask, n_classes):
    labels = check_labels(labels, "labels")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != labels.shape:
        raise ShapeError("mask and labels differ in length")
    if not mask.any():
        raise ValidationError("at least one labeled point is required")
    known = labels[mask]
    if known.min() < 0:
        raise ValidationError("labels must be nonnegative")
    c = int(known.max()) + 1 if n_classes is None else n_classes
    if known.max() >= c:
        raise ValidationError(f"label {known.max()} outside [0, {c})")
    Y0 = np.zeros((labels.size, c))
    Y0[np.flatnonzero(mask), known] = 1.0
    return labels, mask, Y0


def harmonic_label_prop(Z, labels, mask, n_classes=None, return_scores=False):
    """Harmonic-function label propagation.

    Unlabeled scores solve ``(D_uu - Z_uu) F_u = Z_ul F_l`` with one-hot
    ``F_l``; labeled points keep their labels.

    Raises
    ------
    NumericError
        If some connected group of unlabeled nodes has no edge to a labeled
        node (the linear system is singular).
    """
    G = Z if isinstance(Z, GraphWeights) else build_graph(Z)
    labels, mask, F = _seed_matrix(labels, mask, n_classes)
    u = np.flatnonzero(~mask)
    l = np.flatnonzero(mask)
    out = labels.copy()
    if u.size:
        Zuu = G.Z[np.ix_(u, u)]
        Zul = G.Z[np.ix_(u, l)]
        n_comp, comp = connected_components(Zuu > 0, directed=False)
        anchored = Zul.sum(axis=1) > 0
        for k in range(n_comp):
            members = comp == k
            if not anchored[members].any():
                nodes = u[members]
                raise NumericError(
                    f"unlabeled component {nodes[:10].tolist()} (size {nodes.size}) has no labeled neighbor"
                )
        A = np.diag(G.d[u]) - Zuu
        try:
            F[u] = linalg.solve(A, Zul @ F[l], assume_a="sym")
        except linalg.LinAlgError as exc:
            raise NumericError(f"harmonic system is singular: {exc}") from exc
        out[u] = np.argmax(F[u], axis=1)
    out[mask] = labels[mask]
    return (out, F) if return_scores else out


def lg_consistency(Z, labels, mask, alpha=0.99, n_classes=None, return_scores=False):
    """Local and global consistency: ``F = (I - alpha Z~)^-1 Y0``, argmax per row."""
    if not (0 < alpha < 1):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    G = Z if isinstance(Z, GraphWeights) else build_graph(Z)
    labels, mask, Y0 = _seed_matrix(labels, mask, n_classes)
    A = np.eye(G.n) - alpha * G.Z_tilde
    F = linalg.solve((A + A.T) / 2, Y0, assume_a="pos")
    out = np.argmax(F, axis=1)
    return (out, F) if return_scores else out


def stratified_label_mask(labels, fraction, seed=0):
    """Mark ``round(fraction * n_c)`` (at least one) random points of each class as labeled."""
    labels = check_labels(labels, "labels")
    if not (0 < fraction <= 1):
        raise ParameterError(f"fraction must lie in (0, 1], got {fraction!r}")
    rng = np.random.default_rng(seed)
    mask = np.zeros(labels.size, dtype=bool)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        take = max(1, int(round(fraction * idx.size)))
        mask[rng.choice(idx, size=take, replace=False)] = True
    return mask


def cluster_scores(Y, truth, c=None, n_init=10, seed=0):
    """Score K-means on an embedding ``Y`` of shape (k, n) against ``truth``.

    Both the plain embedding (normalized cut) and its unit-sphere
    projection (spectral clustering) are clustered. ``mean`` averages the
    metrics over the restarts; ``best`` scores the lowest-inertia run.
    """
    Y = getattr(Y, "Y", Y)
    truth = check_labels(truth, "truth")
    c = int(np.unique(truth).size) if c is None else c
    scores = {}
    for variant, coords in (("ncut", Y), ("spectral", None)):
        if coords is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                coords = spectral_normalize(Y)
        result = kmeans(np.asarray(coords).T, c, n_init=n_init, seed=seed)
        scores[variant] = {
            "mean": mean_restart_metrics(result, truth).to_dict(),
            "best": clustering_metrics(result.labels, truth).to_dict(),
        }
    return scores


def ssl_scores(Z, truth, fractions=(0.1, 0.2), n_splits=5, seed=0, lgc_alpha=0.99):
    """Mean accuracy on the unlabeled points over repeated stratified splits.

    Returns ``{"harmonic": {fraction: acc}, "lgc": {fraction: acc}}`` with
    fractions formatted as strings.
    """
    G = Z if isinstance(Z, GraphWeights) else build_graph(Z)
    truth = check_labels(truth, "truth")
    c = int(truth.max()) + 1
    seeds = np.random.SeedSequence(seed).spawn(len(fractions) * n_splits)
    out = {"harmonic": {}, "lgc": {}}
    for f_idx, fraction in enumerate(fractions):
        accs = {"harmonic": [], "lgc": []}
        for s in range(n_splits):
            ss = seeds[f_idx * n_splits + s]
            mask = stratified_label_mask(truth, fraction, seed=int(ss.generate_state(1)[0]))
            if mask.all():
                continue
            hidden = ~mask
            pred_h = harmonic_label_prop(G, truth, mask, n_classes=c)
            pred_l = lg_consistency(G, truth, mask, alpha=lgc_alpha, n_classes=c)
            accs["harmonic"].append(float(np.mean(pred_h[hidden] == truth[hidden])))
            accs["lgc"].append(float(np.mean(pred_l[hidden] == truth[hidden])))
        for method in out:
            out[method][f"{fraction:g}"] = float(np.mean(accs[method])) if accs[method] else 1.0
    return out


__all__ = [
    "KMeansResult",
    "MetricsReport",
    "accuracy",
    "cluster_scores",
    "clustering_metrics",
    "harmonic_label_prop",
    "kmeans",
    "lg_consistency",
    "mean_restart_metrics",
    "nmi",
    "purity",
    "spectral_normalize",
    "ssl_scores",
    "stratified_label_mask",
]
