"""Classification of signature collections.

k-means in flattened signature space under the sign-invariant L1 geometry:
the assignment step aligns each signature to every centroid over the
rank-one sign ambiguity before measuring, the update step takes the
coordinate-wise median of the aligned members. Both steps decrease the
summed L1 cost, so Lloyd iterations converge monotonically.
"""

import itertools

import numpy as np
from dataclasses import dataclass, field
from scipy.optimize import linear_sum_assignment

from .selfmap import _as_matrix, _best_alignment, sfm_distance

EXHAUSTIVE_MATCH_LIMIT = 8

DEFAULT_RESTARTS = 200
DEFAULT_ITERATIONS = 100

# Lloyd cost may wiggle at rounding level when alignments tie.
_MONOTONE_SLACK = 1e-9


@dataclass
class DistanceMatrix:
    """Pairwise squared-L1 signature distances.

    Attributes
    ----------
    values : numpy.ndarray
        (N, N), symmetric, zero diagonal.
    shape_ids : list of str
    """

    values: np.ndarray
    shape_ids: list

    @property
    def n(self):
        return self.values.shape[0]


@dataclass
class Labeling:
    """Cluster assignment of N shapes.

    predicted holds cluster indices in [0, k). When true labels are known
    the confusion matrix is attached: row i gives the fraction of class-i
    shapes landing in each cluster, after clusters have been matched to
    classes by the permutation that maximizes the diagonal.
    """

    predicted: np.ndarray
    true_labels: np.ndarray = None
    confusion: np.ndarray = None
    cost: float = 0.0
    class_names: list = field(default_factory=list)


def distance_matrix(maps, shape_ids=None):
    """All pairwise sfm_distance values.

    Parameters
    ----------
    maps : sequence of SelfFunctionalMap
    shape_ids : sequence of str, optional
        Defaults to each map's mesh_id.

    Returns
    -------
    DistanceMatrix
    """
    n = len(maps)
    if shape_ids is None:
        shape_ids = [getattr(sm, "mesh_id", str(i)) for i, sm in enumerate(maps)]
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = sfm_distance(maps[i], maps[j])
    return DistanceMatrix(values=D, shape_ids=list(shape_ids))


def _assign(matrices, centroids):
    """Closest centroid per signature under sign-aligned L1.

    Returns (labels, aligned copies, per-point residuals).
    """
    n = len(matrices)
    labels = np.empty(n, dtype=np.intp)
    residuals = np.empty(n)
    aligned = [None] * n
    for i, M in enumerate(matrices):
        best = (np.inf, -1, None)
        for c, cent in enumerate(centroids):
            rows, cols, res = _best_alignment(cent, M)
            if res < best[0]:
                best = (res, c, (rows[:, None] * cols[None, :]) * M)
        residuals[i], labels[i], aligned[i] = best
    return labels, aligned, residuals


def _lloyd(matrices, k, rng):
    """One restart of the median-update Lloyd iteration."""
    n = len(matrices)
    centroids = [matrices[i].copy()
                 for i in rng.choice(n, size=k, replace=False)]
    labels = np.full(n, -1, dtype=np.intp)
    cost = np.inf
    for _ in range(DEFAULT_ITERATIONS):
        new_labels, aligned, residuals = _assign(matrices, centroids)
        new_cost = float(residuals.sum())
        # Assignment re-chooses cluster and signs, update re-fits the
        # medians; neither may increase the summed misfit.
        if new_cost > cost + _MONOTONE_SLACK:
            raise AssertionError(
                f"k-means cost increased: {cost} -> {new_cost}")
        if np.array_equal(new_labels, labels):
            return new_labels, new_cost
        labels, cost = new_labels, new_cost
        for c in range(k):
            members = [aligned[i] for i in range(n) if labels[i] == c]
            if members:
                centroids[c] = np.median(members, axis=0)
            else:
                # Re-seed a dead centroid on the worst-fitted point.
                centroids[c] = matrices[int(np.argmax(residuals))].copy()
    return labels, cost


def kmeans_classify(maps, k, restarts=DEFAULT_RESTARTS, seed=0,
                    true_labels=None):
    """Cluster signatures by sign-invariant L1 k-means.

    Parameters
    ----------
    maps : sequence of SelfFunctionalMap
    k : int
        Cluster count; must not exceed the number of shapes.
    restarts : int
        Independent random initializations; the best run by
        (cost, restart seed) wins, which keeps the result deterministic.
    seed : int
        Master seed; restart r uses seed + r.
    true_labels : sequence, optional
        Class labels. When given, the confusion matrix is computed.

    Returns
    -------
    Labeling
    """
    n = len(maps)
    if n == 0:
        raise ValueError("no signatures to cluster")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    matrices = [np.asarray(_as_matrix(sm), dtype=np.float64) for sm in maps]
    best = (np.inf, None)
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        labels, cost = _lloyd(matrices, k, rng)
        if cost < best[0]:
            best = (cost, labels)
    cost, predicted = best

    confusion = None
    names = []
    true_idx = None
    if true_labels is not None:
        names = sorted(set(true_labels))
        lookup = {name: i for i, name in enumerate(names)}
        true_idx = np.array([lookup[t] for t in true_labels], dtype=np.intp)
        confusion, predicted = confusion_matrix(predicted, true_idx,
                                                relabel=True)
    return Labeling(predicted=predicted, true_labels=true_idx,
                    confusion=confusion, cost=cost, class_names=names)


def _match_clusters(counts):
    """Permutation sending cluster j to class perm[j], maximizing the
    matched diagonal. Exhaustive for small k, assignment solver above."""
    k = counts.shape[0]
    if k <= EXHAUSTIVE_MATCH_LIMIT:
        best_perm, best_mass = None, -1
        for perm in itertools.permutations(range(k)):
            mass = sum(counts[perm[j], j] for j in range(k))
            if mass > best_mass:
                best_mass, best_perm = mass, perm
        return np.array(best_perm, dtype=np.intp)
    rows, cols = linear_sum_assignment(counts, maximize=True)
    perm = np.empty(k, dtype=np.intp)
    perm[cols] = rows
    return perm


def confusion_matrix(predicted, true_labels, relabel=False):
    """Row-stochastic class-vs-cluster matrix.

    Entry (i, j) is the fraction of class-i shapes assigned to cluster j
    after the clusters have been permuted onto classes.

    Parameters
    ----------
    predicted : array of int
        Cluster indices.
    true_labels : array of int
        Class indices, same length, same value range.
    relabel : bool
        Also return the permuted cluster labels.

    Returns
    -------
    numpy.ndarray, or (numpy.ndarray, numpy.ndarray) when relabel is set.
    """
    predicted = np.asarray(predicted, dtype=np.intp)
    true_labels = np.asarray(true_labels, dtype=np.intp)
    if predicted.shape != true_labels.shape:
        raise ValueError("predicted and true label lengths differ")
    k = int(max(predicted.max(), true_labels.max())) + 1
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (true_labels, predicted), 1)
    perm = _match_clusters(counts)
    relabeled = perm[predicted]
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (true_labels, relabeled), 1)
    sizes = counts.sum(axis=1)
    conf = counts / np.where(sizes == 0, 1, sizes)[:, None]
    if relabel:
        return conf, relabeled
    return conf


def silhouette_from_distances(D, labels):
    """Mean silhouette coefficient from a precomputed distance matrix.

    Singleton clusters score zero, the usual convention. Requires at least
    two clusters.
    """
    D = np.asarray(D, dtype=np.float64)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise ValueError("silhouette needs at least two clusters")
    n = D.shape[0]
    scores = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        n_same = int(same.sum())
        if n_same <= 1:
            continue
        a = D[i, same].sum() / (n_same - 1)
        b = min(D[i, labels == other].mean()
                for other in uniq if other != labels[i])
        scores[i] = (b - a) / max(a, b)
    return float(scores.mean())
