"""Low-dimensional embedding of a signature distance matrix.

Nonmetric MDS by SMACOF majorization alternating with monotone regression.
The disparities are renormalized onto the sphere sum(dhat^2) = T every
iteration; projecting onto the monotone cone and rescaling is the exact
minimizer over cone-intersect-sphere (the cone is closed under positive
scaling), so both half-steps decrease the raw stress and the reported
normalized stress never increases.
"""

import numpy as np
from dataclasses import dataclass

DEFAULT_MAX_ITERATIONS = 500
DEFAULT_TOL = 1e-6
DEFAULT_RESTARTS = 8


@dataclass
class Embedding:
    """MDS result.

    Attributes
    ----------
    points : numpy.ndarray
        (N, d) coordinates.
    stress : float
        Final normalized stress, sqrt(sum (dhat - d)^2 / sum dhat^2).
    d : int
    stress_history : numpy.ndarray
        Stress after every accepted iteration of the winning run.
    """

    points: np.ndarray
    stress: float
    d: int
    stress_history: np.ndarray = None
    run_histories: list = None


def _check_dissimilarities(D):
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("dissimilarity matrix must be square")
    if not np.allclose(D, D.T, atol=1e-12):
        raise ValueError("dissimilarity matrix must be symmetric")
    if (D < 0).any():
        raise ValueError("dissimilarities must be non-negative")
    return D


def classical_mds(D, d):
    """Torgerson double-centering embedding; the metric-MDS oracle.

    Negative eigenvalues (non-Euclidean input) are clamped to zero. Column
    signs are fixed deterministically.
    """
    D = _check_dissimilarities(D)
    n = D.shape[0]
    sq = D * D
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * (J @ sq @ J)
    vals, vecs = np.linalg.eigh(B)
    order = np.argsort(vals)[::-1][:d]
    lam = np.clip(vals[order], 0.0, None)
    X = vecs[:, order] * np.sqrt(lam)[None, :]
    if X.shape[1] < d:
        X = np.hstack([X, np.zeros((n, d - X.shape[1]))])
    anchor = np.abs(X).argmax(axis=0)
    signs = np.sign(X[anchor, np.arange(d)])
    signs[signs == 0] = 1.0
    return X * signs[None, :]


def _pava(y):
    """Pool-adjacent-violators: least-squares nondecreasing fit of y.

    Plain unit weights; pooled blocks take their mean.
    """
    y = np.asarray(y, dtype=np.float64)
    sums = y.copy()
    counts = np.ones_like(y)
    means = y.copy()
    # Stack of merged blocks; top is the current rightmost block.
    top = -1
    for i in range(y.size):
        top += 1
        sums[top], counts[top], means[top] = y[i], 1.0, y[i]
        while top > 0 and means[top - 1] > means[top]:
            sums[top - 1] += sums[top]
            counts[top - 1] += counts[top]
            means[top - 1] = sums[top - 1] / counts[top - 1]
            top -= 1
    out = np.empty_like(y)
    pos = 0
    for b in range(top + 1):
        width = int(counts[b])
        out[pos:pos + width] = means[b]
        pos += width
    return out


def _pairwise(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def _guttman(X, dhat, d_flat, iu):
    """One majorization step toward the current disparities."""
    n = X.shape[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d_flat > 0, dhat / d_flat, 0.0)
    B = np.zeros((n, n))
    B[iu] = -ratio
    B = B + B.T
    np.fill_diagonal(B, -B.sum(axis=1))
    return (B @ X) / n


def _smacof_single(delta_flat, order, X0, d, T, mode, max_iterations, tol):
    """One SMACOF run. Returns (X, stress, history)."""
    iu = np.triu_indices(X0.shape[0], k=1)
    X = X0.copy()
    if mode == "metric":
        # Disparities are the dissimilarities themselves, held fixed.
        dhat = delta_flat.copy()
        T = float((dhat * dhat).sum())
    history = []
    prev = np.inf
    for _ in range(max_iterations):
        d_flat = _pairwise(X)[iu]
        if mode == "nonmetric":
            fit = np.empty_like(d_flat)
            fit[order] = _pava(d_flat[order])
            norm = np.sqrt((fit * fit).sum())
            dhat = fit * np.sqrt(T) / norm if norm > 0 else np.zeros_like(fit)
        X = _guttman(X, dhat, d_flat, iu)
        d_flat = _pairwise(X)[iu]
        raw = float(((dhat - d_flat) ** 2).sum())
        stress = np.sqrt(raw / T)
        history.append(stress)
        if prev - stress < tol:
            break
        prev = stress
    return X, float(history[-1]), np.asarray(history)


def mds_embed(D, d=3, mode="nonmetric", seed=0, restarts=DEFAULT_RESTARTS,
              max_iterations=DEFAULT_MAX_ITERATIONS, tol=DEFAULT_TOL):
    """Embed a distance matrix by stress minimization.

    Parameters
    ----------
    D : DistanceMatrix or array
        Symmetric non-negative dissimilarities.
    d : int
        Target dimension.
    mode : {"nonmetric", "metric"}
        Nonmetric regresses disparities monotonically against the
        dissimilarity ranks each iteration; metric skips the regression.
    seed : int
        Seeds the random restarts. Restart 0 always starts from the
        classical-MDS configuration.
    restarts : int
    max_iterations, tol : convergence controls per run.

    Returns
    -------
    Embedding
    """
    values = getattr(D, "values", D)
    delta = _check_dissimilarities(values)
    if mode not in ("nonmetric", "metric"):
        raise ValueError(f"unknown mds mode {mode!r}")
    n = delta.shape[0]
    if d < 1:
        raise ValueError("embedding dimension must be positive")
    iu = np.triu_indices(n, k=1)
    delta_flat = delta[iu]
    T = float((delta_flat * delta_flat).sum())
    if T == 0.0 or n <= 1:
        return Embedding(points=np.zeros((n, d)), stress=0.0, d=d,
                         stress_history=np.zeros(1), run_histories=[])
    # Fixed processing order for the monotone cone: stable sort so tied
    # dissimilarities keep one deterministic order across iterations.
    order = np.argsort(delta_flat, kind="stable")

    rng = np.random.default_rng(seed)
    scale = np.sqrt(T / delta_flat.size)
    inits = [classical_mds(delta, d)]
    for _ in range(max(0, restarts - 1)):
        inits.append(rng.standard_normal((n, d)) * scale)

    best = None
    run_histories = []
    for X0 in inits:
        X, stress, history = _smacof_single(
            delta_flat, order, X0, d, T, mode, max_iterations, tol)
        run_histories.append(history)
        if best is None or stress < best.stress:
            best = Embedding(points=X, stress=stress, d=d,
                             stress_history=history)
    best.run_histories = run_histories
    return best


def spherical_angles(points):
    """Azimuth and inclination of centered 3D embedding points.

    Angular view of a d = 3 embedding for plotting on a flat chart;
    returns (N, 2) with columns (theta, phi).
    """
    P = np.asarray(points, dtype=np.float64)
    if P.shape[1] != 3:
        raise ValueError("spherical projection needs d = 3 points")
    P = P - P.mean(axis=0)
    r = np.linalg.norm(P, axis=1)
    r[r == 0] = 1.0
    theta = np.arctan2(P[:, 1], P[:, 0])
    phi = np.arccos(np.clip(P[:, 2] / r, -1.0, 1.0))
    return np.column_stack([theta, phi])
