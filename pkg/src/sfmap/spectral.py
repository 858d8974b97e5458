"""Eigenpairs of the discrete operator pencils.

Both operators share the stiffness matrix W and differ in the diagonal mass:
the regular pencil is (W, A), the scale-invariant pencil (W, K*A). The
generalized problem W x = lambda B x is reduced exactly to an ordinary
symmetric one through the similarity S = B^{-1/2} W B^{-1/2}, which is
lossless because B is diagonal and positive.

Small problems go through the dense LAPACK path; large ones through a
shift-inverted block subspace iteration with full reorthogonalization, so the
two routes stay independent of each other and can be cross-checked.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import EigensolverError

logger = logging.getLogger(__name__)

DENSE_THRESHOLD = 3000
RESIDUAL_TOL = 1e-8

PENCILS = ("regular", "scale_invariant")


@dataclass
class SpectralBasis:
    """Truncated eigenbasis of one pencil.

    Attributes
    ----------
    eigenvalues : numpy.ndarray
        Ascending, non-negative, shape (k,).
    eigenvectors : numpy.ndarray
        Shape (nv, k). Every column has unit norm in the scale-invariant
        inner product (x^T diag(norm_diag) x = 1), including the regular
        pencil's columns, and carries a deterministic sign: the entry of
        largest magnitude is positive.
    norm_diag : numpy.ndarray
        Diagonal of K*A used for the normalization above.
    pencil : str
        "regular" or "scale_invariant".
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    norm_diag: np.ndarray
    pencil: str

    @property
    def k(self):
        return self.eigenvalues.shape[0]

    @property
    def n_vertices(self):
        return self.eigenvectors.shape[0]


def smallest_eigenpairs(W, mass_diag, k, method="auto",
                        dense_threshold=DENSE_THRESHOLD, tol=RESIDUAL_TOL,
                        seed=0, maxiter=None):
    """Smallest k eigenpairs of W x = lambda B x with diagonal positive B.

    Parameters
    ----------
    W : scipy sparse matrix
        Symmetric positive semi-definite stiffness.
    mass_diag : numpy.ndarray
        Diagonal of B, strictly positive.
    k : int
        Number of eigenpairs, 1 <= k <= nv.
    method : str
        "auto" picks dense below dense_threshold vertices, "dense" and
        "iterative" force a path.
    dense_threshold : int
    tol : float
        Relative residual target of the iterative path.
    seed : int
        Seed of the iterative starting block.
    maxiter : int, optional
        Outer iteration cap of the iterative path; defaults to 300 * k.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        Eigenvalues ascending (k,), eigenvectors (nv, k) with
        x^T B x = identity. Tiny negative eigenvalues of the semi-definite
        pencil are clamped to zero.
    """
    n = W.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    mass_diag = np.asarray(mass_diag, dtype=np.float64)
    if mass_diag.shape != (n,) or (mass_diag <= 0).any():
        raise ValueError("mass_diag must be a strictly positive vector "
                         "matching W")
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "dense" if n <= dense_threshold else "iterative"

    inv_sqrt = 1.0 / np.sqrt(mass_diag)
    if method == "dense":
        S = (W.multiply(inv_sqrt[:, None]).multiply(inv_sqrt[None, :])).toarray()
        S = 0.5 * (S + S.T)
        vals, Y = scipy.linalg.eigh(S, subset_by_index=(0, k - 1))
    else:
        vals, Y = _subspace_iteration(W, inv_sqrt, k, tol, seed, maxiter)
    X = inv_sqrt[:, None] * Y
    return np.maximum(vals, 0.0), X


def _subspace_iteration(W, inv_sqrt, k, tol, seed, maxiter):
    # Shift-inverted block subspace iteration on S = B^-1/2 W B^-1/2.
    # Each sweep applies (S + tau I)^-1 to the block, reorthogonalizes it in
    # full through QR, and extracts Ritz pairs of S; the shift keeps the
    # factorization definite while leaving the small end of the spectrum
    # dominant under inversion.
    n = W.shape[0]
    S = W.multiply(inv_sqrt[:, None]).multiply(inv_sqrt[None, :]).tocsr()
    S = (S + S.T) * 0.5
    diag_scale = float(np.mean(S.diagonal()))
    tau = max(1e-3 * diag_scale, 1e-30)
    block = min(n, max(2 * k, k + 8))
    if maxiter is None:
        maxiter = 300 * k

    lu = splu((S + tau * sparse.identity(n, format="csr")).tocsc())
    rng = np.random.default_rng(seed)
    Q = np.linalg.qr(rng.standard_normal((n, block)))[0]

    worst = np.inf
    for sweep in range(maxiter):
        Q = np.linalg.qr(lu.solve(Q))[0]
        T = Q.T @ (S @ Q)
        theta, U = scipy.linalg.eigh(0.5 * (T + T.T))
        Y = Q @ U
        R = S @ Y[:, :k] - Y[:, :k] * theta[None, :k]
        # Per-pair normalization: dividing by a global spectral scale would
        # declare victory while the small eigenvalues are still wrong.
        denom = np.maximum(np.abs(theta[:k]), tau)
        res = np.linalg.norm(R, axis=0) / denom
        worst = float(res.max())
        if worst <= tol:
            logger.debug("subspace iteration converged in %d sweeps "
                         "(worst residual %.3e)", sweep + 1, worst)
            return theta[:k], Y[:, :k]
        Q = Y
    raise EigensolverError(
        f"subspace iteration did not converge in {maxiter} sweeps "
        f"(worst relative residual {worst:.3e}, target {tol:.1e})",
        worst_residual=worst)


def build_basis(operators, pencil, k, method="auto",
                dense_threshold=DENSE_THRESHOLD, tol=RESIDUAL_TOL, seed=0):
    """Solve one pencil and normalize the basis for signature assembly.

    The eigenvectors come out B-orthonormal; afterwards every column is
    rescaled to unit norm in the scale-invariant inner product K*A (a no-op
    for the scale-invariant pencil itself) and given the deterministic sign
    of its largest-magnitude entry.

    Parameters
    ----------
    operators : OperatorSet
    pencil : str
        "regular" or "scale_invariant".
    k : int
        Basis size.

    Returns
    -------
    SpectralBasis
    """
    if pencil not in PENCILS:
        raise ValueError(f"pencil must be one of {PENCILS}, got {pencil!r}")
    si_mass = operators.scale_invariant_mass
    mass = operators.vertex_area if pencil == "regular" else si_mass
    vals, X = smallest_eigenpairs(
        operators.stiffness, mass, k, method=method,
        dense_threshold=dense_threshold, tol=tol, seed=seed)
    norms = np.sqrt(np.einsum("ij,i,ij->j", X, si_mass, X))
    X = X / norms[None, :]
    X = _fix_signs(X)
    return SpectralBasis(eigenvalues=vals, eigenvectors=X,
                         norm_diag=si_mass, pencil=pencil)


def _fix_signs(X):
    anchor = np.abs(X).argmax(axis=0)
    signs = np.sign(X[anchor, np.arange(X.shape[1])])
    signs[signs == 0] = 1.0
    return X * signs[None, :]


def pencil_residuals(W, mass_diag, eigenvalues, eigenvectors):
    """Relative residual per eigenpair, for verification.

    ||W x - lambda B x|| / (||W|| ||x||) with ||W|| estimated from the
    largest absolute row sum.
    """
    B = np.asarray(mass_diag)
    R = W @ eigenvectors - B[:, None] * eigenvectors * eigenvalues[None, :]
    wnorm = float(np.abs(W).sum(axis=1).max())
    xnorm = np.linalg.norm(eigenvectors, axis=0)
    return np.linalg.norm(R, axis=0) / (wnorm * xnorm)


def write_basis_csv(basis, path):
    """Dump a basis as CSV: header (k, pencil, nv), eigenvalue line, then
    one row of k eigenvector entries per vertex."""
    lines = [f"{basis.k},{basis.pencil},{basis.n_vertices}",
             ",".join(f"{v:.17g}" for v in basis.eigenvalues)]
    for row in basis.eigenvectors:
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_basis_csv(path, norm_diag=None):
    """Read a basis dump written by :func:`write_basis_csv`.

    norm_diag is not stored in the file; pass it when the basis will be used
    for signature or correspondence work.
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 3:
            raise ValueError(f"{path}: malformed basis header")
        k, pencil, nv = int(header[0]), header[1], int(header[2])
        vals = np.array([float(t) for t in fh.readline().split(",")])
        vecs = np.loadtxt(fh, delimiter=",", ndmin=2)
    if vals.shape != (k,) or vecs.shape != (nv, k):
        raise ValueError(f"{path}: basis dump shape mismatch")
    if norm_diag is None:
        norm_diag = np.full(nv, np.nan)
    return SpectralBasis(eigenvalues=vals, eigenvectors=vecs,
                         norm_diag=np.asarray(norm_diag), pencil=pencil)
