"""Correspondence recovery from one signature.

The soft map from a source surface S to a target Q is assembled in the
spectral domain as

    P = Phi_Q G_Q^{-1} rho (Phi~_S)^T D_S,   rho = C_S^T,

where Phi are regular-basis columns, Phi~ scale-invariant ones, D = K*A is
the scale-invariant mass, and G_Q = Phi_Q^T D_Q Phi_Q. The transpose of the
continuous formula must become the adjoint under the discrete inner
product, hence the D_S factor; G_Q^{-1} compensates the regular basis being
normalized but not orthogonal in D, which makes the consistency identity
<phi_i^Q, P phi~_j^S>_{D_Q} = rho_ij exact on a shared basis.
"""

import numpy as np
from dataclasses import dataclass

from .selfmap import _as_matrix


@dataclass
class MatchResult:
    """Vertex correspondence plus the dense soft map.

    correspondence[j] is the Q-vertex matched to S-vertex j (the argmax of
    column j of the soft map). consistency is the largest entrywise
    deviation of the recovered spectral coefficients from rho.
    """

    correspondence: np.ndarray
    soft_map: np.ndarray
    consistency: float


def match_shapes(si_S, reg_S, si_Q, reg_Q, C_S=None):
    """Recover a point-to-point map between two classified-together shapes.

    Parameters
    ----------
    si_S, reg_S : SpectralBasis
        Scale-invariant and regular bases of the source.
    si_Q, reg_Q : SpectralBasis
        Same for the target. Basis sizes must match the source's.
    C_S : SelfFunctionalMap or array, optional
        Source signature at the bases' sizes; recomputed from the bases
        when omitted.

    Returns
    -------
    MatchResult
    """
    if reg_Q.k != reg_S.k or si_Q.k != si_S.k:
        raise ValueError(
            f"basis sizes differ between shapes: source ({si_S.k}, {reg_S.k}) "
            f"vs target ({si_Q.k}, {reg_Q.k})")
    D_S = si_S.norm_diag
    D_Q = reg_Q.norm_diag
    if C_S is None:
        C = si_S.eigenvectors.T @ (D_S[:, None] * reg_S.eigenvectors)
    else:
        C = _as_matrix(C_S)
    if C.shape != (si_S.k, reg_S.k):
        raise ValueError(
            f"signature shape {C.shape} does not match basis sizes "
            f"({si_S.k}, {reg_S.k})")
    rho = C.T

    phi_Q = reg_Q.eigenvectors
    G_Q = phi_Q.T @ (D_Q[:, None] * phi_Q)
    mid = np.linalg.solve(G_Q, rho)
    right = mid @ (D_S[:, None] * si_S.eigenvectors).T
    P = phi_Q @ right

    correspondence = np.argmax(P, axis=0)
    check = phi_Q.T @ (D_Q[:, None] * (P @ si_S.eigenvectors))
    consistency = float(np.abs(check - rho).max())
    return MatchResult(correspondence=correspondence, soft_map=P,
                       consistency=consistency)
