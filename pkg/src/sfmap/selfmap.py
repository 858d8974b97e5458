"""The spectral self-interaction signature of a single surface.

The signature is the matrix of scale-invariant inner products between the
eigenbasis of the scale-invariant operator (rows) and the eigenbasis of the
regular operator (columns). Because each basis vector is determined only up
to sign, signatures are compared under the best rank-one sign flip, found
exactly by exhaustive search over the column patterns with a closed-form
optimal row pattern per candidate.
"""

from dataclasses import dataclass

import numpy as np

from .operators import DEFAULT_EPSILON, build_operators
from .spectral import DENSE_THRESHOLD, build_basis

# Exhaustive sign search is 2^(n-1) patterns; refuse beyond this width.
MAX_SIGN_COLUMNS = 20
_PATTERN_CHUNK = 4096


@dataclass
class SelfFunctionalMap:
    """Signature matrix of one mesh.

    Attributes
    ----------
    matrix : numpy.ndarray
        Shape (m, n); rows follow the scale-invariant basis, columns the
        regular basis. Entry (0, 0) is 1 and all entries lie in [-1, 1] up
        to rounding.
    epsilon : float
        Curvature regularization used when building the operators.
    mesh_id : str
        Identifier carried through reports and file formats.
    """

    matrix: np.ndarray
    epsilon: float
    mesh_id: str = ""

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]


@dataclass
class SignVectors:
    """Rank-one sign pattern relating two signatures.

    row_signs[0] is +1 by convention; (row_signs, col_signs) and their joint
    negation produce the same flip matrix.
    """

    row_signs: np.ndarray
    col_signs: np.ndarray
    residual: float


def compute_sfm(mesh, n=7, m=7, epsilon=DEFAULT_EPSILON, mesh_id="",
                method="auto", dense_threshold=DENSE_THRESHOLD, seed=0):
    """Compute the signature of a mesh.

    Parameters
    ----------
    mesh : TriMesh
    n : int
        Regular basis size (columns).
    m : int
        Scale-invariant basis size (rows).
    epsilon : float or str
        Curvature regularization policy.
    mesh_id : str
        Identifier stored with the result.
    method, dense_threshold, seed
        Passed to the eigensolver.

    Returns
    -------
    SelfFunctionalMap
    """
    ops = build_operators(mesh, epsilon=epsilon)
    regular = build_basis(ops, "regular", n, method=method,
                          dense_threshold=dense_threshold, seed=seed)
    scale_inv = build_basis(ops, "scale_invariant", m, method=method,
                            dense_threshold=dense_threshold, seed=seed)
    return signature_from_bases(scale_inv, regular, ops, mesh_id=mesh_id)


def signature_from_bases(scale_inv_basis, regular_basis, operators,
                         mesh_id=""):
    """Assemble the signature from two prepared bases."""
    weighted = operators.scale_invariant_mass[:, None] * regular_basis.eigenvectors
    C = scale_inv_basis.eigenvectors.T @ weighted
    return SelfFunctionalMap(matrix=C, epsilon=operators.epsilon,
                             mesh_id=mesh_id)


def _as_matrix(value):
    return value.matrix if isinstance(value, SelfFunctionalMap) else np.asarray(value)


def _column_patterns(n, start, stop):
    # Sign patterns with col 0 fixed at +1, encoded by the bits of the index.
    idx = np.arange(start, stop)[:, None]
    bits = (idx >> np.arange(n - 1)[None, :]) & 1
    pat = np.ones((stop - start, n))
    pat[:, 1:] = 1.0 - 2.0 * bits
    return pat


def _best_alignment(ref, C):
    """Exact minimizer of the L1 misfit over rank-one sign flips.

    Returns (row_signs, col_signs, residual). Ties prefer +1 rows and the
    lowest-index column pattern.
    """
    ref = np.asarray(ref, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if ref.shape != C.shape:
        raise ValueError(f"signature shapes differ: {ref.shape} vs {C.shape}")
    m, n = C.shape
    if n > MAX_SIGN_COLUMNS:
        raise ValueError(
            f"sign search over {n} columns needs 2^{n - 1} patterns; "
            f"the exhaustive solver is limited to {MAX_SIGN_COLUMNS} "
            "columns. Reduce the regular basis size.")

    n_patterns = 1 << (n - 1)
    best = (np.inf, None, None)
    for start in range(0, n_patterns, _PATTERN_CHUNK):
        stop = min(start + _PATTERN_CHUNK, n_patterns)
        pat = _column_patterns(n, start, stop)          # (c, n)
        flipped = pat[:, None, :] * C[None, :, :]       # (c, m, n)
        keep = np.abs(ref[None, :, :] - flipped).sum(axis=2)   # row kept
        flip = np.abs(ref[None, :, :] + flipped).sum(axis=2)   # row negated
        totals = np.minimum(keep, flip).sum(axis=1)
        pick = int(np.argmin(totals))
        if totals[pick] < best[0]:
            rows = np.where(keep[pick] <= flip[pick], 1.0, -1.0)
            best = (float(totals[pick]), rows, pat[pick])
    residual, rows, cols = best
    if rows[0] < 0:
        rows, cols = -rows, -cols
    return rows, cols, residual


def sign_align(reference, C):
    """Align a signature to a reference over the sign ambiguity.

    Parameters
    ----------
    reference, C : SelfFunctionalMap or array
        Same shape.

    Returns
    -------
    (SignVectors, numpy.ndarray)
        The optimal sign pattern and the flipped copy of C.
    """
    R = _as_matrix(reference)
    M = _as_matrix(C)
    rows, cols, residual = _best_alignment(R, M)
    aligned = (rows[:, None] * cols[None, :]) * M
    return SignVectors(row_signs=rows, col_signs=cols, residual=residual), aligned


def sfm_distance(first, second):
    """Squared entrywise-L1 distance between two signatures, minimized over
    the rank-one sign ambiguity. Symmetric, zero iff the signatures agree up
    to signs."""
    _, _, residual = _best_alignment(_as_matrix(first), _as_matrix(second))
    return residual * residual


def align_to_reference(maps, reference_index=0):
    """Flip every signature in a list onto a common representative.

    Parameters
    ----------
    maps : sequence of SelfFunctionalMap
    reference_index : int
        Which entry acts as the representative; it is returned unchanged.

    Returns
    -------
    list of SelfFunctionalMap
    """
    ref = maps[reference_index]
    out = []
    for i, sm in enumerate(maps):
        if i == reference_index:
            out.append(sm)
            continue
        _, aligned = sign_align(ref, sm)
        out.append(SelfFunctionalMap(matrix=aligned, epsilon=sm.epsilon,
                                     mesh_id=sm.mesh_id))
    return out


# ---------------------------------------------------------------------------
# File formats


def write_signature_csv(sm, path):
    """Signature CSV: header line "m,n,epsilon,mesh_id", then m rows of n
    entries at 17 significant digits."""
    lines = [f"{sm.m},{sm.n},{sm.epsilon:.17g},{sm.mesh_id}"]
    for row in sm.matrix:
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_signature_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 4:
            raise ValueError(f"{path}: malformed signature header")
        m, n = int(header[0]), int(header[1])
        epsilon = float(header[2])
        mesh_id = header[3]
        matrix = np.loadtxt(fh, delimiter=",", ndmin=2)
    if matrix.shape != (m, n):
        raise ValueError(f"{path}: expected {m}x{n} entries, "
                         f"got {matrix.shape[0]}x{matrix.shape[1]}")
    return SelfFunctionalMap(matrix=matrix, epsilon=epsilon, mesh_id=mesh_id)


def write_signature_pgm(sm, path):
    """8-bit binary PGM of the signature, [-1, 1] mapped affinely onto
    [0, 255] with clipping."""
    scaled = np.clip((sm.matrix + 1.0) * 0.5, 0.0, 1.0)
    pixels = np.round(scaled * 255.0).astype(np.uint8)
    header = f"P5\n{sm.n} {sm.m}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + pixels.tobytes())
