"""Discrete differential operators on triangle meshes.

Builds the three diagonal-or-sparse matrices the spectral pipeline consumes:
the cotangent stiffness matrix, the lumped vertex area mass, and the
regularized absolute Gaussian curvature. Areas and angles are derived from
edge lengths only, so two meshes with equal edge lengths produce equal
operators up to rounding regardless of their embedding.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import MeshValidationError

# Smallest admissible triangle angle, radians. Below this the cotangent
# weights blow up and the face is reported instead.
MIN_ANGLE = 1e-6

# Absolute floor for the curvature regularizer, in inverse squared mesh units.
EPSILON_FLOOR = 1e-8

DEFAULT_EPSILON = "rel:1e-3"


@dataclass(frozen=True)
class OperatorSet:
    """Operators of one mesh, ready for the two eigenvalue problems.

    Attributes
    ----------
    stiffness : scipy.sparse.csr_matrix
        Symmetric cotangent matrix W, positive semi-definite with row sums
        zero.
    vertex_area : numpy.ndarray
        Diagonal of the lumped mass matrix A (one third of incident face
        area per vertex).
    curvature : numpy.ndarray
        Diagonal of K, the regularized absolute Gaussian curvature
        sqrt((defect / area)^2 + epsilon^2).
    epsilon : float
        Resolved regularization constant.
    """

    stiffness: sparse.csr_matrix
    vertex_area: np.ndarray
    curvature: np.ndarray
    epsilon: float

    @property
    def n_vertices(self):
        return self.vertex_area.shape[0]

    @property
    def scale_invariant_mass(self):
        """Diagonal of K * A, the mass of the scale-invariant operator."""
        return self.curvature * self.vertex_area


def _edge_lengths(mesh):
    """Per-face edge lengths (l0, l1, l2), l_i opposite corner i."""
    v = mesh.vertices
    f = mesh.faces
    l0 = np.linalg.norm(v[f[:, 2]] - v[f[:, 1]], axis=1)
    l1 = np.linalg.norm(v[f[:, 0]] - v[f[:, 2]], axis=1)
    l2 = np.linalg.norm(v[f[:, 1]] - v[f[:, 0]], axis=1)
    return l0, l1, l2


def face_areas(mesh):
    """Triangle areas via the numerically stable Heron variant.

    Returns
    -------
    numpy.ndarray
        Shape (nf,).
    """
    lengths = np.sort(np.column_stack(_edge_lengths(mesh)), axis=1)
    c, b, a = lengths[:, 0], lengths[:, 1], lengths[:, 2]  # a >= b >= c
    t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(t, 0.0))


def face_angles(mesh):
    """Interior angles per face corner, law of cosines on edge lengths.

    Returns
    -------
    numpy.ndarray
        Shape (nf, 3); entry (t, i) is the angle at corner i of face t.
    """
    l0, l1, l2 = _edge_lengths(mesh)
    sq0, sq1, sq2 = l0 * l0, l1 * l1, l2 * l2
    cos0 = (sq1 + sq2 - sq0) / (2.0 * l1 * l2)
    cos1 = (sq2 + sq0 - sq1) / (2.0 * l2 * l0)
    cos2 = (sq0 + sq1 - sq2) / (2.0 * l0 * l1)
    return np.arccos(np.clip(np.column_stack([cos0, cos1, cos2]), -1.0, 1.0))


def vertex_areas(mesh):
    """Diagonal of the lumped mass matrix.

    Each vertex receives one third of the area of every incident face.

    Returns
    -------
    numpy.ndarray
        Shape (nv,), strictly positive entries.
    """
    areas = face_areas(mesh)
    out = np.zeros(mesh.n_vertices)
    third = areas / 3.0
    for corner in range(3):
        np.add.at(out, mesh.faces[:, corner], third)
    return out


def angle_defects(mesh):
    """Angular defect per vertex.

    Interior vertices use a 2*pi reference, boundary vertices pi, so straight
    boundary segments carry zero defect. Summed over a closed mesh this equals
    2*pi times the Euler characteristic.

    Returns
    -------
    numpy.ndarray
        Shape (nv,).
    """
    angles = face_angles(mesh)
    total = np.zeros(mesh.n_vertices)
    for corner in range(3):
        np.add.at(total, mesh.faces[:, corner], angles[:, corner])
    reference = np.where(mesh.boundary_vertex_mask(), np.pi, 2.0 * np.pi)
    return reference - total


def resolve_epsilon(policy, raw_curvature_abs):
    """Resolve an epsilon policy against the mesh's raw curvature scale.

    Parameters
    ----------
    policy : float or str
        A positive float is taken as an absolute epsilon. Strings accept
        "abs:<value>" or "rel:<factor>"; the relative form sets epsilon to
        factor * median(|defect| / area), floored at EPSILON_FLOOR.
    raw_curvature_abs : numpy.ndarray
        Unregularized absolute curvature per vertex.

    Returns
    -------
    float
    """
    if isinstance(policy, str):
        kind, _, value = policy.partition(":")
        if kind == "rel":
            factor = float(value)
            if factor <= 0:
                raise ValueError(f"relative epsilon factor must be positive, "
                                 f"got {factor}")
            return max(EPSILON_FLOOR, factor * float(np.median(raw_curvature_abs)))
        if kind == "abs":
            policy = float(value)
        else:
            try:
                policy = float(policy)
            except ValueError:
                raise ValueError(
                    f"epsilon policy {policy!r} not understood; expected a "
                    f"number, 'abs:<value>' or 'rel:<factor>'") from None
    eps = float(policy)
    if eps <= 0:
        raise ValueError(f"absolute epsilon must be positive, got {eps}")
    return eps


def gaussian_curvature(mesh, areas=None, epsilon=DEFAULT_EPSILON):
    """Regularized absolute Gaussian curvature, diagonal of K.

    K_ii = sqrt((defect_i / area_i)^2 + epsilon^2), so K_ii >= epsilon > 0
    everywhere and flat regions contribute epsilon rather than zero.

    Parameters
    ----------
    mesh : TriMesh
    areas : numpy.ndarray, optional
        Precomputed vertex areas.
    epsilon : float or str
        Policy accepted by :func:`resolve_epsilon`.

    Returns
    -------
    (numpy.ndarray, float)
        The diagonal of K and the resolved epsilon.
    """
    if areas is None:
        areas = vertex_areas(mesh)
    raw = np.abs(angle_defects(mesh)) / areas
    eps = resolve_epsilon(epsilon, raw)
    return np.sqrt(raw * raw + eps * eps), eps


def cotan_weights(mesh):
    """Symmetric cotangent stiffness matrix W.

    Off-diagonal entries are minus half the sum of the cotangents of the
    angles opposite each edge (one angle on boundary edges, unclamped when
    negative for obtuse triangles); the diagonal is minus the row sum of the
    off-diagonal part, so rows sum to zero by construction.

    Raises
    ------
    MeshValidationError
        When a face carries an angle below MIN_ANGLE radians.
    """
    angles = face_angles(mesh)
    tiny = np.flatnonzero((angles < MIN_ANGLE).any(axis=1))
    if tiny.size:
        raise MeshValidationError(
            f"face {tiny[0]} has an angle below {MIN_ANGLE} rad; cotangent "
            "weights would be unstable", element=int(tiny[0]))

    l0, l1, l2 = _edge_lengths(mesh)
    areas = face_areas(mesh)
    sq0, sq1, sq2 = l0 * l0, l1 * l1, l2 * l2
    # cot(angle at corner i) = (l_j^2 + l_k^2 - l_i^2) / (4 * area)
    cot0 = (sq1 + sq2 - sq0) / (4.0 * areas)
    cot1 = (sq2 + sq0 - sq1) / (4.0 * areas)
    cot2 = (sq0 + sq1 - sq2) / (4.0 * areas)

    f = mesh.faces
    # The angle at corner i faces edge (j, k).
    rows = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
    cols = np.concatenate([f[:, 2], f[:, 0], f[:, 1]])
    vals = 0.5 * np.concatenate([cot0, cot1, cot2])

    nv = mesh.n_vertices
    off = sparse.coo_matrix(
        (-np.concatenate([vals, vals]),
         (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(nv, nv)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sparse.diags(diag)).tocsr()


def build_operators(mesh, epsilon=DEFAULT_EPSILON):
    """Assemble the full operator set of one mesh.

    Parameters
    ----------
    mesh : TriMesh
    epsilon : float or str
        Curvature regularization policy, see :func:`resolve_epsilon`.

    Returns
    -------
    OperatorSet
    """
    areas = vertex_areas(mesh)
    curv, eps = gaussian_curvature(mesh, areas=areas, epsilon=epsilon)
    return OperatorSet(stiffness=cotan_weights(mesh), vertex_area=areas,
                       curvature=curv, epsilon=eps)


def face_gradients(mesh, values):
    """Gradient of a piecewise linear vertex function, one vector per face.

    Parameters
    ----------
    mesh : TriMesh
    values : numpy.ndarray
        Shape (nv,).

    Returns
    -------
    numpy.ndarray
        Shape (nf, 3), the in-plane gradient of each face.
    """
    v = mesh.vertices
    f = mesh.faces
    values = np.asarray(values, dtype=np.float64)
    normal = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    double_area = np.linalg.norm(normal, axis=1)
    unit = normal / double_area[:, None]
    grad = np.zeros((f.shape[0], 3))
    for corner in range(3):
        j, k = (corner + 1) % 3, (corner + 2) % 3
        edge = v[f[:, k]] - v[f[:, j]]
        grad += values[f[:, corner], None] * np.cross(unit, edge)
    return grad / double_area[:, None]
