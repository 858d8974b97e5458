"""Self functional map signatures of triangulated surfaces.

The signature of a surface is the interaction matrix between the
eigenbases of its regular and scale-invariant Laplace-Beltrami operators.
It is invariant to rigid motion, vertex order, and uniform scale, and
stable under isometric deformation, which makes it usable directly for
shape classification, embedding, and correspondence.
"""

__version__ = "0.1.0"

from .errors import (EigensolverError, MeshError, MeshParseError,
                     MeshValidationError)
from .trimesh import TriMesh
from .meshio import load_mesh, write_off
from .operators import (DEFAULT_EPSILON, OperatorSet, build_operators,
                        gaussian_curvature, resolve_epsilon)
from .shapes import (ShapeSpec, bent_sheet, generate, icosphere, plane_patch,
                     spherocylinder, torus, uvsphere)
from .spectral import (SpectralBasis, build_basis, read_basis_csv,
                       smallest_eigenpairs, write_basis_csv)
from .selfmap import (SelfFunctionalMap, SignVectors, align_to_reference,
                      compute_sfm, read_signature_csv, sfm_distance,
                      sign_align, write_signature_csv, write_signature_pgm)
from .cluster import (DistanceMatrix, Labeling, confusion_matrix,
                      distance_matrix, kmeans_classify,
                      silhouette_from_distances)
from .embedding import Embedding, classical_mds, mds_embed
from .matching import MatchResult, match_shapes
from .manifest import (Manifest, ManifestEntry, ManifestError, load_manifest,
                       write_manifest)

__all__ = [
    "__version__",
    "EigensolverError", "MeshError", "MeshParseError", "MeshValidationError",
    "TriMesh", "load_mesh", "write_off",
    "DEFAULT_EPSILON", "OperatorSet", "build_operators",
    "gaussian_curvature", "resolve_epsilon",
    "ShapeSpec", "generate", "icosphere", "uvsphere", "spherocylinder",
    "torus", "plane_patch", "bent_sheet",
    "SpectralBasis", "build_basis", "smallest_eigenpairs",
    "read_basis_csv", "write_basis_csv",
    "SelfFunctionalMap", "SignVectors", "compute_sfm", "sign_align",
    "sfm_distance", "align_to_reference", "read_signature_csv",
    "write_signature_csv", "write_signature_pgm",
    "DistanceMatrix", "Labeling", "distance_matrix", "kmeans_classify",
    "confusion_matrix", "silhouette_from_distances",
    "Embedding", "classical_mds", "mds_embed",
    "MatchResult", "match_shapes",
    "Manifest", "ManifestEntry", "ManifestError", "load_manifest",
    "write_manifest",
]
