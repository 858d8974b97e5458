"""Triangle mesh container and structural validation."""

import logging

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import MeshValidationError

logger = logging.getLogger(__name__)

# Faces with area below this fraction of the squared longest edge are treated
# as collapsed (collinear or coincident vertices).
_DEGENERATE_AREA_REL = 1e-12


class TriMesh:
    """Indexed triangle mesh with 3D vertex positions.

    Parameters
    ----------
    vertices : array_like
        Float array of shape (nv, 3).
    faces : array_like
        Integer array of shape (nf, 3). Faces are oriented counterclockwise
        when viewed from outside.
    validate : bool
        Run structural validation on construction. Default True.

    Notes
    -----
    Validation enforces: indices in range, no repeated vertex within a face,
    no zero-area faces, every edge shared by at most two faces with consistent
    orientation, and a single connected component. Unreferenced vertices count
    as disconnection.
    """

    def __init__(self, vertices, faces, validate=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshValidationError(
                f"vertices must have shape (nv, 3), got {self.vertices.shape}"
            )
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshValidationError(
                f"faces must have shape (nf, 3), got {self.faces.shape}"
            )
        if not np.isfinite(self.vertices).all():
            raise MeshValidationError("vertices contain non-finite coordinates")
        self._edge_cache = None
        if validate:
            self.validate()

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    def _edges(self):
        """Unique undirected edges, their face counts, and directed edge list."""
        if self._edge_cache is None:
            directed = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
            undirected = np.sort(directed, axis=1)
            edges, counts = np.unique(undirected, axis=0, return_counts=True)
            self._edge_cache = (edges, counts, directed)
        return self._edge_cache

    @property
    def edges(self):
        """Unique undirected edges as an (ne, 2) array."""
        return self._edges()[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    def euler_characteristic(self):
        """V - E + F."""
        return self.n_vertices - self.n_edges + self.n_faces

    def boundary_vertex_mask(self):
        """Boolean mask of vertices lying on an edge with a single face."""
        edges, counts, _ = self._edges()
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[edges[counts == 1].ravel()] = True
        return mask

    def is_closed(self):
        """True when every edge is shared by exactly two faces."""
        _, counts, _ = self._edges()
        return bool(counts.size) and bool((counts == 2).all())

    def validate(self):
        nv = self.n_vertices
        faces = self.faces
        if faces.shape[0] == 0:
            raise MeshValidationError("mesh has no faces")
        bad = np.flatnonzero((faces < 0).any(axis=1) | (faces >= nv).any(axis=1))
        if bad.size:
            raise MeshValidationError(
                f"face {bad[0]} references vertex index outside [0, {nv})",
                element=int(bad[0]),
            )
        repeated = np.flatnonzero(
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 2] == faces[:, 0])
        )
        if repeated.size:
            raise MeshValidationError(
                f"face {repeated[0]} repeats a vertex index",
                element=int(repeated[0]),
            )

        v = self.vertices
        e0 = v[faces[:, 2]] - v[faces[:, 1]]
        e1 = v[faces[:, 0]] - v[faces[:, 2]]
        e2 = v[faces[:, 1]] - v[faces[:, 0]]
        lmax2 = np.maximum.reduce(
            [(e0 * e0).sum(1), (e1 * e1).sum(1), (e2 * e2).sum(1)]
        )
        areas = 0.5 * np.linalg.norm(np.cross(e2, -e1), axis=1)
        collapsed = np.flatnonzero(areas <= _DEGENERATE_AREA_REL * lmax2)
        if collapsed.size:
            raise MeshValidationError(
                f"face {collapsed[0]} has zero area (collapsed vertices)",
                element=int(collapsed[0]),
            )

        edges, counts, directed = self._edges()
        over = np.flatnonzero(counts > 2)
        if over.size:
            i, j = edges[over[0]]
            raise MeshValidationError(
                f"edge ({i}, {j}) is shared by {counts[over[0]]} faces; "
                "mesh is not edge-manifold",
                element=(int(i), int(j)),
            )
        dedges, dcounts = np.unique(directed, axis=0, return_counts=True)
        dup = np.flatnonzero(dcounts > 1)
        if dup.size:
            i, j = dedges[dup[0]]
            raise MeshValidationError(
                f"directed edge ({i}, {j}) appears {dcounts[dup[0]]} times; "
                "mesh is non-orientable or inconsistently oriented",
                element=(int(i), int(j)),
            )

        n_comp = self._component_labels()[0]
        if n_comp != 1:
            raise MeshValidationError(
                f"mesh has {n_comp} connected components; expected 1 "
                "(pass largest_component=True at load time to extract one)"
            )
        return self

    def _component_labels(self):
        edges = self.edges
        adj = sparse.coo_matrix(
            (np.ones(len(edges)), (edges[:, 0], edges[:, 1])),
            shape=(self.n_vertices, self.n_vertices),
        )
        return csgraph.connected_components(adj, directed=False)

    def largest_component(self):
        """Extract the component with the most vertices as a new mesh.

        Unreferenced vertices are dropped. Vertex order within the kept
        component is preserved.
        """
        n_comp, labels = self._component_labels()
        referenced = np.zeros(self.n_vertices, dtype=bool)
        referenced[self.faces.ravel()] = True
        sizes = np.bincount(labels[referenced], minlength=n_comp)
        keep = int(np.argmax(sizes))
        vmask = (labels == keep) & referenced
        remap = -np.ones(self.n_vertices, dtype=np.int64)
        remap[vmask] = np.arange(vmask.sum())
        fmask = vmask[self.faces].all(axis=1)
        logger.info(
            "largest component: kept %d of %d vertices, %d of %d faces",
            vmask.sum(), self.n_vertices, fmask.sum(), self.n_faces,
        )
        return TriMesh(self.vertices[vmask], remap[self.faces[fmask]])
