"""Procedural test surfaces and deterministic mesh transforms.

Every generator returns a validated, consistently oriented TriMesh and is
fully determined by its arguments; the transform helpers draw from seeded
generators so repeated calls reproduce identical meshes byte for byte.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .trimesh import TriMesh

KINDS = ("icosphere", "uvsphere", "spherocylinder", "torus", "plane_patch",
         "bent_sheet")


@dataclass
class ShapeSpec:
    """Recipe for one generated shape.

    Attributes
    ----------
    kind : str
        One of KINDS.
    params : dict
        Keyword arguments of the matching generator function.
    scale : float
        Uniform scale applied after generation.
    rotate_seed : int or None
        Seed for a uniform random rotation, None for no rotation.
    noise : float
        Normal-direction noise amplitude, relative to the mean edge length.
    noise_seed : int
        Seed for the noise displacements.
    permute_seed : int or None
        Seed for a random vertex relabeling, None to keep the order.
    """

    kind: str
    params: dict = field(default_factory=dict)
    scale: float = 1.0
    rotate_seed: int | None = None
    noise: float = 0.0
    noise_seed: int = 0
    permute_seed: int | None = None


def generate(spec):
    """Build the mesh a ShapeSpec describes, transforms included."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown shape kind {spec.kind!r}; expected one of "
                         f"{', '.join(KINDS)}")
    if spec.noise < 0:
        raise ValueError("noise amplitude must be non-negative")
    mesh = globals()[spec.kind](**spec.params)
    if mesh.n_vertices < 12:
        raise ValueError(
            f"resolution too coarse: {spec.kind} produced "
            f"{mesh.n_vertices} vertices, need at least 12")
    if spec.rotate_seed is not None:
        mesh = apply_rotation(mesh, random_rotation(spec.rotate_seed))
    if spec.scale != 1.0:
        if spec.scale <= 0:
            raise ValueError("scale must be positive")
        mesh = TriMesh(mesh.vertices * spec.scale, mesh.faces, validate=False)
    if spec.noise > 0:
        mesh = vertex_noise(mesh, spec.noise, spec.noise_seed)
    if spec.permute_seed is not None:
        perm = random_permutation(mesh.n_vertices, spec.permute_seed)
        mesh = permute_vertices(mesh, perm)
    return mesh.validate()


# ---------------------------------------------------------------------------
# Generators


def icosphere(radius=1.0, subdivisions=3):
    """Subdivided icosahedron projected onto a sphere.

    Vertex count is 10 * 4**subdivisions + 2.
    """
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)

    for _ in range(subdivisions):
        cache = {}
        verts_list = list(verts)

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            idx = cache.get(key)
            if idx is None:
                idx = len(verts_list)
                cache[key] = idx
                verts_list.append(0.5 * (verts_list[a] + verts_list[b]))
            return idx

        new_faces = np.empty((4 * len(faces), 3), dtype=np.int64)
        for n, (a, b, c) in enumerate(faces):
            ab = midpoint(int(a), int(b))
            bc = midpoint(int(b), int(c))
            ca = midpoint(int(c), int(a))
            new_faces[4 * n:4 * n + 4] = [
                [a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.array(verts_list)
        faces = new_faces

    verts *= radius / np.linalg.norm(verts, axis=1)[:, None]
    return TriMesh(verts, faces)


def _revolve(ring_radii, ring_z, segments, south_pole_z, north_pole_z):
    # Surface of revolution: pole fans plus quad bands, outward orientation.
    n_rings = len(ring_radii)
    theta = 2.0 * np.pi * np.arange(segments) / segments
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    verts = [np.array([[0.0, 0.0, south_pole_z]])]
    for r, z in zip(ring_radii, ring_z):
        verts.append(np.column_stack([r * cos_t, r * sin_t,
                                      np.full(segments, z)]))
    verts.append(np.array([[0.0, 0.0, north_pole_z]]))
    verts = np.concatenate(verts)

    def ring(r, s):
        return 1 + r * segments + s % segments

    faces = []
    for s in range(segments):
        faces.append([0, ring(0, s + 1), ring(0, s)])
    for r in range(n_rings - 1):
        for s in range(segments):
            ll, lr = ring(r, s), ring(r, s + 1)
            ul, ur = ring(r + 1, s), ring(r + 1, s + 1)
            faces.append([ll, lr, ur])
            faces.append([ll, ur, ul])
    north = 1 + n_rings * segments
    for s in range(segments):
        faces.append([north, ring(n_rings - 1, s), ring(n_rings - 1, s + 1)])
    return TriMesh(verts, np.array(faces, dtype=np.int64))


def uvsphere(radius=1.0, segments=24, rings=12):
    """Latitude-longitude sphere with pole fans."""
    if segments < 3 or rings < 2:
        raise ValueError("uvsphere needs segments >= 3 and rings >= 2")
    phi = -0.5 * np.pi + np.pi * np.arange(1, rings) / rings
    return _revolve(radius * np.cos(phi), radius * np.sin(phi), segments,
                    -radius, radius)


def spherocylinder(radius=1.0, height=1.0, segments=32, cap_rings=8):
    """Capsule: two hemispherical caps joined by a cylinder of the given
    height, welded watertight at the equatorial rings.

    height=0 degenerates to a sphere. Cylinder rings are spaced to match the
    cap ring spacing so the triangulation stays comparable across heights.
    """
    if radius <= 0 or height < 0:
        raise ValueError("spherocylinder needs radius > 0 and height >= 0")
    if segments < 3 or cap_rings < 2:
        raise ValueError("spherocylinder needs segments >= 3 and "
                         "cap_rings >= 2")
    half = 0.5 * height
    step = cap_rings / (0.5 * np.pi * radius)  # rings per unit length

    radii, zs = [], []
    south_phi = -0.5 * np.pi + 0.5 * np.pi * np.arange(1, cap_rings + 1) / cap_rings
    radii.extend(radius * np.cos(south_phi))
    zs.extend(-half + radius * np.sin(south_phi))
    if height > 0:
        n_h = max(1, round(height * step))
        for i in range(1, n_h):
            radii.append(radius)
            zs.append(-half + height * i / n_h)
        radii.append(radius)
        zs.append(half)
    north_phi = 0.5 * np.pi * np.arange(1, cap_rings) / cap_rings
    radii.extend(radius * np.cos(north_phi))
    zs.extend(half + radius * np.sin(north_phi))
    return _revolve(np.array(radii), np.array(zs), segments,
                    -half - radius, half + radius)


def torus(major_radius=1.0, minor_radius=0.4, major_segments=32,
          minor_segments=16):
    """Ring torus around the z axis."""
    if not 0 < minor_radius < major_radius:
        raise ValueError("torus needs 0 < minor_radius < major_radius")
    if major_segments < 3 or minor_segments < 3:
        raise ValueError("torus needs at least 3 segments in each direction")
    i = np.arange(major_segments)
    j = np.arange(minor_segments)
    theta = 2.0 * np.pi * i / major_segments
    phi = 2.0 * np.pi * j / minor_segments
    ct, st = np.cos(theta)[:, None], np.sin(theta)[:, None]
    cp, sp = np.cos(phi)[None, :], np.sin(phi)[None, :]
    ring = major_radius + minor_radius * cp
    verts = np.stack([ring * ct, ring * st,
                      np.broadcast_to(minor_radius * sp,
                                      (major_segments, minor_segments))],
                     axis=-1).reshape(-1, 3)

    def vid(a, b):
        return (a % major_segments) * minor_segments + b % minor_segments

    faces = []
    for a in range(major_segments):
        for b in range(minor_segments):
            v00, v10 = vid(a, b), vid(a + 1, b)
            v01, v11 = vid(a, b + 1), vid(a + 1, b + 1)
            faces.append([v00, v10, v11])
            faces.append([v00, v11, v01])
    return TriMesh(verts, np.array(faces, dtype=np.int64))


def _grid_faces(nx, ny):
    # Quad grid split along the ll-ur diagonal; CCW seen from +z.
    faces = []
    for j in range(ny):
        for i in range(nx):
            ll = j * (nx + 1) + i
            lr, ul = ll + 1, ll + nx + 1
            ur = ul + 1
            faces.append([ll, lr, ur])
            faces.append([ll, ur, ul])
    return np.array(faces, dtype=np.int64)


def plane_patch(width=1.0, height=1.0, nx=10, ny=10):
    """Flat rectangular patch, open boundary."""
    if nx < 1 or ny < 1:
        raise ValueError("plane_patch needs nx >= 1 and ny >= 1")
    x = np.linspace(0.0, width, nx + 1)
    y = np.linspace(0.0, height, ny + 1)
    xx, yy = np.meshgrid(x, y)
    verts = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)])
    return TriMesh(verts, _grid_faces(nx, ny))


def bent_sheet(width=2.0, height=1.0, nx=20, ny=10, angle=0.0):
    """Rectangular sheet bent around a cylinder arc by the given total angle.

    The bend is a rigid chain: column positions advance by exact steps of
    width/nx while turning angle/nx between steps, so every edge length of
    the flat sheet (grid edges and diagonals alike) is preserved exactly.
    angle=0 reproduces the flat patch.
    """
    if nx < 1 or ny < 1:
        raise ValueError("bent_sheet needs nx >= 1 and ny >= 1")
    if not 0 <= angle < 2.0 * np.pi:
        raise ValueError("bend angle must lie in [0, 2*pi)")
    du = width / nx
    turn = angle / nx
    directions = turn * np.arange(nx)
    x = np.concatenate([[0.0], np.cumsum(du * np.cos(directions))])
    z = np.concatenate([[0.0], np.cumsum(du * np.sin(directions))])
    y = np.linspace(0.0, height, ny + 1)
    verts = np.column_stack([
        np.tile(x, ny + 1),
        np.repeat(y, nx + 1),
        np.tile(z, ny + 1),
    ])
    return TriMesh(verts, _grid_faces(nx, ny))


# ---------------------------------------------------------------------------
# Transforms


def random_rotation(seed):
    """Uniform random rotation matrix, deterministic in the seed."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def apply_rotation(mesh, rotation):
    return TriMesh(mesh.vertices @ np.asarray(rotation).T, mesh.faces,
                   validate=False)


def vertex_normals(mesh):
    """Area-weighted vertex normals."""
    v, f = mesh.vertices, mesh.faces
    fn = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    out = np.zeros_like(v)
    for corner in range(3):
        np.add.at(out, f[:, corner], fn)
    norms = np.linalg.norm(out, axis=1)
    norms[norms == 0] = 1.0
    return out / norms[:, None]


def mean_edge_length(mesh):
    e = mesh.edges
    return float(np.mean(np.linalg.norm(
        mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)))


def vertex_noise(mesh, amplitude, seed):
    """Displace vertices along their normals.

    The displacement standard deviation is amplitude times the mean edge
    length, so the parameter is resolution-independent.
    """
    rng = np.random.default_rng(seed)
    sigma = amplitude * mean_edge_length(mesh)
    disp = sigma * rng.standard_normal(mesh.n_vertices)
    return TriMesh(mesh.vertices + disp[:, None] * vertex_normals(mesh),
                   mesh.faces, validate=False)


def random_permutation(n, seed):
    return np.random.default_rng(seed).permutation(n)


def permute_vertices(mesh, perm):
    """Relabel vertices so old index i becomes perm[i]."""
    perm = np.asarray(perm)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.size)
    return TriMesh(mesh.vertices[inverse], perm[mesh.faces], validate=False)
