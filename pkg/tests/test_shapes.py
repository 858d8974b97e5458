"""Procedural generators and the spec-driven transform pipeline."""

import numpy as np
import pytest

from sfmap import shapes
from sfmap.operators import face_areas


def test_kinds_listed():
    for kind in ("icosphere", "uvsphere", "spherocylinder", "torus",
                 "plane_patch", "bent_sheet"):
        assert kind in shapes.KINDS


def test_generate_deterministic():
    spec = shapes.ShapeSpec("uvsphere", dict(segments=12, rings=6),
                            noise=0.02, noise_seed=3, permute_seed=4)
    a = shapes.generate(spec)
    b = shapes.generate(spec)
    assert a.vertices.tobytes() == b.vertices.tobytes()
    assert a.faces.tobytes() == b.faces.tobytes()


def test_generate_unknown_kind():
    with pytest.raises(ValueError, match="unknown shape kind"):
        shapes.generate(shapes.ShapeSpec("klein_bottle"))


def test_generate_rejects_negative_noise():
    with pytest.raises(ValueError, match="noise"):
        shapes.generate(shapes.ShapeSpec("torus", noise=-0.1))


def test_generate_rejects_bad_scale():
    with pytest.raises(ValueError, match="scale"):
        shapes.generate(shapes.ShapeSpec("torus", scale=0.0))


def test_generate_rejects_tiny_output():
    spec = shapes.ShapeSpec("uvsphere", dict(segments=3, rings=2))
    with pytest.raises(ValueError, match="coarse"):
        shapes.generate(spec)


def test_icosphere_counts():
    for level in (0, 1, 2):
        mesh = shapes.icosphere(subdivisions=level)
        assert mesh.n_vertices == 10 * 4 ** level + 2
        assert mesh.is_closed()
        assert mesh.euler_characteristic() == 2


def test_icosphere_radius():
    mesh = shapes.icosphere(radius=2.5, subdivisions=1)
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 2.5,
                               rtol=1e-12)


def test_uvsphere_counts():
    mesh = shapes.uvsphere(segments=24, rings=12)
    assert mesh.n_vertices == 24 * 11 + 2
    assert mesh.is_closed()


def test_uvsphere_validation():
    with pytest.raises(ValueError):
        shapes.uvsphere(segments=2)


def test_torus_counts():
    mesh = shapes.torus(major_segments=20, minor_segments=10)
    assert mesh.n_vertices == 200
    assert mesh.n_faces == 400
    assert mesh.euler_characteristic() == 0


def test_torus_validation():
    with pytest.raises(ValueError):
        shapes.torus(major_radius=0.3, minor_radius=0.4)
    with pytest.raises(ValueError):
        shapes.torus(major_segments=2)


def test_spherocylinder_closed_weld():
    mesh = shapes.spherocylinder(height=1.0)
    assert mesh.is_closed()
    assert mesh.euler_characteristic() == 2
    # watertight weld: no duplicated vertex positions at the seams
    uniq = np.unique(np.round(mesh.vertices, 9), axis=0)
    assert uniq.shape[0] == mesh.n_vertices


def test_spherocylinder_height_zero_is_sphere():
    mesh = shapes.spherocylinder(radius=1.0, height=0.0)
    assert mesh.is_closed()
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0,
                               rtol=1e-9)


def test_spherocylinder_area_grows_with_height():
    areas = [face_areas(shapes.spherocylinder(height=h)).sum()
             for h in (0.0, 1.0, 2.0)]
    assert areas[0] < areas[1] < areas[2]
    # analytic: 4 pi r^2 + 2 pi r h
    np.testing.assert_allclose(areas[1], 4 * np.pi + 2 * np.pi, rtol=0.01)


def test_spherocylinder_validation():
    with pytest.raises(ValueError):
        shapes.spherocylinder(height=-1.0)
    with pytest.raises(ValueError):
        shapes.spherocylinder(cap_rings=1)


def test_plane_patch_counts():
    mesh = shapes.plane_patch(nx=4, ny=3)
    assert mesh.n_vertices == 5 * 4
    assert mesh.n_faces == 2 * 4 * 3
    assert not mesh.is_closed()


def test_bent_sheet_flat_matches_patch():
    flat = shapes.bent_sheet(width=2.0, height=1.0, nx=6, ny=3, angle=0.0)
    patch = shapes.plane_patch(width=2.0, height=1.0, nx=6, ny=3)
    # same grid up to the axis ordering used by the bend
    assert flat.n_vertices == patch.n_vertices
    np.testing.assert_allclose(sorted(face_areas(flat)),
                               sorted(face_areas(patch)), rtol=1e-12)


def test_bent_sheet_exact_isometry():
    flat = shapes.bent_sheet(nx=12, ny=6, angle=0.0)
    bent = shapes.bent_sheet(nx=12, ny=6, angle=np.pi / 2)

    def edge_lengths(mesh):
        e = mesh.edges
        return np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]],
                              axis=1)

    np.testing.assert_allclose(edge_lengths(bent), edge_lengths(flat),
                               rtol=1e-13)


def test_bent_sheet_angle_range():
    with pytest.raises(ValueError):
        shapes.bent_sheet(angle=-0.1)
    with pytest.raises(ValueError):
        shapes.bent_sheet(angle=2 * np.pi)


def test_random_rotation_orthonormal():
    R = shapes.random_rotation(7)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)
    # seeded
    np.testing.assert_array_equal(R, shapes.random_rotation(7))


def test_vertex_noise_amplitude():
    mesh = shapes.icosphere(subdivisions=2)
    sigma = 0.1 * shapes.mean_edge_length(mesh)
    noisy = shapes.vertex_noise(mesh, 0.1, seed=5)
    disp = np.linalg.norm(noisy.vertices - mesh.vertices, axis=1)
    # Normal-direction offsets drawn with standard deviation sigma: the rms
    # displacement estimates sigma, the std of the magnitudes does not.
    assert np.sqrt((disp ** 2).mean()) == pytest.approx(sigma, rel=0.2)
    assert shapes.vertex_noise(mesh, 0.1, seed=5).vertices.tobytes() \
        == noisy.vertices.tobytes()


def test_noise_commutes_with_scale():
    # Amplitude is relative to the mean edge length, so scaling before
    # noising with the same seed is exactly the scaled noisy mesh. The
    # classification dataset relies on this.
    base = shapes.generate(shapes.ShapeSpec(
        "torus", dict(major_segments=12, minor_segments=6),
        noise=0.005, noise_seed=9))
    scaled = shapes.generate(shapes.ShapeSpec(
        "torus", dict(major_segments=12, minor_segments=6),
        noise=0.005, noise_seed=9, scale=2.0))
    np.testing.assert_allclose(scaled.vertices, base.vertices * 2.0,
                               rtol=1e-13, atol=1e-13)


def test_permute_vertices_round_trip():
    mesh = shapes.icosphere(subdivisions=1)
    perm = shapes.random_permutation(mesh.n_vertices, seed=2)
    permuted = shapes.permute_vertices(mesh, perm)
    # old vertex i sits at new index perm[i]
    np.testing.assert_array_equal(permuted.vertices[perm], mesh.vertices)
    # faces describe the same surface
    assert permuted.is_closed()
    assert permuted.n_edges == mesh.n_edges
    np.testing.assert_allclose(sorted(face_areas(permuted)),
                               sorted(face_areas(mesh)), rtol=1e-12)


def test_vertex_normals_unit(icosphere3):
    normals = shapes.vertex_normals(icosphere3)
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0,
                               rtol=1e-12)
    # sphere normals point radially
    radial = icosphere3.vertices / np.linalg.norm(icosphere3.vertices,
                                                 axis=1)[:, None]
    assert (np.abs((normals * radial).sum(axis=1)) > 0.99).all()
