"""Monotone regression, classical MDS, and the SMACOF embedding."""

import numpy as np
import pytest

from sfmap.embedding import (classical_mds, mds_embed, spherical_angles,
                             _pairwise, _pava)


def test_pava_pools_violators():
    np.testing.assert_allclose(_pava([3.0, 1.0, 2.0]), [2.0, 2.0, 2.0])
    np.testing.assert_allclose(_pava([1.0, 3.0, 2.0]), [1.0, 2.5, 2.5])
    np.testing.assert_allclose(_pava([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_pava_output_monotone_mean_preserving(rng):
    y = rng.standard_normal(40)
    fit = _pava(y)
    assert (np.diff(fit) >= -1e-12).all()
    assert fit.mean() == pytest.approx(y.mean())
    # Projection onto the monotone cone never increases the misfit.
    assert ((fit - y) ** 2).sum() <= ((np.sort(y) - y) ** 2).sum() + 1e-12


def test_classical_mds_recovers_planted_points(rng):
    X = rng.standard_normal((12, 3))
    D = _pairwise(X)
    Y = classical_mds(D, 3)
    np.testing.assert_allclose(_pairwise(Y), D, atol=1e-9)


def test_classical_mds_deterministic_signs(rng):
    X = rng.standard_normal((8, 2))
    D = _pairwise(X)
    np.testing.assert_array_equal(classical_mds(D, 2), classical_mds(D, 2))
    anchors = np.abs(classical_mds(D, 2)).argmax(axis=0)
    vals = classical_mds(D, 2)[anchors, np.arange(2)]
    assert (vals > 0).all()


def test_classical_mds_pads_rank_deficiency():
    D = _pairwise(np.array([[0.0], [1.0], [2.0]]))
    Y = classical_mds(D, 5)
    assert Y.shape == (3, 5)
    # Collinear input: one informative axis, rounding dust after it, exact
    # zero padding beyond the available eigenvalues.
    np.testing.assert_allclose(Y[:, 1:], 0.0, atol=1e-6)
    np.testing.assert_array_equal(Y[:, 3:], 0.0)


def test_exact_two_dimensional_sets(rng):
    X = rng.standard_normal((10, 2)) * 2.0
    D = _pairwise(X)
    for mode in ("metric", "nonmetric"):
        emb = mds_embed(D, d=2, mode=mode, seed=0, restarts=4)
        assert emb.stress < 1e-6
        assert emb.points.shape == (10, 2)


def test_stress_monotone_every_run(rng):
    # A random symmetric dissimilarity matrix is deliberately non-Euclidean,
    # so the runs terminate by tolerance rather than at zero stress.
    n = 9
    raw = rng.uniform(0.5, 2.0, size=(n, n))
    D = (raw + raw.T) / 2.0
    np.fill_diagonal(D, 0.0)
    emb = mds_embed(D, d=2, mode="nonmetric", seed=3, restarts=6)
    assert len(emb.run_histories) == 6
    for history in emb.run_histories:
        assert (np.diff(history) <= 1e-12).all()
    assert emb.stress == min(h[-1] for h in emb.run_histories)


def test_zero_distances_short_circuit():
    emb = mds_embed(np.zeros((4, 4)), d=3)
    np.testing.assert_array_equal(emb.points, np.zeros((4, 3)))
    assert emb.stress == 0.0
    assert emb.run_histories == []


def test_embed_accepts_distance_matrix_object(rng):
    from sfmap.cluster import DistanceMatrix
    X = rng.standard_normal((6, 2))
    dm = DistanceMatrix(values=_pairwise(X), shape_ids=list("abcdef"))
    emb = mds_embed(dm, d=2, mode="metric", restarts=2)
    assert emb.stress < 1e-6


def test_embedding_validation(rng):
    with pytest.raises(ValueError, match="square"):
        mds_embed(np.zeros((3, 2)))
    asym = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError, match="symmetric"):
        mds_embed(asym)
    neg = np.array([[0.0, -1.0], [-1.0, 0.0]])
    with pytest.raises(ValueError, match="non-negative"):
        mds_embed(neg)
    ok = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError, match="mode"):
        mds_embed(ok, mode="fast")
    with pytest.raises(ValueError, match="dimension"):
        mds_embed(ok, d=0)


def test_permutation_of_input_relabels_output(rng):
    X = rng.standard_normal((8, 2))
    D = _pairwise(X)
    perm = rng.permutation(8)
    emb = mds_embed(D, d=2, mode="metric", restarts=1)
    emb_p = mds_embed(D[np.ix_(perm, perm)], d=2, mode="metric", restarts=1)
    # Distances, not coordinates, are the invariant content.
    np.testing.assert_allclose(_pairwise(emb.points)[np.ix_(perm, perm)],
                               _pairwise(emb_p.points), atol=1e-6)


def test_spherical_angles_ranges(rng):
    P = rng.standard_normal((20, 3))
    ang = spherical_angles(P)
    assert ang.shape == (20, 2)
    assert (np.abs(ang[:, 0]) <= np.pi).all()
    assert ((ang[:, 1] >= 0) & (ang[:, 1] <= np.pi)).all()
    with pytest.raises(ValueError, match="d = 3"):
        spherical_angles(rng.standard_normal((5, 2)))


def test_spherical_angles_equator_and_poles():
    pts = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    ang = spherical_angles(pts)
    assert ang[0, 1] == pytest.approx(np.pi / 2)
    assert ang[2, 1] == pytest.approx(0.0)
    assert ang[3, 1] == pytest.approx(np.pi)
